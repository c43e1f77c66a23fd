#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "ligme/penalty.hpp"
#include "ligme/solver.hpp"

namespace ligme {

using Rng = std::mt19937_64;

enum class Scenario { Tv1d, Deblur2d, Completion, CompletionTv };

/// Throws std::invalid_argument for unknown names.
Scenario parse_scenario(std::string_view name);
std::string_view to_string(Scenario s);

/// Weights (mu_a, mu_b) of the low-rank-and-smooth completion penalty:
/// mu_a on each difference term, mu_b on the nuclear term.
struct MuPair {
  double a = 0.0;
  double b = 0.0;
};

struct ExperimentSpec {
  Scenario scenario = Scenario::Tv1d;
  Index n = 128;  // signal length, or image side
  Index m = 100;  // measurements (tv1d) or number of missing entries (completion)
  double snr_db = -5.0;
  double mu_convex = 60.0;
  double mu_ligme = 900.0;
  /// completion_tv only: weights for the four penalty variants in the order
  /// (convex, enhanced TV, enhanced nuclear, both enhanced).
  std::array<MuPair, 4> mu_variants{};
  double theta = 0.99;
  double kappa = 1.001;
  std::uint64_t seed = 1;
  int replications = 20;
  int iters = 15000;
  /// Worker threads for replications; 0 picks hardware concurrency.
  int threads = 0;

  /// Reference-scale defaults for each scenario.
  static ExperimentSpec defaults(Scenario s);
  /// Throws std::invalid_argument on non-positive dimensions or counts.
  void validate() const;
};

struct Variant {
  std::string name;
  Problem problem;
};

struct ScenarioInstance {
  /// variants.front() is the convex baseline (B = 0); variants.back() is the
  /// fully enhanced penalty.
  std::vector<Variant> variants;
  Vector ground_truth;
  LinOp A;
  /// Noise-free observation A x*.
  Vector clean_observation;
  /// 1-based kept indices for mask scenarios.
  std::vector<Index> kept;
};

/// Draws Gaussian noise of length `dim` rescaled so that
/// 10 log10(||reference||^2 / ||noise||^2) equals snr_db exactly.
/// Throws std::invalid_argument for a zero reference.
Vector noise_for_snr(const Vector& reference, Index dim, double snr_db, Rng& rng);

/// clean + noise_for_snr(clean, clean.size(), snr_db, rng).
Vector add_noise_snr(const Vector& clean, double snr_db, Rng& rng);

/// Ground truths are generated by fixed recipes (documented in the source);
/// rng drives the random operator, the missing-entry set, and the noise of y.
ScenarioInstance gen_scenario(const ExperimentSpec& spec, Rng& rng);

/// Piecewise-constant test signal of length n with a handful of jumps.
Vector piecewise_signal(Index n);
/// Piecewise-constant n x n image with levels {0.25, 0.5, 0.75}, vectorized column-major.
Vector piecewise_image(Index n);
/// Rank-3 n x n matrix built from three outer products of indicator vectors, vectorized.
Vector low_rank_image(Index n);

/// Number of singular values above `threshold`.
int num_rank(const Vector& singular_values, double threshold = 1e-8);

struct RunReport {
  std::string name;
  /// Mean over replications of ||x_k - x*||^2, k = 1..iters.
  std::vector<double> se_trace;
  /// Final estimate of replication 0.
  Vector final_x;
  std::vector<double> final_se;
  double mse = 0.0;
  /// Completion scenarios only (replication 0).
  std::optional<Vector> singular_values;
  std::optional<int> num_rank;
  /// Completion scenarios only, one per replication.
  std::vector<int> num_ranks;
  ConvexityCertificate certificate;
  double mu = 0.0;
  MuPair mu_pair;
};

struct ExperimentResult {
  Scenario scenario = Scenario::Tv1d;
  std::vector<RunReport> variants;
  Vector ground_truth;
  std::optional<Vector> ground_truth_singular_values;

  const RunReport& convex() const { return variants.front(); }
  const RunReport& ligme() const { return variants.back(); }
  /// True when every variant's convexity certificate holds.
  bool certificates_hold() const;
};

/// Runs every variant for spec.replications noise realizations (replications
/// run in parallel with streams derived from (seed, index)), spec.iters
/// iterations each, from the zero initial state.
ExperimentResult run_experiment(const ExperimentSpec& spec);

struct SweepRow {
  double mu = 0.0;
  MuPair mu_pair;
  std::vector<double> mse;  // one entry per variant
};

/// run_experiment for each grid point, all variants sharing that weight.
/// For completion_tv a grid point is (mu_a, mu_b); otherwise only `a` is used.
/// Throws std::invalid_argument on an empty grid.
std::vector<SweepRow> sweep_mu(const ExperimentSpec& spec, const std::vector<MuPair>& grid);

/// Deterministic generator for stream `index` of experiment `seed`.
Rng make_stream(std::uint64_t seed, std::uint64_t index);

}  // namespace ligme
