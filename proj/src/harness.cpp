#include "ligme/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "ligme/design.hpp"

namespace ligme {
namespace {

struct PreparedVariant {
  std::string name;
  LigmeOperator op;
  ConvexityCertificate certificate;
  double mu;
  MuPair mu_pair;
};

std::vector<Index> sample_kept(Index total, Index missing, Rng& rng) {
  std::vector<Index> idx(total);
  std::iota(idx.begin(), idx.end(), Index{1});
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(total - missing);
  std::sort(idx.begin(), idx.end());
  return idx;
}

Problem tv1d_problem(const LinOp& A, const Vector& y, Index n, double mu, double theta) {
  Problem p{A, y, make_diff_1d(n), LinOp::zero(n - 1, n - 1), mu, PenaltySpec::l1(n - 1)};
  if (theta > 0.0) {
    const Matrix L = p.L.to_dense();
    p.B = LinOp::dense(design_b(A.to_dense(), L, mu, theta, tilde_diff_1d(n)).B);
  }
  return p;
}

Problem deblur_problem(const LinOp& A, const Vector& y, Index n, double mu, double theta) {
  auto [dv, dh] = make_diff_2d(n);
  const Index l = n * (n - 1);
  PenaltySpec psi = PenaltySpec::separable({{1.0, PenaltySpec::l1(l)}, {1.0, PenaltySpec::l1(l)}});
  Problem p{A, y, vstack({dv, dh}), LinOp::zero(2 * l, 2 * l), mu, psi};
  if (theta > 0.0) {
    std::vector<DesignPart> parts{{dv.to_dense(), 1.0, theta, tilde_diff_v(n)},
                                  {dh.to_dense(), 1.0, theta, tilde_diff_h(n)}};
    p.B = LinOp::dense(design_b_multi(A.to_dense(), parts, mu, {0.5, 0.5}).B);
  }
  return p;
}

Problem completion_problem(const LinOp& A, const Vector& y, Index n, double mu, double theta) {
  const Index nn = n * n;
  Problem p{A, y, LinOp::identity(nn), LinOp::zero(nn, nn), mu, PenaltySpec::nuclear(n, n)};
  if (theta > 0.0) {
    p.B = LinOp::dense(
        design_b(A.to_dense(), Matrix::Identity(nn, nn), mu, theta, Matrix::Identity(nn, nn)).B);
  }
  return p;
}

// theta_tv enhances the two difference terms, theta_nuc the nuclear term.
Problem completion_tv_problem(const LinOp& A, const Vector& y, Index n, MuPair w, double theta_tv,
                              double theta_nuc) {
  auto [dv, dh] = make_diff_2d(n);
  const Index l = n * (n - 1);
  const Index nn = n * n;
  PenaltySpec psi = PenaltySpec::separable({{w.a, PenaltySpec::l1(l)},
                                            {w.a, PenaltySpec::l1(l)},
                                            {w.b, PenaltySpec::nuclear(n, n)}});
  Problem p{A, y, vstack({dv, dh, LinOp::identity(nn)}), LinOp::zero(2 * l + nn, 2 * l + nn), 1.0,
            psi};
  if (theta_tv > 0.0 || theta_nuc > 0.0) {
    std::vector<DesignPart> parts{{dv.to_dense(), w.a, theta_tv, tilde_diff_v(n)},
                                  {dh.to_dense(), w.a, theta_tv, tilde_diff_h(n)},
                                  {Matrix::Identity(nn, nn), w.b, theta_nuc, Matrix::Identity(nn, nn)}};
    p.B = LinOp::dense(design_b_multi(A.to_dense(), parts, 1.0, {1.0 / 3, 1.0 / 3, 1.0 / 3}).B);
  }
  return p;
}

}  // namespace

Scenario parse_scenario(std::string_view name) {
  if (name == "tv1d") return Scenario::Tv1d;
  if (name == "deblur2d") return Scenario::Deblur2d;
  if (name == "completion") return Scenario::Completion;
  if (name == "completion_tv") return Scenario::CompletionTv;
  throw std::invalid_argument("unknown scenario: " + std::string(name));
}

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::Tv1d: return "tv1d";
    case Scenario::Deblur2d: return "deblur2d";
    case Scenario::Completion: return "completion";
    case Scenario::CompletionTv: return "completion_tv";
  }
  return "?";
}

ExperimentSpec ExperimentSpec::defaults(Scenario s) {
  ExperimentSpec spec;
  spec.scenario = s;
  switch (s) {
    case Scenario::Tv1d:
      spec.n = 128;
      spec.m = 100;
      spec.snr_db = -5.0;
      spec.mu_convex = 60.0;
      spec.mu_ligme = 900.0;
      spec.iters = 15000;
      break;
    case Scenario::Deblur2d:
      spec.n = 16;
      spec.m = 16 * 16;
      spec.snr_db = 20.0;
      spec.mu_convex = 0.013;
      spec.mu_ligme = 0.03;
      spec.iters = 5000;
      break;
    case Scenario::Completion:
      spec.n = 16;
      spec.m = 64;
      spec.snr_db = 30.0;
      spec.mu_convex = 0.034;
      spec.mu_ligme = 0.1;
      spec.iters = 500;
      break;
    case Scenario::CompletionTv:
      spec.n = 16;
      spec.m = 64;
      spec.snr_db = 20.0;
      spec.mu_variants = {MuPair{0.015, 0.1}, MuPair{0.03, 0.15}, MuPair{0.015, 0.15},
                          MuPair{0.035, 0.1}};
      spec.iters = 1000;
      break;
  }
  return spec;
}

void ExperimentSpec::validate() const {
  if (n < 2) throw std::invalid_argument("ExperimentSpec: n must be >= 2");
  if (replications < 1) throw std::invalid_argument("ExperimentSpec: replications must be >= 1");
  if (iters < 1) throw std::invalid_argument("ExperimentSpec: iters must be >= 1");
  if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("ExperimentSpec: theta must lie in [0, 1]");
  if (!(kappa > 1.0)) throw std::invalid_argument("ExperimentSpec: kappa must exceed 1");
  switch (scenario) {
    case Scenario::Tv1d:
      if (m < 1) throw std::invalid_argument("ExperimentSpec: m must be positive");
      break;
    case Scenario::Completion:
    case Scenario::CompletionTv:
      if (m < 0 || m >= n * n) throw std::invalid_argument("ExperimentSpec: missing count out of range");
      break;
    case Scenario::Deblur2d:
      break;
  }
  if (scenario == Scenario::CompletionTv) {
    for (const auto& w : mu_variants)
      if (!(w.a > 0.0 && w.b > 0.0)) throw std::invalid_argument("ExperimentSpec: weights must be positive");
  } else if (!(mu_convex > 0.0 && mu_ligme > 0.0)) {
    throw std::invalid_argument("ExperimentSpec: weights must be positive");
  }
}

Rng make_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x4c69474du};
  return Rng(seq);
}

Vector noise_for_snr(const Vector& reference, Index dim, double snr_db, Rng& rng) {
  const double ref = reference.norm();
  if (!(ref > 0.0)) throw std::invalid_argument("noise_for_snr: reference signal is zero");
  std::normal_distribution<double> normal;
  Vector e(dim);
  for (Index i = 0; i < dim; ++i) e[i] = normal(rng);
  const double target = ref * std::pow(10.0, -snr_db / 20.0);
  return e * (target / e.norm());
}

Vector add_noise_snr(const Vector& clean, double snr_db, Rng& rng) {
  return clean + noise_for_snr(clean, clean.size(), snr_db, rng);
}

// Three jumps at fixed fractions of the length.
Vector piecewise_signal(Index n) {
  static constexpr std::array<std::pair<double, double>, 4> kSegments{{
      {0.00, 0.0}, {0.20, 2.5}, {0.45, -1.0}, {0.70, 1.5}}};
  Vector x(n);
  for (Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n);
    double level = 0.0;
    for (const auto& [start, value] : kSegments)
      if (t >= start) level = value;
    x[i] = level;
  }
  return x;
}

// Background 0.25, a 0.75 rectangle and an overlapping 0.5 rectangle.
Vector piecewise_image(Index n) {
  Matrix img = Matrix::Constant(n, n, 0.25);
  auto at = [n](double f) { return static_cast<Index>(std::lround(f * static_cast<double>(n))); };
  img.block(at(0.125), at(0.1875), at(0.4375), at(0.5)).setConstant(0.75);
  img.block(at(0.5), at(0.4375), at(0.375), at(0.4375)).setConstant(0.5);
  return Eigen::Map<const Vector>(img.data(), img.size());
}

// 0.25 * (1 1^T + 1_R1 1_C1^T + 1_R2 1_C2^T): piecewise constant with levels
// {0.25, 0.5, 0.75, 1.0} and rank 3.
Vector low_rank_image(Index n) {
  auto indicator = [n](double from, double to) {
    Vector v = Vector::Zero(n);
    const Index a = static_cast<Index>(std::lround(from * static_cast<double>(n)));
    const Index b = static_cast<Index>(std::lround(to * static_cast<double>(n)));
    v.segment(a, b - a).setOnes();
    return v;
  };
  const Vector ones = Vector::Ones(n);
  Matrix img = 0.25 * ones * ones.transpose();
  img += 0.25 * indicator(0.125, 0.625) * indicator(0.125, 0.75).transpose();
  img += 0.25 * indicator(0.5, 0.875) * indicator(0.5625, 0.9375).transpose();
  return Eigen::Map<const Vector>(img.data(), img.size());
}

int num_rank(const Vector& singular_values, double threshold) {
  return static_cast<int>((singular_values.array() > threshold).count());
}

ScenarioInstance gen_scenario(const ExperimentSpec& spec, Rng& rng) {
  spec.validate();
  ScenarioInstance inst;
  const Index n = spec.n;
  switch (spec.scenario) {
    case Scenario::Tv1d: {
      std::normal_distribution<double> normal;
      Matrix a(spec.m, n);
      for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < spec.m; ++i) a(i, j) = normal(rng);
      inst.A = LinOp::dense(std::move(a));
      inst.ground_truth = piecewise_signal(n);
      break;
    }
    case Scenario::Deblur2d:
      inst.A = make_blur(n);
      inst.ground_truth = piecewise_image(n);
      break;
    case Scenario::Completion:
    case Scenario::CompletionTv:
      inst.kept = sample_kept(n * n, spec.m, rng);
      inst.A = make_mask(n * n, inst.kept);
      inst.ground_truth = low_rank_image(n);
      break;
  }
  inst.clean_observation = inst.A.apply(inst.ground_truth);
  const Vector y =
      inst.clean_observation + noise_for_snr(inst.ground_truth, inst.A.rows(), spec.snr_db, rng);

  switch (spec.scenario) {
    case Scenario::Tv1d:
      inst.variants.push_back({"tv", tv1d_problem(inst.A, y, n, spec.mu_convex, 0.0)});
      inst.variants.push_back({"ligme", tv1d_problem(inst.A, y, n, spec.mu_ligme, spec.theta)});
      break;
    case Scenario::Deblur2d:
      inst.variants.push_back({"tv", deblur_problem(inst.A, y, n, spec.mu_convex, 0.0)});
      inst.variants.push_back({"ligme", deblur_problem(inst.A, y, n, spec.mu_ligme, spec.theta)});
      break;
    case Scenario::Completion:
      inst.variants.push_back({"nuclear", completion_problem(inst.A, y, n, spec.mu_convex, 0.0)});
      inst.variants.push_back({"ligme", completion_problem(inst.A, y, n, spec.mu_ligme, spec.theta)});
      break;
    case Scenario::CompletionTv: {
      const double t = spec.theta;
      const auto& w = spec.mu_variants;
      inst.variants.push_back({"psi_1", completion_tv_problem(inst.A, y, n, w[0], 0.0, 0.0)});
      inst.variants.push_back({"psi_2", completion_tv_problem(inst.A, y, n, w[1], t, 0.0)});
      inst.variants.push_back({"psi_3", completion_tv_problem(inst.A, y, n, w[2], 0.0, t)});
      inst.variants.push_back({"psi_4", completion_tv_problem(inst.A, y, n, w[3], t, t)});
      break;
    }
  }
  return inst;
}

bool ExperimentResult::certificates_hold() const {
  return std::all_of(variants.begin(), variants.end(),
                     [](const RunReport& r) { return r.certificate.holds; });
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  Rng structure_rng = make_stream(spec.seed, 0);
  const ScenarioInstance inst = gen_scenario(spec, structure_rng);
  const bool completion =
      spec.scenario == Scenario::Completion || spec.scenario == Scenario::CompletionTv;

  SolverConfig cfg;
  cfg.kappa = spec.kappa;
  cfg.max_iter = spec.iters;
  cfg.p_residual_tol = 0.0;

  std::vector<PreparedVariant> prepared;
  for (std::size_t i = 0; i < inst.variants.size(); ++i) {
    const auto& v = inst.variants[i];
    MuPair pair{v.problem.mu, 0.0};
    if (spec.scenario == Scenario::CompletionTv) pair = spec.mu_variants[i];
    prepared.push_back(
        {v.name, LigmeOperator(v.problem, cfg), certify_convexity(v.problem), v.problem.mu, pair});
  }
  cfg.verify_metric = false;

  const std::size_t reps = static_cast<std::size_t>(spec.replications);
  const std::size_t nv = prepared.size();
  // results[rep][variant]
  std::vector<std::vector<SolveReport>> results(reps, std::vector<SolveReport>(nv));

  auto run_rep = [&](std::size_t r) {
    Rng noise_rng = make_stream(spec.seed, r + 1);
    const Vector y = inst.clean_observation +
                     noise_for_snr(inst.ground_truth, inst.A.rows(), spec.snr_db, noise_rng);
    for (std::size_t v = 0; v < nv; ++v) {
      results[r][v] = solve(prepared[v].op.with_observation(y), cfg, std::nullopt, inst.ground_truth);
    }
  };

  unsigned workers = spec.threads > 0 ? static_cast<unsigned>(spec.threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(reps));
  if (workers <= 1) {
    for (std::size_t r = 0; r < reps; ++r) run_rep(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t r = next++; r < reps; r = next++) run_rep(r);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  ExperimentResult out;
  out.scenario = spec.scenario;
  out.ground_truth = inst.ground_truth;
  if (completion) out.ground_truth_singular_values = singular_values_of(inst.ground_truth, spec.n, spec.n);

  for (std::size_t v = 0; v < nv; ++v) {
    RunReport rep;
    rep.name = prepared[v].name;
    rep.certificate = prepared[v].certificate;
    rep.mu = prepared[v].mu;
    rep.mu_pair = prepared[v].mu_pair;
    rep.se_trace.assign(static_cast<std::size_t>(spec.iters), 0.0);
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& se = results[r][v].se;
      for (std::size_t k = 0; k < se.size(); ++k) rep.se_trace[k] += se[k];
      rep.final_se.push_back(se.back());
      if (completion) {
        rep.num_ranks.push_back(num_rank(singular_values_of(results[r][v].x, spec.n, spec.n)));
      }
    }
    for (double& s : rep.se_trace) s /= static_cast<double>(reps);
    rep.mse = std::accumulate(rep.final_se.begin(), rep.final_se.end(), 0.0) / static_cast<double>(reps);
    rep.final_x = results[0][v].x;
    if (completion) {
      rep.singular_values = singular_values_of(rep.final_x, spec.n, spec.n);
      rep.num_rank = num_rank(*rep.singular_values);
    }
    out.variants.push_back(std::move(rep));
  }
  return out;
}

std::vector<SweepRow> sweep_mu(const ExperimentSpec& spec, const std::vector<MuPair>& grid) {
  if (grid.empty()) throw std::invalid_argument("sweep_mu: empty grid");
  std::vector<SweepRow> rows;
  for (const auto& point : grid) {
    ExperimentSpec s = spec;
    if (spec.scenario == Scenario::CompletionTv) {
      s.mu_variants.fill(point);
    } else {
      s.mu_convex = point.a;
      s.mu_ligme = point.a;
    }
    const ExperimentResult res = run_experiment(s);
    SweepRow row;
    row.mu = point.a;
    row.mu_pair = point;
    for (const auto& v : res.variants) row.mse.push_back(v.mse);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ligme
