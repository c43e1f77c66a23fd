// ligme: experiment / sweep / design-b / solve front end.
//
// Exit codes: 0 success, 1 usage or runtime error, 2 convexity certificate
// failure (suppressed by --force).
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ligme/design.hpp"
#include "ligme/harness.hpp"
#include "ligme/matrix_io.hpp"
#include "ligme/solver.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace ligme;

namespace {

constexpr int kCertificateExit = 2;

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}

// "a" or "a:b" entries separated by commas.
std::vector<MuPair> parse_grid(const std::string& text) {
  std::vector<MuPair> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    MuPair p;
    p.a = std::stod(item.substr(0, colon));
    p.b = colon == std::string::npos ? 0.0 : std::stod(item.substr(colon + 1));
    out.push_back(p);
  }
  if (out.empty()) throw std::invalid_argument("empty grid");
  return out;
}

// Shared options of `experiment` and `sweep`.
struct ExperimentOpts {
  std::string scenario;
  std::optional<double> mu, mu_ligme, theta, snr, kappa;
  std::optional<std::string> mu_pairs;
  std::optional<std::uint64_t> seed;
  std::optional<int> iters, reps, threads;
  std::optional<long long> n;
  fs::path out = ".";
  bool force = false;

  void attach(CLI::App* app) {
    app->add_option("scenario", scenario, "tv1d | deblur2d | completion | completion_tv")->required();
    app->add_option("--theta", theta, "enhancement level in [0, 1]");
    app->add_option("--snr", snr, "SNR in dB");
    app->add_option("--kappa", kappa, "step-size parameter (> 1)");
    app->add_option("--seed", seed, "experiment seed");
    app->add_option("--iters", iters, "iterations per run");
    app->add_option("--reps", reps, "noise replications");
    app->add_option("--threads", threads, "worker threads (0 = all cores)");
    app->add_option("--n", n, "signal length or image side");
    app->add_option("--out", out, "output directory");
    app->add_flag("--force", force, "write outputs even if a certificate fails");
  }

  ExperimentSpec spec() const {
    ExperimentSpec s = ExperimentSpec::defaults(parse_scenario(scenario));
    if (theta) s.theta = *theta;
    if (snr) s.snr_db = *snr;
    if (kappa) s.kappa = *kappa;
    if (seed) s.seed = *seed;
    if (iters) s.iters = *iters;
    if (reps) s.replications = *reps;
    if (threads) s.threads = *threads;
    if (n) {
      s.n = *n;
      if (s.scenario == Scenario::Completion || s.scenario == Scenario::CompletionTv) s.m = s.n * s.n / 4;
    }
    if (mu) s.mu_convex = *mu;
    if (mu_ligme) s.mu_ligme = *mu_ligme;
    if (mu_pairs) {
      const auto g = parse_grid(*mu_pairs);
      if (g.size() != 4) throw std::invalid_argument("--mu-pairs needs four a:b entries");
      for (std::size_t i = 0; i < 4; ++i) s.mu_variants[i] = g[i];
    }
    s.validate();
    return s;
  }
};

void write_estimate(const fs::path& p, const ExperimentSpec& spec, const Vector& x) {
  if (spec.scenario == Scenario::Tv1d) {
    write_matrix(p, x);
  } else {
    write_matrix(p, Eigen::Map<const Matrix>(x.data(), spec.n, spec.n));
  }
}

int run_experiment_cmd(const ExperimentOpts& o) {
  const ExperimentSpec spec = o.spec();
  const ExperimentResult r = run_experiment(spec);
  for (const auto& v : r.variants) {
    std::printf("%-8s mse %.6g  min_eig %.3g  %s\n", v.name.c_str(), v.mse, v.certificate.min_eig,
                v.certificate.holds ? "certified" : "NOT CERTIFIED");
  }
  if (!r.certificates_hold() && !o.force) {
    std::fprintf(stderr, "convexity certificate failed; rerun with --force to write outputs\n");
    return kCertificateExit;
  }
  fs::create_directories(o.out);

  {
    auto out = open_out(o.out / "trace.csv");
    out << "iter";
    for (const auto& v : r.variants) out << ",se_" << v.name;
    out << "\n";
    for (int k = 0; k < spec.iters; ++k) {
      out << k + 1;
      for (const auto& v : r.variants) out << "," << v.se_trace[static_cast<std::size_t>(k)];
      out << "\n";
    }
  }
  {
    auto out = open_out(o.out / "mse.csv");
    out << "variant,mu,mu_a,mu_b,mse,min_eig,certified\n";
    for (const auto& v : r.variants)
      out << v.name << "," << v.mu << "," << v.mu_pair.a << "," << v.mu_pair.b << "," << v.mse << ","
          << v.certificate.min_eig << "," << (v.certificate.holds ? 1 : 0) << "\n";
  }
  if (r.ground_truth_singular_values) {
    auto out = open_out(o.out / "singvals.csv");
    out << "index,ground_truth";
    for (const auto& v : r.variants) out << "," << v.name;
    out << "\n";
    for (Index i = 0; i < r.ground_truth_singular_values->size(); ++i) {
      out << i + 1 << "," << (*r.ground_truth_singular_values)(i);
      for (const auto& v : r.variants) out << "," << (*v.singular_values)(i);
      out << "\n";
    }
    auto ranks = open_out(o.out / "num_rank.csv");
    ranks << "variant,replication,num_rank\n";
    for (const auto& v : r.variants)
      for (std::size_t i = 0; i < v.num_ranks.size(); ++i) ranks << v.name << "," << i << "," << v.num_ranks[i] << "\n";
  }
  write_estimate(o.out / "estimate.mat.txt", spec, r.ligme().final_x);
  for (const auto& v : r.variants) write_estimate(o.out / ("estimate_" + v.name + ".mat.txt"), spec, v.final_x);
  write_estimate(o.out / "ground_truth.mat.txt", spec, r.ground_truth);
  return 0;
}

int run_sweep_cmd(const ExperimentOpts& o, const std::string& grid_text) {
  const ExperimentSpec spec = o.spec();
  const auto rows = sweep_mu(spec, parse_grid(grid_text));
  fs::create_directories(o.out);
  auto out = open_out(o.out / "mse.csv");
  out << "mu,mu_a,mu_b";
  // variant names come from the scenario
  Rng rng = make_stream(spec.seed, 0);
  ExperimentSpec probe = spec;
  probe.replications = 1;
  probe.iters = 1;
  std::vector<std::string> names;
  for (const auto& v : gen_scenario(probe, rng).variants) names.push_back(v.name);
  for (const auto& n : names) out << ",mse_" << n;
  out << "\n";
  for (const auto& r : rows) {
    out << r.mu << "," << r.mu_pair.a << "," << r.mu_pair.b;
    for (double m : r.mse) out << "," << m;
    out << "\n";
    std::printf("mu %-10g", r.mu);
    for (std::size_t i = 0; i < r.mse.size(); ++i) std::printf("  %s %.6g", names[i].c_str(), r.mse[i]);
    std::printf("\n");
  }
  return 0;
}

int run_design_cmd(const fs::path& a_path, const fs::path& l_path, double mu, double theta,
                   const std::optional<fs::path>& tilde_path, const fs::path& out_dir, bool force) {
  const Matrix A = read_matrix(a_path);
  const Matrix L = read_matrix(l_path);
  std::optional<Matrix> tilde;
  if (tilde_path) tilde = read_matrix(*tilde_path);
  const BDesign d = design_b(A, L, mu, theta, tilde);
  const Problem p{LinOp::dense(A), Vector::Zero(A.rows()), LinOp::dense(L), LinOp::dense(d.B), mu,
                  PenaltySpec::l1(L.rows())};
  const ConvexityCertificate cert = certify_convexity(p);

  json report = {{"mu", mu},
                 {"theta", theta},
                 {"min_eig", cert.min_eig},
                 {"tolerance", cert.tolerance},
                 {"holds", cert.holds},
                 {"spectrum", std::vector<double>(d.spectrum.data(), d.spectrum.data() + d.spectrum.size())}};
  std::printf("min_eig %.6g  %s\n", cert.min_eig, cert.holds ? "certified" : "NOT CERTIFIED");
  if (!cert.holds && !force) return kCertificateExit;
  fs::create_directories(out_dir);
  write_matrix(out_dir / "B.mat.txt", d.B);
  write_matrix(out_dir / "tilde_L.mat.txt", d.tilde_L);
  open_out(out_dir / "certificate.json") << report.dump(2) << "\n";
  return 0;
}

PenaltySpec penalty_from_json(const json& j, Index len) {
  const std::string kind = j.value("kind", "l1");
  if (kind == "l1") return PenaltySpec::l1(len);
  if (kind == "nuclear") {
    const Index r = j.at("rows").get<Index>(), c = j.at("cols").get<Index>();
    return PenaltySpec::nuclear(r, c);
  }
  if (kind == "separable") {
    std::vector<PenaltySpec::Part> parts;
    Index used = 0;
    for (const auto& part : j.at("parts")) {
      const Index plen = part.value("length", Index{0});
      parts.push_back({part.value("weight", 1.0), penalty_from_json(part, plen)});
      used += parts.back().spec.total_len();
    }
    if (used != len) throw std::invalid_argument("penalty parts do not cover L's rows");
    return PenaltySpec::separable(std::move(parts));
  }
  throw std::invalid_argument("unknown penalty kind '" + kind + "'");
}

// Config keys: A, y (required paths); L, B, ground_truth (optional paths);
// mu, kappa, tol, max_iter, relaxation, objective_every; penalty object.
// Relative paths resolve against the config file's directory.
int run_solve_cmd(const fs::path& cfg_path, const fs::path& out_dir, bool force) {
  std::ifstream in(cfg_path);
  if (!in) throw std::runtime_error("cannot open " + cfg_path.string());
  const json cfg = json::parse(in);
  const fs::path base = cfg_path.parent_path();
  auto resolve = [&](const std::string& key) { return base / cfg.at(key).get<std::string>(); };

  const Matrix A = read_matrix(resolve("A"));
  const Vector y = read_vector(resolve("y"));
  const LinOp L = cfg.contains("L") ? LinOp::dense(read_matrix(resolve("L"))) : LinOp::identity(A.cols());
  const LinOp B = cfg.contains("B") ? LinOp::dense(read_matrix(resolve("B"))) : LinOp::zero(L.rows(), L.rows());
  Problem p{LinOp::dense(A), y, L, B, cfg.value("mu", 1.0),
            penalty_from_json(cfg.value("penalty", json::object()), L.rows())};
  p.validate();

  SolverConfig sc;
  sc.kappa = cfg.value("kappa", sc.kappa);
  sc.p_residual_tol = cfg.value("tol", sc.p_residual_tol);
  sc.max_iter = cfg.value("max_iter", sc.max_iter);
  sc.relaxation = cfg.value("relaxation", sc.relaxation);
  sc.objective_every = cfg.value("objective_every", 10);
  std::optional<Vector> gt;
  if (cfg.contains("ground_truth")) gt = read_vector(resolve("ground_truth"));

  if (p.A.cols() <= 4096) {
    const ConvexityCertificate cert = certify_convexity(p);
    if (!cert.holds && !force) {
      std::fprintf(stderr, "convexity certificate failed (min_eig %.3g); rerun with --force\n", cert.min_eig);
      return kCertificateExit;
    }
  }
  const SolveReport r = solve(p, sc, std::nullopt, gt);
  std::printf("iterations %d  converged %s  p_residual %.3g  min_eig %.3g  %s\n", r.iterations,
              r.converged ? "yes" : "no", r.p_residual.empty() ? 0.0 : r.p_residual.back(), r.certificate.min_eig,
              r.certificate.holds ? "certified" : "NOT CERTIFIED");

  fs::create_directories(out_dir);
  write_matrix(out_dir / "x.mat.txt", r.x);
  auto out = open_out(out_dir / "trace.csv");
  out << "iter,p_residual,objective" << (gt ? ",se" : "") << "\n";
  std::size_t next_obj = 0;
  for (int k = 1; k <= r.iterations; ++k) {
    out << k << "," << r.p_residual[static_cast<std::size_t>(k - 1)] << ",";
    if (next_obj < r.objective.size() && r.objective[next_obj].first == k) out << r.objective[next_obj++].second;
    if (gt) out << "," << r.se[static_cast<std::size_t>(k - 1)];
    out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LiGME-regularized least squares: experiments, B design, and solver"};
  app.require_subcommand(1);

  ExperimentOpts exp_opts;
  auto* exp = app.add_subcommand("experiment", "run a reproduction scenario");
  exp_opts.attach(exp);
  exp->add_option("--mu", exp_opts.mu, "weight of the convex baseline");
  exp->add_option("--mu-ligme", exp_opts.mu_ligme, "weight of the enhanced penalty");
  exp->add_option("--mu-pairs", exp_opts.mu_pairs, "completion_tv: four a:b pairs, comma separated");

  ExperimentOpts sweep_opts;
  std::string grid;
  auto* sweep = app.add_subcommand("sweep", "MSE versus mu");
  sweep_opts.attach(sweep);
  sweep->add_option("--grid", grid, "comma-separated mu values (a:b pairs for completion_tv)")->required();

  fs::path a_path, l_path, design_out = ".";
  std::optional<fs::path> tilde_path;
  double d_mu = 1.0, d_theta = 0.99;
  bool d_force = false;
  auto* design = app.add_subcommand("design-b", "design B for a given (A, L, mu, theta)");
  design->add_option("--A", a_path, "matrix file for A")->required()->check(CLI::ExistingFile);
  design->add_option("--L", l_path, "matrix file for L")->required()->check(CLI::ExistingFile);
  design->add_option("--mu", d_mu, "regularization weight")->check(CLI::PositiveNumber);
  design->add_option("--theta", d_theta, "enhancement level in [0, 1]")->check(CLI::Range(0.0, 1.0));
  design->add_option("--tilde-L", tilde_path, "explicit nonsingular completion of L")->check(CLI::ExistingFile);
  design->add_option("--out", design_out, "output directory");
  design->add_flag("--force", d_force, "write outputs even if the certificate fails");

  fs::path cfg_path, solve_out = ".";
  bool s_force = false;
  auto* solve_cmd = app.add_subcommand("solve", "run the solver on matrices from files");
  solve_cmd->add_option("config", cfg_path, "JSON config")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--out", solve_out, "output directory");
  solve_cmd->add_flag("--force", s_force, "write outputs even if the certificate fails");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*exp) return run_experiment_cmd(exp_opts);
    if (*sweep) return run_sweep_cmd(sweep_opts, grid);
    if (*design) return run_design_cmd(a_path, l_path, d_mu, d_theta, tilde_path, design_out, d_force);
    if (*solve_cmd) return run_solve_cmd(cfg_path, solve_out, s_force);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
