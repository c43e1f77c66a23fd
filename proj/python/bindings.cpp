#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ligme/design.hpp"
#include "ligme/harness.hpp"
#include "ligme/solver.hpp"

namespace py = pybind11;
using namespace ligme;

namespace {

// Accept either a LinOp or anything convertible to a dense matrix.
LinOp as_linop(const py::object& o) {
  if (py::isinstance<LinOp>(o)) return o.cast<LinOp>();
  return LinOp::dense(o.cast<Matrix>());
}

py::dict report_to_dict(const SolveReport& r) {
  py::dict d;
  d["x"] = r.x;
  d["v"] = r.final_state.v;
  d["w"] = r.final_state.w;
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  d["sigma"] = r.sigma;
  d["tau"] = r.tau;
  d["p_residual"] = r.p_residual;
  d["objective"] = r.objective;
  d["se"] = r.se;
  d["certificate"] = r.certificate;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ligme, m) {
  m.doc() = "LiGME-regularized least squares: operators, proxes, B design, solver, experiments.";

  py::class_<LinOp>(m, "LinOp")
      .def_property_readonly("rows", &LinOp::rows)
      .def_property_readonly("cols", &LinOp::cols)
      .def_property_readonly("shape", [](const LinOp& op) { return py::make_tuple(op.rows(), op.cols()); })
      .def("apply", &LinOp::apply, py::arg("x"))
      .def("adjoint_apply", &LinOp::adjoint_apply, py::arg("y"))
      .def("to_dense", &LinOp::to_dense)
      .def("gram", &LinOp::gram)
      .def("is_zero", &LinOp::is_zero)
      .def_static("dense", &LinOp::dense, py::arg("matrix"))
      .def_static("identity", &LinOp::identity, py::arg("n"))
      .def_static("zero", &LinOp::zero, py::arg("rows"), py::arg("cols"))
      .def("__repr__", [](const LinOp& op) {
        return "<LinOp " + std::to_string(op.rows()) + "x" + std::to_string(op.cols()) + ">";
      });

  m.def("make_diff_1d", &make_diff_1d, py::arg("n"));
  m.def("make_diff_2d", &make_diff_2d, py::arg("n"), "Returns (D_V, D_H).");
  m.def("make_blur", &make_blur, py::arg("n"));
  m.def("blur_factor", &blur_factor, py::arg("n"));
  m.def(
      "make_mask",
      [](Index n, const std::vector<Index>& kept) { return make_mask(n, kept); }, py::arg("n"),
      py::arg("kept"), "Diagonal selector keeping the 1-based indices in `kept`.");
  m.def("vstack", &vstack, py::arg("ops"));
  m.def("block_diag", &block_diag, py::arg("blocks"));
  m.def(
      "op_norm",
      [](const py::object& op, double tol, int max_iter) {
        const auto r = op_norm(as_linop(op), tol, max_iter);
        return py::make_tuple(r.value, r.converged, r.iterations);
      },
      py::arg("op"), py::arg("tol") = 1e-9, py::arg("max_iter") = 10000,
      "Power-iteration spectral norm; returns (value, converged, iterations).");

  py::class_<PenaltySpec>(m, "PenaltySpec")
      .def_static("l1", &PenaltySpec::l1, py::arg("n"))
      .def_static("nuclear", &PenaltySpec::nuclear, py::arg("rows"), py::arg("cols"))
      .def_static(
          "separable",
          [](const std::vector<std::pair<double, PenaltySpec>>& parts) {
            std::vector<PenaltySpec::Part> p;
            for (const auto& [w, s] : parts) p.push_back({w, s});
            return PenaltySpec::separable(std::move(p));
          },
          py::arg("parts"), "parts: list of (weight, PenaltySpec).")
      .def_property_readonly("total_len", &PenaltySpec::total_len);

  m.def("eval_penalty", &eval, py::arg("spec"), py::arg("z"));
  m.def("prox", &prox, py::arg("spec"), py::arg("z"), py::arg("gamma"));
  m.def("prox_conjugate", &prox_conjugate, py::arg("spec"), py::arg("z"));
  m.def("moreau_envelope", &moreau_envelope, py::arg("spec"), py::arg("x"), py::arg("gamma"));
  m.def("moreau_gradient", &moreau_gradient, py::arg("spec"), py::arg("x"), py::arg("gamma"));
  m.def("soft_threshold", &soft_threshold, py::arg("z"), py::arg("t"));

  py::class_<ConvexityCertificate>(m, "ConvexityCertificate")
      .def_readonly("min_eig", &ConvexityCertificate::min_eig)
      .def_readonly("holds", &ConvexityCertificate::holds)
      .def_readonly("tolerance", &ConvexityCertificate::tolerance)
      .def("__repr__", [](const ConvexityCertificate& c) {
        return "<ConvexityCertificate min_eig=" + std::to_string(c.min_eig) + (c.holds ? " holds>" : " fails>");
      });

  py::class_<Problem>(m, "Problem")
      .def(py::init([](const py::object& A, const Vector& y, const py::object& L, const py::object& B, double mu,
                       const PenaltySpec& psi) {
             Problem p{as_linop(A), y, as_linop(L), as_linop(B), mu, psi};
             p.validate();
             return p;
           }),
           py::arg("A"), py::arg("y"), py::arg("L"), py::arg("B"), py::arg("mu"), py::arg("psi"))
      .def_readwrite("A", &Problem::A)
      .def_readwrite("y", &Problem::y)
      .def_readwrite("L", &Problem::L)
      .def_readwrite("B", &Problem::B)
      .def_readwrite("mu", &Problem::mu)
      .def_readwrite("psi", &Problem::psi);

  m.def(
      "gme_value",
      [](const PenaltySpec& psi, const py::object& B, const Vector& z, double tol, int max_iter) {
        const auto g = gme_value(psi, as_linop(B), z, InnerSolveCfg{tol, max_iter});
        return py::make_tuple(g.value, g.converged);
      },
      py::arg("psi"), py::arg("B"), py::arg("z"), py::arg("tol") = 1e-10, py::arg("max_iter") = 100000,
      "Returns (value, converged).");
  m.def(
      "objective", [](const Problem& p, const Vector& x) { return objective(p, x).value; }, py::arg("problem"),
      py::arg("x"));
  m.def("certify_convexity", &certify_convexity, py::arg("problem"), py::arg("tol") = 1e-8,
        py::arg("max_dim") = 4096);
  m.def("check_l1_linear_region", &check_l1_linear_region, py::arg("B"), py::arg("L"), py::arg("x"));

  m.def(
      "complete_to_square", &complete_to_square, py::arg("L"));
  m.def(
      "design_b",
      [](const Matrix& A, const Matrix& L, double mu, double theta, std::optional<Matrix> tilde_L) {
        const BDesign d = design_b(A, L, mu, theta, tilde_L);
        py::dict out;
        out["B"] = d.B;
        out["theta"] = d.theta;
        out["tilde_L"] = d.tilde_L;
        out["spectrum"] = d.spectrum;
        return out;
      },
      py::arg("A"), py::arg("L"), py::arg("mu"), py::arg("theta") = 0.99, py::arg("tilde_L") = py::none());
  m.def(
      "design_b_multi",
      [](const Matrix& A, const std::vector<std::tuple<Matrix, double, double>>& parts, double mu,
         const std::vector<double>& omega) {
        std::vector<DesignPart> p;
        for (const auto& [L, mu_i, theta] : parts) p.push_back({L, mu_i, theta, std::nullopt});
        return design_b_multi(A, p, mu, omega).B;
      },
      py::arg("A"), py::arg("parts"), py::arg("mu"), py::arg("omega"),
      "parts: list of (L_i, mu_i, theta_i); returns the block-diagonal B.");

  m.def(
      "auto_step_sizes",
      [](const Problem& p, double kappa) {
        const auto s = auto_step_sizes(p, kappa);
        return py::make_tuple(s.sigma, s.tau);
      },
      py::arg("problem"), py::arg("kappa") = 1.001);
  m.def(
      "solve",
      [](const Problem& p, double kappa, int max_iter, double tol, double relaxation, int objective_every,
         std::optional<Vector> ground_truth) {
        SolverConfig cfg;
        cfg.kappa = kappa;
        cfg.max_iter = max_iter;
        cfg.p_residual_tol = tol;
        cfg.relaxation = relaxation;
        cfg.objective_every = objective_every;
        SolveReport r;
        {
          py::gil_scoped_release release;
          r = solve(p, cfg, std::nullopt, ground_truth);
        }
        return report_to_dict(r);
      },
      py::arg("problem"), py::arg("kappa") = 1.001, py::arg("max_iter") = 100000, py::arg("tol") = 1e-9,
      py::arg("relaxation") = 1.0, py::arg("objective_every") = 0, py::arg("ground_truth") = py::none());
  m.def(
      "selesnick_solve",
      [](const Matrix& A, const Matrix& B, const Vector& y, double mu, double theta, int max_iter, double tol) {
        SelesnickConfig cfg;
        cfg.max_iter = max_iter;
        cfg.tol = tol;
        const auto r = selesnick_solve(A, B, y, mu, theta, cfg);
        py::dict out;
        out["x"] = r.x;
        out["v"] = r.v;
        out["iterations"] = r.iterations;
        out["converged"] = r.converged;
        out["step"] = r.step;
        return out;
      },
      py::arg("A"), py::arg("B"), py::arg("y"), py::arg("mu"), py::arg("theta"), py::arg("max_iter") = 50000,
      py::arg("tol") = 1e-12);

  m.def(
      "run_experiment",
      [](const std::string& scenario, int replications, std::optional<int> iters, std::uint64_t seed,
         std::optional<double> mu, std::optional<double> mu_ligme, std::optional<double> snr_db, double theta,
         int threads) {
        ExperimentSpec spec = ExperimentSpec::defaults(parse_scenario(scenario));
        spec.replications = replications;
        spec.seed = seed;
        spec.theta = theta;
        spec.threads = threads;
        if (iters) spec.iters = *iters;
        if (mu) spec.mu_convex = *mu;
        if (mu_ligme) spec.mu_ligme = *mu_ligme;
        if (snr_db) spec.snr_db = *snr_db;
        ExperimentResult res;
        {
          py::gil_scoped_release release;
          res = run_experiment(spec);
        }
        py::list variants;
        for (const auto& v : res.variants) {
          py::dict d;
          d["name"] = v.name;
          d["mse"] = v.mse;
          d["final_se"] = v.final_se;
          d["se_trace"] = v.se_trace;
          d["final_x"] = v.final_x;
          d["certificate"] = v.certificate;
          d["num_ranks"] = v.num_ranks;
          if (v.singular_values) d["singular_values"] = *v.singular_values;
          variants.append(d);
        }
        py::dict out;
        out["variants"] = variants;
        out["ground_truth"] = res.ground_truth;
        return out;
      },
      py::arg("scenario"), py::arg("replications") = 20, py::arg("iters") = py::none(), py::arg("seed") = 1,
      py::arg("mu") = py::none(), py::arg("mu_ligme") = py::none(), py::arg("snr_db") = py::none(),
      py::arg("theta") = 0.99, py::arg("threads") = 0);
  m.def("num_rank", &num_rank, py::arg("singular_values"), py::arg("threshold") = 1e-8);
}
