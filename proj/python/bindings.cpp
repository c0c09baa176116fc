#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <utility>

#include "wfdiff/bounds.hpp"
#include "wfdiff/chain.hpp"
#include "wfdiff/diffusion.hpp"
#include "wfdiff/model.hpp"
#include "wfdiff/pde1d.hpp"
#include "wfdiff/rng.hpp"
#include "wfdiff/testfuncs.hpp"

namespace py = pybind11;
using namespace wfdiff;

#ifndef WFDIFF_VERSION
#define WFDIFF_VERSION "0.0.0"
#endif

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Wright-Fisher chain, its limiting diffusion, and explicit "
      "chain-vs-diffusion error bounds";
  m.attr("__version__") = WFDIFF_VERSION;

  py::register_exception<capacity_error>(m, "CapacityError");

  py::class_<MutationMatrix>(m, "MutationMatrix")
      .def_static("zero", &MutationMatrix::zero, py::arg("r"))
      .def_static("two_allele", &MutationMatrix::two_allele, py::arg("u12"),
                  py::arg("u21"))
      .def_static("from_last_row", &MutationMatrix::from_last_row,
                  py::arg("last_row"), py::arg("into_last"))
      .def_static("from_matrix", &MutationMatrix::from_matrix, py::arg("u"))
      .def_property_readonly("allele_count", &MutationMatrix::allele_count)
      .def_property_readonly("matrix", &MutationMatrix::matrix)
      .def("rate", &MutationMatrix::rate, py::arg("i"), py::arg("j"))
      .def("row_outflow", &MutationMatrix::row_outflow, py::arg("i"))
      .def("rate_sum", &MutationMatrix::rate_sum, py::arg("k"))
      .def("is_zero", &MutationMatrix::is_zero);

  py::class_<SimplexPoint>(m, "SimplexPoint")
      .def(py::init<Vec>(), py::arg("coords"))
      .def_static("vertex", &SimplexPoint::vertex, py::arg("r"),
                  py::arg("allele"))
      .def_property_readonly("coords", &SimplexPoint::coords)
      .def_property_readonly("dim", &SimplexPoint::dim)
      .def_property_readonly("allele_count", &SimplexPoint::allele_count)
      .def("last", &SimplexPoint::last);

  py::class_<LatticeState>(m, "LatticeState")
      .def(py::init<std::vector<int>, int>(), py::arg("counts"),
           py::arg("population"))
      .def_property_readonly("counts", &LatticeState::counts)
      .def_property_readonly("population", &LatticeState::population)
      .def_property_readonly("two_n", &LatticeState::two_n)
      .def("residual", &LatticeState::residual)
      .def("to_simplex", &LatticeState::to_simplex);

  py::class_<Polynomial>(m, "Polynomial")
      .def(py::init<int>(), py::arg("dim"))
      .def_static("constant", &Polynomial::constant, py::arg("dim"),
                  py::arg("c"))
      .def_static("coordinate", &Polynomial::coordinate, py::arg("dim"),
                  py::arg("k"))
      .def_static("from_terms", &Polynomial::from_terms, py::arg("dim"),
                  py::arg("terms"))
      .def("add_term", &Polynomial::add_term, py::arg("powers"),
           py::arg("coeff"))
      .def_property_readonly("dim", &Polynomial::dim)
      .def_property_readonly("degree", &Polynomial::degree)
      .def("__call__",
           [](const Polynomial& p, const Vec& x) { return p(x); })
      .def("partial", &Polynomial::partial, py::arg("k"))
      .def("gradient_at", &Polynomial::gradient_at, py::arg("x"))
      .def("hessian_at", &Polynomial::hessian_at, py::arg("x"))
      .def("derivative_norm_sup",
           [](const Polynomial& p, int order) {
             const Polynomial::NormBound b = p.derivative_norm_sup(order);
             return py::make_tuple(b.value, b.slack, b.upper());
           },
           py::arg("order"),
           "Returns (grid_value, slack, upper_bound) for sup |grad^m f|_2.")
      .def("__repr__", &Polynomial::to_string);

  // Model-level quantities.
  m.def("adjusted_frequencies", &adjusted_frequencies, py::arg("y"),
        py::arg("u"));
  m.def("drift", &drift, py::arg("x"), py::arg("u"));
  m.def("covariance", &covariance, py::arg("x"));
  m.def("covariance_norm_sup", &covariance_norm_sup, py::arg("r"));
  m.def(
      "drift_norm_sup",
      [](const MutationMatrix& u) {
        const DriftNormSup s = drift_norm_sup(u);
        return py::make_tuple(s.value, s.argmax);
      },
      py::arg("u"), "Returns (sup |b|_2, attaining coordinate).");
  m.def("rate_sum_max", &rate_sum_max, py::arg("u"));
  m.def(
      "one_step_moments",
      [](const LatticeState& y, const MutationMatrix& u) {
        const StepMoments s = one_step_moments(y, u);
        return py::make_tuple(s.mean_shift, s.second, s.third_diag);
      },
      py::arg("y"), py::arg("u"),
      "Returns (mean, second moment matrix, diagonal third moments) of the "
      "one-step shift Y(1) - y.");
  m.def(
      "boundary_face_check",
      [](const SimplexPoint& x, int face, const MutationMatrix& u, int n) {
        const FaceCheck c = boundary_face_check(x, face, u, n);
        return py::make_tuple(c.diffusion_normal, c.drift_inward);
      },
      py::arg("x"), py::arg("face"), py::arg("u"), py::arg("population"));

  // Chain.
  m.def("transition_probability", &transition_probability, py::arg("from_"),
        py::arg("to"), py::arg("u"));
  m.def(
      "chain_distribution",
      [](const LatticeState& x0, const MutationMatrix& u, int n,
         std::size_t cap) {
        ChainDistribution d =
            evolve_distribution(lattice_point_mass(x0, cap), u, n);
        std::vector<std::vector<int>> states;
        states.reserve(d.space().size());
        for (std::size_t i = 0; i < d.space().size(); ++i)
          states.push_back(d.space().counts(i));
        return py::make_tuple(states, d.probabilities());
      },
      py::arg("x0"), py::arg("u"), py::arg("n"),
      py::arg("state_cap") = kDefaultStateCap,
      "Exact n-step distribution: (list of count vectors, probabilities).");
  m.def("chain_expectation", &chain_expectation, py::arg("f"), py::arg("x0"),
        py::arg("u"), py::arg("n"), py::arg("state_cap") = kDefaultStateCap);
  m.def("chain_expectation_at", &chain_expectation_at, py::arg("f"),
        py::arg("x0"), py::arg("u"), py::arg("horizons"),
        py::arg("state_cap") = kDefaultStateCap);
  m.def(
      "chain_expectation_mc",
      [](const Polynomial& f, const LatticeState& x0, const MutationMatrix& u,
         int n, std::int64_t replicates, std::uint64_t seed, int workers) {
        const MonteCarloEstimate e =
            chain_expectation_mc(f, x0, u, n, replicates, seed, workers);
        return py::make_tuple(e.mean, e.std_error, e.replicates);
      },
      py::arg("f"), py::arg("x0"), py::arg("u"), py::arg("n"),
      py::arg("replicates"), py::arg("seed"), py::arg("workers") = 1);
  m.def(
      "sample_chain_path",
      [](const LatticeState& x0, const MutationMatrix& u, int n,
         std::uint64_t seed) {
        Rng rng(seed);
        std::vector<std::vector<int>> out;
        for (const LatticeState& s : sample_path(x0, u, n, rng))
          out.push_back(s.counts());
        return out;
      },
      py::arg("x0"), py::arg("u"), py::arg("n"), py::arg("seed"));
  m.def("count_states", &StateSpace::count_states, py::arg("r"),
        py::arg("two_n"));

  // Diffusion.
  py::class_<DiffusionConfig>(m, "DiffusionConfig")
      .def(py::init<int, MutationMatrix, double>(), py::arg("population"),
           py::arg("mutation"), py::arg("dt") = 1.0 / 64.0)
      .def_readonly("population", &DiffusionConfig::population)
      .def_readonly("dt", &DiffusionConfig::dt)
      .def("steps_for", &DiffusionConfig::steps_for, py::arg("t"));
  m.def("psd_factor", &psd_factor, py::arg("a"));
  m.def("project_to_simplex", &project_to_simplex, py::arg("x"));
  m.def(
      "em_step",
      [](const SimplexPoint& x, const DiffusionConfig& cfg,
         std::uint64_t seed) {
        Rng rng(seed);
        return em_step(x, cfg, rng);
      },
      py::arg("x"), py::arg("cfg"), py::arg("seed"));
  m.def("em_step_with_noise", &em_step_with_noise, py::arg("x"),
        py::arg("cfg"), py::arg("noise"));
  m.def(
      "sample_diffusion_path",
      [](const SimplexPoint& x0, const DiffusionConfig& cfg, double t_max,
         std::uint64_t seed) {
        Rng rng(seed);
        const DiffusionPath p = sample_diffusion_path(x0, cfg, t_max, rng);
        return py::make_tuple(p.dt, p.states);
      },
      py::arg("x0"), py::arg("cfg"), py::arg("t_max"), py::arg("seed"));
  m.def(
      "weak_expectation",
      [](const Polynomial& f, const SimplexPoint& x0,
         const DiffusionConfig& cfg, double t, std::int64_t replicates,
         std::uint64_t seed, int workers) {
        const MonteCarloEstimate e =
            weak_expectation(f, x0, cfg, t, replicates, seed, workers);
        return py::make_tuple(e.mean, e.std_error, e.replicates);
      },
      py::arg("f"), py::arg("x0"), py::arg("cfg"), py::arg("t"),
      py::arg("replicates"), py::arg("seed"), py::arg("workers") = 1);
  m.def(
      "weak_expectation_at",
      [](const Polynomial& f, const SimplexPoint& x0,
         const DiffusionConfig& cfg, const std::vector<double>& times,
         std::int64_t replicates, std::uint64_t seed, int workers) {
        py::list out;
        for (const MonteCarloEstimate& e : weak_expectation_at(
                 f, x0, cfg, times, replicates, seed, workers))
          out.append(py::make_tuple(e.mean, e.std_error, e.replicates));
        return out;
      },
      py::arg("f"), py::arg("x0"), py::arg("cfg"), py::arg("times"),
      py::arg("replicates"), py::arg("seed"), py::arg("workers") = 1);
  m.def("generator_apply", &generator_apply, py::arg("f"), py::arg("x"),
        py::arg("population"), py::arg("u"));

  // Backward PDE (two-allele).
  py::class_<Grid1D>(m, "Grid1D")
      .def(py::init([](int cells, double dt) {
             return Grid1D{cells, dt};
           }),
           py::arg("cells") = 1024, py::arg("dt") = 1e-3)
      .def_readwrite("cells", &Grid1D::cells)
      .def_readwrite("dt", &Grid1D::dt);
  py::class_<BackwardSolution>(m, "BackwardSolution")
      .def_property_readonly("times", &BackwardSolution::times)
      .def("at", &BackwardSolution::at, py::arg("time_index"))
      .def("value_at", &BackwardSolution::value_at, py::arg("time_index"),
           py::arg("x"));
  m.def("solve_backward", &solve_backward, py::arg("f"), py::arg("population"),
        py::arg("u12"), py::arg("u21"), py::arg("t_max"), py::arg("grid"),
        py::arg("record_every") = 1.0);
  m.def("derivative_sup_series", &derivative_sup_series, py::arg("solution"),
        py::arg("order"));
  m.def(
      "derivative_decay_check",
      [](const Polynomial& f, int population, double u12, double u21,
         double t_max, int order, const Grid1D& grid, double tol) {
        py::list out;
        for (const DecayCheckEntry& e : derivative_decay_check(
                 f, population, u12, u21, t_max, order, grid, tol))
          out.append(py::dict(
              py::arg("time") = e.time,
              py::arg("sup_derivative") = e.sup_derivative,
              py::arg("slack") = e.slack, py::arg("bound") = e.bound,
              py::arg("margin") = e.margin));
        return out;
      },
      py::arg("f"), py::arg("population"), py::arg("u12"), py::arg("u21"),
      py::arg("t_max"), py::arg("order"), py::arg("grid"), py::arg("tol"));
  m.def(
      "pde_chain_gap",
      [](const Polynomial& f, const LatticeState& x0, double u12, double u21,
         const std::vector<std::int64_t>& horizons, const Grid1D& grid) {
        py::list out;
        for (const PdeGapEntry& e :
             pde_chain_gap(f, x0, u12, u21, horizons, grid))
          out.append(py::dict(py::arg("horizon") = e.horizon,
                              py::arg("chain_value") = e.chain_value,
                              py::arg("diffusion_value") = e.diffusion_value,
                              py::arg("gap") = e.gap));
        return out;
      },
      py::arg("f"), py::arg("x0"), py::arg("u12"), py::arg("u21"),
      py::arg("horizons"), py::arg("grid"));

  // Bounds.
  py::class_<BoundTerm>(m, "BoundTerm")
      .def_readonly("order", &BoundTerm::order)
      .def_readonly("rate", &BoundTerm::rate)
      .def_readonly("coefficient", &BoundTerm::coefficient)
      .def_readonly("factor", &BoundTerm::factor)
      .def_readonly("norm", &BoundTerm::norm)
      .def_readonly("contribution", &BoundTerm::contribution);
  py::class_<BoundReport>(m, "BoundReport")
      .def_readonly("regime", &BoundReport::regime)
      .def_readonly("allele_count", &BoundReport::allele_count)
      .def_readonly("population", &BoundReport::population)
      .def_readonly("horizon", &BoundReport::horizon)
      .def_readonly("terms", &BoundReport::terms)
      .def_readonly("total", &BoundReport::total);
  m.def(
      "decay_rate",
      [](const std::vector<int>& ks, const MutationMatrix& u, int population) {
        return decay_rate(std::span<const int>(ks.data(), ks.size()), u,
                          population);
      },
      py::arg("ks"), py::arg("u"), py::arg("population"));
  m.def("min_decay_rate", &min_decay_rate, py::arg("m"), py::arg("u"),
        py::arg("population"));
  m.def("step_constants", &step_constants, py::arg("u"), py::arg("population"));
  m.def(
      "two_allele_constants",
      [](double u12, double u21, int population) {
        const TwoAlleleConstants c = two_allele_constants(u12, u21, population);
        return py::make_tuple(c.coeff, c.rate);
      },
      py::arg("u12"), py::arg("u21"), py::arg("population"),
      "Returns (coefficients C_1..C_4, decay rates lambda_1..lambda_4).");
  m.def("ethier_norman_theta", &ethier_norman_theta, py::arg("mu1"),
        py::arg("mu2"));
  m.def(
      "ethier_norman_bound",
      [](double mu1, double mu2, int population,
         const std::array<double, 6>& norms) {
        return ethier_norman_bound(mu1, mu2, population, norms);
      },
      py::arg("mu1"), py::arg("mu2"), py::arg("population"), py::arg("f_norms"));
  m.def("geometric_factor", &geometric_factor, py::arg("rate"), py::arg("n"));
  m.def(
      "total_bound",
      [](const MutationMatrix& u, int population, std::int64_t n,
         const std::array<double, 4>& norms) {
        return total_bound(u, population, n, norms);
      },
      py::arg("u"), py::arg("population"), py::arg("n"), py::arg("norms"));
  m.def(
      "ethier_norman_report",
      [](double mu1, double mu2, int population, std::int64_t n,
         const std::array<double, 6>& norms) {
        return ethier_norman_report(mu1, mu2, population, n, norms);
      },
      py::arg("mu1"), py::arg("mu2"), py::arg("population"), py::arg("n"),
      py::arg("f_norms"));

  // RNG utilities.
  m.def("inverse_normal_cdf", &inverse_normal_cdf, py::arg("p"));
  m.def("derive_seed", &derive_seed, py::arg("master"), py::arg("tag"),
        py::arg("index"));
}
