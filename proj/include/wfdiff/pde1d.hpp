// Crank-Nicolson solver for the two-allele Kolmogorov backward equation
//   dF/dt = x(1-x)/(4N) F'' + (u21 (1-x) - u12 x) F',   F(0, x) = f(x),
// on [0,1], so F(t, x) approximates E_x f(X_t) for the diffusion.
// The diffusion coefficient vanishes at both endpoints, so the boundary rows
// carry the drift term only, discretized with second-order one-sided stencils.
#pragma once

#include <cstdint>
#include <vector>

#include "wfdiff/model.hpp"
#include "wfdiff/testfuncs.hpp"

namespace wfdiff {

struct Grid1D {
  int cells = 1024;   // number of panels; cells + 1 equally spaced nodes
  double dt = 1e-3;   // time step in units of generations
};

class BackwardSolution {
 public:
  BackwardSolution(Grid1D grid, std::vector<double> times,
                   std::vector<std::vector<double>> values);

  const Grid1D& grid() const { return grid_; }
  // Recorded times, ascending, starting at 0.
  const std::vector<double>& times() const { return times_; }
  // Nodal values at the recorded time with the given index.
  const std::vector<double>& at(int time_index) const;
  // Cubic (4-point Lagrange) interpolation in x; exact at grid nodes.
  double value_at(int time_index, double x) const;

 private:
  Grid1D grid_;
  std::vector<double> times_;
  std::vector<std::vector<double>> values_;
};

// Marches the backward equation from F(0) = f to t_max, recording the nodal
// values every `record_every` generations (and at t_max). `record_every` and
// `t_max` must be integer multiples of grid.dt. Throws std::runtime_error if
// the sup norm grows by more than a factor 1 + 1e-6 in a single step.
BackwardSolution solve_backward(const Polynomial& f, int population, double u12,
                                double u21, double t_max, const Grid1D& grid,
                                double record_every = 1.0);

// Sup over grid nodes of an |order|-th finite-difference derivative of the
// recorded solution (order 1..4), one value per recorded time. Orders 3 and 4
// probe only nodes at least 10 cells from each boundary: the boundary rows of
// the scheme shed a thin O(h^2) error layer whose order-m difference grows
// like h^{2-m}, which would drown the true derivative there for m >= 3. The
// excluded strip shrinks as the grid refines.
std::vector<double> derivative_sup_series(const BackwardSolution& sol,
                                          int order);

struct DecayCheckEntry {
  double time;            // recorded time
  double sup_derivative;  // fine-grid estimate of sup_x |d^m F / dx^m|
  double slack;           // |fine - coarse| / 3 grid-refinement uncertainty
  double bound;           // sup|f^(m)| * exp(-rate_m * time)
  double margin;          // bound + slack + tol - sup_derivative
};

// Checks sup_x |d^m F(t,.)/dx^m| <= sup|f^(m)| e^{-rate_m t} + slack + tol at
// every recorded time, where rate_m = m(m-1)/(4N) + m(u12+u21). Solves on the
// given grid and on a grid with half the cells to estimate the discretization
// slack. Every margin >= 0 means the decay bound held.
std::vector<DecayCheckEntry> derivative_decay_check(const Polynomial& f,
                                                    int population, double u12,
                                                    double u21, double t_max,
                                                    int order,
                                                    const Grid1D& grid,
                                                    double tol);

struct PdeGapEntry {
  std::int64_t horizon;    // number of chain generations
  double chain_value;      // exact E f(Y_n / 2N) for the Wright-Fisher chain
  double diffusion_value;  // PDE value F(horizon, x0)
  double gap;              // |chain_value - diffusion_value|
};

// Exact-chain vs PDE-diffusion expectations of f from the lattice start x0 at
// the given nondecreasing horizons (two-allele case only).
std::vector<PdeGapEntry> pde_chain_gap(const Polynomial& f,
                                       const LatticeState& x0, double u12,
                                       double u21,
                                       const std::vector<std::int64_t>& horizons,
                                       const Grid1D& grid);

}  // namespace wfdiff
