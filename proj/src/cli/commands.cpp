#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "config.hpp"
#include "reports.hpp"
#include "wfdiff/bounds.hpp"
#include "wfdiff/chain.hpp"
#include "wfdiff/diffusion.hpp"
#include "wfdiff/pde1d.hpp"
#include "wfdiff/rng.hpp"

namespace wfdiff::cli {

namespace {

using nlohmann::json;

// Stream tags keep every stochastic artifact on its own RNG substream.
constexpr std::uint64_t kChainPathTag = 0x63706174ull;
constexpr std::uint64_t kDiffusionPathTag = 0x64706174ull;
constexpr std::uint64_t kVerifyTag = 0x76726679ull;

// Discretization allowance added to the bound on the noise-free PDE route.
constexpr double kPdeSlack = 1e-6;

ExperimentConfig prepare(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args.config_path);
  if (args.seed) cfg.seed = *args.seed;
  if (args.workers) {
    if (*args.workers < 0) throw ConfigError("--workers must be >= 0");
    cfg.workers = *args.workers;
  }
  std::error_code ec;
  std::filesystem::create_directories(args.out_dir, ec);
  if (ec)
    throw ConfigError("cannot create output directory '" + args.out_dir +
                      "': " + ec.message());
  return cfg;
}

std::string out_path(const CommonArgs& args, const std::string& name) {
  return (std::filesystem::path(args.out_dir) / name).string();
}

void note_written(const std::string& path) {
  std::cout << "wrote " << path << "\n";
}

// Horizons that the diffusion clock can hit exactly.
void require_horizons_on_grid(const ExperimentConfig& cfg) {
  const DiffusionConfig probe(cfg.population, cfg.mutation, cfg.diffusion.dt);
  for (int n : cfg.horizons) {
    try {
      (void)probe.steps_for(static_cast<double>(n));
    } catch (const std::invalid_argument&) {
      throw ConfigError("diffusion.dt must divide horizon " +
                        std::to_string(n));
    }
  }
}

std::array<double, 4> theorem_norms(const Polynomial& f) {
  std::array<double, 4> out{};
  for (int m = 1; m <= 4; ++m) out[m - 1] = f.derivative_norm_sup(m).upper();
  return out;
}

std::array<double, 6> scalar_norms(const Polynomial& f) {
  std::array<double, 6> out{};
  for (int m = 1; m <= 6; ++m) out[m - 1] = f.derivative_norm_sup(m).upper();
  return out;
}

std::vector<std::string> gap_csv_header() {
  return {"function",        "horizon",       "chain_method",
          "chain_value",     "chain_se",      "diffusion_method",
          "diffusion_value", "diffusion_se",  "gap",
          "gap_error_band",  "pde_slack",     "bound_total",
          "status"};
}

void gap_csv_row(CsvWriter& csv, const GapEstimate& g) {
  csv.row({g.function, CsvWriter::cell(static_cast<std::int64_t>(g.horizon)),
           g.chain_method, CsvWriter::cell(g.chain_value),
           CsvWriter::cell(g.chain_se), g.diffusion_method,
           CsvWriter::cell(g.diffusion_value), CsvWriter::cell(g.diffusion_se),
           CsvWriter::cell(g.gap), CsvWriter::cell(g.gap_error_band),
           CsvWriter::cell(g.pde_slack), CsvWriter::cell(g.bound.total),
           g.status});
}

// Uniform point of I (body) in dim coordinates via normalized exponentials
// over dim+1 cells.
Vec random_body_point(int dim, Rng& rng) {
  Vec e(dim + 1);
  double total = 0.0;
  for (int i = 0; i <= dim; ++i) {
    e[i] = -std::log(rng.uniform());
    total += e[i];
  }
  Vec x(dim);
  for (int i = 0; i < dim; ++i) x[i] = e[i] / total;
  return x;
}

// Uniform point of the face {x_face = 0} (face < dim) or {sum x = 1}
// (face == dim) of I.
Vec random_face_point(int dim, int face, Rng& rng) {
  if (face == dim) {
    Vec e(dim);
    double total = 0.0;
    for (int i = 0; i < dim; ++i) {
      e[i] = -std::log(rng.uniform());
      total += e[i];
    }
    return e / total;
  }
  const Vec sub = random_body_point(dim - 1, rng);
  Vec x(dim);
  int k = 0;
  for (int i = 0; i < dim; ++i) x[i] = (i == face) ? 0.0 : sub[k++];
  return x;
}

}  // namespace

int cmd_simulate(const CommonArgs& args) {
  const ExperimentConfig cfg = prepare(args);
  const int r = cfg.allele_count();
  const LatticeState x0 = cfg.initial_state();
  const int n_max = cfg.horizons.back();

  json summary{{"schema_version", 1},
               {"model", {{"r", r}, {"N", cfg.population}}},
               {"seed", cfg.seed},
               {"files", json::array()}};
  auto record_file = [&](const std::string& path) {
    summary["files"].push_back(std::filesystem::path(path).filename().string());
    note_written(path);
  };

  std::vector<std::string> alpha_cols, coord_cols;
  for (int i = 1; i < r; ++i) {
    alpha_cols.push_back("alpha_" + std::to_string(i));
    coord_cols.push_back("x_" + std::to_string(i));
  }

  // Exact distributions at every horizon, one file per horizon.
  bool capacity_hit = false;
  try {
    ChainDistribution dist = lattice_point_mass(x0, cfg.chain.state_cap);
    int done = 0;
    for (int n : cfg.horizons) {
      dist = evolve_distribution(dist, cfg.mutation, n - done);
      done = n;
      const std::string path =
          out_path(args, "chain_distribution_n" + std::to_string(n) + ".csv");
      std::vector<std::string> header = alpha_cols;
      header.push_back("prob");
      CsvWriter csv(path, header);
      const StateSpace& space = dist.space();
      for (std::size_t idx = 0; idx < space.size(); ++idx) {
        std::vector<std::string> row;
        for (int c : space.counts(idx))
          row.push_back(CsvWriter::cell(static_cast<std::int64_t>(c)));
        row.push_back(CsvWriter::cell(dist.probabilities()[idx]));
        csv.row(row);
      }
      record_file(path);
    }
  } catch (const capacity_error&) {
    capacity_hit = true;
    std::cout << "chain distribution export skipped: state space exceeds cap "
              << cfg.chain.state_cap << "\n";
  }
  summary["chain_distribution_capacity_exceeded"] = capacity_hit;

  // Sampled chain paths, one file per path, rows 0..n_max.
  for (int k = 0; k < cfg.chain.paths; ++k) {
    Rng rng = stream_rng(cfg.seed, kChainPathTag, k);
    const std::vector<LatticeState> path =
        sample_path(x0, cfg.mutation, n_max, rng);
    const std::string file =
        out_path(args, "chain_path_" + std::to_string(k + 1) + ".csv");
    std::vector<std::string> header = {"n"};
    header.insert(header.end(), alpha_cols.begin(), alpha_cols.end());
    CsvWriter csv(file, header);
    for (std::size_t n = 0; n < path.size(); ++n) {
      std::vector<std::string> row = {
          CsvWriter::cell(static_cast<std::int64_t>(n))};
      for (int c : path[n].counts())
        row.push_back(CsvWriter::cell(static_cast<std::int64_t>(c)));
      csv.row(row);
    }
    record_file(file);
  }

  // Sampled diffusion paths, decimated to integer generations on the dt grid.
  if (cfg.diffusion.paths > 0) {
    require_horizons_on_grid(cfg);
    const DiffusionConfig dcfg(cfg.population, cfg.mutation, cfg.diffusion.dt);
    for (int k = 0; k < cfg.diffusion.paths; ++k) {
      Rng rng = stream_rng(cfg.seed, kDiffusionPathTag, k);
      const DiffusionPath path = sample_diffusion_path(
          x0.to_simplex(), dcfg, static_cast<double>(n_max), rng);
      const std::string file =
          out_path(args, "diffusion_path_" + std::to_string(k + 1) + ".csv");
      std::vector<std::string> header = {"t"};
      header.insert(header.end(), coord_cols.begin(), coord_cols.end());
      CsvWriter csv(file, header);
      for (std::size_t s = 0; s < path.states.size(); ++s) {
        const double t = s * path.dt;
        const double gen = std::round(t);
        const bool last = (s + 1 == path.states.size());
        if (!last && std::fabs(t - gen) > 1e-9 * std::max(1.0, t)) continue;
        std::vector<std::string> row = {CsvWriter::cell(t)};
        for (int i = 0; i < path.states[s].size(); ++i)
          row.push_back(CsvWriter::cell(path.states[s][i]));
        csv.row(row);
      }
      record_file(file);
    }
  }

  // Weak expectations of the configured test functions at every horizon.
  if (!cfg.test_functions.empty()) {
    require_horizons_on_grid(cfg);
    const DiffusionConfig dcfg(cfg.population, cfg.mutation, cfg.diffusion.dt);
    std::vector<double> times;
    for (int n : cfg.horizons) times.push_back(static_cast<double>(n));
    json estimates = json::array();
    for (const NamedFunction& nf : cfg.test_functions) {
      const std::vector<MonteCarloEstimate> est =
          weak_expectation_at(nf.poly, x0.to_simplex(), dcfg, times,
                              cfg.diffusion.replicates, cfg.seed, cfg.workers);
      for (std::size_t i = 0; i < times.size(); ++i) {
        estimates.push_back({{"function", nf.name},
                             {"t", times[i]},
                             {"mean", est[i].mean},
                             {"std_error", est[i].std_error},
                             {"replicates", est[i].replicates},
                             {"dt", cfg.diffusion.dt},
                             {"seed", cfg.seed}});
      }
    }
    const std::string file = out_path(args, "diffusion_estimates.json");
    write_json_file(file, estimates);
    record_file(file);
  }

  const std::string sfile = out_path(args, "simulate_summary.json");
  write_json_file(sfile, summary);
  note_written(sfile);
  return 0;
}

int cmd_bounds(const CommonArgs& args) {
  const ExperimentConfig cfg = prepare(args);
  const int r = cfg.allele_count();
  if (!cfg.norms && cfg.test_functions.empty())
    throw ConfigError("bounds needs test_functions or explicit norms");

  struct Entry {
    std::string name;
    std::array<double, 4> norms4;
    std::array<double, 6> norms6;
  };
  std::vector<Entry> entries;
  if (cfg.norms) {
    Entry e;
    e.name = "explicit";
    e.norms6 = *cfg.norms;
    std::copy_n(e.norms6.begin(), 4, e.norms4.begin());
    entries.push_back(e);
  } else {
    for (const NamedFunction& nf : cfg.test_functions) {
      Entry e;
      e.name = nf.name;
      e.norms4 = theorem_norms(nf.poly);
      if (r == 2) e.norms6 = scalar_norms(nf.poly);
      entries.push_back(e);
    }
  }

  json reports = json::array();
  for (const Entry& e : entries) {
    for (int n : cfg.horizons) {
      json item{{"function", e.name}, {"horizon", n}};
      json regime_list = json::array();
      const BoundReport main =
          total_bound(cfg.mutation, cfg.population, n, e.norms4);
      regime_list.push_back(bound_report_json(main));
      if (r == 2) {
        const double u12 = cfg.mutation.rate(0, 1);
        const double u21 = cfg.mutation.rate(1, 0);
        const BoundReport en =
            ethier_norman_report(u12, u21, cfg.population, n, e.norms6);
        regime_list.push_back(bound_report_json(en));
        if (en.total > 0.0)
          item["ratio_two_allele_to_ethier_norman"] = main.total / en.total;
        else
          item["ratio_two_allele_to_ethier_norman"] = nullptr;
      }
      item["bounds"] = regime_list;
      item["total"] = main.total;
      reports.push_back(item);
      std::cout << "bounds function=" << e.name << " n=" << n
                << " total=" << format_double(main.total) << "\n";
    }
  }

  const json doc{{"schema_version", 1},
                 {"model", {{"r", r}, {"N", cfg.population}}},
                 {"reports", reports}};
  const std::string file = out_path(args, "bounds.json");
  write_json_file(file, doc);
  note_written(file);
  return 0;
}

int cmd_certify(const CommonArgs& args) {
  const ExperimentConfig cfg = prepare(args);
  const int r = cfg.allele_count();
  if (cfg.test_functions.empty())
    throw ConfigError("certify needs at least one test function");
  const LatticeState x0 = cfg.initial_state();

  std::vector<GapEstimate> results;
  for (const NamedFunction& nf : cfg.test_functions) {
    const std::array<double, 4> norms4 = theorem_norms(nf.poly);

    if (r == 2) {
      const double u12 = cfg.mutation.rate(0, 1);
      const double u21 = cfg.mutation.rate(1, 0);
      std::vector<std::int64_t> horizons(cfg.horizons.begin(),
                                         cfg.horizons.end());
      const Grid1D grid{cfg.pde.cells, cfg.pde.dt};
      const std::vector<PdeGapEntry> gaps =
          pde_chain_gap(nf.poly, x0, u12, u21, horizons, grid);
      for (const PdeGapEntry& ge : gaps) {
        GapEstimate g;
        g.function = nf.name;
        g.horizon = static_cast<int>(ge.horizon);
        g.chain_method = "exact";
        g.chain_value = ge.chain_value;
        g.diffusion_method = "pde";
        g.diffusion_value = ge.diffusion_value;
        g.gap = ge.gap;
        g.gap_error_band = 0.0;
        g.pde_slack = kPdeSlack;
        g.bound = total_bound(cfg.mutation, cfg.population, ge.horizon, norms4);
        classify_gap(g);
        results.push_back(g);
      }
    } else {
      require_horizons_on_grid(cfg);
      bool fallback = false;
      std::vector<double> chain_vals, chain_ses;
      try {
        chain_vals = chain_expectation_at(nf.poly, x0, cfg.mutation,
                                          cfg.horizons, cfg.chain.state_cap);
        chain_ses.assign(chain_vals.size(), 0.0);
      } catch (const capacity_error&) {
        fallback = true;
        std::cout << "chain state space exceeds cap " << cfg.chain.state_cap
                  << "; falling back to Monte Carlo\n";
        for (int n : cfg.horizons) {
          const MonteCarloEstimate est =
              chain_expectation_mc(nf.poly, x0, cfg.mutation, n,
                                   cfg.chain.mc_replicates, cfg.seed,
                                   cfg.workers);
          chain_vals.push_back(est.mean);
          chain_ses.push_back(est.std_error);
        }
      }

      const DiffusionConfig dcfg(cfg.population, cfg.mutation,
                                 cfg.diffusion.dt);
      std::vector<double> times;
      for (int n : cfg.horizons) times.push_back(static_cast<double>(n));
      const std::vector<MonteCarloEstimate> diff =
          weak_expectation_at(nf.poly, x0.to_simplex(), dcfg, times,
                              cfg.diffusion.replicates, cfg.seed, cfg.workers);

      for (std::size_t i = 0; i < cfg.horizons.size(); ++i) {
        GapEstimate g;
        g.function = nf.name;
        g.horizon = cfg.horizons[i];
        g.chain_method = fallback ? "monte_carlo" : "exact";
        g.chain_value = chain_vals[i];
        g.chain_se = chain_ses[i];
        g.capacity_fallback = fallback;
        g.diffusion_method = "monte_carlo";
        g.diffusion_value = diff[i].mean;
        g.diffusion_se = diff[i].std_error;
        g.gap = std::fabs(g.chain_value - g.diffusion_value);
        g.gap_error_band = std::hypot(g.chain_se, g.diffusion_se);
        g.pde_slack = 0.0;
        g.bound =
            total_bound(cfg.mutation, cfg.population, g.horizon, norms4);
        classify_gap(g);
        results.push_back(g);
      }
    }
  }

  int violated = 0, inconclusive = 0;
  json jresults = json::array();
  const std::string csv_path = out_path(args, "certify_summary.csv");
  CsvWriter csv(csv_path, gap_csv_header());
  for (const GapEstimate& g : results) {
    jresults.push_back(gap_estimate_json(g));
    gap_csv_row(csv, g);
    if (g.status == "violated") ++violated;
    if (g.status == "inconclusive") ++inconclusive;
    std::cout << "certify function=" << g.function << " n=" << g.horizon
              << " gap=" << format_double(g.gap)
              << " bound=" << format_double(g.bound.total) << " " << g.status
              << "\n";
  }

  const json doc{{"schema_version", 1},
                 {"model", {{"r", r}, {"N", cfg.population}}},
                 {"seed", cfg.seed},
                 {"results", jresults},
                 {"counts",
                  {{"total", results.size()},
                   {"violated", violated},
                   {"inconclusive", inconclusive}}},
                 {"all_dominated", violated == 0 && inconclusive == 0}};
  const std::string jpath = out_path(args, "certify.json");
  write_json_file(jpath, doc);
  note_written(jpath);
  note_written(csv_path);

  if (violated > 0) return 1;
  if (inconclusive > 0) return 2;
  return 0;
}

int cmd_verify(const CommonArgs& args) {
  const ExperimentConfig cfg = prepare(args);
  const int r = cfg.allele_count();
  const int dim = r - 1;
  const LatticeState x0 = cfg.initial_state();
  json checks = json::array();
  bool all_pass = true;
  int check_index = 0;

  auto push_check = [&](const std::string& name, bool pass, json details) {
    details["name"] = name;
    details["pass"] = pass;
    checks.push_back(details);
    all_pass = all_pass && pass;
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << "\n";
  };

  // One-step moment identities at the configured start state, against
  // direct summation over the full transition row.
  {
    const std::size_t states = StateSpace::count_states(r, x0.two_n());
    if (states > cfg.chain.state_cap) {
      push_check("one_step_moments", true,
                 {{"status", "skipped"},
                  {"reason", "state space exceeds chain.state_cap"}});
    } else {
      const StepMoments mom = one_step_moments(x0, cfg.mutation);
      const StateSpace space(r, x0.two_n());
      const Vec y = x0.to_simplex().coords();
      Vec mean = Vec::Zero(dim), third = Vec::Zero(dim);
      Mat second = Mat::Zero(dim, dim);
      double mass = 0.0;
      for (std::size_t idx = 0; idx < space.size(); ++idx) {
        const LatticeState to = space.state(idx);
        const double w = transition_probability(x0, to, cfg.mutation);
        mass += w;
        const Vec d = to.to_simplex().coords() - y;
        mean += w * d;
        second += w * (d * d.transpose());
        third += w * d.array().cube().matrix();
      }
      const double dev =
          std::max({(mean - mom.mean_shift).cwiseAbs().maxCoeff(),
                    (second - mom.second).cwiseAbs().maxCoeff(),
                    (third - mom.third_diag).cwiseAbs().maxCoeff(),
                    std::fabs(mass - 1.0)});
      const double tol = 1e-10;
      push_check("one_step_moments", dev <= tol,
                 {{"max_deviation", dev}, {"tolerance", tol},
                  {"margin", tol - dev}});
    }
  }

  // Covariance PSD at random points of I.
  {
    Rng rng = stream_rng(cfg.seed, kVerifyTag, check_index++);
    double min_eig = std::numeric_limits<double>::infinity();
    bool factored = true;
    for (int k = 0; k < 200; ++k) {
      const SimplexPoint x{random_body_point(dim, rng)};
      const Mat a = covariance(x);
      Eigen::SelfAdjointEigenSolver<Mat> es(a);
      min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
      try {
        (void)psd_factor(a);
      } catch (const std::domain_error&) {
        factored = false;
      }
    }
    const double tol = 1e-12;
    push_check("covariance_psd", factored && min_eig >= -tol,
               {{"min_eigenvalue", min_eig},
                {"cholesky_ok", factored},
                {"margin", min_eig + tol}});
  }

  // Face conditions: zero normal diffusion flux, inward drift.
  {
    Rng rng = stream_rng(cfg.seed, kVerifyTag, check_index++);
    double worst_flux = 0.0, worst_drift = std::numeric_limits<double>::infinity();
    for (int face = 0; face < r; ++face) {
      for (int k = 0; k < 100; ++k) {
        const SimplexPoint x{random_face_point(dim, face, rng)};
        const FaceCheck fc =
            boundary_face_check(x, face, cfg.mutation, cfg.population);
        worst_flux = std::max(worst_flux, std::fabs(fc.diffusion_normal));
        worst_drift = std::min(worst_drift, fc.drift_inward);
      }
    }
    const double tol = 1e-12;
    push_check("boundary_faces",
               worst_flux <= tol && worst_drift >= -tol,
               {{"max_abs_normal_flux", worst_flux},
                {"min_inward_drift", worst_drift},
                {"tolerance", tol}});
  }

  // Scalar noise-coefficient Holder modulus (two-allele only).
  if (r == 2) {
    Rng rng = stream_rng(cfg.seed, kVerifyTag, check_index++);
    const double worst = holder_modulus_check_r2(1000000, rng);
    const double tol = 1e-12;
    push_check("holder_modulus", worst <= tol,
               {{"max_violation", worst}, {"margin", tol - worst}});
  } else {
    push_check("holder_modulus", true,
               {{"status", "skipped"}, {"reason", "defined for r = 2 only"}});
  }

  // Semigroup derivative decay for f(x) = x (two-allele only).
  if (r == 2) {
    const double u12 = cfg.mutation.rate(0, 1);
    const double u21 = cfg.mutation.rate(1, 0);
    const Polynomial fx = Polynomial::coordinate(1, 0);
    const Grid1D grid{cfg.pde.cells, cfg.pde.dt};
    json orders = json::array();
    bool pass = true;
    for (int m = 1; m <= 2; ++m) {
      const auto entries = derivative_decay_check(fx, cfg.population, u12, u21,
                                                  10.0, m, grid, 1e-5);
      double min_margin = std::numeric_limits<double>::infinity();
      for (const DecayCheckEntry& e : entries)
        min_margin = std::min(min_margin, e.margin);
      pass = pass && min_margin >= 0.0;
      orders.push_back({{"m", m}, {"min_margin", min_margin}});
    }
    push_check("derivative_decay", pass, {{"function", "x"}, {"orders", orders}});
  } else {
    push_check("derivative_decay", true,
               {{"status", "skipped"}, {"reason", "PDE route is r = 2 only"}});
  }

  const json doc{{"schema_version", 1},
                 {"model", {{"r", r}, {"N", cfg.population}}},
                 {"seed", cfg.seed},
                 {"checks", checks},
                 {"all_pass", all_pass}};
  const std::string file = out_path(args, "verify.json");
  write_json_file(file, doc);
  note_written(file);
  return all_pass ? 0 : 1;
}

}  // namespace wfdiff::cli
