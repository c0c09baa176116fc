// Experiment configuration: a versioned JSON schema describing the model,
// the start state, the horizons, the test functions, and the numerical
// budgets for each backend.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "wfdiff/chain.hpp"
#include "wfdiff/model.hpp"
#include "wfdiff/testfuncs.hpp"

namespace wfdiff::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ChainOptions {
  int paths = 0;                        // sampled paths written by `simulate`
  std::size_t state_cap = kDefaultStateCap;
  std::int64_t mc_replicates = 200000;  // fallback sample size
};

struct DiffusionOptions {
  double dt = 1.0 / 64.0;
  std::int64_t replicates = 100000;
  int paths = 0;  // sampled paths written by `simulate`
};

struct PdeOptions {
  int cells = 1024;
  double dt = 1e-3;
};

struct NamedFunction {
  std::string name;
  Polynomial poly = Polynomial(1);
};

struct ExperimentConfig {
  int schema_version = 1;
  int population = 0;  // N
  MutationMatrix mutation = MutationMatrix::zero(2);
  std::vector<int> initial_counts;  // alpha_1..alpha_{r-1}, sum <= 2N
  std::vector<int> horizons;        // nondecreasing generations
  std::vector<NamedFunction> test_functions;
  // Optional explicit sup|f^(m)| overrides (m = 1..6) for bound reports.
  std::optional<std::array<double, 6>> norms;
  ChainOptions chain;
  DiffusionOptions diffusion;
  PdeOptions pde;
  std::uint64_t seed = 0;
  int workers = 1;

  int allele_count() const { return mutation.allele_count(); }
  LatticeState initial_state() const {
    return LatticeState(initial_counts, population);
  }
};

// Parses and validates; throws ConfigError with the offending key path.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Parses {"name"?, "r"?, "terms": [{"powers": [...], "coeff": c}]}.
NamedFunction parse_function(const nlohmann::json& j, int alleles,
                             const std::string& fallback_name);

}  // namespace wfdiff::cli
