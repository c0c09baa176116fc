#include "config.hpp"

#include <cmath>
#include <fstream>

namespace wfdiff::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config error at " + where + ": " + what);
}

const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing key '") + key + "'");
  return *it;
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) known = true;
    if (!known) fail(where, "unknown key '" + item.key() + "'");
  }
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "expected a finite number");
  return v;
}

std::int64_t get_integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<std::int64_t>();
}

Eigen::VectorXd get_vector(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] =
        get_number(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

MutationMatrix parse_mutation(const json& j, const std::string& where) {
  check_keys(j, where, {"last_row", "into_last", "matrix"});
  const bool by_rows = j.contains("last_row") || j.contains("into_last");
  const bool by_matrix = j.contains("matrix");
  if (by_rows == by_matrix)
    fail(where, "give either last_row+into_last or matrix");
  try {
    if (by_matrix) {
      const json& m = j["matrix"];
      if (!m.is_array() || m.empty()) fail(where + ".matrix", "expected rows");
      const std::size_t r = m.size();
      Mat u(r, r);
      for (std::size_t i = 0; i < r; ++i) {
        const Eigen::VectorXd row =
            get_vector(m[i], where + ".matrix[" + std::to_string(i) + "]");
        if (static_cast<std::size_t>(row.size()) != r)
          fail(where + ".matrix", "rows must have length r");
        u.row(static_cast<Eigen::Index>(i)) = row.transpose();
      }
      return MutationMatrix::from_matrix(u);
    }
    const Eigen::VectorXd last =
        get_vector(need(j, "last_row", where), where + ".last_row");
    const Eigen::VectorXd into =
        get_vector(need(j, "into_last", where), where + ".into_last");
    return MutationMatrix::from_last_row(last, into);
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
}

}  // namespace

NamedFunction parse_function(const json& j, int alleles,
                             const std::string& fallback_name) {
  const std::string where = "test_functions." + fallback_name;
  check_keys(j, where, {"name", "r", "terms"});
  NamedFunction out;
  out.name = fallback_name;
  if (j.contains("name")) {
    if (!j["name"].is_string()) fail(where + ".name", "expected a string");
    out.name = j["name"].get<std::string>();
    if (out.name.empty()) fail(where + ".name", "must be nonempty");
  }
  if (j.contains("r") &&
      get_integer(j["r"], where + ".r") != static_cast<std::int64_t>(alleles))
    fail(where + ".r", "does not match model.alleles");
  const json& terms = need(j, "terms", where);
  if (!terms.is_array()) fail(where + ".terms", "expected an array");
  std::vector<std::pair<std::vector<int>, double>> parsed;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const std::string tw = where + ".terms[" + std::to_string(t) + "]";
    check_keys(terms[t], tw, {"powers", "coeff"});
    const json& pw = need(terms[t], "powers", tw);
    if (!pw.is_array() || pw.size() != static_cast<std::size_t>(alleles - 1))
      fail(tw + ".powers", "expected an array of length r-1");
    std::vector<int> powers;
    for (std::size_t i = 0; i < pw.size(); ++i) {
      const std::int64_t p =
          get_integer(pw[i], tw + ".powers[" + std::to_string(i) + "]");
      if (p < 0 || p > Polynomial::kMaxDegree)
        fail(tw + ".powers", "exponents must lie in 0..6");
      powers.push_back(static_cast<int>(p));
    }
    parsed.emplace_back(std::move(powers),
                        get_number(need(terms[t], "coeff", tw), tw + ".coeff"));
  }
  try {
    out.poly = Polynomial::from_terms(alleles - 1, parsed);
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  return out;
}

ExperimentConfig parse_config(const json& j) {
  check_keys(j, "$",
             {"schema_version", "model", "initial", "horizons",
              "test_functions", "norms", "chain", "diffusion", "pde", "seed",
              "workers"});

  ExperimentConfig cfg;
  if (get_integer(need(j, "schema_version", "$"), "schema_version") != 1)
    fail("schema_version", "this build reads schema_version 1");

  const json& model = need(j, "model", "$");
  check_keys(model, "model", {"alleles", "population", "mutation"});
  const std::int64_t pop =
      get_integer(need(model, "population", "model"), "model.population");
  if (pop < 1 || pop > 1000000000) fail("model.population", "need 1 <= N <= 1e9");
  cfg.population = static_cast<int>(pop);
  cfg.mutation = parse_mutation(need(model, "mutation", "model"), "model.mutation");
  if (model.contains("alleles") &&
      get_integer(model["alleles"], "model.alleles") != cfg.allele_count())
    fail("model.alleles", "does not match the mutation matrix size");

  const int r = cfg.allele_count();
  const json& init = need(j, "initial", "$");
  if (!init.is_array() || init.size() != static_cast<std::size_t>(r - 1))
    fail("initial", "expected an array of r-1 lattice counts");
  std::int64_t total = 0;
  for (std::size_t i = 0; i < init.size(); ++i) {
    const std::int64_t c =
        get_integer(init[i], "initial[" + std::to_string(i) + "]");
    if (c < 0) fail("initial", "counts must be nonnegative");
    total += c;
    cfg.initial_counts.push_back(static_cast<int>(c));
  }
  if (total > 2 * static_cast<std::int64_t>(cfg.population))
    fail("initial", "counts must sum to at most 2N");

  if (j.contains("horizons")) {
    const json& hs = j["horizons"];
    if (!hs.is_array() || hs.empty())
      fail("horizons", "expected a nonempty array");
    for (std::size_t i = 0; i < hs.size(); ++i) {
      const std::int64_t n =
          get_integer(hs[i], "horizons[" + std::to_string(i) + "]");
      if (n < 0 || n > (1 << 24)) fail("horizons", "need 0 <= n <= 2^24");
      if (!cfg.horizons.empty() && n < cfg.horizons.back())
        fail("horizons", "must be nondecreasing");
      cfg.horizons.push_back(static_cast<int>(n));
    }
  } else {
    cfg.horizons = {1};
  }

  if (j.contains("test_functions")) {
    const json& fs = j["test_functions"];
    if (!fs.is_array()) fail("test_functions", "expected an array");
    for (std::size_t i = 0; i < fs.size(); ++i)
      cfg.test_functions.push_back(
          parse_function(fs[i], r, "f" + std::to_string(i + 1)));
  }

  if (j.contains("norms")) {
    const json& ns = j["norms"];
    if (!ns.is_array() || ns.size() != 6)
      fail("norms", "expected exactly 6 values (sup|f^(m)|, m = 1..6)");
    std::array<double, 6> norms{};
    for (int m = 0; m < 6; ++m) {
      norms[m] = get_number(ns[m], "norms[" + std::to_string(m) + "]");
      if (norms[m] < 0) fail("norms", "norms must be nonnegative");
    }
    cfg.norms = norms;
  }

  if (j.contains("chain")) {
    const json& c = j["chain"];
    check_keys(c, "chain", {"paths", "state_cap", "mc_replicates"});
    if (c.contains("paths")) {
      const std::int64_t p = get_integer(c["paths"], "chain.paths");
      if (p < 0 || p > 100000) fail("chain.paths", "need 0 <= paths <= 1e5");
      cfg.chain.paths = static_cast<int>(p);
    }
    if (c.contains("state_cap")) {
      const std::int64_t cap = get_integer(c["state_cap"], "chain.state_cap");
      if (cap < 1) fail("chain.state_cap", "must be positive");
      cfg.chain.state_cap = static_cast<std::size_t>(cap);
    }
    if (c.contains("mc_replicates")) {
      cfg.chain.mc_replicates =
          get_integer(c["mc_replicates"], "chain.mc_replicates");
      if (cfg.chain.mc_replicates < 2)
        fail("chain.mc_replicates", "need at least 2");
    }
  }

  if (j.contains("diffusion")) {
    const json& d = j["diffusion"];
    check_keys(d, "diffusion", {"dt", "replicates", "paths"});
    if (d.contains("dt")) {
      cfg.diffusion.dt = get_number(d["dt"], "diffusion.dt");
      if (!(cfg.diffusion.dt > 0.0 && cfg.diffusion.dt <= 1.0))
        fail("diffusion.dt", "need 0 < dt <= 1");
    }
    if (d.contains("replicates")) {
      cfg.diffusion.replicates = get_integer(d["replicates"], "diffusion.replicates");
      if (cfg.diffusion.replicates < 2)
        fail("diffusion.replicates", "need at least 2");
    }
    if (d.contains("paths")) {
      const std::int64_t p = get_integer(d["paths"], "diffusion.paths");
      if (p < 0 || p > 100000) fail("diffusion.paths", "need 0 <= paths <= 1e5");
      cfg.diffusion.paths = static_cast<int>(p);
    }
  }

  if (j.contains("pde")) {
    const json& p = j["pde"];
    check_keys(p, "pde", {"cells", "dt"});
    if (p.contains("cells")) {
      const std::int64_t m = get_integer(p["cells"], "pde.cells");
      if (m < 64 || m > (1 << 20)) fail("pde.cells", "need 64 <= cells <= 2^20");
      cfg.pde.cells = static_cast<int>(m);
    }
    if (p.contains("dt")) {
      cfg.pde.dt = get_number(p["dt"], "pde.dt");
      if (!(cfg.pde.dt > 0.0 && cfg.pde.dt <= 1.0))
        fail("pde.dt", "need 0 < dt <= 1");
    }
  }

  const json& seed = need(j, "seed", "$");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() &&
                                      seed.get<std::int64_t>() >= 0))
    fail("seed", "expected a nonnegative integer");
  cfg.seed = seed.get<std::uint64_t>();

  if (j.contains("workers")) {
    const std::int64_t w = get_integer(j["workers"], "workers");
    if (w < 0 || w > 4096) fail("workers", "need 0 <= workers <= 4096");
    cfg.workers = static_cast<int>(w);
  }

  // LatticeState performs its own final validation (kept as the authority).
  (void)cfg.initial_state();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(j);
}

}  // namespace wfdiff::cli
