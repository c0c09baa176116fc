#include <cstdlib>
#include <sstream>
#include <string>

#include "cli/config.hpp"
#include "cli/reports.hpp"
#include "doctest.h"

using namespace wfdiff;
using namespace wfdiff::cli;
using nlohmann::json;

namespace {

json base_config() {
  return json{
      {"schema_version", 1},
      {"model",
       {{"alleles", 2},
        {"population", 10},
        {"mutation", {{"last_row", {0.1}}, {"into_last", {0.05}}}}}},
      {"initial", {10}},
      {"horizons", {1, 5, 20}},
      {"test_functions",
       {{{"name", "square"},
         {"terms", {{{"powers", {2}}, {"coeff", 1.0}}}}}}},
      {"seed", 42},
  };
}

bool fails_at(const json& j, const std::string& where) {
  try {
    (void)parse_config(j);
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    const bool prefixed = msg.rfind("config error at ", 0) == 0;
    CHECK(prefixed);
    return prefixed && msg.find(where) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_CASE("a complete two-allele config parses into the expected fields") {
  const ExperimentConfig cfg = parse_config(base_config());
  CHECK(cfg.schema_version == 1);
  CHECK(cfg.population == 10);
  CHECK(cfg.allele_count() == 2);
  // last_row holds the rates out of the last allele (u_{r,i}); into_last the
  // rates into it (u_{i,r}).
  CHECK(cfg.mutation.rate(1, 0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(cfg.mutation.rate(0, 1) == doctest::Approx(0.05).epsilon(1e-15));
  REQUIRE(cfg.initial_counts.size() == 1);
  CHECK(cfg.initial_counts[0] == 10);
  CHECK(cfg.horizons == std::vector<int>{1, 5, 20});
  REQUIRE(cfg.test_functions.size() == 1);
  CHECK(cfg.test_functions[0].name == "square");
  Eigen::VectorXd x(1);
  x << 0.3;
  CHECK(cfg.test_functions[0].poly(x) ==
        doctest::Approx(0.09).epsilon(1e-15));
  CHECK(cfg.seed == 42);
  CHECK(cfg.workers == 1);
  // Defaults survive when sections are omitted.
  CHECK(cfg.chain.state_cap == kDefaultStateCap);
  CHECK(cfg.diffusion.dt == doctest::Approx(1.0 / 64.0));
  CHECK(cfg.pde.cells == 1024);
  CHECK(cfg.initial_state().two_n() == 20);
}

TEST_CASE("mutation accepts a full matrix as the alternative form") {
  json j = base_config();
  j["model"]["alleles"] = 3;
  // Off-diagonal column entries must match the last row (structural
  // mutation assumption), so each column i is constant u_{r,i} off-diagonal.
  j["model"]["mutation"] = {
      {"matrix", {{0.0, 0.3, 0.05}, {0.1, 0.0, 0.05}, {0.1, 0.3, 0.0}}}};
  j["initial"] = {4, 6};
  j["test_functions"] = json::array(
      {{{"terms", {{{"powers", {1, 1}}, {"coeff", 2.0}}}}}});
  const ExperimentConfig cfg = parse_config(j);
  CHECK(cfg.allele_count() == 3);
  CHECK(cfg.mutation.rate(2, 1) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(cfg.test_functions[0].name == "f1");
}

TEST_CASE("mutation rejects mixing or omitting both forms") {
  json j = base_config();
  j["model"]["mutation"] = {{"last_row", {0.1}},
                            {"into_last", {0.05}},
                            {"matrix", {{0.0, 0.1}, {0.05, 0.0}}}};
  CHECK(fails_at(j, "model.mutation"));
  j["model"]["mutation"] = json::object();
  CHECK(fails_at(j, "model.mutation"));
}

TEST_CASE("unknown keys are rejected with their path") {
  json j = base_config();
  j["typo_key"] = 1;
  CHECK(fails_at(j, "unknown key 'typo_key'"));

  j = base_config();
  j["model"]["drift"] = 1;
  CHECK(fails_at(j, "unknown key 'drift'"));

  j = base_config();
  j["chain"] = {{"replicates", 10}};  // right name is mc_replicates
  CHECK(fails_at(j, "unknown key 'replicates'"));
}

TEST_CASE("schema version gate") {
  json j = base_config();
  j["schema_version"] = 2;
  CHECK(fails_at(j, "schema_version"));
  j.erase("schema_version");
  CHECK(fails_at(j, "schema_version"));
}

TEST_CASE("horizons must be nonnegative and nondecreasing") {
  json j = base_config();
  j["horizons"] = {5, 3};
  CHECK(fails_at(j, "horizons"));
  j["horizons"] = {-1};
  CHECK(fails_at(j, "horizons"));
  j["horizons"] = json::array();
  CHECK(fails_at(j, "horizons"));
  j.erase("horizons");
  CHECK(parse_config(j).horizons == std::vector<int>{1});
}

TEST_CASE("initial counts are validated against the lattice") {
  json j = base_config();
  j["initial"] = {10, 4};  // wrong arity for r = 2
  CHECK(fails_at(j, "initial"));
  j["initial"] = {-2};
  CHECK(fails_at(j, "initial"));
  j["initial"] = {21};  // exceeds 2N = 20
  CHECK(fails_at(j, "initial"));
  j["initial"] = {20};
  CHECK(parse_config(j).initial_state().count(0) == 20);
}

TEST_CASE("norm overrides require exactly six nonnegative entries") {
  json j = base_config();
  j["norms"] = {1.0, 2.0, 3.0};
  CHECK(fails_at(j, "norms"));
  j["norms"] = {1.0, 2.0, 3.0, 4.0, 5.0, -6.0};
  CHECK(fails_at(j, "norms"));
  j["norms"] = {1.0, 2.0, 0.0, 0.0, 0.0, 0.0};
  const ExperimentConfig cfg = parse_config(j);
  REQUIRE(cfg.norms.has_value());
  CHECK((*cfg.norms)[1] == 2.0);
}

TEST_CASE("polynomial terms are bounded to machine-supported degrees") {
  json j = base_config();
  j["test_functions"] = json::array(
      {{{"terms", {{{"powers", {7}}, {"coeff", 1.0}}}}}});
  CHECK(fails_at(j, "powers"));
  j["test_functions"] = json::array(
      {{{"terms", {{{"powers", {-1}}, {"coeff", 1.0}}}}}});
  CHECK(fails_at(j, "powers"));
  j["test_functions"] = json::array(
      {{{"terms", {{{"powers", {1, 2}}, {"coeff", 1.0}}}}}});  // arity r-1 = 1
  CHECK(fails_at(j, "powers"));
  j["test_functions"] = json::array(
      {{{"r", 3}, {"terms", {{{"powers", {1}}, {"coeff", 1.0}}}}}});
  CHECK(fails_at(j, ".r"));
}

TEST_CASE("numeric budgets have guarded ranges") {
  json j = base_config();
  j["pde"] = {{"cells", 32}};
  CHECK(fails_at(j, "pde.cells"));
  j["pde"] = {{"dt", 0.0}};
  CHECK(fails_at(j, "pde.dt"));
  j = base_config();
  j["diffusion"] = {{"dt", 1.5}};
  CHECK(fails_at(j, "diffusion.dt"));
  j = base_config();
  j["chain"] = {{"mc_replicates", 1}};
  CHECK(fails_at(j, "chain.mc_replicates"));
  j = base_config();
  j["workers"] = -1;
  CHECK(fails_at(j, "workers"));
  j["workers"] = 8;
  CHECK(parse_config(j).workers == 8);
}

TEST_CASE("seed accepts large unsigned values") {
  json j = base_config();
  j["seed"] = 18446744073709551615ull;
  CHECK(parse_config(j).seed == 18446744073709551615ull);
  j["seed"] = -3;
  CHECK(fails_at(j, "seed"));
}

// ---------------------------------------------------------------------------
// reports
// ---------------------------------------------------------------------------

TEST_CASE("format_double is %.17g and round-trips") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(-0.0) == "-0");
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, 1e-300, -7.25}) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("classify_gap separates dominated, inconclusive, and violated") {
  GapEstimate g;
  g.bound.total = 1.0;
  g.pde_slack = 0.1;

  g.gap = 1.05;  // below total + slack
  g.gap_error_band = 0.0;
  classify_gap(g);
  CHECK(g.status == "dominated");
  CHECK(g.dominated);

  g.gap = 1.2;  // above the limit, but within 3 error bands of it
  g.gap_error_band = 0.05;
  classify_gap(g);
  CHECK(g.status == "inconclusive");
  CHECK_FALSE(g.dominated);

  g.gap = 1.5;  // above the limit even after subtracting 3 bands
  g.gap_error_band = 0.05;
  classify_gap(g);
  CHECK(g.status == "violated");
  CHECK_FALSE(g.dominated);

  g.gap = 1.1;  // exactly at the limit counts as dominated
  g.gap_error_band = 0.0;
  classify_gap(g);
  CHECK(g.status == "dominated");
}

TEST_CASE("gap JSON carries every field of the estimate") {
  GapEstimate g;
  g.function = "square";
  g.horizon = 5;
  g.chain_method = "exact";
  g.chain_value = 0.25;
  g.diffusion_method = "pde";
  g.diffusion_value = 0.2501;
  g.gap = 1e-4;
  g.pde_slack = 1e-6;
  g.bound.regime = "two_allele";
  g.bound.allele_count = 2;
  g.bound.population = 10;
  g.bound.horizon = 5;
  g.bound.total = 0.02;
  classify_gap(g);
  const json j = gap_estimate_json(g);
  CHECK(j["function"] == "square");
  CHECK(j["horizon"] == 5);
  CHECK(j["chain"]["method"] == "exact");
  CHECK(j["diffusion"]["method"] == "pde");
  CHECK(j["gap"] == 1e-4);
  CHECK(j["bound"]["total"] == 0.02);
  CHECK(j["status"] == "dominated");
  CHECK(j["dominated"] == true);
}

TEST_CASE("CSV cells with commas or quotes are escaped") {
  const std::string path = "/tmp/wfdiff_csv_test.csv";
  {
    CsvWriter w(path, {"a", "b"});
    w.row({"plain", "has,comma"});
    w.row({"has\"quote", "x"});
  }
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "a,b\nplain,\"has,comma\"\n\"has\"\"quote\",x\n");
  std::remove(path.c_str());
}
