// Machine-readable report plumbing: deterministic JSON/CSV serialization and
// the per-(function, horizon) gap-vs-bound verdict record.
#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wfdiff/bounds.hpp"

namespace wfdiff::cli {

// Fixed "%.17g" rendering: deterministic and round-trips doubles.
std::string format_double(double v);

nlohmann::json bound_report_json(const BoundReport& report);

struct GapEstimate {
  std::string function;
  int horizon = 0;
  std::string chain_method;  // "exact" | "monte_carlo"
  double chain_value = 0.0;
  double chain_se = 0.0;
  std::string diffusion_method;  // "pde" | "monte_carlo"
  double diffusion_value = 0.0;
  double diffusion_se = 0.0;
  double gap = 0.0;
  double gap_error_band = 0.0;  // SEs propagated in quadrature
  double pde_slack = 0.0;       // discretization allowance on the PDE route
  BoundReport bound;
  std::string status;  // "dominated" | "inconclusive" | "violated"
  bool dominated = false;
  bool capacity_fallback = false;
};

// Sets status/dominated: violated when gap - 3*band exceeds total + slack,
// inconclusive when only the point estimate does, dominated otherwise.
void classify_gap(GapEstimate& g);

nlohmann::json gap_estimate_json(const GapEstimate& g);

void write_json_file(const std::string& path, const nlohmann::json& j);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(std::int64_t v) { return std::to_string(v); }

 private:
  void write_line(const std::vector<std::string>& cells);
  std::ofstream out_;
};

}  // namespace wfdiff::cli
