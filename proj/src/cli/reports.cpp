#include "reports.hpp"

#include <cstdio>
#include <stdexcept>

namespace wfdiff::cli {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json bound_report_json(const BoundReport& report) {
  nlohmann::json per_m = nlohmann::json::array();
  for (const BoundTerm& t : report.terms) {
    per_m.push_back({{"m", t.order},
                     {"lambda_min", t.rate},
                     {"C", t.coefficient},
                     {"factor", t.factor},
                     {"norm", t.norm},
                     {"contribution", t.contribution}});
  }
  return {{"regime", report.regime},
          {"r", report.allele_count},
          {"N", report.population},
          {"n", report.horizon},
          {"per_m", per_m},
          {"total", report.total}};
}

void classify_gap(GapEstimate& g) {
  const double limit = g.bound.total + g.pde_slack;
  if (g.gap - 3.0 * g.gap_error_band > limit) {
    g.status = "violated";
  } else if (g.gap > limit) {
    g.status = "inconclusive";
  } else {
    g.status = "dominated";
  }
  g.dominated = (g.status == "dominated");
}

nlohmann::json gap_estimate_json(const GapEstimate& g) {
  return {{"function", g.function},
          {"horizon", g.horizon},
          {"chain",
           {{"method", g.chain_method},
            {"value", g.chain_value},
            {"std_error", g.chain_se}}},
          {"diffusion",
           {{"method", g.diffusion_method},
            {"value", g.diffusion_value},
            {"std_error", g.diffusion_se}}},
          {"gap", g.gap},
          {"gap_error_band", g.gap_error_band},
          {"pde_slack", g.pde_slack},
          {"bound", bound_report_json(g.bound)},
          {"status", g.status},
          {"dominated", g.dominated},
          {"capacity_fallback", g.capacity_fallback}};
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

CsvWriter::CsvWriter(const std::string& path,
                     const std::vector<std::string>& header)
    : out_(path, std::ios::binary) {
  if (!out_) throw std::runtime_error("cannot write " + path);
  write_line(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  write_line(cells);
}

void CsvWriter::write_line(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    const std::string& c = cells[i];
    if (c.find_first_of(",\"\n") != std::string::npos) {
      out_ << '"';
      for (char ch : c) {
        if (ch == '"') out_ << '"';
        out_ << ch;
      }
      out_ << '"';
    } else {
      out_ << c;
    }
  }
  out_ << '\n';
  if (!out_) throw std::runtime_error("failed writing CSV row");
}

}  // namespace wfdiff::cli
