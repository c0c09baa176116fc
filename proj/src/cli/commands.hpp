#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace wfdiff::cli {

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;  // overrides the config seed
  std::optional<int> workers;         // overrides the config worker count
  std::string out_dir = ".";
};

// Exit codes: 0 pass, 1 violation, 2 inconclusive, 64 config/IO error.
int cmd_simulate(const CommonArgs& args);
int cmd_bounds(const CommonArgs& args);
int cmd_certify(const CommonArgs& args);
int cmd_verify(const CommonArgs& args);

}  // namespace wfdiff::cli
