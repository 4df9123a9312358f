#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace wkam::cli {

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"orbits", "critical", "barrier", "viscous", "sweep",
                                              "rescale", "example", "stochastic", "all"};
  return names;
}

struct RunOptions {
  std::string config_path;
  std::string command = "all";
  unsigned workers = 0;                 // 0: machine parallelism
  std::optional<std::string> out_dir;   // overrides output.directory
  std::optional<std::uint64_t> seed;    // overrides stochastic.seed
};

/// Exit status: 0 when every verdict passes, 2 when any verdict fails, 1 on
/// configuration or execution errors (message on `err`).
int run_config(const RunOptions& options, std::ostream& out, std::ostream& err);

/// Version string compiled into reports.
const char* version();

}  // namespace wkam::cli
