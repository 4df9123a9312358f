#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wkam/cli/config.hpp"
#include "wkam/grid.hpp"

namespace wkam::cli {

std::uint64_t fnv1a64(std::string_view data);

/// 16 hex digits of the FNV-1a hash of the canonical (sorted-key) dump of the config.
std::string config_hash(const nlohmann::json& config);

/// Writes `<command>_<hash>[_<suffix>].{csv,json}` into the output directory.
class ReportWriter {
public:
  ReportWriter(const OutputConfig& output, std::string command, std::string hash);

  std::string path(const std::string& suffix, const std::string& extension) const;

  /// Rows are written with 17 significant digits.
  void csv(const std::string& suffix, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& rows) const;
  void csv_field(const std::string& suffix, const std::vector<std::string>& header, const GridField& a,
                 const GridField* b = nullptr) const;
  void json(const nlohmann::json& payload) const;

  const std::vector<std::string>& written() const { return written_; }

private:
  OutputConfig output_;
  std::string command_;
  std::string hash_;
  mutable std::vector<std::string> written_;
};

}  // namespace wkam::cli
