#include "wkam/cli/reports.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "wkam/error.hpp"

namespace wkam::cli {

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const nlohmann::json& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
  return buf;
}

ReportWriter::ReportWriter(const OutputConfig& output, std::string command, std::string hash)
    : output_(output), command_(std::move(command)), hash_(std::move(hash)) {
  std::error_code ec;
  std::filesystem::create_directories(output_.directory, ec);
  if (ec || !std::filesystem::is_directory(output_.directory))
    throw ConfigurationError("output.directory: cannot create " + output_.directory);
}

std::string ReportWriter::path(const std::string& suffix, const std::string& extension) const {
  std::string name = command_ + "_" + hash_;
  if (!suffix.empty()) name += "_" + suffix;
  return (std::filesystem::path(output_.directory) / (name + "." + extension)).string();
}

namespace {

std::ofstream open_or_throw(const std::string& p) {
  std::ofstream out(p);
  if (!out) throw ConfigurationError("output.directory: cannot write " + p);
  return out;
}

void write_header(std::ofstream& out, const std::vector<std::string>& header) {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
}

void write_number(std::ofstream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

void ReportWriter::csv(const std::string& suffix, const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& rows) const {
  if (!output_.csv()) return;
  const std::string p = path(suffix, "csv");
  auto out = open_or_throw(p);
  write_header(out, header);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      write_number(out, row[i]);
    }
    out << '\n';
  }
  if (!out) throw ConfigurationError("output.directory: write failed for " + p);
  written_.push_back(p);
}

void ReportWriter::csv_field(const std::string& suffix, const std::vector<std::string>& header, const GridField& a,
                             const GridField* b) const {
  if (!output_.csv()) return;
  const std::string p = path(suffix, "csv");
  auto out = open_or_throw(p);
  write_header(out, header);
  for (int r = 0; r < a.nt; ++r)
    for (int i = 0; i < a.nx; ++i) {
      out << i << ',' << r << ',';
      write_number(out, double(i) / a.nx);
      out << ',';
      write_number(out, double(r) / a.nt);
      out << ',';
      write_number(out, a.at(i, r));
      if (b) {
        out << ',';
        write_number(out, b->at(i, r));
      }
      out << '\n';
    }
  if (!out) throw ConfigurationError("output.directory: write failed for " + p);
  written_.push_back(p);
}

void ReportWriter::json(const nlohmann::json& payload) const {
  if (!output_.json()) return;
  const std::string p = path("", "json");
  auto out = open_or_throw(p);
  out << payload.dump(2) << '\n';
  if (!out) throw ConfigurationError("output.directory: write failed for " + p);
  written_.push_back(p);
}

}  // namespace wkam::cli
