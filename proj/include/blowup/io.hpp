#ifndef BLOWUP_IO_HPP
#define BLOWUP_IO_HPP

#include <boost/version.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "blowup/report.hpp"
#include "json.hpp"

namespace blowup::harness {

inline constexpr const char* kVersion = "1.0.0";

struct OutputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Creates the directory if needed and probes it with a scratch file.
inline void ensure_writable(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto probe = dir / ".write_probe";
  std::ofstream f(probe);
  if (ec || !f) throw OutputError("output not writable");
  f.close();
  std::filesystem::remove(probe, ec);
}

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Column-major CSV with 17 significant digits; all columns must have equal length.
inline void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw std::invalid_argument("csv header and columns differ in size");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns) {
    if (c.size() != rows) throw std::invalid_argument("csv columns differ in length");
  }
  std::ofstream out(path);
  if (!out) throw OutputError("output not writable");
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << format_number(columns[j][i]);
    out << '\n';
  }
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw OutputError("output not writable");
  out << j.dump(2) << '\n';
}

inline nlohmann::json version_info() {
  return {{"blowup", kVersion},
          {"compiler", __VERSION__},
          {"cxx_standard", static_cast<long>(__cplusplus)},
          {"boost", BOOST_LIB_VERSION},
          {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                       "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

inline nlohmann::json verdict_table(const std::vector<VerificationReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) arr.push_back({{"check", r.check_name}, {"verdict", to_string(r.verdict)}});
  return arr;
}

}  // namespace blowup::harness

#endif  // BLOWUP_IO_HPP
