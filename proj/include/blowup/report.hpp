#ifndef BLOWUP_REPORT_HPP
#define BLOWUP_REPORT_HPP

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace blowup {

enum class Verdict { Pass, Fail, Inconclusive, Inapplicable };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
    case Verdict::Inapplicable: return "inapplicable";
  }
  return "?";
}

/// Outcome of a theorem or inequality check.
struct VerificationReport {
  std::string check_name;
  std::map<std::string, double> parameters;
  std::map<std::string, std::string> labels;
  std::map<std::string, double> measured;
  std::map<std::string, double> tolerances;
  double lhs = std::numeric_limits<double>::quiet_NaN();
  double rhs_or_calibration = std::numeric_limits<double>::quiet_NaN();
  double margin_or_ratio = std::numeric_limits<double>::quiet_NaN();
  Verdict verdict = Verdict::Inconclusive;
  std::vector<std::string> notes;

  bool passed() const { return verdict == Verdict::Pass; }

  VerificationReport& note(std::string s) {
    notes.push_back(std::move(s));
    return *this;
  }
};

namespace detail {
inline nlohmann::json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}
}  // namespace detail

inline nlohmann::json to_json(const VerificationReport& r) {
  nlohmann::json j;
  j["proposition"] = r.check_name;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : r.parameters) params[k] = detail::number_or_null(v);
  for (const auto& [k, v] : r.labels) params[k] = v;
  j["parameters"] = params;
  j["lhs"] = detail::number_or_null(r.lhs);
  j["rhs_or_calibration"] = detail::number_or_null(r.rhs_or_calibration);
  j["margin_or_ratio"] = detail::number_or_null(r.margin_or_ratio);
  j["verdict"] = to_string(r.verdict);
  nlohmann::json tol = nlohmann::json::object();
  for (const auto& [k, v] : r.tolerances) tol[k] = detail::number_or_null(v);
  j["tolerances"] = tol;
  nlohmann::json meas = nlohmann::json::object();
  for (const auto& [k, v] : r.measured) meas[k] = detail::number_or_null(v);
  j["measured"] = meas;
  j["notes"] = r.notes;
  return j;
}

}  // namespace blowup

#endif  // BLOWUP_REPORT_HPP
