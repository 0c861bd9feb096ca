#pragma once

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "evenproj/io.hpp"

namespace evenproj {

struct CaseResult {
  std::string suite;
  std::string name;
  Json inputs = Json::object();
  Json computed = Json::object();
  Json checks = Json::object();  // name -> bool
  bool pass = false;
  std::string error;  // "<kind>: message" when the case aborted

  std::string key() const { return suite + "/" + name; }
};

struct Report {
  std::vector<CaseResult> cases;

  int passed() const {
    return static_cast<int>(std::count_if(cases.begin(), cases.end(), [](const CaseResult& c) { return c.pass; }));
  }
  int failed() const { return static_cast<int>(cases.size()) - passed(); }
  void sort() {
    std::stable_sort(cases.begin(), cases.end(), [](const CaseResult& a, const CaseResult& b) { return a.key() < b.key(); });
  }
  void append(const std::vector<CaseResult>& more) { cases.insert(cases.end(), more.begin(), more.end()); }
};

/// FNV-1a over the canonical JSON text of the inputs.
inline std::string digest(const Json& j) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

/// Case passes iff it did not abort and every check is true.
inline void finalize(CaseResult& c) {
  c.pass = c.error.empty();
  for (auto& [k, v] : c.checks.items())
    if (!v.is_boolean() || !v.get<bool>()) c.pass = false;
}

inline Json case_to_json(const CaseResult& c) {
  Json j;
  j["suite"] = c.suite;
  j["name"] = c.name;
  j["inputs_digest"] = digest(c.inputs);
  j["inputs"] = c.inputs;
  j["computed"] = c.computed;
  j["checks"] = c.checks;
  j["pass"] = c.pass;
  if (!c.error.empty()) j["error"] = c.error;
  return j;
}

inline Json report_to_json(const Report& r) {
  Json cases = Json::array();
  for (const auto& c : r.cases) cases.push_back(case_to_json(c));
  Json j;
  j["cases"] = cases;
  j["summary"] = {{"pass", r.passed()}, {"fail", r.failed()}};
  return j;
}

inline Report report_from_json(const Json& j) {
  Report r;
  const Json& cases = io::field(j, "cases", "");
  for (size_t i = 0; i < cases.size(); ++i) {
    const std::string w = "/cases/" + std::to_string(i);
    const Json& cj = cases[i];
    CaseResult c;
    c.suite = io::get<std::string>(io::field(cj, "suite", w), w + "/suite");
    c.name = io::get<std::string>(io::field(cj, "name", w), w + "/name");
    c.inputs = io::field(cj, "inputs", w);
    c.computed = io::field(cj, "computed", w);
    c.checks = io::field(cj, "checks", w);
    c.pass = io::get<bool>(io::field(cj, "pass", w), w + "/pass");
    if (cj.contains("error")) c.error = io::get<std::string>(cj.at("error"), w + "/error");
    r.cases.push_back(c);
  }
  return r;
}

/// Single-line JSON with ", " and ": " separators.
inline void write_compact(std::ostream& os, const Json& j) {
  if (j.is_object()) {
    os << '{';
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) os << ", ";
      first = false;
      os << Json(it.key()).dump() << ": ";
      write_compact(os, it.value());
    }
    os << '}';
  } else if (j.is_array()) {
    os << '[';
    for (size_t i = 0; i < j.size(); ++i) {
      if (i) os << ", ";
      write_compact(os, j[i]);
    }
    os << ']';
  } else {
    os << j.dump();
  }
}

inline std::string to_compact(const Json& j) {
  std::ostringstream os;
  write_compact(os, j);
  return os.str();
}

inline std::string emit_json(const Report& r) { return to_compact(report_to_json(r)) + "\n"; }

namespace detail {

inline void flatten(const Json& j, const std::string& prefix, std::map<std::string, std::string>& out) {
  if (j.is_object() && !j.empty()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (j.is_string()) {
    out[prefix] = j.get<std::string>();
  } else {
    out[prefix] = to_compact(j);
  }
}

inline std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace detail

/// One row per case; suite, name, pass, error first, then the sorted union of
/// flattened computed.* and checks.* columns.
inline std::string emit_csv(const Report& r) {
  std::vector<std::map<std::string, std::string>> rows;
  std::set<std::string> columns;
  for (const auto& c : r.cases) {
    std::map<std::string, std::string> row;
    detail::flatten(c.computed, "computed", row);
    detail::flatten(c.checks, "checks", row);
    for (auto& [k, v] : row) columns.insert(k);
    row["suite"] = c.suite;
    row["name"] = c.name;
    row["pass"] = c.pass ? "true" : "false";
    row["error"] = c.error;
    rows.push_back(row);
  }
  std::vector<std::string> header = {"suite", "name", "pass", "error"};
  header.insert(header.end(), columns.begin(), columns.end());
  std::ostringstream os;
  for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << detail::csv_cell(header[i]);
  os << "\n";
  for (auto& row : rows) {
    for (size_t i = 0; i < header.size(); ++i) {
      auto it = row.find(header[i]);
      os << (i ? "," : "") << (it == row.end() ? "" : detail::csv_cell(it->second));
    }
    os << "\n";
  }
  return os.str();
}

/// Flattened key/value CSV for a single JSON object.
inline std::string emit_csv(const Json& j) {
  std::map<std::string, std::string> row;
  detail::flatten(j, "", row);
  std::ostringstream os;
  bool first = true;
  for (auto& [k, v] : row) os << (std::exchange(first, false) ? "" : ",") << detail::csv_cell(k);
  os << "\n";
  first = true;
  for (auto& [k, v] : row) os << (std::exchange(first, false) ? "" : ",") << detail::csv_cell(v);
  os << "\n";
  return os.str();
}

}  // namespace evenproj
