#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace balg {

enum class Bound { Upper, Lower, Exact };

struct Check {
  std::string name;
  double residual = 0;
  double tolerance = 0;
  Bound bound = Bound::Upper;
  bool pass = false;
  std::string note;
};

/// residual < tol
Check upper(const std::string& name, double residual, double tol, std::string note = "");
/// residual > tol
Check lower(const std::string& name, double residual, double tol, std::string note = "");
/// residual == expected
Check exact(const std::string& name, double residual, double expected, std::string note = "");

struct Report {
  std::string command;
  std::string scene;
  std::string digest;
  std::vector<Check> checks;
  std::vector<std::string> artifacts;
  nlohmann::ordered_json data = nlohmann::ordered_json::object();

  bool pass() const;
  void add(Check c) { checks.push_back(std::move(c)); }
  /// Appends checks of another report with a name prefix.
  void absorb(const Report& other, const std::string& prefix);
};

nlohmann::ordered_json report_json(const Report& r);
std::string render_json(const Report& r);
/// Failing checks first; numbers rendered exactly as in the JSON form.
std::string render_text(const Report& r);
std::string render(const Report& r, const std::string& format);
void write_file(const std::string& path, const std::string& content);
int exit_code(const Report& r);

}  // namespace balg
