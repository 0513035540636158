#include "balg/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "balg/errors.hpp"

namespace balg {

namespace {

using json = nlohmann::ordered_json;

const char* bound_name(Bound b) {
  switch (b) {
    case Bound::Upper:
      return "upper";
    case Bound::Lower:
      return "lower";
    case Bound::Exact:
      return "exact";
  }
  return "upper";
}

std::string num(double v) { return json(v).dump(); }

}  // namespace

Check upper(const std::string& name, double residual, double tol, std::string note) {
  return {name, residual, tol, Bound::Upper, std::isfinite(residual) && residual < tol, std::move(note)};
}

Check lower(const std::string& name, double residual, double tol, std::string note) {
  return {name, residual, tol, Bound::Lower, !std::isnan(residual) && residual > tol, std::move(note)};
}

Check exact(const std::string& name, double residual, double expected, std::string note) {
  return {name, residual, expected, Bound::Exact, residual == expected, std::move(note)};
}

bool Report::pass() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

void Report::absorb(const Report& other, const std::string& prefix) {
  for (auto c : other.checks) {
    c.name = prefix + c.name;
    checks.push_back(std::move(c));
  }
  artifacts.insert(artifacts.end(), other.artifacts.begin(), other.artifacts.end());
}

json report_json(const Report& r) {
  json j;
  j["command"] = r.command;
  j["scene"] = r.scene;
  j["digest"] = r.digest;
  j["pass"] = r.pass();
  json cs = json::array();
  for (const auto& c : r.checks) {
    json o;
    o["name"] = c.name;
    o["residual"] = c.residual;
    o["tolerance"] = c.tolerance;
    o["bound"] = bound_name(c.bound);
    o["pass"] = c.pass;
    if (!c.note.empty()) o["note"] = c.note;
    cs.push_back(o);
  }
  j["checks"] = cs;
  j["artifacts"] = r.artifacts;
  j["data"] = r.data;
  return j;
}

std::string render_json(const Report& r) { return report_json(r).dump(2) + "\n"; }

std::string render_text(const Report& r) {
  std::ostringstream os;
  os << r.command << " " << r.scene << " digest " << r.digest << "\n";
  auto line = [&](const Check& c) {
    os << (c.pass ? "PASS " : "FAIL ") << c.name << " residual " << num(c.residual) << " " << bound_name(c.bound)
       << " " << num(c.tolerance);
    if (!c.note.empty()) os << " (" << c.note << ")";
    os << "\n";
  };
  for (const auto& c : r.checks) {
    if (!c.pass) line(c);
  }
  for (const auto& c : r.checks) {
    if (c.pass) line(c);
  }
  for (const auto& a : r.artifacts) os << "artifact " << a << "\n";
  os << (r.pass() ? "PASS" : "FAIL") << " " << r.checks.size() << " checks\n";
  return os.str();
}

std::string render(const Report& r, const std::string& format) {
  if (format == "json") return render_json(r);
  if (format == "text") return render_text(r);
  throw InvalidSpec("unknown report format '" + format + "'");
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IOError("write failed for '" + path + "'");
}

int exit_code(const Report& r) { return r.pass() ? 0 : 1; }

}  // namespace balg
