#include "balg/sample.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace balg {

double unit_interval(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

void SampleDomain::add(const std::string& name, Range r) {
  coords.push_back(name);
  ranges.push_back(r);
}

void SampleDomain::exclude(const Expr& e, double margin) { exclusions.push_back({e, margin}); }

void SampleDomain::pin(const std::string& name, double value) {
  for (auto& [n, v] : fixed) {
    if (n == name) {
      v = value;
      return;
    }
  }
  fixed.emplace_back(name, value);
}

SampleDomain SampleDomain::with_count(int n) const {
  SampleDomain d = *this;
  d.count = n;
  return d;
}

SampleDomain SampleDomain::with_seed(std::uint64_t s) const {
  SampleDomain d = *this;
  d.seed = s;
  return d;
}

std::vector<Point> SampleDomain::points() const {
  std::mt19937_64 rng(seed);
  std::vector<Point> out;
  out.reserve(count);
  Point p;
  p.names = coords;
  p.values.assign(coords.size(), 0.0);
  for (const auto& [n, v] : fixed) p.set(n, v);
  const long max_attempts = static_cast<long>(count) * 200 + 1000;
  for (long attempt = 0; attempt < max_attempts && static_cast<int>(out.size()) < count; ++attempt) {
    for (std::size_t i = 0; i < coords.size(); ++i) {
      double u = unit_interval(rng());
      p.values[i] = ranges[i].lo + u * ranges[i].width();
    }
    for (const auto& [n, v] : fixed) p.set(n, v);
    bool ok = true;
    for (const auto& ex : exclusions) {
      try {
        if (std::fabs(evaluate(ex.expr, p)) < ex.margin) {
          ok = false;
          break;
        }
      } catch (const DomainError&) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(p);
  }
  if (out.empty()) throw EmptyDomain("all samples rejected by exclusions");
  return out;
}

EquivReport numeric_equiv(const Expr& e1, const Expr& e2, const SampleDomain& dom, double tol) {
  EquivReport r;
  for (const auto& p : dom.points()) {
    double a = 0, b = 0;
    try {
      a = evaluate(e1, p);
      b = evaluate(e2, p);
    } catch (const DomainError&) {
      ++r.skipped;
      continue;
    }
    ++r.used;
    double d = std::fabs(a - b);
    double mag = std::max(std::fabs(a), std::fabs(b));
    double rel = mag > 0 ? d / mag : 0.0;
    double scaled = d / std::max(1.0, mag);
    r.max_abs = std::max(r.max_abs, d);
    r.max_rel = std::max(r.max_rel, rel);
    if (scaled > r.max_scaled || r.witness.names.empty()) {
      if (scaled >= r.max_scaled) r.witness = p;
      r.max_scaled = std::max(r.max_scaled, scaled);
    }
  }
  if (r.used == 0) throw EmptyDomain("no sample point where both expressions are defined");
  r.pass = r.max_scaled <= tol;
  return r;
}

}  // namespace balg
