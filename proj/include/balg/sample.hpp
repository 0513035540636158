#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "balg/expr.hpp"

namespace balg {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPi = 3.141592653589793238462643383279;

/// Range of one sampled coordinate: an interval [lo, hi] or a circle [0, circumference).
struct Range {
  double lo = -1.0;
  double hi = 1.0;
  bool periodic = false;

  static Range interval(double lo, double hi) { return {lo, hi, false}; }
  static Range circle(double circumference = kTwoPi) { return {0.0, circumference, true}; }
  double width() const { return hi - lo; }
};

/// Points with |expr| < margin are rejected.
struct Exclusion {
  Expr expr;
  double margin = 1e-3;
};

struct SampleDomain {
  std::vector<std::string> coords;
  std::vector<Range> ranges;
  std::vector<Exclusion> exclusions;
  /// Coordinates pinned to a fixed value (on-locus sampling).
  std::vector<std::pair<std::string, double>> fixed;
  std::uint64_t seed = 42;
  int count = 1000;

  void add(const std::string& name, Range r);
  void exclude(const Expr& e, double margin = 1e-3);
  void pin(const std::string& name, double value);
  SampleDomain with_count(int n) const;
  SampleDomain with_seed(std::uint64_t s) const;

  /// Deterministic sample set; throws EmptyDomain when nothing survives the exclusions.
  std::vector<Point> points() const;
};

/// Uniform double in [0, 1) from a 64-bit generator output.
double unit_interval(std::uint64_t bits);

struct EquivReport {
  double max_abs = 0.0;
  double max_rel = 0.0;
  double max_scaled = 0.0;  ///< max |a-b| / max(1, |a|, |b|); compared against tol
  bool pass = true;
  Point witness;            ///< point of largest scaled deviation
  int used = 0;
  int skipped = 0;          ///< samples where either side raised DomainError
};

/// Compare two expressions on the domain's samples.
EquivReport numeric_equiv(const Expr& e1, const Expr& e2, const SampleDomain& dom, double tol);

}  // namespace balg
