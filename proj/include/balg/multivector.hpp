#pragma once

#include <map>
#include <string>
#include <vector>

#include "balg/algebroid.hpp"
#include "balg/numeric.hpp"

namespace balg {

/// Multivector field on a chart: coefficients over strictly increasing coordinate multi-indices.
struct Multivector {
  Chart chart;
  int p = 0;
  std::vector<Expr> c;

  static Multivector zero(const Chart& chart, int p);
  static Multivector function(const Chart& chart, const Expr& f);
  static Multivector vector_field(const Chart& chart, const std::vector<Expr>& v);
  /// d/dx_{i1} ^ ... ^ d/dx_{ip} by coordinate names.
  static Multivector basis(const Chart& chart, const std::vector<std::string>& names);

  /// Coefficient on an arbitrary ordered index list (sign of sorting; 0 on repeats).
  Expr at(const std::vector<int>& idx) const;
  Expr& coef(const std::vector<int>& sorted_idx);
  const Expr& coef(const std::vector<int>& sorted_idx) const;
  bool structurally_zero() const;
  /// Full antisymmetric matrix of a bivector.
  Mat matrix(const Point& p) const;
  std::vector<double> eval(const Point& p) const;
  /// Same coefficients on a chart that contains this one's coordinates (in any order).
  Multivector extend(const Chart& target) const;
  std::string str() const;
};

Multivector operator+(const Multivector& a, const Multivector& b);
Multivector operator-(const Multivector& a, const Multivector& b);
Multivector operator*(const Expr& f, const Multivector& a);

Multivector wedge(const Multivector& a, const Multivector& b);
/// Schouten-Nijenhuis bracket; [X, Y] is the Lie bracket and [X, P] = L_X P.
Multivector schouten(const Multivector& P, const Multivector& Q);
/// P(a_1, ..., a_p) for 1-forms given by coordinate components.
Expr contract(const Multivector& P, const std::vector<std::vector<Expr>>& forms);
/// Pi^sharp(a) = Pi(a, .) for a bivector.
std::vector<Expr> sharp(const Multivector& P, const std::vector<Expr>& a);
/// Sum_i d_i X^i.
Expr divergence(const Multivector& X);
Multivector substitute(const Multivector& P, const std::map<std::string, Expr>& repl);

/// Pushforward along y = F(x): F in source coordinates, G expresses source coordinates in target ones.
Multivector change_coordinates(const Multivector& P, const Chart& target, const std::vector<Expr>& F,
                               const std::map<std::string, Expr>& G);

/// Image under the anchor of a frame multivector (coefficients over frame multi-indices).
Multivector push_anchor(const AlgebroidPtr& A, int p, const std::vector<Expr>& frame_coefs);

/// Max coefficient magnitude over sample points (DomainError points skipped).
double max_abs(const Multivector& P, const std::vector<Point>& pts);

}  // namespace balg
