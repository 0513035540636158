#pragma once

#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "balg/expr.hpp"
#include "balg/sample.hpp"

namespace balg {

/// Ordered coordinates; period 0 marks a line coordinate, > 0 a circle of that circumference.
struct Chart {
  std::vector<std::string> coords;
  std::vector<double> period;

  Chart() = default;
  explicit Chart(std::vector<std::string> c, std::vector<double> per = {});

  int dim() const { return static_cast<int>(coords.size()); }
  int index(const std::string& name) const;  // throws UnknownCoordinate
  bool has(const std::string& name) const;
  bool periodic(int i) const { return period[i] > 0; }
  Chart without(const std::string& name) const;
  Chart with(const std::string& name, double per = 0.0) const;
  /// Sampling domain: circles for periodic coordinates, [-lim, lim] otherwise.
  SampleDomain domain(double lim = 2.0) const;
  friend bool operator==(const Chart& a, const Chart& b) {
    return a.coords == b.coords && a.period == b.period;
  }
};

enum class AlgebroidKind {
  Tangent,
  BK,
  Elliptic,
  SelfCrossing,
  LieAlgebra,
  Product,
  Pullback,
  Foliation,
  Jet,
  Locus
};
std::string to_string(AlgebroidKind k);

/// One hypersurface component {f = 0} with f = z * unit, order k.
struct BKComponent {
  std::string z;
  int k = 1;
  Expr f;
};

struct DivisorData {
  enum class Type { None, BK, Elliptic, SelfCrossing };
  Type type = Type::None;
  std::vector<BKComponent> components;  // BK: one entry; SelfCrossing: several
  std::string x, y;                     // Elliptic pair

  /// Product of the defining functions (f^k, x^2+y^2, or prod f_i^k_i).
  Expr defining() const;
};

/// Lie algebroid over a single chart, described by an anchor frame and structure functions.
class AlgebroidChart {
 public:
  AlgebroidKind kind = AlgebroidKind::Tangent;
  Chart chart;
  std::vector<std::string> labels;           // frame labels, one per generator
  std::vector<std::vector<Expr>> anchor;     // anchor[a][i] = dx_i(rho(e_a))
  std::vector<Expr> structure;               // c_{ab}^c at (a*r + b)*r + c
  DivisorData divisor;

  int rank() const { return static_cast<int>(labels.size()); }
  int dim() const { return chart.dim(); }
  const Expr& c(int a, int b, int cc) const { return structure[(a * rank() + b) * rank() + cc]; }
  int label_index(const std::string& label) const;  // throws UnknownCoordinate
  /// rho(e_a)(g)
  Expr rho(int a, const Expr& g) const;
  /// det of the square anchor matrix (rank == dim only).
  Expr anchor_det() const;
  /// Default sample domain of the chart.
  SampleDomain domain(double lim = 2.0) const { return chart.domain(lim); }
};

using AlgebroidPtr = std::shared_ptr<const AlgebroidChart>;

/// Cofactor-expansion determinant of a square Expr matrix.
Expr symbolic_det(const std::vector<std::vector<Expr>>& m);

AlgebroidPtr make_tangent(const Chart& chart);
/// b^k algebroid of {f = 0}; frame e_0 = f^k d_z, e_i = d_i - (d_i f / d_z f) d_z.
/// With `adapted`, f must depend on z only and vanish at z = 0.
AlgebroidPtr make_bk(const Chart& chart, const std::string& z, int k, const Expr& f, bool adapted = true);
AlgebroidPtr make_bk(const Chart& chart, const std::string& z, int k);
AlgebroidPtr make_elliptic(const Chart& chart, const std::string& x, const std::string& y);
AlgebroidPtr make_selfcrossing(const Chart& chart, const std::vector<BKComponent>& comps);
/// Constant structure constants c[a][b][c]; Jacobi identity checked (InvalidSpec otherwise).
AlgebroidPtr make_lie_algebra(const Chart& chart, const std::vector<std::string>& labels,
                              const std::vector<double>& c);
/// A x T R^m: appends coordinates (with periods) and their coordinate fields to the frame.
AlgebroidPtr make_product(const AlgebroidPtr& a, const std::vector<std::string>& coords,
                          const std::vector<double>& periods, AlgebroidKind kind = AlgebroidKind::Product);
AlgebroidPtr make_custom(AlgebroidKind kind, const Chart& chart, std::vector<std::string> labels,
                         std::vector<std::vector<Expr>> anchor, std::vector<Expr> structure);
/// Algebroid on Z = {z = 0} spanned by the frame elements other than e_0, restricted to z = 0.
AlgebroidPtr locus_algebroid(const AlgebroidPtr& a);

/// Structural description passed to build_algebroid.
struct AlgebroidSpec {
  std::string kind = "tangent";
  Chart chart;
  std::string z;
  int k = 1;
  Expr f;  // zero means "use z"
  std::string x, y;
  std::vector<BKComponent> components;
  std::vector<std::string> labels;
  std::vector<std::tuple<std::string, std::string, std::string, Rational>> brackets;
};
AlgebroidPtr build_algebroid(const AlgebroidSpec& spec);

/// Frame-coefficient vector.
struct Section {
  AlgebroidPtr A;
  std::vector<Expr> c;

  static Section basis(const AlgebroidPtr& A, int a);
  std::vector<double> eval(const Point& p) const;
};

/// Coefficients over strictly increasing multi-indices (lexicographic order).
struct AForm {
  AlgebroidPtr A;
  int p = 0;
  std::vector<Expr> c;

  static AForm zero(const AlgebroidPtr& A, int p);
  static AForm function(const AlgebroidPtr& A, const Expr& f);
  static AForm basis(const AlgebroidPtr& A, const std::vector<int>& idx);
  /// Coefficient on an arbitrary ordered index list (sign of sorting; 0 on repeats).
  Expr at(const std::vector<int>& idx) const;
  Expr& coef(const std::vector<int>& sorted_idx);
  const Expr& coef(const std::vector<int>& sorted_idx) const;
  std::vector<double> eval(const Point& p) const;
  bool structurally_zero() const;
  /// Same coefficients re-homed onto another algebroid of equal rank.
  AForm rehome(const AlgebroidPtr& B) const;
};

const std::vector<std::vector<int>>& subsets(int r, int p);
int subset_index(int r, const std::vector<int>& sorted_idx);
long binomial(int n, int k);

void check_same(const AlgebroidPtr& a, const AlgebroidPtr& b);

Section operator+(const Section& a, const Section& b);
Section operator-(const Section& a, const Section& b);
Section operator*(const Expr& f, const Section& a);
AForm operator+(const AForm& a, const AForm& b);
AForm operator-(const AForm& a, const AForm& b);
AForm operator*(const Expr& f, const AForm& a);

/// Vector-field components of rho(X).
std::vector<Expr> anchor_of(const Section& X);
/// rho(X)(f)
Expr apply(const Section& X, const Expr& f);
Section bracket(const Section& X, const Section& Y);
AForm d(const AForm& w);
AForm d(const AlgebroidPtr& A, const Expr& f);
AForm wedge(const AForm& a, const AForm& b);
AForm interior(const Section& X, const AForm& w);
/// Full contraction of a p-form with p sections.
Expr contract(const AForm& w, const std::vector<Section>& xs);
/// a ^ a ^ ... (n factors); n = 0 gives the constant 1.
AForm wedge_power(const AForm& a, int n);
/// Coefficient of alpha ^ (d alpha)^m on the top multi-index (rank = 2m+1).
Expr contact_volume(const AForm& alpha);

/// u = theta^0 coefficient at z = 0; beta = remaining coefficients at z = 0 on the locus algebroid.
struct LocusData {
  Expr u;
  AForm beta;
  AlgebroidPtr Z;
};
AForm residue(const AForm& w);
LocusData restrict_to_locus(const AForm& alpha);

/// Sampled structural invariants of an algebroid.
struct AlgebroidCheck {
  double jacobi = 0, leibniz = 0, anchor = 0, d_squared = 0;
  double det_off_min = 0;  // min |det| off the locus (divisor kinds)
  double det_on_max = 0;   // max |det| on the locus
  bool has_det = false;
};
AlgebroidCheck check_algebroid(const AlgebroidPtr& A, int trials = 10, int samples = 40, std::uint64_t seed = 42);

/// Deterministic random polynomial in the chart coordinates (trig in periodic ones).
Expr random_function(const Chart& chart, std::uint64_t& state, int degree = 2);

}  // namespace balg
