#pragma once

#include <optional>
#include <string>
#include <vector>

#include "balg/algebroid.hpp"
#include "balg/numeric.hpp"

namespace balg {

struct Distribution {
  AlgebroidPtr A;
  std::vector<Section> span;
  int rank = 0;

  /// Kernel of a nonvanishing 1-form, spanned by the pairwise sections a_j e_i - a_i e_j.
  static Distribution kernel(const AForm& alpha);
  static Distribution spanned(const AlgebroidPtr& A, std::vector<Section> span, int rank);
};

/// Sample points used by distribution checks: off-locus samples plus on-locus pins.
std::vector<Point> check_points(const AlgebroidPtr& A, int count, std::uint64_t seed, bool include_locus = true);

struct FlagReport {
  std::vector<std::vector<Section>> steps;  // spanning sets of xi_1, xi_2, ...
  std::vector<int> ranks;
  int step = 0;
  bool involutive = false;
  bool bracket_generating = false;
  bool regular = true;
};

FlagReport lie_flag(const Distribution& xi, int max_depth = 6, int samples = 40, std::uint64_t seed = 42);

struct CurvatureValue {
  Vec value;               // [v,w] modulo xi_{i+j-1}, as a frame-coefficient vector
  double shift_residual;   // change after shifting v by an element of xi_{i-1}
};
CurvatureValue curvature_eval(const FlagReport& flag, int i, int j, const Section& v, const Section& w,
                              const Point& p);

struct Predicate {
  bool value = false;
  double margin = 0;  // worst-case quantity behind the verdict
  Point witness;
};

struct Classification {
  Predicate contact, even_contact, engel, involutive, bracket_generating;
  std::vector<int> flag_ranks;
  std::optional<double> volume_min;  // min |alpha ^ (d alpha)^r| when a form is supplied
  bool volume_agrees = true;         // curvature and volume verdicts coincide
};

Classification classify(const Distribution& xi, const std::optional<AForm>& alpha = std::nullopt, int samples = 50,
                        std::uint64_t seed = 42);
/// Min |alpha ^ (d alpha)^r| over off- and on-locus samples.
Predicate contact_volume_check(const AForm& alpha, int samples = 50, std::uint64_t seed = 42);

struct ReebSolve {
  Vec R;
  double residual = 0;
  double min_singular = 0;
};
ReebSolve reeb_at(const AForm& alpha, const Point& p);

struct ReebCheck {
  double normalisation = 0;  // max |alpha(R) - 1|
  double kernel = 0;         // max |i_R d alpha|
  bool pass = false;
};
ReebCheck verify_reeb(const AForm& alpha, const Section& R, const SampleDomain& dom, double tol = 1e-12);

struct LiouvilleData {
  AlgebroidPtr total;  // pullback algebroid over the total space (product with fibre coordinates)
  std::vector<std::string> fibre;
  AForm lambda;
  AForm omega;  // -d lambda
};
/// Fibre coordinates default to t1..tr (prefixed if they clash with the chart).
LiouvilleData liouville(const AlgebroidPtr& A, std::vector<std::string> fibre = {});
/// Bott data on the annihilator of xi; needs constant span coefficients.
LiouvilleData bott(const Distribution& xi, std::vector<std::string> fibre = {});
/// Bott data for an explicitly given annihilating coframe.
LiouvilleData bott_from_coframe(const AlgebroidPtr& A, const std::vector<AForm>& annihilator,
                                std::vector<std::string> fibre = {});
/// The local display sum dt_i ^ alpha_i + t_i d alpha_i with dt ^ alpha ordered as written.
AForm bott_local_display(const LiouvilleData& L, const std::vector<AForm>& annihilator);

struct FatReport {
  bool fat = false;
  double min_abs_det = 0;
  Point witness;
};
FatReport is_fat(const LiouvilleData& bott_data, int samples = 40, std::uint64_t seed = 42);
/// Rank of omega at sampled points (min, max).
std::pair<int, int> form_rank_range(const AForm& w, int samples = 30, std::uint64_t seed = 42);

struct ContactElements {
  AlgebroidPtr total;
  std::vector<std::string> angles;
  AForm alpha;
  SampleDomain domain;  // keeps away from spherical poles
};
ContactElements contact_elements(const AlgebroidPtr& A);

struct Prolongation {
  AlgebroidPtr total;
  Distribution D;
  std::string m;
};
/// Affine chart of P(xi) with line v1 + m v2; D = <v1 + m v2, d_m>.
Prolongation prolong(const Distribution& xi, const std::string& m = "m");

/// Pads sections of A to a product algebroid of A with extra coordinates.
Section lift_to_product(const Section& s, const AlgebroidPtr& P);
AForm lift_to_product(const AForm& w, const AlgebroidPtr& P);

/// Pullback of a form along a frame map: M[b][a] is the e_a-coefficient of the image of f_b,
/// coefficients substituted by subst.
AForm pullback(const AForm& w, const AlgebroidPtr& C, const std::vector<std::vector<Expr>>& M,
               const std::map<std::string, Expr>& subst);

}  // namespace balg
