#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "balg/distribution.hpp"

namespace balg {

enum class RegKind { Trivial, Cutoff, Compact, Intrinsic, Elliptic, SelfCrossing };
std::string to_string(RegKind k);

/// chi = 1 for |f| <= inner, 0 for |f| >= outer, odd-degree smoothstep in between.
struct CutoffProfile {
  double inner = 0.5;
  double outer = 1.0;
  int degree = 5;

  /// 1 - S(u) as a polynomial in u = (|f| - inner) / (outer - inner).
  Expr polynomial(const Expr& u) const;
  double value(double r) const;
};

/// Part of the ambient space carrying one closed-form description of the foliation.
struct RegPatch {
  std::string name;
  Expr region;  // patch holds where lo <= region < hi (base coordinates)
  double lo = -INFINITY, hi = INFINITY;
  std::vector<AForm> thetas;               // defining 1-forms on the ambient tangent algebroid
  std::vector<std::vector<Expr>> psi_inv;  // psi_inv[a][i] = dx_i of Psi^{-1}(e_a)
  AlgebroidPtr F;                          // foliation algebroid with frame Psi^{-1}(e_a)
  std::vector<std::string> normals;        // coordinate fields completing the frame of the ambient
};

/// Linear action v -> L v + c on the vertical coordinates.
struct VerticalAction {
  std::string name;
  Mat L;
  Vec c;
};

struct RegOptions {
  std::optional<CutoffProfile> cutoff;
  bool compact = false;
  int sign = 1;
  std::string z;  // divisor coordinate; default is the first coordinate f depends on
};

struct RegularisationResult {
  RegKind kind = RegKind::Trivial;
  AlgebroidPtr source;
  Chart base;
  Chart ambient;
  AlgebroidPtr T;  // tangent algebroid of the ambient chart
  std::vector<std::string> vertical;
  std::vector<RegPatch> patches;
  std::vector<int> signs;  // per divisor component
  std::optional<CutoffProfile> cutoff;
  std::vector<Exclusion> exclusions;
  std::vector<VerticalAction> actions;
  std::vector<BKComponent> components;  // bk and self-crossing kinds
  std::string x, y;                     // elliptic pair

  int codim() const { return static_cast<int>(vertical.size()); }
  const RegPatch& patch_at(const Point& p) const;
  SampleDomain domain(int count, std::uint64_t seed) const;
  /// Points of Z x I; for self-crossing kinds `component` selects Z_i.
  std::vector<Point> locus_points(int count, std::uint64_t seed, int component = 0) const;
};

RegularisationResult regularise_trivial(const Chart& chart, const Expr& f, int k, const RegOptions& opts = {});
RegularisationResult regularise_intrinsic(const Chart& chart, const Expr& f, const std::string& z = "");
RegularisationResult regularise_elliptic(const Chart& chart, const std::string& x, const std::string& y);
RegularisationResult regularise_selfcrossing(const Chart& chart, const std::vector<std::pair<std::string, int>>& specs,
                                             bool compact = false, std::vector<int> signs = {});

Section lift(const RegularisationResult& reg, const Section& s, int patch = 0);
AForm lift(const RegularisationResult& reg, const AForm& w, int patch = 0);
Distribution lift(const RegularisationResult& reg, const Distribution& xi, int patch = 0);

/// The lifted form as an ordinary form on the ambient, vanishing on the patch normals.
AForm ambient_form(const RegularisationResult& reg, const AForm& lifted, int patch = 0);

struct CentralLeaf {
  Expr u;
  AForm beta;
  AlgebroidPtr leaf;  // tangent algebroid of Z x I
  AForm form;         // (-sign) u / f_z ds + beta
};
CentralLeaf central_leaf(const RegularisationResult& reg, const AForm& alpha);
/// Max deviation between the central-leaf form and the restriction of the ambient lift.
double central_leaf_residual(const RegularisationResult& reg, const AForm& alpha, int samples = 100,
                             std::uint64_t seed = 42);
/// Max deviation between d_F(lift w) and the ambient d of the lift, on foliation frames.
double lift_commutation_residual(const RegularisationResult& reg, const AForm& w, int samples = 100,
                                 std::uint64_t seed = 42);

struct RegReport {
  double involutivity = 0;
  double tangency = 0;
  double graphical_min = INFINITY;  // min |det of vertical block| off the locus
  int graphical_failures = 0;
  double bracket = 0;
  double anchor = 0;
  double frame_tangency = 0;  // |theta_j(Psi^{-1} e_a)|
  double frame_min_singular = INFINITY;
  double invariance = 0;
  int samples = 0;

  double morphism() const { return std::max({bracket, anchor, frame_tangency}); }
  bool pass(double tol = 1e-9) const;
};
RegReport verify_regularisation(const RegularisationResult& reg, int samples = 1000, std::uint64_t seed = 42);

struct CoorientationRecord {
  std::string z;
  int k = 1;
  int vertical_sign = 0;       // sign of ds(Psi^{-1}(f^k d_z)) on Z; 0 if inconsistent
  int coorientation = 0;       // k even
  int vertical_orientation = 0;  // k odd
};
std::vector<CoorientationRecord> coorientation(const RegularisationResult& reg, int samples = 50,
                                               std::uint64_t seed = 42);

struct LiftCheck {
  double residual = 0;        // max |hor(e_0)(t f^k)|
  double on_locus_norm = 0;   // max |hor(e_0)| on Z x R*
  bool degenerate = false;
  std::vector<Expr> hor;      // components over (base, t)
};
/// Horizontal lift of e_0 = f d_z for an intrinsic regularisation; k = 1 only.
LiftCheck canonical_lift_check(const RegularisationResult& reg, int samples = 100, std::uint64_t seed = 42);
/// Same construction with f^k, exposing the k >= 2 degeneracy.
LiftCheck intrinsic_lift_analog(const Chart& chart, const std::string& z, const Expr& f, int k, int samples = 100,
                                std::uint64_t seed = 42);

/// Pullback of d(t f) under t = e^s against the trivial form df + f ds; returns the max |wedge|.
double exponential_conjugation_residual(const Chart& chart, const Expr& f, int samples = 200, std::uint64_t seed = 42);

/// Max span deviation between the defining forms of two regularisations over the same ambient.
double form_difference(const RegularisationResult& a, const RegularisationResult& b, const std::vector<Point>& pts);

}  // namespace balg
