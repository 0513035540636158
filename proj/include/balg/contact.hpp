#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "balg/distribution.hpp"

namespace balg {

struct Symplectisation {
  AlgebroidPtr P;  // A x TR with coordinate t
  std::string t;
  AForm alpha;     // alpha pulled to P
  AForm omega;     // d(e^t alpha)
  double volume_min = 0;  // min |omega^(r+1)| over off- and on-locus samples
};
Symplectisation symplectise(const AForm& alpha, int samples = 60, std::uint64_t seed = 42);

struct DividingSetData {
  Chart Z;
  Expr u;
  AForm beta;                              // on the tangent algebroid of Z
  std::vector<Point> points;               // located roots of u
  std::vector<std::vector<Point>> curves;  // chained polylines (2-dimensional Z)
  std::vector<double> gamma_form;          // iota^* beta on the unit tangent of Gamma (2-dimensional Z)
  double max_abs_u = 0;
  double min_grad_u = INFINITY;
  std::vector<std::string> warnings;
};
struct ZeroSet {
  std::vector<Point> points;
  std::vector<std::vector<Point>> curves;
  double max_abs = 0;  // max |g| over grid nodes
  double min_grad = INFINITY;
};
/// Grid scan of g with sign-change bisection; periodic axes wrap, line axes span [-2, 2].
ZeroSet scan_zero_set(const Chart& Z, const Expr& g, int resolution = 256);

/// Grid scan with sign-change bisection on Z; 1- and 2-dimensional Z.
DividingSetData dividing_set(const AForm& alpha, int resolution = 256);

struct InducedStructures {
  Chart Z;
  AlgebroidPtr TZ;
  Expr u;
  AForm beta;
  AForm lambda;  // u^{-1} beta
  AForm omega;   // d lambda
  AForm tau;     // d beta + u^{-1} beta ^ du
  bool structural_identity = false;  // omega - u^{-1} tau folds to zero
  double identity_residual = 0;
  double closed_residual = 0;
  double min_nondegeneracy = INFINITY;  // min |Pfaffian-type volume| of omega off Gamma
  double gamma_contact_min = INFINITY;  // min |iota^* beta| on Gamma (2-dimensional Z)
};
InducedStructures induced_on_Z(const AForm& alpha, int samples = 200, std::uint64_t seed = 42);

struct ReebDividingReport {
  double tangency = 0;     // |du(R_Z)| on Gamma
  double hamiltonian = 0;  // |i_{R_Z} omega - d(-1/u)| off Gamma
  double x_of_u = 0;       // |X(u)| on Z
  bool pass = false;
};
ReebDividingReport reeb_dividing_check(const AForm& alpha, int samples = 200, std::uint64_t seed = 42);
/// Same residuals with a supplied vector field on Z in place of R_Z.
ReebDividingReport reeb_dividing_check(const AForm& alpha, const std::vector<Expr>& RZ, int samples = 200,
                                       std::uint64_t seed = 42);

struct CosymplecticPair {
  Chart Z;
  AlgebroidPtr TZ;
  AForm theta;
  AForm eta;
  std::string metric = "chart defining function";
  double closed_residual = 0;
  double volume_min = INFINITY;  // min |theta ^ eta^(n-1)|
};
/// Residue data of a b-symplectic form; |z| is the defining function of the chart.
CosymplecticPair cosymplectic_pair(const AForm& omega, int samples = 100, std::uint64_t seed = 42);

struct CosympReport {
  CosymplecticPair pair;
  double identity1 = 0;  // theta - e^t (du + u dt)
  double identity2 = 0;  // eta - d(e^t alpha_Gamma) on Gamma x R
  double identity3 = 0;  // u eta - theta ^ beta - e^t u^2 omega off Gamma
  double statement1 = 0; // e^t theta - (du + u dt), as literally stated
};
CosympReport cosymp_of_symplectisation_check(const AForm& alpha, int samples = 100, std::uint64_t seed = 42);

struct InvarianceProbe {
  std::optional<bool> r_plus_invariant;  // b^k divisors
  std::optional<bool> c_star_invariant;  // elliptic divisors
};
InvarianceProbe invariance_probe(const AForm& alpha);

struct NormalFormMap {
  int k = 1;
  double lambda = 1;     // scale in z = lambda s^{1/(1-k)} (k >= 2) or z = e^s (k = 1)
  int s_sign = 1;        // half-line of s used for k >= 2
  double residual = 0;   // |phi^* alpha - (u ds + beta)|
  bool invariant = true;
};
NormalFormMap normal_form_map_check(const AForm& alpha, int samples = 100, std::uint64_t seed = 42);

struct BlownUp {
  AlgebroidPtr A;  // b-algebroid of {r = 0} on (r, angle, rest)
  std::string r, angle;
  AForm alpha;
};
BlownUp blowup_pullback(const AForm& alpha);

struct ConjugationCheck {
  double additive = 0;  // (p,t) -> (p, t + f): pullback of e^t alpha minus e^t e^f alpha
  double inverse = 0;   // (p,t) -> (p, t - f): pullback of e^t e^f alpha minus e^t alpha
  double printed = 0;   // (p,t) -> (p, e^f + t): pullback of e^t alpha minus e^t e^f alpha
};
ConjugationCheck symplectisation_conjugation(const AForm& alpha, const Expr& f, int samples = 100,
                                             std::uint64_t seed = 42);

/// Locus form with an identity anchor, re-expressed on the tangent algebroid of its chart.
AForm as_ordinary(const AForm& w);

}  // namespace balg
