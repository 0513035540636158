#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "balg/multivector.hpp"
#include "balg/regularise.hpp"

namespace balg {

/// With the Schouten bracket of multivector.hpp a Jacobi pair satisfies [L, L] = kJacobiFactor L ^ R.
inline constexpr int kJacobiFactor = -2;

struct JacobiPair {
  Multivector Lambda;
  Multivector R;
};

/// Lambda^sharp(b) = X with alpha(X) = 0 and i_X d alpha = -(b - b(R) alpha); pushed to the chart by the anchor.
JacobiPair pair_from_contact(const AForm& alpha);
/// Lambda(df, dg) + f R(g) - g R(f)
Expr bracket_from_pair(const JacobiPair& pair, const Expr& f, const Expr& g);
/// Drops the coordinate `z` and sets it to zero in the coefficients.
JacobiPair restrict_pair(const JacobiPair& pair, const std::string& z);

struct PairReport {
  double lambda_residual = 0;  // max |[L, L] - kJacobiFactor L ^ R|
  double r_residual = 0;       // max |[L, R]|
  Point witness;
  bool pass = false;
};
PairReport verify_pair(const JacobiPair& pair, int samples = 200, std::uint64_t seed = 42, double tol = 1e-9);
/// Max |{{f,g},h} + cyclic| over random polynomial triples.
double bracket_jacobi_residual(const JacobiPair& pair, int triples = 20, int samples = 20, std::uint64_t seed = 42);

/// Pi_1 = t (L - t d_t ^ R), Pi_2 = t^{-1} (L + t d_t ^ R) on chart x (t != 0).
Multivector poissonise(const JacobiPair& pair, int variant, const std::string& t = "t", double tol = 1e-9);
/// Max |[Pi, Pi]| with t bounded away from zero.
double poisson_residual(const Multivector& pi, int samples = 200, std::uint64_t seed = 42);
/// Pushforward of Pi_2 under t -> 1/t minus Pi_1, folded; true when structurally zero.
bool inversion_maps_pi2_to_pi1(const JacobiPair& pair, const std::string& t = "t");

/// Frame (dx_1, ..., dx_n, 1) with rho(a, l) = L^sharp(a) + l R.
AlgebroidPtr jet_algebroid(const JacobiPair& pair);

/// Representations on holonomic jets (df, f) acting on density coefficients.
struct CanonicalReps {
  JacobiPair pair;
  AlgebroidPtr J;

  /// L^sharp(df) + f R
  std::vector<Expr> field(const Expr& f) const;
  Expr nabla1(const Expr& f) const;
  /// X(g) + g (div X - (n+1) R(f)), the Lie derivative on det of the jet bundle.
  Expr nabla2(const Expr& f, const Expr& g) const;
  /// The trivialised display X(g) + g (div X - R(f)).
  Expr nabla2_displayed(const Expr& f, const Expr& g) const;
  Expr nabla3(const Expr& f, const Expr& W) const;
  /// Canonical representation on det(J) x det(T*M) from the algebroid structure, coefficient of g W.
  Expr nabla4(const Expr& f, const Expr& g, const Expr& W) const;
};
CanonicalReps canonical_reps(const JacobiPair& pair);

struct RepsReport {
  double decomposition = 0;        // |nabla4 - (nabla3 x nabla2)|
  double displayed_decomposition = 0;
  double flatness = 0;             // nabla2 commutator minus nabla2 on the bracket
  double holonomy = 0;             // bracket of holonomic jets is holonomic
};
RepsReport check_reps(const CanonicalReps& reps, int pairs = 10, int samples = 20, std::uint64_t seed = 42);

/// X_pi^i = sum_j d_j pi^{ij}; pi + X ^ sigma d_sigma on chart x sigma.
Multivector modular_vector(const Multivector& pi);
Multivector modular_poisson(const Multivector& pi, const std::string& sigma = "sigma", double tol = 1e-9);
/// (X ^ E + L, R + f E) with X^i = sum_j d_j L^{ij} - n R^i, f = div R, E = tau d_tau.
JacobiPair modular_jacobi(const JacobiPair& pair, const std::string& tau = "tau", double tol = 1e-9);

struct DiagramReport {
  double residual = 0;
  std::string identification;  // coordinate matching of the two total spaces
  Multivector path_a;           // poissonise(modular_jacobi)
  Multivector path_b;           // modular_poisson(poissonise), in the coordinates of path_a
};
DiagramReport commuting_diagram_check(const JacobiPair& pair, int samples = 500, std::uint64_t seed = 42);

struct BSymplecticReport {
  RegularisationResult reg;
  AForm lifted;
  Multivector pi;     // inverse of omega on M, through the anchor
  Multivector pi_R;   // pi + sign X ^ d_s, X = pi^sharp(df / f^k)
  double leaf_min_det = 0;
  double tangency = 0;    // |pi_R^sharp(theta)|
  double comparison = 0;  // |leafwise inverse - pi_R|
  int samples = 0;
};
BSymplecticReport b_symplectic_regularise(const AForm& omega, int samples = 200, std::uint64_t seed = 42);

}  // namespace balg
