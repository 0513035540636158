#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "balg/contact.hpp"
#include "balg/numeric.hpp"
#include "balg/regularise.hpp"

namespace balg {

/// Autonomous vector field on a chart; `vertical` names the regularisation directions.
struct FlowField {
  Chart chart;
  std::vector<Expr> v;
  std::vector<std::string> vertical;

  static FlowField from_exprs(const Chart& chart, std::vector<Expr> v, std::vector<std::string> vertical = {});
  /// rho(X) as a vector field on the chart of X.
  static FlowField from_section(const Section& X, std::vector<std::string> vertical = {});

  Vec operator()(const Vec& x) const;
  bool is_vertical(int i) const;

 private:
  std::vector<CompiledExpr> compiled_;
};

/// R = B^{-T} alpha with B_ab = d alpha(e_a, e_b) + alpha_a alpha_b, as a symbolic section.
Section reeb_section(const AForm& alpha);
FlowField reeb_flow(const AForm& alpha);
/// Reeb field of the central-leaf form on Z x I.
FlowField central_leaf_flow(const RegularisationResult& reg, const AForm& alpha);
/// Leafwise Reeb field of the lifted form, pushed to the ambient chart through the lift frame.
FlowField regularised_flow(const RegularisationResult& reg, const AForm& alpha, int patch = 0);

struct FlowOptions {
  double tol = 1e-10;
  double max_norm = 1e8;   // Blowup bound on |x| (line coordinates) and |v|
  double box = INFINITY;   // DomainExit bound on line coordinates
  double t_max = 200.0;    // return-time budget
};

/// Samples at accepted integrator steps; periodic coordinates are kept unwrapped.
struct Trajectory {
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> v;
};
Trajectory flow(const FlowField& field, const Vec& x0, double T, const FlowOptions& opts = {});

struct PoincareSection {
  std::string coord;
  double value = 0;
  int direction = 0;  // +1, -1 or 0 for either
};

struct ReturnResult {
  Vec x;
  double time = 0;
  Trajectory path;
};
ReturnResult return_map(const FlowField& field, const PoincareSection& sec, const Vec& x0, const FlowOptions& opts = {});

/// Difference b - a with periodic components wrapped to (-P/2, P/2].
Vec torus_diff(const Chart& chart, const Vec& a, const Vec& b);

struct OrbitOptions {
  FlowOptions flow;
  double closure_tol = 1e-9;
  int max_iter = 50;
  double fd_step = 1e-6;
  double max_drift = 0.25;    // Newton may not move the seed further than this
  double class_tol = 1e-6;
};

struct OrbitResult {
  Vec start;
  double period = 0;
  Trajectory path;
  double closure = 0;  // torus distance |x(T) - x(0)|
  std::string classification;  // vertical, slanted, horizontal, generic
  std::vector<long> winding;   // per periodic coordinate, unwrapped displacement / period
  int iterations = 0;
  PoincareSection section;
};
/// Newton shooting on the return map (finite-difference Jacobian, least-squares steps).
OrbitResult find_orbit(const FlowField& field, const Vec& seed, const PoincareSection& sec, const OrbitOptions& opts = {});
/// vertical: base excursion < tol; horizontal: vertical excursion < tol; slanted otherwise; generic without vertical directions.
std::string classify_path(const FlowField& field, const Trajectory& path, double tol = 1e-6);

struct SeedOutcome {
  Vec seed;
  std::string classification;
  std::optional<OrbitResult> orbit;
  int duplicate_of = -1;
  std::string message;
};
/// Seeds with `coord` running over n equally spaced values of its period (or [-2, 2]); other entries from base.
std::vector<Vec> seed_lattice(const Chart& chart, const std::string& coord, int n, const Vec& base);
std::vector<SeedOutcome> search_orbits(const FlowField& field, const std::vector<Vec>& seeds, const PoincareSection& sec,
                                       const OrbitOptions& opts = {});

struct ProjectedOrbit {
  Chart chart;  // base chart of the source algebroid
  std::vector<Point> points;
  double period = 0;
  double velocity_residual = 0;  // against rho(R_alpha)
  double displacement = 0;       // max distance from the start
};
/// Drops vertical coordinates (filling z = 0 for central-leaf orbits) and re-checks against the base Reeb field.
ProjectedOrbit project_orbit(const RegularisationResult& reg, const AForm& alpha, const FlowField& field,
                             const OrbitResult& orbit);

struct LevelSetFamily {
  double eps = 0;
  FlowField field;  // Reeb field of beta / eps on the level set (beta on Gamma for eps = 0)
  std::vector<std::vector<Point>> curves;
  std::vector<OrbitResult> orbits;
};
/// Orbits on u^{-1}(eps) in a 2-dimensional Z.
std::vector<LevelSetFamily> level_set_orbits(const AForm& alpha, const std::vector<double>& eps, int resolution = 128,
                                             const OrbitOptions& opts = {});

}  // namespace balg
