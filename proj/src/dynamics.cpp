#include "balg/dynamics.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>
#include <cmath>

namespace balg {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;

Vec to_vec(const State& s) { return Eigen::Map<const Vec>(s.data(), static_cast<Eigen::Index>(s.size())); }
State to_state(const Vec& v) { return State(v.data(), v.data() + v.size()); }

struct System {
  const FlowField* f;
  void operator()(const State& x, State& dx, double /*t*/) const {
    Vec v = (*f)(to_vec(x));
    dx.assign(v.data(), v.data() + v.size());
  }
};

void guard(const FlowField& f, const Vec& x, const Vec& v, const FlowOptions& o) {
  for (int i = 0; i < x.size(); ++i) {
    if (!std::isfinite(v(i)) || !std::isfinite(x(i))) throw DomainExit("field is not finite along the flow");
    if (std::fabs(v(i)) > o.max_norm) throw Blowup("velocity exceeds the bound");
    if (f.chart.periodic(i)) continue;
    if (std::fabs(x(i)) > o.max_norm) throw Blowup("state exceeds the bound");
    if (std::fabs(x(i)) > o.box) throw DomainExit("left the integration box along " + f.chart.coords[i]);
  }
}

/// Controlled integration between two times, for polishing dense-output states.
State advance(const FlowField& f, State x, double t0, double t1, double tol) {
  if (t1 == t0) return x;
  auto st = odeint::make_controlled(tol * 1e-2, tol * 1e-2, odeint::runge_kutta_dopri5<State>());
  odeint::integrate_adaptive(st, System{&f}, x, t0, t1, (t1 - t0) / 16);
  return x;
}

double level_of(const Chart& ch, int i, double a, double b, double value) {
  if (!ch.periodic(i)) return value;
  double P = ch.period[i];
  double n0 = std::floor((a - value) / P);
  return value + (b > a ? n0 + 1 : n0) * P;
}

bool crossed(const Chart& ch, int i, double a, double b, double value) {
  if (!ch.periodic(i)) return (a - value < 0) != (b - value < 0);
  double P = ch.period[i];
  return std::floor((a - value) / P) != std::floor((b - value) / P);
}

void record(Trajectory& tr, const FlowField& f, double t, const State& s) {
  Vec x = to_vec(s);
  tr.t.push_back(t);
  tr.v.push_back(f(x));
  tr.x.push_back(x);
}

auto make_stepper(const FlowOptions& o) {
  return odeint::make_dense_output(o.tol, o.tol, 0.25, odeint::runge_kutta_dopri5<State>());
}

double wrap(double d, double P) {
  d = std::fmod(d, P);
  if (d > P / 2) d -= P;
  if (d <= -P / 2) d += P;
  return d;
}

double excursion(const FlowField& f, const Trajectory& tr, bool vertical) {
  double m = 0;
  for (const auto& x : tr.x) {
    double s = 0;
    for (int i = 0; i < x.size(); ++i) {
      if (f.is_vertical(i) != vertical) continue;
      double d = x(i) - tr.x.front()(i);
      s += d * d;
    }
    m = std::max(m, std::sqrt(s));
  }
  return m;
}

}  // namespace

FlowField FlowField::from_exprs(const Chart& chart, std::vector<Expr> v, std::vector<std::string> vertical) {
  if (static_cast<int>(v.size()) != chart.dim()) throw RankMismatch("field needs one component per coordinate");
  for (const auto& n : vertical) chart.index(n);
  FlowField f;
  f.chart = chart;
  f.v = std::move(v);
  f.vertical = std::move(vertical);
  for (const auto& e : f.v) f.compiled_.emplace_back(e, chart.coords);
  return f;
}

FlowField FlowField::from_section(const Section& X, std::vector<std::string> vertical) {
  return from_exprs(X.A->chart, anchor_of(X), std::move(vertical));
}

Vec FlowField::operator()(const Vec& x) const {
  Vec out(x.size());
  for (std::size_t i = 0; i < compiled_.size(); ++i) out(static_cast<Eigen::Index>(i)) = compiled_[i](x.data());
  return out;
}

bool FlowField::is_vertical(int i) const {
  return std::find(vertical.begin(), vertical.end(), chart.coords[i]) != vertical.end();
}

Section reeb_section(const AForm& alpha) {
  if (alpha.p != 1) throw DegreeOverflow("Reeb field needs a 1-form");
  int r = alpha.A->rank();
  AForm da = d(alpha);
  std::vector<std::vector<Expr>> B(r, std::vector<Expr>(r));
  for (int a = 0; a < r; ++a) {
    for (int b = 0; b < r; ++b) B[a][b] = da.at({a, b}) + alpha.c[a] * alpha.c[b];
  }
  auto inv = symbolic_inverse(B);
  if (inv.det.is_zero()) throw NotContact("alpha ^ (d alpha)^n vanishes identically");
  Section R{alpha.A, {}};
  for (int a = 0; a < r; ++a) {
    Expr s;
    for (int b = 0; b < r; ++b) s += inv.adjugate[b][a] * alpha.c[b];
    R.c.push_back(s / inv.det);
  }
  return R;
}

FlowField reeb_flow(const AForm& alpha) {
  if (!contact_volume_check(alpha).value) throw NotContact("alpha ^ (d alpha)^n vanishes at a sample");
  return FlowField::from_section(reeb_section(alpha));
}

FlowField central_leaf_flow(const RegularisationResult& reg, const AForm& alpha) {
  auto cl = central_leaf(reg, alpha);
  return FlowField::from_section(reeb_section(cl.form), {reg.vertical[0]});
}

FlowField regularised_flow(const RegularisationResult& reg, const AForm& alpha, int patch) {
  AForm la = lift(reg, alpha, patch);
  return FlowField::from_section(reeb_section(la), reg.vertical);
}

Trajectory flow(const FlowField& field, const Vec& x0, double T, const FlowOptions& opts) {
  if (x0.size() != field.chart.dim()) throw RankMismatch("initial point has the wrong dimension");
  if (!(T > 0)) throw DomainError("flow time must be positive");
  Trajectory tr;
  State x = to_state(x0);
  guard(field, x0, field(x0), opts);
  record(tr, field, 0.0, x);
  auto st = make_stepper(opts);
  st.initialize(x, 0.0, std::min(1e-2, T / 16));
  System sys{&field};
  for (long steps = 0; st.current_time() < T; ++steps) {
    if (steps > 2000000) throw DomainExit("step budget exhausted");
    auto prev_t = st.current_time();
    State prev = st.current_state();
    st.do_step(sys);
    if (st.current_time() >= T) {
      State end = advance(field, prev, prev_t, T, opts.tol);
      guard(field, to_vec(end), field(to_vec(end)), opts);
      record(tr, field, T, end);
      break;
    }
    Vec xc = to_vec(st.current_state());
    guard(field, xc, field(xc), opts);
    record(tr, field, st.current_time(), st.current_state());
  }
  return tr;
}

ReturnResult return_map(const FlowField& field, const PoincareSection& sec, const Vec& x0, const FlowOptions& opts) {
  int i = field.chart.index(sec.coord);
  if (x0.size() != field.chart.dim()) throw RankMismatch("initial point has the wrong dimension");
  ReturnResult out;
  State x = to_state(x0);
  guard(field, x0, field(x0), opts);
  record(out.path, field, 0.0, x);
  auto st = make_stepper(opts);
  st.initialize(x, 0.0, 1e-2);
  System sys{&field};
  const double t_min = 1e-10;
  for (long steps = 0; st.current_time() < opts.t_max; ++steps) {
    if (steps > 2000000) throw NoReturn("step budget exhausted");
    double t0 = st.current_time();
    State s0 = st.current_state();
    st.do_step(sys);
    double t1 = st.current_time();
    const State& s1 = st.current_state();
    Vec xc = to_vec(s1);
    guard(field, xc, field(xc), opts);
    double a = s0[i], b = s1[i];
    if (crossed(field.chart, i, a, b, sec.value)) {
      double L = level_of(field.chart, i, a, b, sec.value);
      int dir = b > a ? 1 : -1;
      if (sec.direction == 0 || sec.direction == dir) {
        double lo = t0, hi = t1;
        State tmp(s0.size());
        for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
          double mid = 0.5 * (lo + hi);
          st.calc_state(mid, tmp);
          if ((tmp[i] - L < 0) == (a - L < 0)) {
            lo = mid;
          } else {
            hi = mid;
          }
        }
        double tc = 0.5 * (lo + hi);
        State xs = advance(field, s0, t0, tc, opts.tol);
        for (int it = 0; it < 3; ++it) {
          Vec vel = field(to_vec(xs));
          if (std::fabs(vel(i)) < 1e-6) throw NoReturn("tangential crossing of the section");
          double dt = -(xs[i] - L) / vel(i);
          if (std::fabs(dt) < 1e-16) break;
          xs = advance(field, xs, tc, tc + dt, opts.tol);
          tc += dt;
        }
        if (tc > t_min) {
          xs[i] = L;
          out.x = to_vec(xs);
          out.time = tc;
          record(out.path, field, tc, xs);
          return out;
        }
      }
    }
    record(out.path, field, t1, s1);
  }
  throw NoReturn("no return to " + sec.coord + " = " + std::to_string(sec.value) + " within the time budget");
}

Vec torus_diff(const Chart& chart, const Vec& a, const Vec& b) {
  Vec d = b - a;
  for (int i = 0; i < d.size(); ++i) {
    if (chart.periodic(i)) d(i) = wrap(d(i), chart.period[i]);
  }
  return d;
}

std::string classify_path(const FlowField& field, const Trajectory& path, double tol) {
  if (field.vertical.empty()) return "generic";
  double base = excursion(field, path, false), vert = excursion(field, path, true);
  if (base < tol) return "vertical";
  if (vert < tol) return "horizontal";
  return "slanted";
}

OrbitResult find_orbit(const FlowField& field, const Vec& seed, const PoincareSection& sec, const OrbitOptions& opts) {
  const Chart& ch = field.chart;
  int n = ch.dim();
  Vec x = seed;
  PoincareSection s = sec;
  int is = ch.index(sec.coord);
  Vec v0 = field(x);
  if (std::fabs(v0(is)) < 1e-6) {
    int best = -1;
    double bv = 1e-6;
    for (int j = 0; j < n; ++j) {
      if (ch.periodic(j) && std::fabs(v0(j)) > bv) {
        bv = std::fabs(v0(j));
        best = j;
      }
    }
    if (best < 0) {
      std::string cls = "generic";
      try {
        cls = classify_path(field, flow(field, x, kTwoPi, opts.flow), opts.class_tol);
      } catch (const Error&) {
      }
      throw NoConvergence("no periodic coordinate is transverse to the flow at the seed", cls);
    }
    s = PoincareSection{ch.coords[best], x(best), 0};
    is = best;
  }
  x(is) = s.value;
  std::vector<int> J;
  for (int j = 0; j < n; ++j) {
    if (j != is) J.push_back(j);
  }
  auto embed = [&](const Vec& y) {
    Vec z = x;
    for (std::size_t k = 0; k < J.size(); ++k) z(J[k]) = y(static_cast<Eigen::Index>(k));
    return z;
  };
  auto residual = [&](const Vec& y, ReturnResult* keep) {
    Vec z = embed(y);
    auto r = return_map(field, s, z, opts.flow);
    Vec dfull = torus_diff(ch, z, r.x);
    Vec F(J.size());
    for (std::size_t k = 0; k < J.size(); ++k) F(static_cast<Eigen::Index>(k)) = dfull(J[k]);
    if (keep) *keep = std::move(r);
    return F;
  };
  Vec y(J.size());
  for (std::size_t k = 0; k < J.size(); ++k) y(static_cast<Eigen::Index>(k)) = x(J[k]);
  const Vec y0 = y;
  ReturnResult rr;
  Vec F;
  try {
    F = residual(y, &rr);
  } catch (const NoReturn& e) {
    std::string cls = "generic";
    try {
      cls = classify_path(field, flow(field, x, kTwoPi, opts.flow), opts.class_tol);
    } catch (const Error&) {
    }
    throw NoConvergence(std::string("seed does not return: ") + e.what(), cls);
  }
  const std::string seed_class = classify_path(field, rr.path, opts.class_tol);
  int it = 0;
  for (; F.norm() >= opts.closure_tol; ++it) {
    if (it >= opts.max_iter) throw NoConvergence("Newton shooting did not close the orbit", seed_class);
    Mat Jm(J.size(), J.size());
    try {
      for (std::size_t k = 0; k < J.size(); ++k) {
        Vec yp = y, ym = y;
        yp(static_cast<Eigen::Index>(k)) += opts.fd_step;
        ym(static_cast<Eigen::Index>(k)) -= opts.fd_step;
        Jm.col(static_cast<Eigen::Index>(k)) = (residual(yp, nullptr) - residual(ym, nullptr)) / (2 * opts.fd_step);
      }
    } catch (const NoReturn&) {
      throw NoConvergence("return map undefined near the iterate", seed_class);
    }
    Vec step = -Jm.completeOrthogonalDecomposition().solve(F);
    if (!step.allFinite() || step.norm() < 1e-15) throw NoConvergence("singular shooting system", seed_class);
    double lam = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 12; ++ls, lam *= 0.5) {
      Vec yn = y + lam * step;
      try {
        ReturnResult rn;
        Vec Fn = residual(yn, &rn);
        if (Fn.norm() < F.norm()) {
          y = yn;
          F = Fn;
          rr = std::move(rn);
          accepted = true;
          break;
        }
      } catch (const NoReturn&) {
      }
    }
    if (!accepted) throw NoConvergence("line search failed", seed_class);
    Vec drift = torus_diff(ch, embed(y0), embed(y));
    if (drift.norm() > opts.max_drift) throw NoConvergence("shooting drifted away from the seed", seed_class);
  }
  OrbitResult out;
  out.start = embed(y);
  out.period = rr.time;
  out.closure = torus_diff(ch, out.start, rr.x).norm();
  out.path = std::move(rr.path);
  out.classification = classify_path(field, out.path, opts.class_tol);
  out.iterations = it;
  out.section = s;
  Vec disp = out.path.x.back() - out.path.x.front();
  for (int j = 0; j < n; ++j) out.winding.push_back(ch.periodic(j) ? std::lround(disp(j) / ch.period[j]) : 0);
  return out;
}

std::vector<Vec> seed_lattice(const Chart& chart, const std::string& coord, int n, const Vec& base) {
  int i = chart.index(coord);
  if (n < 1) throw InvalidSpec("lattice needs at least one seed");
  std::vector<Vec> out;
  for (int k = 0; k < n; ++k) {
    Vec x = base;
    x(i) = chart.periodic(i) ? chart.period[i] * k / n : (n == 1 ? 0.0 : -2.0 + 4.0 * k / (n - 1));
    out.push_back(x);
  }
  return out;
}

std::vector<SeedOutcome> search_orbits(const FlowField& field, const std::vector<Vec>& seeds, const PoincareSection& sec,
                                       const OrbitOptions& opts) {
  std::vector<SeedOutcome> out;
  for (const auto& sd : seeds) {
    SeedOutcome o;
    o.seed = sd;
    try {
      o.orbit = find_orbit(field, sd, sec, opts);
      o.classification = o.orbit->classification;
      for (std::size_t j = 0; j < out.size(); ++j) {
        if (!out[j].orbit || out[j].duplicate_of >= 0) continue;
        if (out[j].orbit->section.coord != o.orbit->section.coord) continue;
        double best = INFINITY;
        for (const auto& p : out[j].orbit->path.x) best = std::min(best, torus_diff(field.chart, p, o.orbit->start).norm());
        if (best < 1e-5) {
          o.duplicate_of = static_cast<int>(j);
          break;
        }
      }
    } catch (const NoConvergence& e) {
      o.classification = e.classification();
      o.message = e.what();
    } catch (const Error& e) {
      o.classification = "generic";
      o.message = e.what();
    }
    out.push_back(std::move(o));
  }
  return out;
}

ProjectedOrbit project_orbit(const RegularisationResult& reg, const AForm& alpha, const FlowField& field,
                             const OrbitResult& orbit) {
  if (!(alpha.A->chart == reg.base)) throw ChartMismatch("form does not live on the regularised chart");
  const Chart& M = reg.base;
  std::vector<int> from(M.dim(), -1);
  for (int i = 0; i < M.dim(); ++i) {
    const auto& c = M.coords[i];
    if (field.chart.has(c)) {
      from[i] = field.chart.index(c);
      continue;
    }
    bool on_locus = std::any_of(reg.components.begin(), reg.components.end(),
                                [&](const BKComponent& b) { return b.z == c; });
    if (!on_locus) throw ChartMismatch("orbit chart lacks base coordinate " + c);
  }
  FlowField base = reeb_flow(alpha);
  ProjectedOrbit out;
  out.chart = M;
  out.period = orbit.period;
  Vec start;
  for (std::size_t k = 0; k < orbit.path.x.size(); ++k) {
    Vec p = Vec::Zero(M.dim()), v = Vec::Zero(M.dim());
    for (int i = 0; i < M.dim(); ++i) {
      if (from[i] < 0) continue;
      p(i) = orbit.path.x[k](from[i]);
      v(i) = orbit.path.v[k](from[i]);
    }
    if (k == 0) start = p;
    out.displacement = std::max(out.displacement, torus_diff(M, start, p).norm());
    out.velocity_residual = std::max(out.velocity_residual, (base(p) - v).cwiseAbs().maxCoeff());
    Point pt;
    pt.names = M.coords;
    pt.values.assign(p.data(), p.data() + p.size());
    out.points.push_back(std::move(pt));
  }
  if (out.displacement < 1e-9) throw ConstantProjection("orbit projects to a point (a fixed point of the base Reeb field)");
  return out;
}

std::vector<LevelSetFamily> level_set_orbits(const AForm& alpha, const std::vector<double>& eps, int resolution,
                                             const OrbitOptions& opts) {
  if (!contact_volume_check(alpha).value) throw NotContact("alpha ^ (d alpha)^n vanishes at a sample");
  auto ld = restrict_to_locus(alpha);
  AForm beta = as_ordinary(ld.beta);
  const Chart& Z = beta.A->chart;
  if (Z.dim() != 2) throw UnsupportedRank("level-set orbits need a 2-dimensional Z");
  Expr ua = differentiate(ld.u, Z.coords[0]), ub = differentiate(ld.u, Z.coords[1]);
  std::vector<Expr> T{-ub, ua};
  Expr bT = beta.c[0] * T[0] + beta.c[1] * T[1];
  std::vector<LevelSetFamily> out;
  for (double e : eps) {
    auto zs = scan_zero_set(Z, ld.u - Expr::number(e), resolution);
    if (zs.points.empty()) throw SingularLevel("level set u = " + std::to_string(e) + " is empty");
    if (zs.min_grad < 1e-4) throw SingularLevel("du vanishes on the level set u = " + std::to_string(e));
    Expr scale = e == 0.0 ? Expr(1) : Expr::number(e);
    LevelSetFamily fam;
    fam.eps = e;
    fam.field = FlowField::from_exprs(Z, {scale * T[0] / bT, scale * T[1] / bT});
    fam.curves = zs.curves;
    for (const auto& p : zs.points) {
      if (std::fabs(evaluate(bT, p)) < 1e-8) throw SingularLevel("beta vanishes along the level set");
    }
    for (const auto& c : zs.curves) {
      Vec x = Eigen::Map<const Vec>(c.front().values.data(), 2);
      Vec v = fam.field(x);
      int j = std::fabs(v(0)) >= std::fabs(v(1)) ? 0 : 1;
      fam.orbits.push_back(find_orbit(fam.field, x, PoincareSection{Z.coords[j], x(j), 0}, opts));
    }
    out.push_back(std::move(fam));
  }
  return out;
}

}  // namespace balg
