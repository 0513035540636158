#include "balg/contact.hpp"

#include <algorithm>
#include <cmath>

namespace balg {

namespace {

double eval0(const Expr& e, const Point& p) { return e.is_zero() ? 0.0 : evaluate(e, p); }

void require_contact(const AForm& alpha) {
  if (alpha.p != 1) throw DegreeOverflow("contact form must be a 1-form");
  if (alpha.A->rank() % 2 == 0 || !contact_volume_check(alpha).value) {
    throw NotContact("alpha ^ (d alpha)^n vanishes at a sample");
  }
}

const BKComponent& bk_component(const AlgebroidPtr& A) {
  if (A->divisor.type != DivisorData::Type::BK || A->divisor.components.size() != 1) {
    throw NotBK("needs a single b^k divisor");
  }
  return A->divisor.components[0];
}

std::string fresh_name(const Chart& c, const std::string& base) {
  std::string n = base;
  while (c.has(n)) n += "_";
  return n;
}

Expr top_coefficient(const AForm& w) { return w.c.empty() ? Expr() : w.c.back(); }

Point extend(const Point& p, const std::string& name, double v) {
  Point q = p;
  q.names.push_back(name);
  q.values.push_back(v);
  return q;
}

std::vector<Expr> gradient(const Chart& ch, const Expr& u) {
  std::vector<Expr> g;
  for (const auto& c : ch.coords) g.push_back(differentiate(u, c));
  return g;
}

Vec eval_vec(const std::vector<Expr>& v, const Point& p) {
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out(i) = eval0(v[i], p);
  return out;
}

/// Newton steps along grad u onto {u = 0}.
bool project_to_zero(Point& p, const Chart& ch, const Expr& u, const std::vector<Expr>& g) {
  for (int it = 0; it < 60; ++it) {
    double v = evaluate(u, p);
    if (std::fabs(v) < 1e-14) break;
    Vec gr = eval_vec(g, p);
    double n2 = gr.squaredNorm();
    if (n2 < 1e-20) return false;
    for (int i = 0; i < ch.dim(); ++i) p.set(ch.coords[i], p.at(ch.coords[i]) - v * gr(i) / n2);
  }
  return std::fabs(evaluate(u, p)) < 1e-12;
}

std::vector<Point> gamma_points(const Chart& ch, const Expr& u, int count, std::uint64_t seed) {
  auto g = gradient(ch, u);
  std::vector<Point> out;
  for (auto p : ch.domain(2.0).with_count(count * 3).with_seed(seed).points()) {
    if (project_to_zero(p, ch, u, g)) out.push_back(p);
    if (static_cast<int>(out.size()) == count) break;
  }
  return out;
}

/// Constant section of a tangent algebroid from a numeric vector.
Section constant_section(const AlgebroidPtr& T, const Vec& v) {
  Section s{T, {}};
  for (int i = 0; i < v.size(); ++i) s.c.push_back(Expr::number(v(i)));
  return s;
}

double torus_distance(const Chart& ch, const Point& a, const Point& b) {
  double s = 0;
  for (int i = 0; i < ch.dim(); ++i) {
    double d = std::fabs(a.at(ch.coords[i]) - b.at(ch.coords[i]));
    if (ch.periodic(i)) {
      d = std::fmod(d, ch.period[i]);
      d = std::min(d, ch.period[i] - d);
    }
    s += d * d;
  }
  return std::sqrt(s);
}

struct LocusForms {
  Chart Z;
  AlgebroidPtr TZ;
  Expr u;
  AForm beta;
};

LocusForms locus_forms(const AForm& alpha) {
  bk_component(alpha.A);
  auto ld = restrict_to_locus(alpha);
  LocusForms out;
  out.Z = ld.Z->chart;
  out.beta = as_ordinary(ld.beta);
  out.TZ = out.beta.A;
  out.u = ld.u;
  return out;
}

/// Pullback along (p, t) -> (p, t + g(p)) on a product algebroid A x TR.
AForm shift_pullback(const AForm& w, const AlgebroidPtr& A, const std::string& t, const Expr& g) {
  const auto& P = w.A;
  int r = P->rank();
  std::vector<std::vector<Expr>> M(r, std::vector<Expr>(r));
  for (int b = 0; b < r - 1; ++b) {
    M[b][b] = Expr(1);
    M[b][r - 1] = A->rho(b, g);
  }
  M[r - 1][r - 1] = Expr(1);
  return pullback(w, P, M, {{t, Expr::var(t) + g}});
}

}  // namespace

AForm as_ordinary(const AForm& w) {
  const auto& A = *w.A;
  if (A.rank() != A.dim()) throw RankMismatch("frame is not a coordinate frame");
  for (int a = 0; a < A.rank(); ++a) {
    for (int i = 0; i < A.dim(); ++i) {
      bool ok = i == a ? A.anchor[a][i].is_one() : A.anchor[a][i].is_zero();
      if (!ok) throw InvalidSpec("frame is not a coordinate frame");
    }
  }
  return w.rehome(make_tangent(A.chart));
}

Symplectisation symplectise(const AForm& alpha, int samples, std::uint64_t seed) {
  require_contact(alpha);
  Symplectisation S;
  S.t = fresh_name(alpha.A->chart, "t");
  S.P = make_product(alpha.A, {S.t}, {0.0});
  S.alpha = lift_to_product(alpha, S.P);
  S.omega = d(exp(Expr::var(S.t)) * S.alpha);
  Expr vol = top_coefficient(wedge_power(S.omega, S.P->rank() / 2));
  S.volume_min = INFINITY;
  for (const auto& p : check_points(S.P, samples, seed)) S.volume_min = std::min(S.volume_min, std::fabs(eval0(vol, p)));
  return S;
}

ZeroSet scan_zero_set(const Chart& Z, const Expr& g, int resolution) {
  int dim = Z.dim();
  if (dim < 1 || dim > 2) throw UnsupportedRank("zero-set scan needs a 1- or 2-dimensional chart");
  if (resolution < 4) throw InvalidSpec("grid resolution must be at least 4");
  CompiledExpr cu(g, Z.coords);
  std::vector<std::vector<double>> axes(dim);
  std::vector<double> step(dim);
  for (int i = 0; i < dim; ++i) {
    double lo = Z.periodic(i) ? 0.0 : -2.0;
    double hi = Z.periodic(i) ? Z.period[i] : 2.0;
    int n = resolution;
    step[i] = Z.periodic(i) ? (hi - lo) / n : (hi - lo) / (n - 1);
    for (int j = 0; j < n; ++j) axes[i].push_back(lo + step[i] * j);
  }
  auto node = [&](int a, int b) {
    Point p;
    p.names = Z.coords;
    p.values = {axes[0][a]};
    if (dim == 2) p.values.push_back(axes[1][b]);
    return p;
  };
  auto value = [&](const Point& p) { return cu(p.values.data()); };
  auto bisect = [&](Point a, Point b) {
    double fa = value(a);
    for (int it = 0; it < 200; ++it) {
      Point m = a;
      double gap = 0;
      for (int i = 0; i < dim; ++i) {
        m.values[i] = 0.5 * (a.values[i] + b.values[i]);
        gap = std::max(gap, std::fabs(a.values[i] - b.values[i]));
      }
      if (gap < 1e-12) return m;
      double fm = value(m);
      if (fm == 0.0) return m;
      if ((fm < 0) == (fa < 0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    return a;
  };
  ZeroSet out;
  int n0 = static_cast<int>(axes[0].size());
  int n1 = dim == 2 ? static_cast<int>(axes[1].size()) : 1;
  for (int a = 0; a < n0; ++a) {
    for (int b = 0; b < n1; ++b) {
      Point p = node(a, b);
      double fp = value(p);
      out.max_abs = std::max(out.max_abs, std::fabs(fp));
      if (fp == 0.0) {
        out.points.push_back(p);
        continue;
      }
      for (int axis = 0; axis < dim; ++axis) {
        int na = a, nb = b;
        int& idx = axis == 0 ? na : nb;
        int len = axis == 0 ? n0 : n1;
        Point q;
        if (idx + 1 < len) {
          ++idx;
          q = node(na, nb);
        } else if (Z.periodic(axis)) {
          idx = 0;
          q = node(na, nb);
          q.values[axis] += Z.period[axis];
        } else {
          continue;
        }
        double fq = value(q);
        if (fq != 0.0 && (fq < 0) != (fp < 0)) {
          Point r = bisect(p, q);
          if (Z.periodic(axis)) r.values[axis] = std::fmod(r.values[axis], Z.period[axis]);
          out.points.push_back(r);
        }
      }
    }
  }
  auto gr = gradient(Z, g);
  for (const auto& p : out.points) out.min_grad = std::min(out.min_grad, eval_vec(gr, p).norm());
  if (dim == 1) {
    for (const auto& p : out.points) out.curves.push_back({p});
    return out;
  }
  double link = 2.5 * std::max(step[0], step[1]);
  std::vector<bool> used(out.points.size(), false);
  for (std::size_t s = 0; s < out.points.size(); ++s) {
    if (used[s]) continue;
    std::vector<Point> curve{out.points[s]};
    used[s] = true;
    for (int pass = 0; pass < 2; ++pass) {
      while (true) {
        double best = link;
        std::size_t bi = out.points.size();
        for (std::size_t j = 0; j < out.points.size(); ++j) {
          if (used[j]) continue;
          double dj = torus_distance(Z, curve.back(), out.points[j]);
          if (dj < best) {
            best = dj;
            bi = j;
          }
        }
        if (bi == out.points.size()) break;
        used[bi] = true;
        curve.push_back(out.points[bi]);
      }
      std::reverse(curve.begin(), curve.end());
    }
    out.curves.push_back(curve);
  }
  return out;
}

DividingSetData dividing_set(const AForm& alpha, int resolution) {
  auto lf = locus_forms(alpha);
  DividingSetData out;
  out.Z = lf.Z;
  out.u = lf.u;
  out.beta = lf.beta;
  if (lf.Z.dim() < 1 || lf.Z.dim() > 2) throw UnsupportedRank("dividing set scan needs a 1- or 2-dimensional Z");
  auto zs = scan_zero_set(lf.Z, lf.u, resolution);
  out.points = zs.points;
  out.curves = zs.curves;
  auto g = gradient(lf.Z, lf.u);
  for (const auto& p : out.points) {
    out.max_abs_u = std::max(out.max_abs_u, std::fabs(evaluate(lf.u, p)));
    double gn = eval_vec(g, p).norm();
    out.min_grad_u = std::min(out.min_grad_u, gn);
    if (gn < 1e-4) throw NoTransversality("du vanishes on the dividing set");
  }
  if (out.points.empty()) {
    out.warnings.push_back("dividing set is empty; on a compact Z this is impossible for a contact form");
    return out;
  }
  if (lf.Z.dim() == 2) {
    for (const auto& p : out.points) {
      Vec gr = eval_vec(g, p);
      Vec T(2);
      T << -gr(1), gr(0);
      T /= T.norm();
      out.gamma_form.push_back(eval0(lf.beta.c[0], p) * T(0) + eval0(lf.beta.c[1], p) * T(1));
    }
  }
  return out;
}

InducedStructures induced_on_Z(const AForm& alpha, int samples, std::uint64_t seed) {
  require_contact(alpha);
  auto lf = locus_forms(alpha);
  InducedStructures out;
  out.Z = lf.Z;
  out.TZ = lf.TZ;
  out.u = lf.u;
  out.beta = lf.beta;
  Expr uinv = Expr(1) / lf.u;
  out.lambda = uinv * lf.beta;
  out.omega = d(out.lambda);
  out.tau = d(lf.beta) + uinv * wedge(lf.beta, d(lf.TZ, lf.u));
  AForm diff = out.omega - uinv * out.tau;
  out.structural_identity = diff.structurally_zero();
  SampleDomain dom = lf.Z.domain(2.0).with_count(samples).with_seed(seed);
  dom.exclude(lf.u, 0.05);
  int dim = lf.Z.dim();
  AForm domega = dim >= 3 ? d(out.omega) : AForm::zero(lf.TZ, 0);
  Expr vol = dim % 2 == 0 ? top_coefficient(wedge_power(out.omega, dim / 2)) : Expr();
  for (const auto& p : dom.points()) {
    for (const auto& c : diff.c) out.identity_residual = std::max(out.identity_residual, std::fabs(eval0(c, p)));
    if (dim >= 3) {
      for (const auto& c : domega.c) out.closed_residual = std::max(out.closed_residual, std::fabs(eval0(c, p)));
    }
    if (dim % 2 == 0) out.min_nondegeneracy = std::min(out.min_nondegeneracy, std::fabs(eval0(vol, p)));
  }
  if (dim % 2 == 1) out.min_nondegeneracy = 0;
  // iota_Gamma^* beta ^ (d beta)^(n-1) on a basis of T Gamma
  int n = dim / 2;
  AForm cform = wedge(lf.beta, wedge_power(d(lf.beta), n - 1));
  auto g = gradient(lf.Z, lf.u);
  for (const auto& p : gamma_points(lf.Z, lf.u, std::max(10, samples / 4), seed + 3)) {
    Mat G(dim, 1);
    G.col(0) = eval_vec(g, p);
    Mat basis = complement_basis(G);
    std::vector<Section> xs;
    for (int j = 0; j < basis.cols(); ++j) xs.push_back(constant_section(lf.TZ, basis.col(j)));
    double v = std::fabs(evaluate(contract(cform, xs), p));
    out.gamma_contact_min = std::min(out.gamma_contact_min, v);
  }
  return out;
}

ReebDividingReport reeb_dividing_check(const AForm& alpha, int samples, std::uint64_t seed) {
  require_contact(alpha);
  return reeb_dividing_check(alpha, {}, samples, seed);
}

ReebDividingReport reeb_dividing_check(const AForm& alpha, const std::vector<Expr>& RZ, int samples,
                                       std::uint64_t seed) {
  const auto& comp = bk_component(alpha.A);
  auto ind = induced_on_Z(alpha, samples, seed);
  const Chart& Z = ind.Z;
  auto g = gradient(Z, ind.u);
  auto field = [&](const Point& p) {
    if (!RZ.empty()) return eval_vec(RZ, p);
    Vec R = reeb_at(alpha, extend(p, comp.z, 0.0)).R;
    return Vec(R.tail(R.size() - 1));
  };
  ReebDividingReport rep;
  for (const auto& p : gamma_points(Z, ind.u, std::max(10, samples / 4), seed + 5)) {
    rep.tangency = std::max(rep.tangency, std::fabs(field(p).dot(eval_vec(g, p))));
  }
  SampleDomain dom = Z.domain(2.0).with_count(samples).with_seed(seed + 6);
  for (const auto& p : dom.points()) {
    Vec X = field(p);
    Vec gu = eval_vec(g, p);
    rep.x_of_u = std::max(rep.x_of_u, std::fabs(X.dot(gu)));
    double u = evaluate(ind.u, p);
    if (std::fabs(u) < 0.05) continue;
    Mat W = two_form_matrix(ind.omega, p);
    Vec lhs = W.transpose() * X;
    Vec rhs = gu / (u * u);
    rep.hamiltonian = std::max(rep.hamiltonian, (lhs - rhs).cwiseAbs().maxCoeff() / std::max(1.0, rhs.norm()));
  }
  rep.pass = rep.tangency < 1e-8 && rep.hamiltonian < 1e-8 && rep.x_of_u < 1e-8;
  return rep;
}

CosymplecticPair cosymplectic_pair(const AForm& omega, int samples, std::uint64_t seed) {
  const auto& A = omega.A;
  const auto& comp = bk_component(A);
  if (omega.p != 2 || A->rank() % 2 != 0) throw NotSymplectic("needs a 2-form on an even-rank algebroid");
  Expr vol = top_coefficient(wedge_power(omega, A->rank() / 2));
  for (const auto& p : check_points(A, samples, seed)) {
    if (std::fabs(eval0(vol, p)) < 1e-10) throw NotSymplectic("omega^n vanishes at a sample");
  }
  AlgebroidPtr Z = locus_algebroid(A);
  int r = A->rank();
  AForm theta = AForm::zero(Z, 1), eta = AForm::zero(Z, 2);
  // residue in the right slot, omega = theta ^ dz/z^k + ..., so that Res commutes with d
  for (int j = 1; j < r; ++j) theta.c[j - 1] = substitute(omega.at({j, 0}), comp.z, Expr());
  for (int i = 1; i < r; ++i) {
    for (int j = i + 1; j < r; ++j) eta.coef({i - 1, j - 1}) = substitute(omega.at({i, j}), comp.z, Expr());
  }
  CosymplecticPair out;
  out.theta = as_ordinary(theta);
  out.TZ = out.theta.A;
  out.eta = eta.rehome(out.TZ);
  out.Z = Z->chart;
  int n = r / 2;
  AForm dth = d(out.theta);
  AForm deta = out.eta.p + 1 <= out.TZ->rank() ? d(out.eta) : AForm::zero(out.TZ, 0);
  Expr v = top_coefficient(wedge(out.theta, wedge_power(out.eta, n - 1)));
  for (const auto& p : out.Z.domain(2.0).with_count(samples).with_seed(seed + 1).points()) {
    for (const auto& c : dth.c) out.closed_residual = std::max(out.closed_residual, std::fabs(eval0(c, p)));
    for (const auto& c : deta.c) out.closed_residual = std::max(out.closed_residual, std::fabs(eval0(c, p)));
    out.volume_min = std::min(out.volume_min, std::fabs(eval0(v, p)));
  }
  return out;
}

CosympReport cosymp_of_symplectisation_check(const AForm& alpha, int samples, std::uint64_t seed) {
  auto S = symplectise(alpha);
  CosympReport rep;
  rep.pair = cosymplectic_pair(S.omega, samples, seed);
  auto lf = locus_forms(alpha);
  const auto& TZt = rep.pair.TZ;
  const Chart& Zt = rep.pair.Z;
  Expr t = Expr::var(S.t), et = exp(t), u = lf.u;
  AForm beta = lift_to_product(lf.beta, TZt);
  AForm du = d(TZt, u);
  AForm dt = d(TZt, t);
  AForm theta_reg = du + u * dt;
  AForm r1 = rep.pair.theta - et * theta_reg;
  AForm s1 = et * rep.pair.theta - theta_reg;
  Expr uinv = Expr(1) / u;
  AForm omega = uinv * d(beta) + (uinv * uinv) * wedge(beta, du);
  AForm r3 = u * rep.pair.eta - wedge(rep.pair.theta, beta) - (et * u * u) * omega;
  SampleDomain dom = Zt.domain(1.5).with_count(samples).with_seed(seed + 2);
  for (const auto& p : dom.points()) {
    for (const auto& c : r1.c) rep.identity1 = std::max(rep.identity1, std::fabs(eval0(c, p)));
    for (const auto& c : s1.c) rep.statement1 = std::max(rep.statement1, std::fabs(eval0(c, p)));
    if (std::fabs(evaluate(u, p)) < 0.05) continue;
    for (const auto& c : r3.c) rep.identity3 = std::max(rep.identity3, std::fabs(eval0(c, p)));
  }
  AForm model = d(et * beta);
  auto g = gradient(lf.Z, u);
  int dz = lf.Z.dim();
  std::uint64_t st = seed + 9;
  for (const auto& q : gamma_points(lf.Z, u, std::max(10, samples / 4), seed + 4)) {
    st = st * 6364136223846793005ULL + 1442695040888963407ULL;
    Point p = extend(q, S.t, -1.5 + 3.0 * unit_interval(st));
    Mat G(dz, 1);
    G.col(0) = eval_vec(g, q);
    Mat tg = complement_basis(G);
    Mat V = Mat::Zero(dz + 1, tg.cols() + 1);
    V.topLeftCorner(dz, tg.cols()) = tg;
    V(dz, tg.cols()) = 1.0;
    Mat diff = V.transpose() * (two_form_matrix(rep.pair.eta, p) - two_form_matrix(model, p)) * V;
    rep.identity2 = std::max(rep.identity2, diff.cwiseAbs().maxCoeff());
  }
  return rep;
}

InvarianceProbe invariance_probe(const AForm& alpha) {
  InvarianceProbe out;
  const auto& dv = alpha.A->divisor;
  auto free_of = [&](const std::string& v) {
    return std::none_of(alpha.c.begin(), alpha.c.end(), [&](const Expr& e) { return depends_on(e, v); });
  };
  if (dv.type == DivisorData::Type::BK) out.r_plus_invariant = free_of(dv.components[0].z);
  if (dv.type == DivisorData::Type::Elliptic) out.c_star_invariant = free_of(dv.x) && free_of(dv.y);
  return out;
}

NormalFormMap normal_form_map_check(const AForm& alpha, int samples, std::uint64_t seed) {
  const auto& comp = bk_component(alpha.A);
  NormalFormMap out;
  out.k = comp.k;
  out.invariant = *invariance_probe(alpha).r_plus_invariant;
  if (!out.invariant) {
    out.residual = INFINITY;
    return out;
  }
  auto ld = restrict_to_locus(alpha);
  Expr s = Expr::var("s");
  const int k = comp.k;
  // phi gives the value of the defining function, which is a coordinate transverse to Z
  Expr lam = Expr::var("lambda");
  auto coefficient = [&](int sign) {
    Expr phi = k == 1 ? exp(s) : lam * exp(Rational(1, 1 - k) * log(sign > 0 ? s : -s));
    return differentiate(phi, "s") / pow(phi, k);
  };
  double probe = 0.7;
  if (k >= 2) {
    for (int sign : {1, -1}) {
      double c1 = evaluate(coefficient(sign), Point{{"s", "lambda"}, {sign * probe, 1.0}});
      double q = 1.0 / c1;
      if (q > 0) {
        out.lambda = std::pow(q, 1.0 / (1 - k));
      } else if ((k - 1) % 2 == 1) {
        out.lambda = -std::pow(-q, 1.0 / (1 - k));
      } else {
        continue;
      }
      out.s_sign = sign;
      break;
    }
  }
  Expr c = coefficient(out.s_sign);
  SampleDomain dom = ld.Z->chart.domain(2.0).with_count(samples).with_seed(seed);
  std::uint64_t st = seed + 11;
  for (const auto& p : dom.points()) {
    st = st * 6364136223846793005ULL + 1442695040888963407ULL;
    double sv = k == 1 ? -2.0 + 4.0 * unit_interval(st) : out.s_sign * (0.1 + 2.9 * unit_interval(st));
    Point q = extend(extend(p, "s", sv), "lambda", out.lambda);
    double dev = std::fabs(eval0(ld.u, p)) * std::fabs(evaluate(c, q) - 1.0);
    out.residual = std::max(out.residual, dev);
  }
  return out;
}

BlownUp blowup_pullback(const AForm& alpha) {
  const auto& A = alpha.A;
  if (A->divisor.type != DivisorData::Type::Elliptic) throw InvalidSpec("blow-up needs an elliptic divisor");
  require_contact(alpha);
  const auto& dv = A->divisor;
  BlownUp out;
  out.r = fresh_name(A->chart, "r");
  out.angle = fresh_name(A->chart, "theta");
  std::vector<std::string> coords{out.r, out.angle};
  std::vector<double> periods{0.0, kTwoPi};
  for (int i = 0; i < A->dim(); ++i) {
    const auto& c = A->chart.coords[i];
    if (c == dv.x || c == dv.y) continue;
    coords.push_back(c);
    periods.push_back(A->chart.period[i]);
  }
  out.A = make_bk(Chart(coords, periods), out.r, 1);
  Expr r = Expr::var(out.r), th = Expr::var(out.angle);
  std::map<std::string, Expr> sub{{dv.x, r * cos(th)}, {dv.y, r * sin(th)}};
  out.alpha = AForm::zero(out.A, 1);
  for (int a = 0; a < A->rank(); ++a) out.alpha.c[a] = substitute(alpha.c[a], sub);
  return out;
}

ConjugationCheck symplectisation_conjugation(const AForm& alpha, const Expr& f, int samples, std::uint64_t seed) {
  const auto& A = alpha.A;
  std::string t = fresh_name(A->chart, "t");
  auto P = make_product(A, {t}, {0.0});
  AForm a = lift_to_product(alpha, P);
  Expr et = exp(Expr::var(t)), ef = exp(f);
  AForm wa = d(et * a), wb = d(et * ef * a);
  AForm add = shift_pullback(wa, A, t, f) - wb;
  AForm inv = shift_pullback(wb, A, t, -f) - wa;
  AForm printed = shift_pullback(wa, A, t, ef) - wb;
  ConjugationCheck out;
  SampleDomain dom = P->domain(1.5).with_count(samples).with_seed(seed);
  for (const auto& p : dom.points()) {
    for (std::size_t i = 0; i < add.c.size(); ++i) {
      out.additive = std::max(out.additive, std::fabs(eval0(add.c[i], p)));
      out.inverse = std::max(out.inverse, std::fabs(eval0(inv.c[i], p)));
      out.printed = std::max(out.printed, std::fabs(eval0(printed.c[i], p)));
    }
  }
  return out;
}

}  // namespace balg
