#include "balg/regularise.hpp"

#include <cmath>

namespace balg {

std::string to_string(RegKind k) {
  switch (k) {
    case RegKind::Trivial: return "trivial";
    case RegKind::Cutoff: return "cutoff";
    case RegKind::Compact: return "compact";
    case RegKind::Intrinsic: return "intrinsic";
    case RegKind::Elliptic: return "elliptic";
    case RegKind::SelfCrossing: return "selfcrossing";
  }
  return "?";
}

Expr CutoffProfile::polynomial(const Expr& u) const {
  if (degree < 1 || degree % 2 == 0) throw InvalidSpec("smoothstep degree must be odd");
  int n = (degree - 1) / 2;
  Expr s;
  for (int j = 0; j <= n; ++j) {
    std::int64_t c = binomial(n + j, j) * binomial(2 * n + 1, n - j);
    s += Expr(j % 2 == 0 ? c : -c) * pow(u, n + j + 1);
  }
  return Expr(1) - s;
}

double CutoffProfile::value(double r) const {
  r = std::fabs(r);
  if (r <= inner) return 1.0;
  if (r >= outer) return 0.0;
  Point p{{"u"}, {(r - inner) / (outer - inner)}};
  return evaluate(polynomial(Expr::var("u")), p);
}

namespace {

Expr var(const std::string& n) { return Expr::var(n); }

std::string pick_z(const Chart& chart, const Expr& f, const std::string& z) {
  if (!z.empty()) {
    if (!chart.has(z)) throw UnknownCoordinate(z);
    return z;
  }
  for (const auto& v : free_variables(f)) {
    if (!chart.has(v)) throw UnknownCoordinate(v);
  }
  for (const auto& c : chart.coords) {
    if (depends_on(f, c)) return c;
  }
  return chart.coords.at(0);
}

bool is_adapted(const Expr& f, const std::string& z) {
  auto fv = free_variables(f);
  if (fv.size() != 1 || !fv.count(z)) return false;
  Point p{{z}, {0.0}};
  return std::fabs(evaluate(f, p)) < 1e-14 && std::fabs(evaluate(differentiate(f, z), p)) > 1e-12;
}

/// Newton projection along z onto {f = 0}; false if it does not converge.
bool project(Point& p, const std::string& z, const Expr& f, const Expr& fz) {
  for (int it = 0; it < 80; ++it) {
    double v = evaluate(f, p);
    if (std::fabs(v) < 1e-14) break;
    double dv = evaluate(fz, p);
    if (std::fabs(dv) < 1e-300) return false;
    p.set(z, p.at(z) - v / dv);
    if (std::fabs(p.at(z)) > 1e3) return false;
  }
  return std::fabs(evaluate(f, p)) < 1e-12;
}

void check_transverse(const Chart& chart, const std::string& z, const Expr& f) {
  Expr fz = differentiate(f, z);
  std::vector<Expr> grad;
  for (const auto& c : chart.coords) grad.push_back(differentiate(f, c));
  for (auto p : chart.domain(2.0).with_count(60).with_seed(7).points()) {
    if (!project(p, z, f, fz)) continue;
    double n = 0;
    for (const auto& g : grad) n += std::pow(g.is_zero() ? 0.0 : evaluate(g, p), 2);
    if (std::sqrt(n) < 1e-6) throw NonTransverse("df vanishes on {f = 0}");
  }
}

AForm one_form(const AlgebroidPtr& T, const std::vector<Expr>& c) {
  AForm w = AForm::zero(T, 1);
  for (std::size_t i = 0; i < c.size(); ++i) w.c[i] = c[i];
  return w;
}

/// Coefficients of dg for g a function of the ambient coordinates.
std::vector<Expr> grad(const Chart& ch, const Expr& g) {
  std::vector<Expr> out;
  for (const auto& c : ch.coords) out.push_back(differentiate(g, c));
  return out;
}

AlgebroidPtr foliation_algebroid(const RegularisationResult& reg, const std::vector<std::vector<Expr>>& psi) {
  auto F = std::make_shared<AlgebroidChart>(
      *make_custom(AlgebroidKind::Foliation, reg.ambient, reg.source->labels, psi, reg.source->structure));
  F->divisor = reg.source->divisor;
  return F;
}

void add_patch(RegularisationResult& reg, RegPatch p) {
  p.F = foliation_algebroid(reg, p.psi_inv);
  reg.patches.push_back(std::move(p));
}

/// Base frame of the source padded with zero vertical components.
std::vector<std::vector<Expr>> padded_anchor(const RegularisationResult& reg) {
  std::vector<std::vector<Expr>> out;
  for (const auto& row : reg.source->anchor) {
    auto r = row;
    r.resize(reg.ambient.dim());
    out.push_back(r);
  }
  return out;
}

AlgebroidPtr bk_source(const Chart& chart, const std::string& z, int k, const Expr& f) {
  return make_bk(chart, z, k, f, is_adapted(f, z));
}

Chart extend(const Chart& base, const std::vector<std::string>& names, double period) {
  Chart out = base;
  for (const auto& n : names) {
    if (base.has(n)) throw DuplicateCoordinate(n);
    out = out.with(n, period);
  }
  return out;
}

VerticalAction translation(int q, int i, double c) {
  VerticalAction a{"translate", Mat::Identity(q, q), Vec::Zero(q)};
  a.c(i) = c;
  return a;
}

VerticalAction complex_scaling(double re, double im) {
  Mat L(2, 2);
  L << re, -im, im, re;
  return VerticalAction{"scale", L, Vec::Zero(2)};
}

double eval0(const Expr& e, const Point& p) { return e.is_zero() ? 0.0 : evaluate(e, p); }

Mat theta_matrix(const RegPatch& pt, const Point& p) {
  int n = pt.thetas.empty() ? 0 : static_cast<int>(pt.thetas[0].c.size());
  Mat m(pt.thetas.size(), n);
  for (std::size_t j = 0; j < pt.thetas.size(); ++j) {
    for (int i = 0; i < n; ++i) m(j, i) = eval0(pt.thetas[j].c[i], p);
  }
  return m;
}

std::vector<int> vertical_indices(const RegularisationResult& reg) {
  std::vector<int> v;
  for (const auto& n : reg.vertical) v.push_back(reg.ambient.index(n));
  return v;
}

/// Residual of the rows of b outside the row span of a, scaled by the row norm.
double span_deviation(const Mat& a, const Mat& b) {
  double out = 0;
  for (int j = 0; j < b.rows(); ++j) {
    Vec row = b.row(j).transpose();
    out = std::max(out, span_residual(a.transpose(), row) / std::max(1.0, row.norm()));
  }
  return out;
}

Point act(const RegularisationResult& reg, const VerticalAction& g, const Point& p) {
  Point q = p;
  auto vi = vertical_indices(reg);
  Vec v(vi.size());
  for (std::size_t i = 0; i < vi.size(); ++i) v(i) = p.at(reg.vertical[i]);
  Vec w = g.L * v + g.c;
  for (std::size_t i = 0; i < vi.size(); ++i) q.set(reg.vertical[i], w(i));
  return q;
}

std::vector<Expr> vf_bracket(const Chart& ch, const std::vector<Expr>& V, const std::vector<Expr>& W) {
  int n = ch.dim();
  std::vector<Expr> out(n);
  for (int i = 0; i < n; ++i) {
    Expr s;
    for (int j = 0; j < n; ++j) {
      if (!V[j].is_zero()) s += V[j] * differentiate(W[i], ch.coords[j]);
      if (!W[j].is_zero()) s -= W[j] * differentiate(V[i], ch.coords[j]);
    }
    out[i] = s;
  }
  return out;
}

std::vector<Expr> push(const std::vector<std::vector<Expr>>& psi, const std::vector<Expr>& coeffs) {
  std::vector<Expr> out(psi[0].size());
  for (std::size_t a = 0; a < psi.size(); ++a) {
    if (coeffs[a].is_zero()) continue;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!psi[a][i].is_zero()) out[i] += coeffs[a] * psi[a][i];
    }
  }
  return out;
}

}  // namespace

const RegPatch& RegularisationResult::patch_at(const Point& p) const {
  for (const auto& pt : patches) {
    double v = eval0(pt.region, p);
    if (v >= pt.lo && v < pt.hi) return pt;
  }
  return patches.back();
}

SampleDomain RegularisationResult::domain(int count, std::uint64_t seed) const {
  SampleDomain d = ambient.domain(2.0).with_count(count).with_seed(seed);
  for (const auto& e : exclusions) d.exclude(e.expr, e.margin);
  return d;
}

std::vector<Point> RegularisationResult::locus_points(int count, std::uint64_t seed, int component) const {
  SampleDomain d = domain(count, seed);
  if (kind == RegKind::Elliptic) {
    d.pin(x, 0.0);
    d.pin(y, 0.0);
    return d.points();
  }
  const auto& c = components.at(component);
  if (is_adapted(c.f, c.z)) {
    d.pin(c.z, 0.0);
    return d.points();
  }
  Expr fz = differentiate(c.f, c.z);
  std::vector<Point> out;
  for (auto p : d.with_count(count * 2).points()) {
    if (project(p, c.z, c.f, fz)) out.push_back(p);
    if (static_cast<int>(out.size()) == count) break;
  }
  return out;
}

RegularisationResult regularise_trivial(const Chart& chart, const Expr& f_in, int k, const RegOptions& opts) {
  if (k < 1) throw InvalidSpec("order k must be >= 1");
  if (opts.sign != 1 && opts.sign != -1) throw InvalidSpec("sign must be +1 or -1");
  std::string z = pick_z(chart, f_in, opts.z);
  Expr f = f_in.is_zero() ? var(z) : f_in;
  check_transverse(chart, z, f);
  RegularisationResult reg;
  reg.kind = opts.cutoff ? RegKind::Cutoff : (opts.compact ? RegKind::Compact : RegKind::Trivial);
  reg.source = bk_source(chart, z, k, f);
  reg.base = chart;
  reg.vertical = {"s"};
  reg.ambient = extend(chart, reg.vertical, opts.compact ? kTwoPi : 0.0);
  reg.T = make_tangent(reg.ambient);
  reg.signs = {opts.sign};
  reg.cutoff = opts.cutoff;
  reg.components = {{z, k, f}};
  reg.actions = {translation(1, 0, 0.7), translation(1, 0, -1.9)};
  int si = reg.ambient.index("s");
  Expr fz = differentiate(f, z);
  Expr sg(opts.sign);
  auto df = grad(reg.ambient, f);

  auto make = [&](const std::string& name, const Expr& region, double lo, double hi, const Expr& chi,
                  const std::string& normal) {
    RegPatch p;
    p.name = name;
    p.region = region;
    p.lo = lo;
    p.hi = hi;
    std::vector<Expr> th(reg.ambient.dim());
    for (int i = 0; i < reg.ambient.dim(); ++i) th[i] = chi * df[i];
    th[si] = sg * pow(f, k);
    p.thetas = {one_form(reg.T, th)};
    p.psi_inv = padded_anchor(reg);
    p.psi_inv[0][si] = -sg * chi * fz;
    p.normals = {normal};
    add_patch(reg, p);
  };

  if (!opts.cutoff) {
    make("all", Expr(), -INFINITY, INFINITY, Expr(1), z);
    return reg;
  }
  const auto& cp = *opts.cutoff;
  if (!(cp.inner > 0 && cp.outer > cp.inner)) throw InvalidSpec("cutoff radii must satisfy 0 < inner < outer");
  Expr w = Expr::number(cp.outer - cp.inner), in = Expr::number(cp.inner);
  make("inner", f * f, 0.0, cp.inner * cp.inner, Expr(1), z);
  make("transition+", f, cp.inner, cp.outer, cp.polynomial((f - in) / w), "s");
  make("transition-", -f, cp.inner, cp.outer, cp.polynomial((-f - in) / w), "s");
  RegPatch outer;
  outer.name = "outer";
  outer.region = f * f;
  outer.lo = cp.outer * cp.outer;
  std::vector<Expr> th(reg.ambient.dim());
  th[si] = Expr(1);
  outer.thetas = {one_form(reg.T, th)};
  outer.psi_inv = padded_anchor(reg);
  outer.normals = {"s"};
  add_patch(reg, outer);
  return reg;
}

RegularisationResult regularise_intrinsic(const Chart& chart, const Expr& f_in, const std::string& zname) {
  std::string z = pick_z(chart, f_in, zname);
  Expr f = f_in.is_zero() ? var(z) : f_in;
  check_transverse(chart, z, f);
  RegularisationResult reg;
  reg.kind = RegKind::Intrinsic;
  reg.source = bk_source(chart, z, 1, f);
  reg.base = chart;
  reg.vertical = {"t"};
  reg.ambient = extend(chart, reg.vertical, 0.0);
  reg.T = make_tangent(reg.ambient);
  reg.signs = {1};
  reg.components = {{z, 1, f}};
  reg.exclusions = {Exclusion{var("t"), 1e-2}};
  VerticalAction a{"scale", Mat::Constant(1, 1, 1.7), Vec::Zero(1)};
  VerticalAction b{"scale", Mat::Constant(1, 1, -0.6), Vec::Zero(1)};
  reg.actions = {a, b};
  Expr t = var("t");
  RegPatch p;
  p.name = "all";
  p.thetas = {one_form(reg.T, grad(reg.ambient, t * f))};
  p.psi_inv = padded_anchor(reg);
  p.psi_inv[0][reg.ambient.index("t")] = -differentiate(f, z) * t;
  p.normals = {z};
  add_patch(reg, p);
  return reg;
}

RegularisationResult regularise_elliptic(const Chart& chart, const std::string& x, const std::string& y) {
  RegularisationResult reg;
  reg.kind = RegKind::Elliptic;
  reg.source = make_elliptic(chart, x, y);
  reg.base = chart;
  reg.x = x;
  reg.y = y;
  reg.vertical = {"w1", "w2"};
  reg.ambient = extend(chart, reg.vertical, 0.0);
  reg.T = make_tangent(reg.ambient);
  reg.signs = {1};
  Expr X = var(x), Y = var(y), w1 = var("w1"), w2 = var("w2");
  reg.exclusions = {Exclusion{w1 * w1 + w2 * w2, 1e-3}};
  reg.actions = {complex_scaling(1.3 * std::cos(0.4), 1.3 * std::sin(0.4)), complex_scaling(-0.5, 0.0)};
  RegPatch p;
  p.name = "all";
  p.thetas = {one_form(reg.T, grad(reg.ambient, w1 * X - w2 * Y)), one_form(reg.T, grad(reg.ambient, w1 * Y + w2 * X))};
  p.psi_inv = padded_anchor(reg);
  int i1 = reg.ambient.index("w1"), i2 = reg.ambient.index("w2");
  p.psi_inv[0][i1] = -w1;
  p.psi_inv[0][i2] = -w2;
  p.psi_inv[1][i1] = w2;
  p.psi_inv[1][i2] = -w1;
  p.normals = {x, y};
  add_patch(reg, p);
  return reg;
}

RegularisationResult regularise_selfcrossing(const Chart& chart, const std::vector<std::pair<std::string, int>>& specs,
                                             bool compact, std::vector<int> signs) {
  if (specs.empty()) throw InvalidSpec("self-crossing regularisation needs at least one component");
  if (signs.empty()) signs.assign(specs.size(), 1);
  if (signs.size() != specs.size()) throw InvalidSpec("one sign per component");
  std::vector<BKComponent> comps;
  for (const auto& [z, k] : specs) {
    for (const auto& c : comps) {
      if (c.z == z) throw DuplicateCoordinate(z);
    }
    comps.push_back({z, k, var(z)});
  }
  RegularisationResult reg;
  reg.kind = RegKind::SelfCrossing;
  reg.source = make_selfcrossing(chart, comps);
  reg.base = chart;
  int m = static_cast<int>(specs.size());
  if (m == 1) {
    reg.vertical = {"s"};
  } else {
    for (int i = 0; i < m; ++i) reg.vertical.push_back("s" + std::to_string(i + 1));
  }
  reg.ambient = extend(chart, reg.vertical, compact ? kTwoPi : 0.0);
  reg.T = make_tangent(reg.ambient);
  reg.signs = signs;
  reg.components = comps;
  for (int i = 0; i < m; ++i) reg.actions.push_back(translation(m, i, 0.7 + 0.5 * i));
  RegPatch p;
  p.name = "all";
  p.psi_inv = padded_anchor(reg);
  for (int i = 0; i < m; ++i) {
    const auto& c = comps[i];
    int si = reg.ambient.index(reg.vertical[i]);
    std::vector<Expr> th(reg.ambient.dim());
    th[reg.ambient.index(c.z)] = Expr(1);
    th[si] = Expr(signs[i]) * pow(var(c.z), c.k);
    p.thetas.push_back(one_form(reg.T, th));
    p.psi_inv[i][si] = Expr(-signs[i]);
    p.normals.push_back(c.z);
  }
  add_patch(reg, p);
  return reg;
}

Section lift(const RegularisationResult& reg, const Section& s, int patch) {
  if (s.A != reg.source) throw ChartMismatch("section does not live on the regularised algebroid");
  return Section{reg.patches.at(patch).F, s.c};
}

AForm lift(const RegularisationResult& reg, const AForm& w, int patch) {
  if (w.A != reg.source) throw ChartMismatch("form does not live on the regularised algebroid");
  return w.rehome(reg.patches.at(patch).F);
}

Distribution lift(const RegularisationResult& reg, const Distribution& xi, int patch) {
  std::vector<Section> span;
  for (const auto& s : xi.span) span.push_back(lift(reg, s, patch));
  return Distribution::spanned(reg.patches.at(patch).F, span, xi.rank);
}

AForm ambient_form(const RegularisationResult& reg, const AForm& lifted, int patch) {
  const auto& pt = reg.patches.at(patch);
  check_same(lifted.A, pt.F);
  int n = reg.ambient.dim();
  int r = pt.F->rank();
  std::vector<std::vector<Expr>> P(n, std::vector<Expr>(n));
  for (int a = 0; a < r; ++a) {
    for (int i = 0; i < n; ++i) P[i][a] = pt.psi_inv[a][i];
  }
  for (std::size_t j = 0; j < pt.normals.size(); ++j) P[reg.ambient.index(pt.normals[j])][r + j] = Expr(1);
  auto inv = symbolic_inverse(P);
  std::vector<AForm> phi;
  for (int a = 0; a < r; ++a) {
    std::vector<Expr> c(n);
    for (int i = 0; i < n; ++i) c[i] = inv.adjugate[a][i].is_zero() ? Expr() : inv.adjugate[a][i] / inv.det;
    phi.push_back(one_form(reg.T, c));
  }
  AForm out = AForm::zero(reg.T, lifted.p);
  const auto& sets = subsets(r, lifted.p);
  for (std::size_t I = 0; I < sets.size(); ++I) {
    if (lifted.c[I].is_zero()) continue;
    AForm term = AForm::function(reg.T, lifted.c[I]);
    for (int a : sets[I]) term = wedge(term, phi[a]);
    out = out + term;
  }
  return out;
}

CentralLeaf central_leaf(const RegularisationResult& reg, const AForm& alpha) {
  if (reg.kind != RegKind::Trivial && reg.kind != RegKind::Cutoff && reg.kind != RegKind::Compact) {
    throw NotBK("central leaf needs a trivial regularisation of a b^k divisor");
  }
  if (alpha.A != reg.source) throw ChartMismatch("form does not live on the regularised algebroid");
  auto ld = restrict_to_locus(alpha);
  const auto& comp = reg.components[0];
  Point origin{{comp.z}, {0.0}};
  Expr fz0 = substitute(differentiate(comp.f, comp.z), comp.z, Expr(0));
  if (free_variables(fz0).empty()) fz0 = Expr::number(evaluate(fz0, origin));
  CentralLeaf out;
  out.u = ld.u;
  out.beta = ld.beta;
  Chart lc = ld.Z->chart.with(reg.vertical[0], reg.ambient.period[reg.ambient.index(reg.vertical[0])]);
  out.leaf = make_tangent(lc);
  out.form = AForm::zero(out.leaf, 1);
  const auto& Z = *ld.Z;
  for (int a = 0; a < Z.rank(); ++a) {
    for (int i = 0; i < Z.dim(); ++i) {
      bool unit = i == a ? Z.anchor[a][i].is_one() : Z.anchor[a][i].is_zero();
      if (!unit) throw InvalidSpec("central leaf needs an adapted divisor chart");
    }
    out.form.c[a] = ld.beta.c[a];
  }
  out.form.c[lc.dim() - 1] = Expr(-reg.signs[0]) * ld.u / fz0;
  return out;
}

double central_leaf_residual(const RegularisationResult& reg, const AForm& alpha, int samples, std::uint64_t seed) {
  auto cl = central_leaf(reg, alpha);
  AForm amb = ambient_form(reg, lift(reg, alpha, 0), 0);
  const auto& z = reg.components[0].z;
  const auto& lc = cl.leaf->chart;
  double out = 0;
  for (const auto& p : lc.domain(2.0).with_count(samples).with_seed(seed).points()) {
    Point q = p;
    q.names.push_back(z);
    q.values.push_back(0.0);
    for (int i = 0; i < lc.dim(); ++i) {
      double a = eval0(cl.form.c[i], p);
      double b = eval0(amb.c[reg.ambient.index(lc.coords[i])], q);
      out = std::max(out, std::fabs(a - b));
    }
  }
  return out;
}

double lift_commutation_residual(const RegularisationResult& reg, const AForm& w, int samples, std::uint64_t seed) {
  struct Pre {
    AForm lhs;
    std::vector<Expr> rhs;
  };
  std::vector<Pre> pre;
  for (std::size_t pi = 0; pi < reg.patches.size(); ++pi) {
    const auto& pt = reg.patches[pi];
    AForm l = lift(reg, w, static_cast<int>(pi));
    Pre pr{d(l), {}};
    AForm amb = d(ambient_form(reg, l, static_cast<int>(pi)));
    for (const auto& J : subsets(pt.F->rank(), w.p + 1)) {
      std::vector<Section> xs;
      for (int a : J) xs.push_back(Section{reg.T, pt.psi_inv[a]});
      pr.rhs.push_back(contract(amb, xs));
    }
    pre.push_back(pr);
  }
  double out = 0;
  auto pts = reg.domain(samples, seed).points();
  for (const auto& p : pts) {
    const RegPatch& pt = reg.patch_at(p);
    const Pre& pr = pre[&pt - reg.patches.data()];
    for (std::size_t J = 0; J < pr.rhs.size(); ++J) {
      out = std::max(out, std::fabs(eval0(pr.lhs.c[J], p) - eval0(pr.rhs[J], p)));
    }
  }
  return out;
}

bool RegReport::pass(double tol) const {
  return involutivity < tol && tangency < tol && graphical_failures == 0 && morphism() < tol && invariance < tol &&
         frame_min_singular > 1e-6;
}

RegReport verify_regularisation(const RegularisationResult& reg, int samples, std::uint64_t seed) {
  RegReport rep;
  const int n = reg.ambient.dim();
  const int q = reg.codim();
  const auto vi = vertical_indices(reg);
  struct Pre {
    std::vector<AForm> invol;
    std::vector<std::vector<Expr>> bracket_diff;
    std::vector<std::vector<Expr>> tangency;  // theta_j(psi_a)
  };
  std::uint64_t state = seed * 7919 + 17;
  std::vector<std::pair<Section, Section>> pairs;
  for (int t = 0; t < 3; ++t) {
    Section X{reg.source, {}}, Y{reg.source, {}};
    for (int a = 0; a < reg.source->rank(); ++a) {
      X.c.push_back(random_function(reg.base, state, 2));
      Y.c.push_back(random_function(reg.base, state, 2));
    }
    pairs.emplace_back(X, Y);
  }
  std::vector<Pre> pre;
  for (const auto& pt : reg.patches) {
    Pre pr;
    AForm all = AForm::function(reg.T, Expr(1));
    for (const auto& th : pt.thetas) all = wedge(all, th);
    for (const auto& th : pt.thetas) {
      if (all.p + 2 <= n) pr.invol.push_back(wedge(d(th), all));
      std::vector<Expr> row;
      for (const auto& psi : pt.psi_inv) {
        Expr s;
        for (int i = 0; i < n; ++i) {
          if (!th.c[i].is_zero() && !psi[i].is_zero()) s += th.c[i] * psi[i];
        }
        row.push_back(s);
      }
      pr.tangency.push_back(row);
    }
    for (const auto& [X, Y] : pairs) {
      auto lhs = vf_bracket(reg.ambient, push(pt.psi_inv, X.c), push(pt.psi_inv, Y.c));
      auto rhs = push(pt.psi_inv, bracket(X, Y).c);
      std::vector<Expr> diff(n);
      for (int i = 0; i < n; ++i) diff[i] = lhs[i] - rhs[i];
      pr.bracket_diff.push_back(diff);
    }
    pre.push_back(pr);
  }

  auto off = reg.domain(samples, seed).points();
  std::vector<Point> on;
  int ncomp = reg.kind == RegKind::SelfCrossing ? static_cast<int>(reg.components.size()) : 1;
  std::vector<std::vector<Point>> on_by_comp;
  for (int c = 0; c < ncomp; ++c) {
    on_by_comp.push_back(reg.locus_points(std::max(10, samples / 5), seed + 1 + c, c));
    on.insert(on.end(), on_by_comp.back().begin(), on_by_comp.back().end());
  }
  std::vector<Point> all = off;
  all.insert(all.end(), on.begin(), on.end());
  rep.samples = static_cast<int>(all.size());
  Expr defining = reg.source->divisor.defining();

  for (const auto& p : all) {
    const RegPatch& pt = reg.patch_at(p);
    const Pre& pr = pre[&pt - reg.patches.data()];
    for (const auto& w : pr.invol) {
      for (const auto& c : w.c) rep.involutivity = std::max(rep.involutivity, std::fabs(eval0(c, p)));
    }
    for (const auto& row : pr.tangency) {
      for (const auto& e : row) rep.frame_tangency = std::max(rep.frame_tangency, std::fabs(eval0(e, p)));
    }
    for (const auto& diff : pr.bracket_diff) {
      for (const auto& e : diff) rep.bracket = std::max(rep.bracket, std::fabs(eval0(e, p)));
    }
    for (int a = 0; a < reg.source->rank(); ++a) {
      for (int i = 0; i < reg.base.dim(); ++i) {
        double v = eval0(pt.psi_inv[a][i], p) - eval0(reg.source->anchor[a][i], p);
        rep.anchor = std::max(rep.anchor, std::fabs(v));
      }
    }
    Mat psi = eval_matrix(pt.psi_inv, p);
    Eigen::JacobiSVD<Mat> svd(psi);
    rep.frame_min_singular = std::min(rep.frame_min_singular, svd.singularValues()(psi.rows() - 1));
  }

  for (const auto& p : off) {
    const RegPatch& pt = reg.patch_at(p);
    Mat th = theta_matrix(pt, p);
    Mat vb(q, q);
    for (int j = 0; j < q; ++j) {
      for (int i = 0; i < q; ++i) vb(j, i) = th(j, vi[i]);
    }
    double det = std::fabs(vb.determinant());
    if (std::fabs(eval0(defining, p)) > 1e-9) {
      rep.graphical_min = std::min(rep.graphical_min, det);
      if (det < 1e-14) ++rep.graphical_failures;
    }
    for (const auto& g : reg.actions) {
      Point gp = act(reg, g, p);
      const RegPatch& pg = reg.patch_at(gp);
      Mat thg = theta_matrix(pg, gp);
      Mat pulled = thg;
      for (int j = 0; j < q; ++j) {
        Vec row(q);
        for (int i = 0; i < q; ++i) row(i) = thg(j, vi[i]);
        Vec pr = g.L.transpose() * row;
        for (int i = 0; i < q; ++i) pulled(j, vi[i]) = pr(i);
      }
      rep.invariance = std::max(rep.invariance, span_deviation(th, pulled));
      Mat fa = eval_matrix(pt.psi_inv, p), fg = eval_matrix(pg.psi_inv, gp);
      for (int a = 0; a < fa.rows(); ++a) {
        Vec v(q);
        for (int i = 0; i < q; ++i) v(i) = fa(a, vi[i]);
        Vec gv = g.L * v;
        for (int i = 0; i < n; ++i) {
          auto it = std::find(vi.begin(), vi.end(), i);
          double expect = it == vi.end() ? fa(a, i) : gv(it - vi.begin());
          rep.invariance = std::max(rep.invariance, std::fabs(expect - fg(a, i)));
        }
      }
    }
  }

  for (int c = 0; c < ncomp; ++c) {
    std::vector<Expr> fns;
    std::vector<int> verts, forms;
    if (reg.kind == RegKind::Elliptic) {
      fns = {var(reg.x), var(reg.y)};
      verts = vi;
      forms = {0, 1};
    } else if (reg.kind == RegKind::SelfCrossing) {
      fns = {var(reg.components[c].z)};
      verts = {vi[c]};
      forms = {c};
    } else {
      fns = {reg.components[0].f};
      verts = vi;
      forms = {0};
    }
    std::vector<std::vector<Expr>> grads;
    for (const auto& f : fns) {
      std::vector<Expr> g;
      for (const auto& cname : reg.base.coords) g.push_back(differentiate(f, cname));
      grads.push_back(g);
    }
    for (const auto& p : on_by_comp[c]) {
      const RegPatch& pt = reg.patch_at(p);
      Mat G(reg.base.dim(), fns.size());
      for (std::size_t j = 0; j < fns.size(); ++j) {
        for (int i = 0; i < reg.base.dim(); ++i) G(i, j) = eval0(grads[j][i], p);
      }
      Mat tz = complement_basis(G);
      Mat V = Mat::Zero(n, tz.cols() + verts.size());
      V.topLeftCorner(reg.base.dim(), tz.cols()) = tz;
      for (std::size_t j = 0; j < verts.size(); ++j) V(verts[j], tz.cols() + j) = 1.0;
      Mat th = theta_matrix(pt, p);
      for (int j : forms) {
        Vec r = th.row(j) * V;
        rep.tangency = std::max(rep.tangency, r.cwiseAbs().maxCoeff());
      }
    }
  }
  return rep;
}

std::vector<CoorientationRecord> coorientation(const RegularisationResult& reg, int samples, std::uint64_t seed) {
  if (reg.kind == RegKind::Elliptic) throw NotBK("coorientation needs a b^k divisor");
  std::vector<CoorientationRecord> out;
  for (std::size_t c = 0; c < reg.components.size(); ++c) {
    CoorientationRecord rec;
    rec.z = reg.components[c].z;
    rec.k = reg.components[c].k;
    int vi = reg.ambient.index(reg.vertical[reg.kind == RegKind::SelfCrossing ? c : 0]);
    int pos = 0, neg = 0;
    for (const auto& p : reg.locus_points(samples, seed, static_cast<int>(c))) {
      double v = eval0(reg.patch_at(p).psi_inv[c][vi], p);
      if (v > 0) ++pos;
      if (v < 0) ++neg;
    }
    rec.vertical_sign = (pos > 0 && neg == 0) ? 1 : (neg > 0 && pos == 0) ? -1 : 0;
    if (rec.k % 2 == 0) {
      rec.coorientation = rec.vertical_sign < 0 ? 1 : (rec.vertical_sign > 0 ? -1 : 0);
    } else {
      rec.vertical_orientation = -rec.vertical_sign;
    }
    out.push_back(rec);
  }
  return out;
}

namespace {

LiftCheck lift_check(const Chart& chart, const std::string& z, const Expr& f, int k, const std::vector<Expr>& expect,
                     int samples, std::uint64_t seed) {
  Chart amb = chart.with("t");
  Expr t = var("t");
  Expr fk = pow(f, k);
  std::vector<Expr> X(amb.dim());
  X[amb.index(z)] = fk;
  // hor(X) = X - d log(f^k)(X) t d_t
  Expr dlog = differentiate(fk, z);
  X[amb.index("t")] = -dlog * t;
  LiftCheck out;
  out.hor = X;
  Expr g = t * fk;
  Expr applied;
  for (int i = 0; i < amb.dim(); ++i) {
    if (!X[i].is_zero()) applied += X[i] * differentiate(g, amb.coords[i]);
  }
  SampleDomain dom = amb.domain(2.0).with_count(samples).with_seed(seed);
  dom.exclude(t, 1e-2);
  for (const auto& p : dom.points()) {
    out.residual = std::max(out.residual, std::fabs(eval0(applied, p)));
    for (std::size_t i = 0; i < expect.size(); ++i) {
      out.residual = std::max(out.residual, std::fabs(eval0(expect[i], p) - eval0(X[i], p)));
    }
  }
  Expr fz = differentiate(f, z);
  for (auto p : dom.points()) {
    if (!project(p, z, f, fz)) continue;
    double nrm = 0;
    for (const auto& e : X) nrm += std::pow(eval0(e, p), 2);
    out.on_locus_norm = std::max(out.on_locus_norm, std::sqrt(nrm));
  }
  out.degenerate = out.on_locus_norm < 1e-12;
  return out;
}

}  // namespace

LiftCheck canonical_lift_check(const RegularisationResult& reg, int samples, std::uint64_t seed) {
  if (reg.kind != RegKind::Intrinsic || reg.components.at(0).k != 1) {
    throw NotB1("canonical lift needs an intrinsic regularisation of a b divisor");
  }
  const auto& c = reg.components[0];
  return lift_check(reg.base, c.z, c.f, 1, reg.patches[0].psi_inv[0], samples, seed);
}

LiftCheck intrinsic_lift_analog(const Chart& chart, const std::string& z, const Expr& f, int k, int samples,
                                std::uint64_t seed) {
  return lift_check(chart, z, f, k, {}, samples, seed);
}

double exponential_conjugation_residual(const Chart& chart, const Expr& f_in, int samples, std::uint64_t seed) {
  auto triv = regularise_trivial(chart, f_in, 1);
  auto intr = regularise_intrinsic(chart, f_in, triv.components[0].z);
  const AForm& theta_f = triv.patches[0].thetas[0];
  const AForm& theta_t = intr.patches[0].thetas[0];
  int n = triv.ambient.dim();
  std::vector<std::vector<Expr>> M(n, std::vector<Expr>(n));
  Expr es = exp(var("s"));
  for (int b = 0; b < n; ++b) {
    const auto& cb = triv.ambient.coords[b];
    if (cb == "s") {
      M[b][intr.ambient.index("t")] = es;
    } else {
      M[b][intr.ambient.index(cb)] = Expr(1);
    }
  }
  AForm pulled = pullback(theta_t, triv.T, M, {{"t", es}});
  AForm wd = wedge(pulled, theta_f);
  AForm ratio = pulled - es * theta_f;
  double out = 0;
  for (const auto& p : triv.domain(samples, seed).points()) {
    for (const auto& c : wd.c) out = std::max(out, std::fabs(eval0(c, p)));
    for (const auto& c : ratio.c) out = std::max(out, std::fabs(eval0(c, p)));
  }
  return out;
}

double form_difference(const RegularisationResult& a, const RegularisationResult& b, const std::vector<Point>& pts) {
  if (!(a.ambient == b.ambient)) throw ChartMismatch("regularisations live on different ambients");
  double out = 0;
  for (const auto& p : pts) {
    Mat ta = theta_matrix(a.patch_at(p), p), tb = theta_matrix(b.patch_at(p), p);
    out = std::max({out, span_deviation(ta, tb), span_deviation(tb, ta)});
  }
  return out;
}

}  // namespace balg
