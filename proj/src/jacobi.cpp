#include "balg/jacobi.hpp"

#include <cmath>
#include <set>

#include "balg/distribution.hpp"

namespace balg {

namespace {

Expr var(const std::string& n) { return Expr::var(n); }

std::vector<Expr> grad(const Chart& ch, const Expr& f) {
  std::vector<Expr> g;
  for (const auto& x : ch.coords) g.push_back(differentiate(f, x));
  return g;
}

Expr apply_field(const Chart& ch, const std::vector<Expr>& X, const Expr& f) {
  std::vector<Expr> t;
  for (int i = 0; i < ch.dim(); ++i) {
    if (X[i].is_zero()) continue;
    Expr df = differentiate(f, ch.coords[i]);
    if (!df.is_zero()) t.push_back(X[i] * df);
  }
  return sum(t);
}

double eval0(const Expr& e, const Point& p) { return e.is_zero() ? 0.0 : evaluate(e, p); }

/// Samples of a chart with the named coordinates kept away from zero.
std::vector<Point> sample(const Chart& ch, const std::vector<std::string>& away, int count, std::uint64_t seed) {
  SampleDomain d = ch.domain(2.0).with_count(count).with_seed(seed);
  for (const auto& n : away) d.exclude(var(n), 0.1);
  return d.points();
}

struct MaxTracker {
  double value = 0;
  Point witness;
  void update(const Multivector& P, const Point& p) {
    for (double v : P.eval(p)) {
      if (std::fabs(v) > value) {
        value = std::fabs(v);
        witness = p;
      }
    }
  }
};

/// Variables appearing with a negative power.
void inverted_variables(const Expr& e, std::set<std::string>& out) {
  if (e.kind() == ExprKind::Pow && e.exponent() < 0 && e.args()[0].kind() == ExprKind::Var) {
    out.insert(e.args()[0].name());
  }
  if (e.kind() != ExprKind::Const && e.kind() != ExprKind::Var) {
    for (const auto& a : e.args()) inverted_variables(a, out);
  }
}

std::string fresh(const Chart& ch, const std::string& base) {
  std::string n = base;
  while (ch.has(n)) n += "_";
  return n;
}

}  // namespace

JacobiPair pair_from_contact(const AForm& alpha) {
  if (alpha.p != 1) throw NotContact("a contact form has degree 1");
  int r = alpha.A->rank();
  if (r != alpha.A->dim()) throw RankMismatch("the Jacobi pair needs rank equal to the dimension");
  if (r % 2 == 0) throw NotContact("contact forms need odd rank");
  auto vol = contact_volume_check(alpha);
  if (!vol.value) throw NotContact("alpha ^ (d alpha)^n vanishes at a sample");
  AForm da = d(alpha);
  std::vector<std::vector<Expr>> B(r, std::vector<Expr>(r));
  for (int a = 0; a < r; ++a) {
    for (int b = 0; b < r; ++b) B[a][b] = da.at({a, b}) + alpha.c[a] * alpha.c[b];
  }
  auto inv = symbolic_inverse(B);
  if (inv.det.is_zero()) throw NotContact("the flat map is singular");
  std::vector<Expr> R(r);
  for (int a = 0; a < r; ++a) {
    std::vector<Expr> t;
    for (int b = 0; b < r; ++b) t.push_back(inv.adjugate[b][a] * alpha.c[b]);
    R[a] = sum(t) / inv.det;
  }
  // X_c = -B^{-T}(e^c - R^c alpha), Lambda^{cd} = X_c^d; the symmetric part cancels
  std::vector<Expr> L;
  for (const auto& s : subsets(r, 2)) {
    Expr num = inv.adjugate[s[0]][s[1]] - inv.adjugate[s[1]][s[0]];
    L.push_back(num.is_zero() ? Expr() : -num / (Expr(2) * inv.det));
  }
  return {push_anchor(alpha.A, 2, L), push_anchor(alpha.A, 1, R)};
}

Expr bracket_from_pair(const JacobiPair& pair, const Expr& f, const Expr& g) {
  const Chart& ch = pair.Lambda.chart;
  auto df = grad(ch, f), dg = grad(ch, g);
  return contract(pair.Lambda, {df, dg}) + f * apply_field(ch, pair.R.c, g) - g * apply_field(ch, pair.R.c, f);
}

JacobiPair restrict_pair(const JacobiPair& pair, const std::string& z) {
  const Chart& ch = pair.Lambda.chart;
  Chart Z = ch.without(z);
  int iz = ch.index(z);
  auto cut = [&](const Multivector& P) {
    Multivector out = Multivector::zero(Z, P.p);
    const auto& sets = subsets(ch.dim(), P.p);
    for (std::size_t I = 0; I < sets.size(); ++I) {
      bool has_z = false;
      std::vector<std::string> names;
      for (int i : sets[I]) {
        if (i == iz) has_z = true;
        names.push_back(ch.coords[i]);
      }
      if (has_z || P.c[I].is_zero()) continue;
      std::vector<int> idx;
      for (const auto& n : names) idx.push_back(Z.index(n));
      out.coef(idx) = substitute(P.c[I], z, Expr(0));
    }
    return out;
  };
  return {cut(pair.Lambda), cut(pair.R)};
}

PairReport verify_pair(const JacobiPair& pair, int samples, std::uint64_t seed, double tol) {
  const Multivector& L = pair.Lambda;
  if (L.p != 2 || pair.R.p != 1) throw DegreeOverflow("a Jacobi pair is a bivector and a vector field");
  if (!(L.chart == pair.R.chart)) throw ChartMismatch("Lambda and R on different charts");
  Multivector a = schouten(L, L) - Expr(kJacobiFactor) * wedge(L, pair.R);
  Multivector b = schouten(L, pair.R);
  PairReport rep;
  MaxTracker ta, tb;
  for (const auto& p : L.chart.domain(2.0).with_count(samples).with_seed(seed).points()) {
    try {
      ta.update(a, p);
      tb.update(b, p);
    } catch (const DomainError&) {
    }
  }
  rep.lambda_residual = ta.value;
  rep.r_residual = tb.value;
  rep.witness = ta.value >= tb.value ? ta.witness : tb.witness;
  rep.pass = rep.lambda_residual < tol && rep.r_residual < tol;
  return rep;
}

double bracket_jacobi_residual(const JacobiPair& pair, int triples, int samples, std::uint64_t seed) {
  const Chart& ch = pair.Lambda.chart;
  std::uint64_t state = seed;
  auto pts = ch.domain(2.0).with_count(samples).with_seed(seed + 1).points();
  double worst = 0;
  for (int k = 0; k < triples; ++k) {
    Expr f = random_function(ch, state), g = random_function(ch, state), h = random_function(ch, state);
    auto br = [&](const Expr& a, const Expr& b) { return bracket_from_pair(pair, a, b); };
    Expr jac = br(br(f, g), h) + br(br(g, h), f) + br(br(h, f), g);
    for (const auto& p : pts) {
      try {
        worst = std::max(worst, std::fabs(eval0(jac, p)));
      } catch (const DomainError&) {
      }
    }
  }
  return worst;
}

Multivector poissonise(const JacobiPair& pair, int variant, const std::string& t, double tol) {
  if (variant != 1 && variant != 2) throw InvalidSpec("Poissonisation variant must be 1 or 2");
  if (pair.Lambda.chart.has(t)) throw DuplicateCoordinate("coordinate " + t + " already in the chart");
  if (!verify_pair(pair).pass) throw NotJacobi("pair fails the Jacobi identities");
  Chart ch = pair.Lambda.chart.with(t);
  Multivector L = pair.Lambda.extend(ch), R = pair.R.extend(ch);
  Multivector dtR = wedge(Multivector::basis(ch, {t}), R);
  Expr tv = var(t);
  Multivector pi = variant == 1 ? tv * (L - tv * dtR) : pow(tv, -1) * (L + tv * dtR);
  if (poisson_residual(pi) > tol) throw NotJacobi("Poissonisation fails [Pi, Pi] = 0");
  return pi;
}

double poisson_residual(const Multivector& pi, int samples, std::uint64_t seed) {
  Multivector s = schouten(pi, pi);
  std::set<std::string> names;
  for (const auto& e : pi.c) inverted_variables(e, names);
  std::vector<std::string> away(names.begin(), names.end());
  MaxTracker tr;
  for (const auto& p : sample(pi.chart, away, samples, seed)) {
    try {
      tr.update(s, p);
    } catch (const DomainError&) {
    }
  }
  return tr.value;
}

bool inversion_maps_pi2_to_pi1(const JacobiPair& pair, const std::string& t) {
  Multivector p1 = poissonise(pair, 1, t), p2 = poissonise(pair, 2, t);
  const Chart& ch = p2.chart;
  std::vector<Expr> F;
  for (const auto& n : ch.coords) F.push_back(n == t ? pow(var(t), -1) : var(n));
  Multivector img = change_coordinates(p2, ch, F, {{t, pow(var(t), -1)}});
  return (img - p1).structurally_zero();
}

AlgebroidPtr jet_algebroid(const JacobiPair& pair) {
  if (!verify_pair(pair).pass) throw NotJacobi("pair fails the Jacobi identities");
  const Chart& ch = pair.Lambda.chart;
  int n = ch.dim();
  int r = n + 1;
  std::vector<std::string> labels;
  for (const auto& x : ch.coords) labels.push_back("d" + x);
  labels.push_back("1");
  std::vector<std::vector<Expr>> anchor(r, std::vector<Expr>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) anchor[i][j] = pair.Lambda.at({i, j});
  }
  anchor[n] = pair.R.c;
  std::vector<Expr> st(static_cast<std::size_t>(r * r * r));
  auto at = [&](int a, int b, int c) -> Expr& { return st[(a * r + b) * r + c]; };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      Expr Lij = pair.Lambda.at({i, j});
      for (int k = 0; k < n; ++k) {
        Expr v = differentiate(Lij, ch.coords[k]);
        if (i == k) v = v + pair.R.c[j];
        if (j == k) v = v - pair.R.c[i];
        at(i, j, k) = v;
      }
      at(i, j, n) = -Lij;
    }
    for (int k = 0; k < n; ++k) {
      Expr v = differentiate(pair.R.c[i], ch.coords[k]);
      at(n, i, k) = v;
      at(i, n, k) = -v;
    }
  }
  return make_custom(AlgebroidKind::Jet, ch, labels, anchor, st);
}

std::vector<Expr> CanonicalReps::field(const Expr& f) const {
  const Chart& ch = pair.Lambda.chart;
  auto X = sharp(pair.Lambda, grad(ch, f));
  for (int i = 0; i < ch.dim(); ++i) X[i] = X[i] + f * pair.R.c[i];
  return X;
}

Expr CanonicalReps::nabla1(const Expr& f) const { return -apply_field(pair.R.chart, pair.R.c, f); }

Expr CanonicalReps::nabla2(const Expr& f, const Expr& g) const {
  const Chart& ch = pair.Lambda.chart;
  auto X = field(f);
  Expr div = divergence(Multivector::vector_field(ch, X));
  return apply_field(ch, X, g) + g * (div - Expr(ch.dim() + 1) * apply_field(ch, pair.R.c, f));
}

Expr CanonicalReps::nabla2_displayed(const Expr& f, const Expr& g) const {
  const Chart& ch = pair.Lambda.chart;
  auto X = field(f);
  Expr div = divergence(Multivector::vector_field(ch, X));
  return apply_field(ch, X, g) + g * (div - apply_field(ch, pair.R.c, f));
}

Expr CanonicalReps::nabla3(const Expr& f, const Expr& W) const {
  const Chart& ch = pair.Lambda.chart;
  auto X = field(f);
  return apply_field(ch, X, W) + W * divergence(Multivector::vector_field(ch, X));
}

Expr CanonicalReps::nabla4(const Expr& f, const Expr& g, const Expr& W) const {
  const Chart& ch = pair.Lambda.chart;
  int n = ch.dim();
  int r = n + 1;
  Section v{J, grad(ch, f)};
  v.c.push_back(f);
  // trace of ad_v on the frame
  std::vector<Expr> tr;
  for (int i = 0; i < r; ++i) {
    for (int a = 0; a < r; ++a) {
      const Expr& c = J->c(a, i, i);
      if (!c.is_zero() && !v.c[a].is_zero()) tr.push_back(v.c[a] * c);
    }
    tr.push_back(-J->rho(i, v.c[i]));
  }
  Expr trace = sum(tr);
  auto X = anchor_of(v);
  Expr div = divergence(Multivector::vector_field(ch, X));
  return (apply_field(ch, X, g) + g * trace) * W + g * (apply_field(ch, X, W) + W * div);
}

CanonicalReps canonical_reps(const JacobiPair& pair) { return CanonicalReps{pair, jet_algebroid(pair)}; }

RepsReport check_reps(const CanonicalReps& reps, int pairs, int samples, std::uint64_t seed) {
  const Chart& ch = reps.pair.Lambda.chart;
  int n = ch.dim();
  std::uint64_t state = seed;
  auto pts = ch.domain(2.0).with_count(samples).with_seed(seed + 7).points();
  RepsReport rep;
  auto worst = [&](double& slot, const Expr& e) {
    for (const auto& p : pts) {
      try {
        slot = std::max(slot, std::fabs(eval0(e, p)));
      } catch (const DomainError&) {
      }
    }
  };
  for (int k = 0; k < pairs; ++k) {
    Expr f1 = random_function(ch, state), f2 = random_function(ch, state);
    Expr g = random_function(ch, state), W = random_function(ch, state);
    worst(rep.decomposition, reps.nabla4(f1, g, W) - (reps.nabla2(f1, g) * W + g * reps.nabla3(f1, W)));
    worst(rep.displayed_decomposition,
          reps.nabla4(f1, g, W) - (reps.nabla2_displayed(f1, g) * W + g * reps.nabla3(f1, W)));
    Section v1{reps.J, grad(ch, f1)}, v2{reps.J, grad(ch, f2)};
    v1.c.push_back(f1);
    v2.c.push_back(f2);
    Section br = bracket(v1, v2);
    const Expr& h = br.c[n];
    for (int i = 0; i < n; ++i) worst(rep.holonomy, br.c[i] - differentiate(h, ch.coords[i]));
    Expr curv = reps.nabla2(f1, reps.nabla2(f2, g)) - reps.nabla2(f2, reps.nabla2(f1, g)) - reps.nabla2(h, g);
    worst(rep.flatness, curv);
  }
  return rep;
}

Multivector modular_vector(const Multivector& pi) {
  if (pi.p != 2) throw DegreeOverflow("modular vector of a non-bivector");
  const Chart& ch = pi.chart;
  std::vector<Expr> X(ch.dim());
  for (int i = 0; i < ch.dim(); ++i) {
    std::vector<Expr> t;
    for (int j = 0; j < ch.dim(); ++j) t.push_back(differentiate(pi.at({i, j}), ch.coords[j]));
    X[i] = sum(t);
  }
  return Multivector::vector_field(ch, X);
}

Multivector modular_poisson(const Multivector& pi, const std::string& sigma, double tol) {
  if (pi.p != 2) throw DegreeOverflow("modular structure of a non-bivector");
  if (pi.chart.has(sigma)) throw DuplicateCoordinate("coordinate " + sigma + " already in the chart");
  if (poisson_residual(pi) > tol) throw NotPoisson("[pi, pi] does not vanish");
  Chart ch = pi.chart.with(sigma);
  Multivector E = var(sigma) * Multivector::basis(ch, {sigma});
  return wedge(modular_vector(pi).extend(ch), E) + pi.extend(ch);
}

JacobiPair modular_jacobi(const JacobiPair& pair, const std::string& tau, double tol) {
  if (pair.Lambda.chart.has(tau)) throw DuplicateCoordinate("coordinate " + tau + " already in the chart");
  if (!verify_pair(pair, 200, 42, tol).pass) throw NotJacobi("pair fails the Jacobi identities");
  const Chart& base = pair.Lambda.chart;
  int n = base.dim();
  Multivector X = modular_vector(pair.Lambda) - Expr(n) * pair.R;
  Expr f = divergence(pair.R);
  Chart ch = base.with(tau);
  Multivector E = var(tau) * Multivector::basis(ch, {tau});
  return {wedge(X.extend(ch), E) + pair.Lambda.extend(ch), pair.R.extend(ch) + f * E};
}

DiagramReport commuting_diagram_check(const JacobiPair& pair, int samples, std::uint64_t seed) {
  const Chart& base = pair.Lambda.chart;
  int n = base.dim();
  std::string t = fresh(base, "t"), tau = fresh(base, "tau"), sigma = fresh(base, "sigma");
  DiagramReport rep;
  rep.path_a = poissonise(modular_jacobi(pair, tau), 2, t);
  Multivector b = modular_poisson(poissonise(pair, 2, t), sigma);
  const Chart& ca = rep.path_a.chart;
  // b lives on (x, t, sigma); tau = sigma t^n
  std::vector<Expr> F;
  for (const auto& x : ca.coords) F.push_back(x == tau ? var(sigma) * pow(var(t), n) : var(x));
  rep.path_b = change_coordinates(b, ca, F, {{sigma, var(tau) * pow(var(t), -n)}});
  rep.identification = sigma + " = " + tau + " * " + t + "^-" + std::to_string(n);
  Multivector diff = rep.path_a - rep.path_b;
  MaxTracker tr;
  std::set<std::string> inv;
  for (const auto& e : diff.c) inverted_variables(e, inv);
  inv.insert(tau);
  for (const auto& p : sample(ca, std::vector<std::string>(inv.begin(), inv.end()), samples, seed)) {
    try {
      tr.update(diff, p);
    } catch (const DomainError&) {
    }
  }
  rep.residual = tr.value;
  return rep;
}

BSymplecticReport b_symplectic_regularise(const AForm& omega, int samples, std::uint64_t seed) {
  const AlgebroidPtr& A = omega.A;
  if (omega.p != 2) throw NotSymplectic("a symplectic form has degree 2");
  int r = A->rank();
  if (r != A->dim() || r % 2 != 0) throw NotSymplectic("b-symplectic forms need even rank equal to the dimension");
  if (A->divisor.type != DivisorData::Type::BK || A->divisor.components.size() != 1) {
    throw InvalidSpec("b-symplectic regularisation needs a single b^k divisor");
  }
  const auto& comp = A->divisor.components[0];
  double min_det = INFINITY;
  for (const auto& p : check_points(A, 50, seed)) {
    min_det = std::min(min_det, std::fabs(two_form_matrix(omega, p).determinant()));
  }
  if (!(min_det > 1e-8)) throw NotSymplectic("omega^n vanishes at a sample");

  BSymplecticReport rep;
  RegOptions o;
  o.compact = true;
  o.z = comp.z;
  rep.reg = regularise_trivial(A->chart, comp.f, comp.k, o);
  const auto& src = rep.reg.source;
  for (int a = 0; a < r; ++a) {
    for (int i = 0; i < r; ++i) {
      if (!structurally_zero(src->anchor[a][i] - A->anchor[a][i])) {
        throw ChartMismatch("the form's frame differs from the regularised b^k frame");
      }
    }
  }
  rep.lifted = lift(rep.reg, omega.rehome(src));

  std::vector<std::vector<Expr>> W(r, std::vector<Expr>(r));
  for (int a = 0; a < r; ++a) {
    for (int b = 0; b < r; ++b) W[a][b] = omega.at({a, b});
  }
  auto inv = symbolic_inverse(W);
  std::vector<Expr> piA;
  for (const auto& s : subsets(r, 2)) {
    piA.push_back(inv.adjugate[s[0]][s[1]].is_zero() ? Expr() : inv.adjugate[s[0]][s[1]] / inv.det);
  }
  rep.pi = push_anchor(A, 2, piA);
  const Chart& M = A->chart;
  Expr fk = pow(comp.f, comp.k);
  std::vector<Expr> dlog;
  for (const auto& x : M.coords) dlog.push_back(differentiate(comp.f, x) / fk);
  Multivector X = Multivector::vector_field(M, sharp(rep.pi, dlog));
  const Chart& amb = rep.reg.ambient;
  const std::string& s = rep.reg.vertical[0];
  rep.pi_R = rep.pi.extend(amb) + Expr(rep.reg.signs[0]) * wedge(X.extend(amb), Multivector::basis(amb, {s}));

  const auto& patch = rep.reg.patches[0];
  int m = amb.dim();
  rep.leaf_min_det = INFINITY;
  for (const auto& p : rep.reg.domain(samples, seed).points()) {
    Mat Wl = two_form_matrix(rep.lifted, p);
    rep.leaf_min_det = std::min(rep.leaf_min_det, std::fabs(Wl.determinant()));
    Mat P(m, r);
    for (int a = 0; a < r; ++a) {
      for (int i = 0; i < m; ++i) P(i, a) = eval0(patch.psi_inv[a][i], p);
    }
    Mat leaf = P * Wl.inverse() * P.transpose();
    Mat piR = rep.pi_R.matrix(p);
    rep.comparison = std::max(rep.comparison, (leaf - piR).cwiseAbs().maxCoeff());
    Vec th(m);
    for (int i = 0; i < m; ++i) th(i) = eval0(patch.thetas[0].c[i], p);
    rep.tangency = std::max(rep.tangency, (piR.transpose() * th).cwiseAbs().maxCoeff());
    ++rep.samples;
  }
  if (!(rep.leaf_min_det > 1e-8)) throw NotSymplectic("the lifted form degenerates on a leaf");
  return rep;
}

}  // namespace balg
