#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>

#include "balg/algebroid.hpp"

namespace balg {

long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

const std::vector<std::vector<int>>& subsets(int r, int p) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::vector<std::vector<int>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(r, p);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<std::vector<int>> out;
  if (p >= 0 && p <= r) {
    std::vector<int> cur(p);
    for (int i = 0; i < p; ++i) cur[i] = i;
    while (true) {
      out.push_back(cur);
      int i = p - 1;
      while (i >= 0 && cur[i] == r - p + i) --i;
      if (i < 0) break;
      ++cur[i];
      for (int j = i + 1; j < p; ++j) cur[j] = cur[j - 1] + 1;
    }
  }
  return cache.emplace(key, std::move(out)).first->second;
}

int subset_index(int r, const std::vector<int>& idx) {
  int p = static_cast<int>(idx.size());
  long pos = 0;
  int prev = -1;
  for (int i = 0; i < p; ++i) {
    for (int v = prev + 1; v < idx[i]; ++v) pos += binomial(r - v - 1, p - i - 1);
    prev = idx[i];
  }
  return static_cast<int>(pos);
}

namespace {

/// Sorts idx in place; returns the permutation sign or 0 on repeated entries.
int sort_sign(std::vector<int>& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    for (std::size_t j = i; j > 0 && idx[j - 1] > idx[j]; --j) {
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  }
  for (std::size_t i = 1; i < idx.size(); ++i) {
    if (idx[i] == idx[i - 1]) return 0;
  }
  return sign;
}

}  // namespace

void check_same(const AlgebroidPtr& a, const AlgebroidPtr& b) {
  if (a.get() == b.get()) return;
  if (!a || !b || a->rank() != b->rank() || !(a->chart == b->chart) || a->labels != b->labels) {
    throw ChartMismatch("objects live on different algebroid charts");
  }
}

Section Section::basis(const AlgebroidPtr& A, int a) {
  Section s{A, std::vector<Expr>(A->rank())};
  s.c[a] = Expr(1);
  return s;
}

std::vector<double> Section::eval(const Point& p) const {
  std::vector<double> v;
  for (const auto& e : c) v.push_back(evaluate(e, p));
  return v;
}

AForm AForm::zero(const AlgebroidPtr& A, int p) {
  if (p < 0 || p > A->rank()) throw DegreeOverflow("form degree " + std::to_string(p));
  return AForm{A, p, std::vector<Expr>(binomial(A->rank(), p))};
}

AForm AForm::function(const AlgebroidPtr& A, const Expr& f) {
  AForm w = zero(A, 0);
  w.c[0] = f;
  return w;
}

AForm AForm::basis(const AlgebroidPtr& A, const std::vector<int>& idx) {
  std::vector<int> s = idx;
  int sg = sort_sign(s);
  AForm w = zero(A, static_cast<int>(idx.size()));
  if (sg != 0) w.c[subset_index(A->rank(), s)] = Expr(sg);
  return w;
}

Expr AForm::at(const std::vector<int>& idx) const {
  std::vector<int> s = idx;
  int sg = sort_sign(s);
  if (sg == 0) return Expr();
  const Expr& v = c[subset_index(A->rank(), s)];
  return sg > 0 ? v : -v;
}

Expr& AForm::coef(const std::vector<int>& s) { return c[subset_index(A->rank(), s)]; }
const Expr& AForm::coef(const std::vector<int>& s) const { return c[subset_index(A->rank(), s)]; }

std::vector<double> AForm::eval(const Point& pt) const {
  std::vector<double> v;
  for (const auto& e : c) v.push_back(evaluate(e, pt));
  return v;
}

bool AForm::structurally_zero() const {
  return std::all_of(c.begin(), c.end(), [](const Expr& e) { return balg::structurally_zero(e); });
}

AForm AForm::rehome(const AlgebroidPtr& B) const {
  if (B->rank() != A->rank()) throw RankMismatch("rehome needs equal ranks");
  return AForm{B, p, c};
}

Section operator+(const Section& a, const Section& b) {
  check_same(a.A, b.A);
  Section s = a;
  for (std::size_t i = 0; i < s.c.size(); ++i) s.c[i] += b.c[i];
  return s;
}

Section operator-(const Section& a, const Section& b) {
  check_same(a.A, b.A);
  Section s = a;
  for (std::size_t i = 0; i < s.c.size(); ++i) s.c[i] -= b.c[i];
  return s;
}

Section operator*(const Expr& f, const Section& a) {
  Section s = a;
  for (auto& e : s.c) e = f * e;
  return s;
}

AForm operator+(const AForm& a, const AForm& b) {
  check_same(a.A, b.A);
  if (a.p != b.p) throw DegreeOverflow("adding forms of different degree");
  AForm s = a;
  for (std::size_t i = 0; i < s.c.size(); ++i) s.c[i] += b.c[i];
  return s;
}

AForm operator-(const AForm& a, const AForm& b) {
  check_same(a.A, b.A);
  if (a.p != b.p) throw DegreeOverflow("subtracting forms of different degree");
  AForm s = a;
  for (std::size_t i = 0; i < s.c.size(); ++i) s.c[i] -= b.c[i];
  return s;
}

AForm operator*(const Expr& f, const AForm& a) {
  AForm s = a;
  for (auto& e : s.c) e = f * e;
  return s;
}

std::vector<Expr> anchor_of(const Section& X) {
  const auto& A = *X.A;
  std::vector<Expr> v;
  for (int i = 0; i < A.dim(); ++i) {
    std::vector<Expr> t;
    for (int a = 0; a < A.rank(); ++a) {
      if (!X.c[a].is_zero() && !A.anchor[a][i].is_zero()) t.push_back(X.c[a] * A.anchor[a][i]);
    }
    v.push_back(sum(t));
  }
  return v;
}

Expr apply(const Section& X, const Expr& f) {
  auto v = anchor_of(X);
  std::vector<Expr> t;
  for (int i = 0; i < X.A->dim(); ++i) {
    if (v[i].is_zero()) continue;
    Expr df = differentiate(f, X.A->chart.coords[i]);
    if (!df.is_zero()) t.push_back(v[i] * df);
  }
  return sum(t);
}

Section bracket(const Section& X, const Section& Y) {
  check_same(X.A, Y.A);
  const auto& A = *X.A;
  int r = A.rank();
  std::vector<std::vector<Expr>> t(r);
  for (int a = 0; a < r; ++a) {
    if (X.c[a].is_zero()) continue;
    for (int b = 0; b < r; ++b) {
      if (Y.c[b].is_zero() || a == b) continue;
      for (int c = 0; c < r; ++c) {
        const Expr& s = A.c(a, b, c);
        if (!s.is_zero()) t[c].push_back(X.c[a] * Y.c[b] * s);
      }
    }
  }
  for (int c = 0; c < r; ++c) {
    Expr xy = apply(X, Y.c[c]);
    Expr yx = apply(Y, X.c[c]);
    if (!xy.is_zero()) t[c].push_back(xy);
    if (!yx.is_zero()) t[c].push_back(-yx);
  }
  Section s{X.A, std::vector<Expr>(r)};
  for (int c = 0; c < r; ++c) s.c[c] = sum(t[c]);
  return s;
}

AForm d(const AlgebroidPtr& A, const Expr& f) {
  AForm w = AForm::zero(A, 1);
  for (int a = 0; a < A->rank(); ++a) w.c[a] = A->rho(a, f);
  return w;
}

AForm d(const AForm& w) {
  const auto& A = *w.A;
  int r = A.rank(), p = w.p;
  if (p >= r) return AForm{w.A, p + 1, {}};
  AForm out = AForm::zero(w.A, p + 1);
  const auto& out_sets = subsets(r, p + 1);
  for (std::size_t J = 0; J < out_sets.size(); ++J) {
    const auto& idx = out_sets[J];
    std::vector<Expr> terms;
    for (int i = 0; i <= p; ++i) {
      std::vector<int> rest;
      for (int m = 0; m <= p; ++m) {
        if (m != i) rest.push_back(idx[m]);
      }
      Expr g = A.rho(idx[i], w.coef(rest));
      if (!g.is_zero()) terms.push_back((i % 2 == 0) ? g : -g);
    }
    for (int i = 0; i <= p; ++i) {
      for (int k = i + 1; k <= p; ++k) {
        std::vector<int> rest;
        for (int m = 0; m <= p; ++m) {
          if (m != i && m != k) rest.push_back(idx[m]);
        }
        int sg = ((i + k) % 2 == 0) ? 1 : -1;
        for (int c = 0; c < r; ++c) {
          const Expr& s = A.c(idx[i], idx[k], c);
          if (s.is_zero()) continue;
          std::vector<int> full{c};
          full.insert(full.end(), rest.begin(), rest.end());
          Expr v = w.at(full);
          if (!v.is_zero()) terms.push_back(Expr(sg) * s * v);
        }
      }
    }
    out.c[J] = sum(terms);
  }
  return out;
}

AForm wedge(const AForm& a, const AForm& b) {
  check_same(a.A, b.A);
  int r = a.A->rank();
  if (a.p + b.p > r) throw DegreeOverflow("wedge degree exceeds rank");
  AForm out = AForm::zero(a.A, a.p + b.p);
  std::vector<std::vector<Expr>> terms(out.c.size());
  const auto& sa = subsets(r, a.p);
  const auto& sb = subsets(r, b.p);
  for (std::size_t I = 0; I < sa.size(); ++I) {
    if (a.c[I].is_zero()) continue;
    for (std::size_t J = 0; J < sb.size(); ++J) {
      if (b.c[J].is_zero()) continue;
      std::vector<int> k = sa[I];
      k.insert(k.end(), sb[J].begin(), sb[J].end());
      int sg = sort_sign(k);
      if (sg == 0) continue;
      Expr v = a.c[I] * b.c[J];
      terms[subset_index(r, k)].push_back(sg > 0 ? v : -v);
    }
  }
  for (std::size_t i = 0; i < terms.size(); ++i) out.c[i] = sum(terms[i]);
  return out;
}

AForm interior(const Section& X, const AForm& w) {
  check_same(X.A, w.A);
  if (w.p == 0) throw DegreeOverflow("contraction of a function");
  int r = w.A->rank();
  AForm out = AForm::zero(w.A, w.p - 1);
  const auto& sets = subsets(r, w.p - 1);
  for (std::size_t J = 0; J < sets.size(); ++J) {
    std::vector<Expr> t;
    for (int a = 0; a < r; ++a) {
      if (X.c[a].is_zero()) continue;
      std::vector<int> full{a};
      full.insert(full.end(), sets[J].begin(), sets[J].end());
      Expr v = w.at(full);
      if (!v.is_zero()) t.push_back(X.c[a] * v);
    }
    out.c[J] = sum(t);
  }
  return out;
}

Expr contract(const AForm& w, const std::vector<Section>& xs) {
  if (static_cast<int>(xs.size()) != w.p) throw DegreeOverflow("contraction needs one section per degree");
  AForm cur = w;
  for (const auto& x : xs) cur = interior(x, cur);
  return cur.c[0];
}

AForm wedge_power(const AForm& a, int n) {
  AForm out = AForm::function(a.A, Expr(1));
  for (int i = 0; i < n; ++i) out = wedge(out, a);
  return out;
}

Expr contact_volume(const AForm& alpha) {
  if (alpha.p != 1) throw DegreeOverflow("contact volume needs a 1-form");
  int r = alpha.A->rank();
  if (r % 2 == 0) throw RankMismatch("contact volume needs odd rank");
  AForm v = wedge(alpha, wedge_power(d(alpha), (r - 1) / 2));
  return v.c[0];
}

namespace {

void require_bk(const AlgebroidPtr& A) {
  if (A->divisor.type != DivisorData::Type::BK || A->divisor.components.size() != 1) {
    throw NotBK("operation needs a single b^k divisor");
  }
}

}  // namespace

AForm residue(const AForm& w) {
  require_bk(w.A);
  const std::string& z = w.A->divisor.components[0].z;
  AlgebroidPtr Z = locus_algebroid(w.A);
  AForm c = interior(Section::basis(w.A, 0), w);
  AForm out = AForm::zero(Z, c.p);
  const auto& sets = subsets(Z->rank(), c.p);
  for (std::size_t J = 0; J < sets.size(); ++J) {
    std::vector<int> up;
    for (int v : sets[J]) up.push_back(v + 1);
    out.c[J] = substitute(c.coef(up), z, Expr());
  }
  return out;
}

LocusData restrict_to_locus(const AForm& alpha) {
  require_bk(alpha.A);
  if (alpha.p != 1) throw DegreeOverflow("locus restriction needs a 1-form");
  const std::string& z = alpha.A->divisor.components[0].z;
  LocusData out;
  out.Z = locus_algebroid(alpha.A);
  out.u = substitute(alpha.c[0], z, Expr());
  out.beta = AForm::zero(out.Z, 1);
  for (int a = 1; a < alpha.A->rank(); ++a) out.beta.c[a - 1] = substitute(alpha.c[a], z, Expr());
  return out;
}

namespace {

double max_abs_at(const std::vector<Expr>& es, const std::vector<Point>& pts) {
  double m = 0;
  for (const auto& p : pts) {
    for (const auto& e : es) {
      if (e.is_zero()) continue;
      m = std::max(m, std::fabs(evaluate(e, p)));
    }
  }
  return m;
}

Section random_section(const AlgebroidPtr& A, std::uint64_t& st) {
  Section s{A, {}};
  for (int a = 0; a < A->rank(); ++a) s.c.push_back(random_function(A->chart, st, 2));
  return s;
}

}  // namespace

AlgebroidCheck check_algebroid(const AlgebroidPtr& A, int trials, int samples, std::uint64_t seed) {
  AlgebroidCheck out;
  std::uint64_t st = seed;
  SampleDomain dom = A->domain(2.0).with_count(samples).with_seed(seed);
  auto pts = dom.points();
  SampleDomain off = dom;
  Expr def = A->divisor.defining();
  if (A->divisor.type != DivisorData::Type::None) off.exclude(def, 1e-2);
  auto off_pts = off.points();
  for (int t = 0; t < trials; ++t) {
    Section X = random_section(A, st), Y = random_section(A, st), W = random_section(A, st);
    Expr f = random_function(A->chart, st, 2);
    Section j = bracket(bracket(X, Y), W) + bracket(bracket(Y, W), X) + bracket(bracket(W, X), Y);
    out.jacobi = std::max(out.jacobi, max_abs_at(j.c, pts));
    Section l = bracket(X, f * Y) - f * bracket(X, Y) - apply(X, f) * Y;
    out.leibniz = std::max(out.leibniz, max_abs_at(l.c, pts));
    auto vx = anchor_of(X), vy = anchor_of(Y), vb = anchor_of(bracket(X, Y));
    std::vector<Expr> diff;
    for (int i = 0; i < A->dim(); ++i) {
      std::vector<Expr> t{vb[i]};
      for (int k = 0; k < A->dim(); ++k) {
        const std::string& xk = A->chart.coords[k];
        t.push_back(-vx[k] * differentiate(vy[i], xk));
        t.push_back(vy[k] * differentiate(vx[i], xk));
      }
      diff.push_back(sum(t));
    }
    out.anchor = std::max(out.anchor, max_abs_at(diff, off_pts));
    if (A->rank() >= 2) {
      AForm ddf = d(d(A, f));
      out.d_squared = std::max(out.d_squared, max_abs_at(ddf.c, pts));
      AForm w = AForm::zero(A, 1);
      for (auto& c : w.c) c = random_function(A->chart, st, 2);
      if (A->rank() >= 3) out.d_squared = std::max(out.d_squared, max_abs_at(d(d(w)).c, pts));
    }
  }
  if (A->divisor.type != DivisorData::Type::None && A->rank() == A->dim()) {
    out.has_det = true;
    Expr det = A->anchor_det();
    double mn = INFINITY;
    for (const auto& p : off_pts) mn = std::min(mn, std::fabs(evaluate(det, p)));
    out.det_off_min = mn;
    SampleDomain on = dom.with_count(20);
    if (A->divisor.type == DivisorData::Type::Elliptic) {
      on.pin(A->divisor.x, 0.0);
      on.pin(A->divisor.y, 0.0);
    } else {
      on.pin(A->divisor.components[0].z, 0.0);
    }
    const auto& comp = A->divisor.components.empty() ? BKComponent{} : A->divisor.components[0];
    Expr fz = comp.f.is_zero() ? Expr() : differentiate(comp.f, comp.z);
    double mx = 0;
    for (auto p : on.points()) {
      if (!fz.is_zero() && free_variables(comp.f).size() > 1) {
        for (int it = 0; it < 60; ++it) p.set(comp.z, p.at(comp.z) - evaluate(comp.f, p) / evaluate(fz, p));
      }
      mx = std::max(mx, std::fabs(evaluate(det, p)));
    }
    out.det_on_max = mx;
  }
  return out;
}

}  // namespace balg
