#include "balg/multivector.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace balg {

namespace {

int sort_sign(std::vector<int>& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    for (std::size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
      if (idx[j - 1] == idx[j]) return 0;
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  }
  return sign;
}

void check_chart(const Multivector& a, const Multivector& b) {
  if (!(a.chart == b.chart)) throw ChartMismatch("multivectors live on different charts");
}

/// Accumulates signed terms per sorted multi-index.
struct Collector {
  int n, p;
  std::vector<std::vector<Expr>> terms;
  Collector(int n_, int p_) : n(n_), p(p_), terms(subsets(n_, p_).size()) {}
  void add(std::vector<int> idx, const Expr& v) {
    if (v.is_zero()) return;
    int sg = sort_sign(idx);
    if (sg == 0) return;
    terms[subset_index(n, idx)].push_back(sg > 0 ? v : -v);
  }
  Multivector finish(const Chart& chart) const {
    Multivector out = Multivector::zero(chart, p);
    for (std::size_t I = 0; I < terms.size(); ++I) out.c[I] = sum(terms[I]);
    return out;
  }
};

}  // namespace

Multivector Multivector::zero(const Chart& chart, int p) {
  if (p < 0) throw DegreeOverflow("negative multivector degree");
  return Multivector{chart, p, std::vector<Expr>(subsets(chart.dim(), p).size())};
}

Multivector Multivector::function(const Chart& chart, const Expr& f) {
  Multivector m = zero(chart, 0);
  m.c[0] = f;
  return m;
}

Multivector Multivector::vector_field(const Chart& chart, const std::vector<Expr>& v) {
  if (static_cast<int>(v.size()) != chart.dim()) throw RankMismatch("vector field needs one component per coordinate");
  return Multivector{chart, 1, v};
}

Multivector Multivector::basis(const Chart& chart, const std::vector<std::string>& names) {
  Collector col(chart.dim(), static_cast<int>(names.size()));
  std::vector<int> idx;
  for (const auto& n : names) idx.push_back(chart.index(n));
  col.add(idx, Expr(1));
  return col.finish(chart);
}

Expr Multivector::at(const std::vector<int>& idx) const {
  std::vector<int> s = idx;
  int sg = sort_sign(s);
  if (sg == 0) return Expr();
  const Expr& v = c[subset_index(chart.dim(), s)];
  return sg > 0 ? v : -v;
}

Expr& Multivector::coef(const std::vector<int>& s) { return c[subset_index(chart.dim(), s)]; }
const Expr& Multivector::coef(const std::vector<int>& s) const { return c[subset_index(chart.dim(), s)]; }

bool Multivector::structurally_zero() const {
  return std::all_of(c.begin(), c.end(), [](const Expr& e) { return balg::structurally_zero(e); });
}

Mat Multivector::matrix(const Point& pt) const {
  if (p != 2) throw DegreeOverflow("matrix of a non-bivector");
  int n = chart.dim();
  Mat m = Mat::Zero(n, n);
  const auto& sets = subsets(n, 2);
  for (std::size_t I = 0; I < sets.size(); ++I) {
    if (c[I].is_zero()) continue;
    double v = evaluate(c[I], pt);
    m(sets[I][0], sets[I][1]) = v;
    m(sets[I][1], sets[I][0]) = -v;
  }
  return m;
}

std::vector<double> Multivector::eval(const Point& pt) const {
  std::vector<double> v;
  for (const auto& e : c) v.push_back(e.is_zero() ? 0.0 : evaluate(e, pt));
  return v;
}

Multivector Multivector::extend(const Chart& target) const {
  std::vector<int> map;
  for (const auto& n : chart.coords) map.push_back(target.index(n));
  Collector col(target.dim(), p);
  const auto& sets = subsets(chart.dim(), p);
  for (std::size_t I = 0; I < sets.size(); ++I) {
    std::vector<int> idx;
    for (int i : sets[I]) idx.push_back(map[i]);
    col.add(idx, c[I]);
  }
  return col.finish(target);
}

std::string Multivector::str() const {
  std::ostringstream os;
  const auto& sets = subsets(chart.dim(), p);
  bool first = true;
  for (std::size_t I = 0; I < sets.size(); ++I) {
    if (c[I].is_zero()) continue;
    if (!first) os << " + ";
    first = false;
    os << "(" << c[I].str() << ")";
    for (int i : sets[I]) os << " d_" << chart.coords[i];
  }
  if (first) os << "0";
  return os.str();
}

Multivector operator+(const Multivector& a, const Multivector& b) {
  check_chart(a, b);
  if (a.p != b.p) throw DegreeOverflow("sum of multivectors of different degrees");
  Multivector out = a;
  for (std::size_t i = 0; i < out.c.size(); ++i) out.c[i] = a.c[i] + b.c[i];
  return out;
}

Multivector operator-(const Multivector& a, const Multivector& b) { return a + Expr(-1) * b; }

Multivector operator*(const Expr& f, const Multivector& a) {
  Multivector out = a;
  for (auto& e : out.c) e = e.is_zero() ? e : f * e;
  return out;
}

Multivector wedge(const Multivector& a, const Multivector& b) {
  check_chart(a, b);
  int n = a.chart.dim();
  Collector col(n, a.p + b.p);
  const auto& sa = subsets(n, a.p);
  const auto& sb = subsets(n, b.p);
  for (std::size_t I = 0; I < sa.size(); ++I) {
    if (a.c[I].is_zero()) continue;
    for (std::size_t J = 0; J < sb.size(); ++J) {
      if (b.c[J].is_zero()) continue;
      std::vector<int> idx = sa[I];
      idx.insert(idx.end(), sb[J].begin(), sb[J].end());
      col.add(idx, a.c[I] * b.c[J]);
    }
  }
  return col.finish(a.chart);
}

Multivector schouten(const Multivector& P, const Multivector& Q) {
  check_chart(P, Q);
  int n = P.chart.dim();
  int deg = P.p + Q.p - 1;
  if (deg < 0) return Multivector::zero(P.chart, 0);
  Collector col(n, deg);
  // right derivative in the odd variable xi_i, then multiplication by the x_i derivative of the other factor
  auto half = [&](const Multivector& A, const Multivector& B, double sign) {
    const auto& sa = subsets(n, A.p);
    const auto& sb = subsets(n, B.p);
    for (std::size_t I = 0; I < sa.size(); ++I) {
      if (A.c[I].is_zero()) continue;
      int m = static_cast<int>(sa[I].size());
      for (int k = 0; k < m; ++k) {
        int i = sa[I][k];
        const std::string& xi = P.chart.coords[i];
        std::vector<int> rest = sa[I];
        rest.erase(rest.begin() + k);
        double s = ((m - 1 - k) % 2 == 0 ? 1.0 : -1.0) * sign;
        for (std::size_t J = 0; J < sb.size(); ++J) {
          if (B.c[J].is_zero()) continue;
          Expr dB = differentiate(B.c[J], xi);
          if (dB.is_zero()) continue;
          std::vector<int> idx = rest;
          idx.insert(idx.end(), sb[J].begin(), sb[J].end());
          Expr v = A.c[I] * dB;
          col.add(idx, s > 0 ? v : -v);
        }
      }
    }
  };
  half(P, Q, 1.0);
  half(Q, P, ((P.p - 1) * (Q.p - 1)) % 2 == 0 ? -1.0 : 1.0);
  return col.finish(P.chart);
}

Expr contract(const Multivector& P, const std::vector<std::vector<Expr>>& forms) {
  if (static_cast<int>(forms.size()) != P.p) throw RankMismatch("contraction needs p one-forms");
  int n = P.chart.dim();
  const auto& sets = subsets(n, P.p);
  std::vector<Expr> terms;
  std::vector<int> perm(P.p);
  for (std::size_t I = 0; I < sets.size(); ++I) {
    if (P.c[I].is_zero()) continue;
    for (int i = 0; i < P.p; ++i) perm[i] = i;
    do {
      std::vector<int> pp = perm;
      int sg = sort_sign(pp);
      Expr t = P.c[I];
      for (int k = 0; k < P.p; ++k) t = t * forms[k][sets[I][perm[k]]];
      if (!t.is_zero()) terms.push_back(sg > 0 ? t : -t);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return sum(terms);
}

std::vector<Expr> sharp(const Multivector& P, const std::vector<Expr>& a) {
  if (P.p != 2) throw DegreeOverflow("sharp of a non-bivector");
  int n = P.chart.dim();
  std::vector<Expr> out(n);
  for (int j = 0; j < n; ++j) {
    std::vector<Expr> t;
    for (int i = 0; i < n; ++i) {
      if (a[i].is_zero()) continue;
      Expr c = P.at({i, j});
      if (!c.is_zero()) t.push_back(a[i] * c);
    }
    out[j] = sum(t);
  }
  return out;
}

Expr divergence(const Multivector& X) {
  if (X.p != 1) throw DegreeOverflow("divergence of a non-vector");
  std::vector<Expr> t;
  for (int i = 0; i < X.chart.dim(); ++i) t.push_back(differentiate(X.c[i], X.chart.coords[i]));
  return sum(t);
}

Multivector substitute(const Multivector& P, const std::map<std::string, Expr>& repl) {
  Multivector out = P;
  for (auto& e : out.c) e = e.is_zero() ? e : substitute(e, repl);
  return out;
}

Multivector change_coordinates(const Multivector& P, const Chart& target, const std::vector<Expr>& F,
                               const std::map<std::string, Expr>& G) {
  int n = P.chart.dim();
  int m = target.dim();
  if (static_cast<int>(F.size()) != m) throw RankMismatch("one expression per target coordinate required");
  std::vector<std::vector<Expr>> J(m, std::vector<Expr>(n));
  for (int a = 0; a < m; ++a) {
    for (int i = 0; i < n; ++i) J[a][i] = differentiate(F[a], P.chart.coords[i]);
  }
  Collector col(m, P.p);
  const auto& ss = subsets(n, P.p);
  const auto& st = subsets(m, P.p);
  for (std::size_t I = 0; I < ss.size(); ++I) {
    if (P.c[I].is_zero()) continue;
    for (std::size_t K = 0; K < st.size(); ++K) {
      // determinant of the Jacobian minor rows K, columns I
      std::vector<std::vector<Expr>> minor(P.p, std::vector<Expr>(P.p));
      for (int r = 0; r < P.p; ++r) {
        for (int s = 0; s < P.p; ++s) minor[r][s] = J[st[K][r]][ss[I][s]];
      }
      Expr det = P.p == 0 ? Expr(1) : symbolic_det(minor);
      if (det.is_zero()) continue;
      col.add(st[K], det * P.c[I]);
    }
  }
  Multivector out = col.finish(target);
  return substitute(out, G);
}

Multivector push_anchor(const AlgebroidPtr& A, int p, const std::vector<Expr>& fc) {
  Chart ch = A->chart;
  int r = A->rank();
  std::vector<Multivector> e;
  for (int a = 0; a < r; ++a) e.push_back(Multivector::vector_field(ch, A->anchor[a]));
  Multivector out = Multivector::zero(ch, p);
  const auto& sets = subsets(r, p);
  for (std::size_t I = 0; I < sets.size(); ++I) {
    if (fc[I].is_zero()) continue;
    Multivector t = Multivector::function(ch, fc[I]);
    for (int a : sets[I]) t = wedge(t, e[a]);
    out = out + t;
  }
  return out;
}

double max_abs(const Multivector& P, const std::vector<Point>& pts) {
  double m = 0;
  for (const auto& pt : pts) {
    try {
      for (double v : P.eval(pt)) m = std::max(m, std::fabs(v));
    } catch (const DomainError&) {
    }
  }
  return m;
}

}  // namespace balg
