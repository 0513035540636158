#include "balg/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace balg {

Mat eval_matrix(const std::vector<std::vector<Expr>>& m, const Point& p) {
  Mat out(m.size(), m.empty() ? 0 : m[0].size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m[i].size(); ++j) out(i, j) = m[i][j].is_zero() ? 0.0 : evaluate(m[i][j], p);
  }
  return out;
}

Vec eval_vector(const std::vector<Expr>& v, const Point& p) {
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out(i) = v[i].is_zero() ? 0.0 : evaluate(v[i], p);
  return out;
}

Mat eval_sections(const std::vector<Section>& s, const Point& p) {
  if (s.empty()) return Mat(0, 0);
  Mat out(s[0].A->rank(), s.size());
  for (std::size_t j = 0; j < s.size(); ++j) out.col(j) = eval_vector(s[j].c, p);
  return out;
}

Mat two_form_matrix(const AForm& w, const Point& p) {
  int r = w.A->rank();
  Mat m = Mat::Zero(r, r);
  const auto& sets = subsets(r, 2);
  for (std::size_t k = 0; k < sets.size(); ++k) {
    if (w.c[k].is_zero()) continue;
    double v = evaluate(w.c[k], p);
    m(sets[k][0], sets[k][1]) = v;
    m(sets[k][1], sets[k][0]) = -v;
  }
  return m;
}

int numerical_rank(const Mat& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& s = svd.singularValues();
  double cut = tol * std::max(1.0, s.size() ? s(0) : 0.0);
  int r = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) > cut) ++r;
  }
  return r;
}

Mat complement_basis(const Mat& span, double tol) {
  int n = static_cast<int>(span.rows());
  if (span.cols() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(span, Eigen::ComputeFullU);
  int r = numerical_rank(span, tol);
  return svd.matrixU().rightCols(n - r);
}

double span_residual(const Mat& span, const Vec& v) {
  if (span.cols() == 0) return v.norm();
  Mat c = complement_basis(span);
  return (c.transpose() * v).norm();
}

SymbolicInverse symbolic_inverse(const std::vector<std::vector<Expr>>& m) {
  int n = static_cast<int>(m.size());
  SymbolicInverse out;
  out.det = symbolic_det(m);
  out.adjugate.assign(n, std::vector<Expr>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      std::vector<std::vector<Expr>> minor;
      for (int a = 0; a < n; ++a) {
        if (a == j) continue;
        std::vector<Expr> row;
        for (int b = 0; b < n; ++b) {
          if (b != i) row.push_back(m[a][b]);
        }
        minor.push_back(row);
      }
      Expr c = n == 1 ? Expr(1) : symbolic_det(minor);
      out.adjugate[i][j] = ((i + j) % 2 == 0) ? c : -c;
    }
  }
  return out;
}

std::vector<std::vector<Rational>> rational_null_space(std::vector<std::vector<Rational>> rows, int cols) {
  std::vector<int> pivots;
  int r = 0;
  for (int c = 0; c < cols && r < static_cast<int>(rows.size()); ++c) {
    int piv = -1;
    for (int i = r; i < static_cast<int>(rows.size()); ++i) {
      if (!rows[i][c].is_zero()) {
        piv = i;
        break;
      }
    }
    if (piv < 0) continue;
    std::swap(rows[r], rows[piv]);
    Rational inv = Rational(1) / rows[r][c];
    for (auto& x : rows[r]) x = x * inv;
    for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
      if (i == r || rows[i][c].is_zero()) continue;
      Rational f = rows[i][c];
      for (int k = 0; k < cols; ++k) rows[i][k] = rows[i][k] - f * rows[r][k];
    }
    pivots.push_back(c);
    ++r;
  }
  std::vector<std::vector<Rational>> out;
  for (int fcol = 0; fcol < cols; ++fcol) {
    if (std::find(pivots.begin(), pivots.end(), fcol) != pivots.end()) continue;
    std::vector<Rational> v(cols, Rational(0));
    v[fcol] = Rational(1);
    for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = -rows[i][fcol];
    out.push_back(v);
  }
  return out;
}

}  // namespace balg
