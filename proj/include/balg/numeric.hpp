#pragma once

#include <Eigen/Dense>
#include <vector>

#include "balg/algebroid.hpp"

namespace balg {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

Mat eval_matrix(const std::vector<std::vector<Expr>>& m, const Point& p);
Vec eval_vector(const std::vector<Expr>& v, const Point& p);
/// Columns are the sections' frame coefficients.
Mat eval_sections(const std::vector<Section>& s, const Point& p);
/// Antisymmetric coefficient matrix of a 2-form.
Mat two_form_matrix(const AForm& w, const Point& p);

/// Singular values above tol * max(1, largest).
int numerical_rank(const Mat& m, double tol = 1e-8);
/// Orthonormal basis of the orthogonal complement of the column span.
Mat complement_basis(const Mat& span, double tol = 1e-8);
/// Residual of projecting v onto the column span (least squares).
double span_residual(const Mat& span, const Vec& v);

/// Inverse via adjugate over det; returns the adjugate and the determinant.
struct SymbolicInverse {
  std::vector<std::vector<Expr>> adjugate;
  Expr det;
};
SymbolicInverse symbolic_inverse(const std::vector<std::vector<Expr>>& m);

/// Exact null space of a rational matrix (rows x cols), as rational row vectors.
std::vector<std::vector<Rational>> rational_null_space(std::vector<std::vector<Rational>> rows, int cols);

}  // namespace balg
