#include <cmath>

#include "balg/contact.hpp"
#include "balg/jacobi.hpp"
#include "doctest.h"

using namespace balg;

namespace {

Expr v(const char* n) { return Expr::var(n); }

Multivector bv(const Chart& ch, const char* a, const char* b) { return Multivector::basis(ch, {a, b}); }

/// alpha = dz + x dy on R^3
JacobiPair standard_pair() {
  auto A = make_tangent(Chart({"x", "y", "z"}));
  AForm a = AForm::zero(A, 1);
  a.c[1] = v("x");
  a.c[2] = Expr(1);
  return pair_from_contact(a);
}

/// e^y (dz + x dy), a contact form with non-trivial divergence of R
JacobiPair scaled_pair() {
  auto A = make_tangent(Chart({"x", "y", "z"}));
  AForm a = AForm::zero(A, 1);
  a.c[1] = exp(v("y")) * v("x");
  a.c[2] = exp(v("y"));
  return pair_from_contact(a);
}

AForm normal_form(int k, int n) {
  std::vector<std::string> coords{"z"};
  for (int i = 1; i <= n; ++i) {
    coords.push_back("x" + std::to_string(i));
    coords.push_back("y" + std::to_string(i));
  }
  auto A = make_bk(Chart(coords), "z", k);
  AForm a = AForm::zero(A, 1);
  a.c[0] = Expr(1) + v("y1");
  a.c[1] = Expr(1);
  for (int i = 2; i <= n; ++i) a.c[2 * i] = Expr::var("x" + std::to_string(i));
  return a;
}

double max_dev(const Multivector& a, const Multivector& b, int count = 200) {
  return max_abs(a - b, a.chart.domain().with_count(count).points());
}

}  // namespace

TEST_CASE("Schouten bracket basics") {
  Chart ch({"x", "y"});
  auto dx = Multivector::basis(ch, {"x"}), dy = Multivector::basis(ch, {"y"});
  CHECK(schouten(dx, dy).structurally_zero());
  auto P = v("x") * bv(ch, "x", "y");
  // Lie derivative oracle: [d_x, P] = L_{d_x} P = d_x ^ d_y
  CHECK(max_dev(schouten(P, dx), Expr(-1) * bv(ch, "x", "y")) == 0.0);
  CHECK(max_dev(schouten(dx, P), bv(ch, "x", "y")) == 0.0);
  // vector fields: Lie bracket
  auto X = Multivector::vector_field(ch, {v("y"), Expr(0)});
  auto Y = Multivector::vector_field(ch, {Expr(0), v("x")});
  CHECK(max_dev(schouten(X, Y), Multivector::vector_field(ch, {Expr(0) - v("x"), v("y")})) == 0.0);
  Chart c3({"x", "y", "z"});
  CHECK_THROWS_AS(schouten(dx, Multivector::basis(c3, {"x"})), ChartMismatch);
}

TEST_CASE("standard contact pair") {
  auto pr = standard_pair();
  auto pts = pr.R.chart.domain().with_count(50).points();
  CHECK(max_abs(pr.R - Multivector::basis(pr.R.chart, {"z"}), pts) < 1e-12);
  auto rep = verify_pair(pr);
  CHECK(rep.pass);
  CHECK(rep.lambda_residual < 1e-10);
  // the unit-normalised identity fails by the factor
  auto half = schouten(pr.Lambda, pr.Lambda) - wedge(pr.Lambda, pr.R);
  CHECK(max_abs(half, pts) > 0.5);
  CHECK(bracket_jacobi_residual(pr) < 1e-9);
  CHECK(bracket_jacobi_residual(scaled_pair()) < 1e-8);
  CHECK(verify_pair(scaled_pair()).pass);
}

TEST_CASE("verify_pair edge cases") {
  Chart ch({"x", "y"});
  JacobiPair poisson{v("x") * bv(ch, "x", "y"), Multivector::zero(ch, 1)};
  CHECK(verify_pair(poisson).pass);
  auto pr = standard_pair();
  pr.R = Expr(-1) * pr.R;
  auto bad = verify_pair(pr);
  CHECK_FALSE(bad.pass);
  CHECK(bad.lambda_residual + bad.r_residual > 0.1);
  CHECK(bad.witness.names.size() == 3);
  auto A = make_tangent(Chart({"x", "y", "z"}));
  AForm closed = AForm::zero(A, 1);
  closed.c[2] = Expr(1);
  CHECK_THROWS_AS(pair_from_contact(closed), NotContact);
}

TEST_CASE("normal-form pair against the displayed pair") {
  for (int k : {1, 2, 3}) {
    AForm a = normal_form(k, 2);
    auto pr = pair_from_contact(a);
    const Chart& ch = pr.Lambda.chart;
    Multivector disp = pow(v("z"), k) * bv(ch, "z", "y1") + bv(ch, "y2", "x2") +
                       (v("y1") + Expr(1)) * bv(ch, "y1", "x1") + v("x2") * bv(ch, "x2", "x1");
    // orientation -1
    CHECK(max_dev(pr.Lambda, Expr(-1) * disp) < 1e-9);
    CHECK(max_dev(pr.R, Multivector::basis(ch, {"x1"})) < 1e-12);
    CHECK(verify_pair(pr).pass);
    auto rz = restrict_pair(pr, "z");
    const Chart& Z = rz.Lambda.chart;
    Multivector dz = bv(Z, "y2", "x2") + (v("y1") + Expr(1)) * bv(Z, "y1", "x1") + v("x2") * bv(Z, "x2", "x1");
    CHECK(max_dev(rz.Lambda, Expr(-1) * dz) < 1e-9);
    CHECK(max_dev(rz.R, Multivector::basis(Z, {"x1"})) < 1e-12);
  }
}

TEST_CASE("Poissonisations") {
  auto pr = standard_pair();
  for (int var : {1, 2}) {
    auto pi = poissonise(pr, var);
    CHECK(poisson_residual(pi) < 1e-10);
  }
  CHECK(inversion_maps_pi2_to_pi1(pr));
  CHECK(inversion_maps_pi2_to_pi1(scaled_pair()));
  Chart ch({"x", "y", "z"});
  JacobiPair zero{Multivector::zero(ch, 2), Multivector::zero(ch, 1)};
  CHECK(poissonise(zero, 1).structurally_zero());
  auto bad = pr;
  bad.R = Expr(2) * bad.R;
  CHECK_THROWS_AS(poissonise(bad, 1), NotJacobi);
}

TEST_CASE("jet algebroid and canonical representations") {
  for (const auto& pr : {standard_pair(), scaled_pair(), pair_from_contact(normal_form(1, 1))}) {
    auto J = jet_algebroid(pr);
    auto chk = check_algebroid(J);
    CHECK(chk.jacobi < 1e-9);
    CHECK(chk.anchor < 1e-9);
    auto reps = canonical_reps(pr);
    auto rr = check_reps(reps);
    CHECK(rr.decomposition < 1e-9);
    CHECK(rr.flatness < 1e-8);
    CHECK(rr.holonomy < 1e-9);
    CHECK(rr.displayed_decomposition > 1e-3);
  }
  auto reps = canonical_reps(standard_pair());
  Expr f = v("x") * v("z") + v("y");
  CHECK(structurally_zero(reps.nabla1(f) + differentiate(f, "z")));
}

TEST_CASE("modular structures") {
  Chart ch({"z", "x"});
  Multivector pi = v("z") * bv(ch, "z", "x");
  auto X = modular_vector(pi);
  CHECK(max_dev(X, Expr(-1) * Multivector::basis(ch, {"x"})) == 0.0);
  auto mp = modular_poisson(pi, "t");
  CHECK(poisson_residual(mp) < 1e-12);
  const Chart& c2 = mp.chart;
  CHECK(max_dev(mp, v("z") * bv(c2, "z", "x") + v("t") * bv(c2, "t", "x")) == 0.0);
  CHECK(modular_poisson(Multivector::zero(ch, 2)).structurally_zero());
  Chart c3({"x", "y", "z"});
  CHECK_THROWS_AS(modular_poisson(bv(c3, "x", "y") + v("x") * bv(c3, "x", "z")), NotPoisson);
  for (const auto& pr : {standard_pair(), scaled_pair()}) {
    auto mj = modular_jacobi(pr);
    CHECK(verify_pair(mj).pass);
  }
}

TEST_CASE("Poissonisation commutes with the modular construction") {
  CHECK(commuting_diagram_check(standard_pair()).residual < 1e-8);
  CHECK(commuting_diagram_check(scaled_pair()).residual < 1e-8);
  CHECK(commuting_diagram_check(pair_from_contact(normal_form(1, 1))).residual < 1e-8);
  Chart ch({"x", "y"});
  JacobiPair poisson{v("x") * bv(ch, "x", "y"), Multivector::zero(ch, 1)};
  auto rep = commuting_diagram_check(poisson);
  CHECK(rep.residual < 1e-8);
  CHECK(rep.identification == "sigma = tau * t^-2");
}

TEST_CASE("b-symplectic regularisation") {
  auto A = make_bk(Chart({"z", "x"}), "z", 1);
  AForm w = AForm::basis(A, {0, 1});
  auto rep = b_symplectic_regularise(w);
  CHECK(rep.leaf_min_det > 0.1);
  CHECK(rep.tangency < 1e-12);
  CHECK(rep.comparison < 1e-12);
  AForm degenerate = AForm::zero(A, 2);
  CHECK_THROWS_AS(b_symplectic_regularise(degenerate), NotSymplectic);

  auto B = make_bk(Chart({"t1", "t2", "t3"}, {kTwoPi, kTwoPi, kTwoPi}), "t1", 1, sin(v("t1")));
  AForm a = AForm::zero(B, 1);
  a.c[0] = sin(v("t2"));
  a.c[2] = cos(v("t2"));
  auto S = symplectise(a);
  auto r4 = b_symplectic_regularise(S.omega);
  CHECK(r4.leaf_min_det > 1e-6);
  CHECK(r4.tangency < 1e-9);
  CHECK(r4.comparison < 1e-9);
}

TEST_CASE("Poissonisations are homogeneous in t") {
  auto pr = scaled_pair();
  for (int var : {1, 2}) {
    auto pi = poissonise(pr, var);
    const Chart& ch = pi.chart;
    std::vector<Expr> F;
    for (const auto& n : ch.coords) F.push_back(n == "t" ? Expr(2) * v("t") : Expr::var(n));
    auto img = change_coordinates(pi, ch, F, {{"t", Rational(1, 2) * v("t")}});
    Expr factor = var == 1 ? Expr(Rational(1, 2)) : Expr(2);
    CHECK((img - factor * pi).structurally_zero());
  }
}

TEST_CASE("regularised b-symplectic bivector is regular of corank one") {
  auto A = make_bk(Chart({"z", "x"}), "z", 1);
  auto rep = b_symplectic_regularise(AForm::basis(A, {0, 1}));
  for (double z : {-1.0, 0.0, 0.5}) {
    Point p{{"z", "x", "s"}, {z, 0.3, 1.0}};
    CHECK(numerical_rank(rep.pi_R.matrix(p)) == 2);
  }
  Point on{{"z", "x"}, {0.0, 0.3}};
  CHECK(numerical_rank(rep.pi.matrix(on)) == 0);
}
