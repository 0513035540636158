#include <cmath>

#include "balg/contact.hpp"
#include "doctest.h"

using namespace balg;

namespace {

Expr v(const char* n) { return Expr::var(n); }

AlgebroidPtr t3() { return make_bk(Chart({"t1", "t2", "t3"}, {kTwoPi, kTwoPi, kTwoPi}), "t1", 1, sin(v("t1"))); }

AForm t3_alpha() {
  AForm a = AForm::zero(t3(), 1);
  a.c[0] = sin(v("t2"));
  a.c[2] = cos(v("t2"));
  return a;
}

AForm normal_form_alpha() {
  auto A = make_bk(Chart({"z", "x1", "y1", "x2", "y2"}), "z", 1);
  AForm a = AForm::zero(A, 1);
  a.c[0] = Expr(1) + v("y1");
  a.c[1] = Expr(1);
  a.c[4] = v("x2");
  return a;
}

AForm elliptic_elements() {
  auto A = make_elliptic(Chart({"x", "y"}), "x", "y");
  return contact_elements(A).alpha;
}

double wrap_distance(double a, double b) {
  double d = std::fmod(std::fabs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

}  // namespace

TEST_CASE("symplectisation expands to e^t dt ^ alpha + e^t d alpha") {
  auto S = symplectise(t3_alpha());
  CHECK(S.t == "t");
  AForm dt = d(S.P, v("t"));
  AForm oracle = exp(v("t")) * wedge(dt, S.alpha) + exp(v("t")) * d(S.alpha);
  auto pts = S.P->domain(1.5).with_count(100).points();
  for (const auto& p : pts) {
    auto a = S.omega.eval(p), b = oracle.eval(p);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  }
  CHECK(S.volume_min > 1e-3);
  CHECK(d(S.omega).structurally_zero());

  auto R3 = make_tangent(Chart({"z", "x", "y"}));
  AForm st = AForm::zero(R3, 1);
  st.c[0] = Expr(1);
  st.c[2] = v("x");
  CHECK(symplectise(st).volume_min > 1e-3);
  CHECK_THROWS_AS(symplectise(AForm::basis(R3, {0})), NotContact);
}

TEST_CASE("dividing set of the torus example") {
  auto ds = dividing_set(t3_alpha());
  REQUIRE_FALSE(ds.points.empty());
  CHECK(ds.warnings.empty());
  for (const auto& p : ds.points) {
    double t2 = p.at("t2");
    CHECK(std::min(wrap_distance(t2, 0.0), wrap_distance(t2, kPi)) < 1e-10);
    CHECK(std::fabs(evaluate(ds.u, p)) < 1e-10);
  }
  CHECK(ds.curves.size() == 2);
  for (double g : ds.gamma_form) CHECK(std::fabs(g) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ds.min_grad_u > 0.99);

  AForm flat = AForm::zero(t3(), 1);
  flat.c[0] = Expr(1);
  flat.c[2] = cos(v("t2"));
  flat.c[1] = sin(v("t2"));
  auto empty = dividing_set(flat);
  CHECK(empty.points.empty());
  REQUIRE(empty.warnings.size() == 1);
  CHECK(empty.warnings[0].find("compact") != std::string::npos);
}

TEST_CASE("blow-up of elliptic contact elements") {
  AForm a = elliptic_elements();
  auto src_probe = invariance_probe(a);
  REQUIRE(src_probe.c_star_invariant.has_value());
  CHECK(*src_probe.c_star_invariant);
  auto bu = blowup_pullback(a);
  CHECK(bu.A->divisor.type == DivisorData::Type::BK);
  CHECK(bu.alpha.c[0] == cos(v("psi")));
  CHECK(bu.alpha.c[1] == sin(v("psi")));
  // contact wedge oracle: (cos psi e0 + sin psi e1) ^ d(...) has top coefficient 1 in the (r d_r, d_theta, d_psi) frame
  Expr vol = contact_volume(bu.alpha);
  for (const auto& p : bu.A->domain().with_count(50).points()) CHECK(std::fabs(evaluate(vol, p)) == doctest::Approx(1.0));
  CHECK(*invariance_probe(bu.alpha).r_plus_invariant);

  auto ds = dividing_set(bu.alpha);
  REQUIRE_FALSE(ds.points.empty());
  for (const auto& p : ds.points) {
    double psi = p.at("psi");
    CHECK(std::min(wrap_distance(psi, kPi / 2), wrap_distance(psi, 3 * kPi / 2)) < 1e-10);
  }
  CHECK_THROWS_AS(blowup_pullback(t3_alpha()), InvalidSpec);
}

TEST_CASE("induced structures on Z") {
  auto ind = induced_on_Z(t3_alpha());
  CHECK(ind.structural_identity);
  CHECK(ind.identity_residual < 1e-12);
  CHECK(ind.u == sin(v("t2")));
  // omega = d(cot t2 dt3) = -csc^2 t2 dt2 ^ dt3
  for (const auto& p : Chart({"t2", "t3"}, {kTwoPi, kTwoPi}).domain().with_count(50).points()) {
    double s = std::sin(p.at("t2"));
    if (std::fabs(s) < 0.05) continue;
    CHECK(evaluate(ind.omega.c[0], p) == doctest::Approx(-1.0 / (s * s)));
  }
  CHECK(ind.min_nondegeneracy > 0.9);
  CHECK(ind.gamma_contact_min == doctest::Approx(1.0));

  auto nf = induced_on_Z(normal_form_alpha());
  CHECK(nf.structural_identity);
  CHECK(nf.identity_residual < 1e-12);
  CHECK(nf.closed_residual < 1e-12);
  // Z coordinates (x1, y1, x2, y2)
  Point p{{"x1", "y1", "x2", "y2"}, {0.3, 0.4, -0.7, 1.1}};
  double w = 1.4;
  CHECK(evaluate(nf.omega.at({2, 3}), p) == doctest::Approx(1 / w));
  CHECK(evaluate(nf.omega.at({3, 1}), p) == doctest::Approx(-0.7 / (w * w)));
  CHECK(evaluate(nf.omega.at({0, 1}), p) == doctest::Approx(1 / (w * w)));
  CHECK(evaluate(nf.omega.at({0, 2}), p) == 0.0);
  CHECK(nf.min_nondegeneracy > 0);
}

TEST_CASE("Reeb field against the dividing set") {
  auto rep = reeb_dividing_check(t3_alpha());
  CHECK(rep.tangency < 1e-12);
  CHECK(rep.hamiltonian < 1e-10);
  CHECK(rep.x_of_u < 1e-12);
  CHECK(rep.pass);
  auto bad = reeb_dividing_check(t3_alpha(), {Expr(1), Expr(0)});
  CHECK(bad.tangency > 0.5);
  CHECK_FALSE(bad.pass);
  auto nf = reeb_dividing_check(normal_form_alpha());
  CHECK(nf.pass);
}

TEST_CASE("cosymplectic data of the symplectisation") {
  auto rep = cosymp_of_symplectisation_check(t3_alpha());
  CHECK(rep.identity1 < 1e-12);
  CHECK(rep.identity2 < 1e-12);
  CHECK(rep.identity3 < 1e-10);
  CHECK(rep.statement1 > 0.1);
  CHECK(rep.pair.closed_residual < 1e-12);
  CHECK(rep.pair.volume_min > 1e-6);
  // theta = e^t (cos t2 dt2 + sin t2 dt) on (t2, t3, t)
  Point p{{"t2", "t3", "t"}, {0.4, 1.0, 0.5}};
  CHECK(evaluate(rep.pair.theta.c[0], p) == doctest::Approx(std::exp(0.5) * std::cos(0.4)));
  CHECK(evaluate(rep.pair.theta.c[2], p) == doctest::Approx(std::exp(0.5) * std::sin(0.4)));

  auto nf = cosymp_of_symplectisation_check(normal_form_alpha(), 60);
  CHECK(nf.identity1 < 1e-9);
  CHECK(nf.identity2 < 1e-9);
  CHECK(nf.identity3 < 1e-9);
  CHECK_THROWS_AS(cosymplectic_pair(AForm::zero(make_product(t3(), {"t"}, {0.0}), 2)), NotSymplectic);
}

TEST_CASE("invariance probes and normal-form maps") {
  auto probe = invariance_probe(t3_alpha());
  REQUIRE(probe.r_plus_invariant.has_value());
  CHECK(*probe.r_plus_invariant);
  CHECK_FALSE(probe.c_star_invariant.has_value());
  auto A = make_bk(Chart({"z", "x", "y"}), "z", 1);
  AForm broken = AForm::zero(A, 1);
  broken.c[0] = v("z") * v("x");
  broken.c[2] = Expr(1);
  CHECK_FALSE(*invariance_probe(broken).r_plus_invariant);
  CHECK(std::isinf(normal_form_map_check(broken).residual));

  auto m1 = normal_form_map_check(t3_alpha());
  CHECK(m1.k == 1);
  CHECK(m1.residual < 1e-14);

  for (int k : {2, 3, 4}) {
    auto Ak = make_bk(Chart({"z", "x", "y"}), "z", k);
    AForm a = AForm::zero(Ak, 1);
    a.c[0] = Expr(1) + v("x") * v("x");
    a.c[2] = v("x");
    auto m = normal_form_map_check(a);
    CHECK(m.k == k);
    CHECK(m.residual < 1e-12);
    // lambda^{1-k} = (1-k) on s > 0, (k-1) on s < 0
    double target = m.s_sign > 0 ? 1.0 - k : k - 1.0;
    CHECK(std::pow(std::fabs(m.lambda), 1 - k) * (m.lambda < 0 && (k - 1) % 2 == 1 ? -1 : 1) ==
          doctest::Approx(target));
  }
  auto A2 = make_bk(Chart({"z", "x", "y"}), "z", 2);
  AForm a2 = AForm::zero(A2, 1);
  a2.c[0] = Expr(1);
  a2.c[2] = v("x");
  CHECK(normal_form_map_check(a2).lambda == doctest::Approx(-1.0));
  auto A3 = make_bk(Chart({"z", "x", "y"}), "z", 3);
  AForm a3 = AForm::zero(A3, 1);
  a3.c[0] = Expr(1);
  a3.c[2] = v("x");
  auto m3 = normal_form_map_check(a3);
  CHECK(m3.lambda == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(m3.s_sign == -1);
}

TEST_CASE("conformal rescaling conjugates symplectisations") {
  auto c = symplectisation_conjugation(t3_alpha(), sin(v("t3")) + Expr(1) / Expr(2) * v("t2"), 60);
  CHECK(c.additive < 1e-12);
  CHECK(c.inverse < 1e-12);
  CHECK(c.printed > 1e-2);
}

TEST_CASE("dividing set agrees with the central-leaf zero set") {
  auto ind = induced_on_Z(t3_alpha());
  auto ds = dividing_set(t3_alpha(), 64);
  for (const auto& p : ds.points) CHECK(std::fabs(evaluate(ind.u, p)) < 1e-8);
}
