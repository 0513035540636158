#include <cmath>

#include "balg/distribution.hpp"
#include "doctest.h"

using namespace balg;

namespace {

Expr v(const char* n) { return Expr::var(n); }

AlgebroidPtr lie(const std::vector<std::string>& labels,
                 const std::vector<std::tuple<std::string, std::string, std::string, Rational>>& br) {
  AlgebroidSpec s;
  s.kind = "lie_algebra";
  s.chart = Chart({"x"});
  s.labels = labels;
  s.brackets = br;
  return build_algebroid(s);
}

AlgebroidPtr heisenberg() { return lie({"p", "q", "z"}, {{"p", "q", "z", Rational(1)}}); }

AlgebroidPtr engel() {
  return lie({"e1", "e2", "e3", "e4"}, {{"e1", "e2", "e3", Rational(1)}, {"e2", "e3", "e4", Rational(1)}});
}

AlgebroidPtr elliptic4() {
  return lie({"e1", "e2", "e3", "e4", "e5", "e6"}, {{"e1", "e2", "e5", Rational(1)},
                                                    {"e3", "e4", "e5", Rational(1)},
                                                    {"e1", "e3", "e6", Rational(1)},
                                                    {"e2", "e4", "e6", Rational(-1)}});
}

Distribution first_n(const AlgebroidPtr& A, int n) {
  std::vector<Section> s;
  for (int i = 0; i < n; ++i) s.push_back(Section::basis(A, i));
  return Distribution::spanned(A, s, n);
}

AlgebroidPtr t3() {
  return make_bk(Chart({"t1", "t2", "t3"}, {kTwoPi, kTwoPi, kTwoPi}), "t1", 1, sin(v("t1")));
}

AForm t3_alpha() {
  auto A = t3();
  AForm a = AForm::zero(A, 1);
  a.c[0] = sin(v("t2"));
  a.c[2] = cos(v("t2"));
  return a;
}

AForm darboux() {
  auto A = make_tangent(Chart({"x", "y", "z"}));
  AForm a = AForm::zero(A, 1);
  a.c[2] = Expr(1);
  a.c[1] = v("x");
  return a;
}

}  // namespace

TEST_CASE("Lie flags of model algebras") {
  auto H = lie_flag(first_n(heisenberg(), 2));
  CHECK(H.ranks == std::vector<int>{2, 3});
  CHECK(H.step == 2);
  CHECK(H.bracket_generating);
  CHECK(H.regular);

  auto E = lie_flag(first_n(engel(), 2));
  CHECK(E.ranks == std::vector<int>{2, 3, 4});
  CHECK(E.step == 3);

  auto ab = lie({"a", "b"}, {});
  auto I = lie_flag(first_n(ab, 1));
  CHECK(I.ranks == std::vector<int>{1, 1});
  CHECK(I.involutive);
  CHECK_FALSE(I.bracket_generating);
}

TEST_CASE("curvature of the Heisenberg distribution") {
  auto A = heisenberg();
  auto fl = lie_flag(first_n(A, 2));
  Point p{{"x"}, {0.3}};
  auto c = curvature_eval(fl, 1, 1, Section::basis(A, 0), Section::basis(A, 1), p);
  CHECK(c.value(0) == doctest::Approx(0.0));
  CHECK(c.value(1) == doctest::Approx(0.0));
  CHECK(std::fabs(c.value(2)) == doctest::Approx(1.0));
  auto vv = curvature_eval(fl, 1, 1, Section::basis(A, 0), Section::basis(A, 0), p);
  CHECK(vv.value.norm() < 1e-14);
  CHECK_THROWS_AS(curvature_eval(fl, 1, 1, Section::basis(A, 2), Section::basis(A, 0), p), NotInFlag);
}

TEST_CASE("curvature shift invariance on the Engel flag") {
  auto A = engel();
  auto fl = lie_flag(first_n(A, 2));
  Point p{{"x"}, {-0.4}};
  Section e3 = bracket(Section::basis(A, 0), Section::basis(A, 1));
  auto c = curvature_eval(fl, 2, 1, e3, Section::basis(A, 1), p);
  CHECK(c.value.norm() == doctest::Approx(1.0));
  CHECK(c.shift_residual < 1e-12);
}

TEST_CASE("classification of the T3 form") {
  AForm a = t3_alpha();
  auto xi = Distribution::kernel(a);
  CHECK(xi.rank == 2);
  auto c = classify(xi, a);
  CHECK(c.contact.value);
  REQUIRE(c.volume_min.has_value());
  CHECK(*c.volume_min == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.volume_agrees);
  Expr vol = contact_volume(a);
  for (const auto& p : check_points(a.A, 100, 3)) CHECK(std::fabs(std::fabs(evaluate(vol, p)) - 1.0) < 1e-12);
}

TEST_CASE("even-contact and zero form") {
  auto H = heisenberg();
  auto HR = make_product(H, {"w"}, {0.0});
  std::vector<Section> s{Section::basis(HR, 0), Section::basis(HR, 1), Section::basis(HR, 3)};
  auto c = classify(Distribution::spanned(HR, s, 3));
  CHECK(c.even_contact.value);
  CHECK_FALSE(c.contact.value);

  AForm zero = AForm::zero(darboux().A, 1);
  auto cz = classify(Distribution::kernel(zero), zero);
  CHECK_FALSE(cz.contact.value);
  CHECK(cz.contact.margin == 0.0);
}

TEST_CASE("Reeb fields") {
  AForm a = t3_alpha();
  Section R{a.A, {sin(v("t2")), Expr(), cos(v("t2"))}};
  auto chk = verify_reeb(a, R, a.A->domain(), 1e-12);
  CHECK(chk.pass);
  Point p{{"t1", "t2", "t3"}, {0.0, kPi / 3, 0.0}};
  auto s = reeb_at(a, p);
  CHECK(s.residual < 1e-10);
  CHECK(s.min_singular > 1e-6);
  auto Rp = R.eval(p);
  for (int i = 0; i < 3; ++i) CHECK(std::fabs(s.R(i) - Rp[i]) < 1e-10);

  AForm dz = darboux();
  Section Rz{dz.A, {Expr(), Expr(), Expr(1)}};
  CHECK(verify_reeb(dz, Rz, dz.A->domain(), 1e-14).pass);
  AForm bad = AForm::basis(dz.A, {2});
  CHECK_THROWS_AS(reeb_at(bad, Point{{"x", "y", "z"}, {0, 0, 0}}), Degenerate);
}

TEST_CASE("Liouville form is symplectic") {
  auto A = make_bk(Chart({"z", "x"}), "z", 1);
  auto L = liouville(A);
  CHECK((L.omega + d(L.lambda)).structurally_zero());
  auto rr = form_rank_range(L.omega);
  CHECK(rr.first == 4);
}

TEST_CASE("Bott forms") {
  auto A = elliptic4();
  auto xi = first_n(A, 4);
  auto B = bott(xi, {"a", "b"});
  CHECK((B.omega + d(B.lambda)).structurally_zero());
  auto fat = is_fat(B, 40);
  CHECK(fat.fat);
  CHECK(fat.min_abs_det > 0.1);

  auto H = heisenberg();
  auto BH = bott(first_n(H, 2));
  CHECK(is_fat(BH).fat);

  auto ab = lie({"a", "b", "c", "d"}, {});
  auto BI = bott(first_n(ab, 2));
  auto rr = form_rank_range(BI.omega);
  CHECK(rr.first == 4);
  CHECK(rr.second == 4);

  auto T = t3();
  std::vector<Section> span{Section{T, {v("t2"), Expr(1), Expr()}}};
  CHECK_THROWS_AS(bott(Distribution::spanned(T, span, 1)), NonConstantSpan);
}

TEST_CASE("contact elements") {
  auto E = make_elliptic(Chart({"x", "y"}), "x", "y");
  auto ce = contact_elements(E);
  Expr vol = contact_volume(ce.alpha);
  for (const auto& p : ce.domain.with_count(100).points()) CHECK(std::fabs(std::fabs(evaluate(vol, p)) - 1.0) < 1e-12);
  auto T = make_tangent(Chart({"x", "y"}));
  auto ct = contact_elements(T);
  CHECK(ct.alpha.c[0] == cos(v("psi")));
  CHECK(ct.alpha.c[1] == sin(v("psi")));
  CHECK_THROWS_AS(contact_elements(make_tangent(Chart({"x"}))), UnsupportedRank);
  auto c3 = contact_elements(make_tangent(Chart({"x", "y", "z"})));
  double mn = INFINITY;
  Expr v3 = contact_volume(c3.alpha);
  for (const auto& p : c3.domain.with_count(100).points()) mn = std::min(mn, std::fabs(evaluate(v3, p)));
  CHECK(mn > 1e-3);
}

TEST_CASE("prolongation") {
  auto H = heisenberg();
  auto P = prolong(first_n(H, 2));
  auto fl = lie_flag(P.D);
  CHECK(fl.ranks == std::vector<int>{2, 3, 4});
  CHECK(classify(P.D).engel.value);

  AForm dz = darboux();
  auto P3 = prolong(Distribution::kernel(dz));
  CHECK(classify(P3.D).engel.value);

  auto P2 = prolong(P.D, "m2");
  auto fl2 = lie_flag(P2.D);
  CHECK(fl2.bracket_generating);
  CHECK(fl2.step >= 3);
  CHECK(fl2.ranks.front() == 2);

  auto ab = lie({"a", "b", "c"}, {});
  CHECK_THROWS_AS(prolong(first_n(ab, 2)), NotContact);
}
