#include <cmath>

#include "balg/regularise.hpp"
#include "doctest.h"

using namespace balg;

namespace {

Expr v(const char* n) { return Expr::var(n); }

Chart t3_chart() { return Chart({"t1", "t2", "t3"}, {kTwoPi, kTwoPi, kTwoPi}); }

AForm t3_alpha(const AlgebroidPtr& A) {
  AForm a = AForm::zero(A, 1);
  a.c[0] = sin(v("t2"));
  a.c[2] = cos(v("t2"));
  return a;
}

}  // namespace

TEST_CASE("trivial regularisation of the line") {
  auto reg = regularise_trivial(Chart({"z"}), v("z"), 1);
  REQUIRE(reg.ambient.coords == std::vector<std::string>{"z", "s"});
  const auto& th = reg.patches[0].thetas[0];
  CHECK(th.c[0] == Expr(1));
  CHECK(th.c[1] == v("z"));
  CHECK(reg.patches[0].psi_inv[0][0] == v("z"));
  CHECK(reg.patches[0].psi_inv[0][1] == Expr(-1));
  auto rep = verify_regularisation(reg);
  CHECK(rep.pass(1e-10));
  CHECK(rep.tangency == 0.0);
}

TEST_CASE("involutivity of theta_f for a curved divisor") {
  auto reg = regularise_trivial(Chart({"x", "z"}), v("z") - v("x") * v("x"), 2);
  const auto& th = reg.patches[0].thetas[0];
  // curl oracle in (x, z, s)
  std::vector<std::string> c{"x", "z", "s"};
  auto D = [&](int i, int j) { return differentiate(th.c[i], c[j]); };
  Expr oracle = th.c[0] * (D(2, 1) - D(1, 2)) + th.c[1] * (D(0, 2) - D(2, 0)) + th.c[2] * (D(1, 0) - D(0, 1));
  CHECK(structurally_zero(oracle));
  CHECK(wedge(th, d(th)).structurally_zero());
  auto rep = verify_regularisation(reg, 300);
  CHECK(rep.pass(1e-9));
}

TEST_CASE("coorientation records") {
  Chart ch({"z", "x"});
  auto def = coorientation(regularise_trivial(ch, v("z"), 1));
  REQUIRE(def.size() == 1);
  CHECK(def[0].vertical_orientation == 1);
  RegOptions flip;
  flip.sign = -1;
  CHECK(coorientation(regularise_trivial(ch, v("z"), 1, flip))[0].vertical_orientation == -1);
  auto scaled = coorientation(regularise_trivial(ch, Expr(2) * v("z"), 1));
  CHECK(scaled[0].vertical_orientation == def[0].vertical_orientation);
  CHECK(scaled[0].vertical_sign == def[0].vertical_sign);

  auto even = coorientation(regularise_trivial(ch, v("z"), 2));
  CHECK(even[0].coorientation == 1);
  CHECK(coorientation(regularise_trivial(ch, v("z"), 2, flip))[0].coorientation == -1);
  CHECK(coorientation(regularise_trivial(ch, Expr(2) * v("z"), 2))[0].coorientation == 1);
  CHECK_THROWS_AS(coorientation(regularise_elliptic(Chart({"x", "y"}), "x", "y")), NotBK);
}

TEST_CASE("intrinsic regularisation") {
  auto reg = regularise_intrinsic(Chart({"z"}), v("z"));
  CHECK(reg.patches[0].psi_inv[0][0] == v("z"));
  CHECK(reg.patches[0].psi_inv[0][1] == -v("t"));
  CHECK(verify_regularisation(reg, 400).pass(1e-10));
  auto lc = canonical_lift_check(reg);
  CHECK(lc.residual == 0.0);
  CHECK_FALSE(lc.degenerate);
  CHECK(canonical_lift_check(regularise_intrinsic(Chart({"z"}), Expr(2) * v("z"))).residual == 0.0);
  auto k2 = intrinsic_lift_analog(Chart({"z"}), "z", v("z"), 2);
  CHECK(k2.hor[1] == Expr(-2) * v("z") * v("t"));
  CHECK(k2.residual == 0.0);
  CHECK(k2.degenerate);
  CHECK_THROWS_AS(canonical_lift_check(regularise_trivial(Chart({"z"}), v("z"), 1)), NotB1);

  CHECK(exponential_conjugation_residual(Chart({"z", "x"}), v("z")) < 1e-12);
  CHECK(exponential_conjugation_residual(Chart({"x", "z"}), v("z") - v("x") * v("x")) < 1e-9);

  auto nz = regularise_intrinsic(Chart({"z"}), Expr(1) + v("z") * v("z"), "z");
  auto rep = verify_regularisation(nz, 200);
  CHECK(rep.graphical_failures == 0);
  CHECK(rep.graphical_min > 0.0);
}

TEST_CASE("elliptic regularisation of the disk") {
  auto reg = regularise_elliptic(Chart({"x", "y"}), "x", "y");
  CHECK(reg.codim() == 2);
  const auto& p = reg.patches[0];
  for (const auto& th : p.thetas) CHECK(d(th).structurally_zero());
  auto rep = verify_regularisation(reg, 500);
  CHECK(rep.pass(1e-10));
  CHECK(rep.graphical_failures == 0);
  CHECK(rep.invariance < 1e-12);
}

TEST_CASE("self-crossing regularisation") {
  auto reg = regularise_selfcrossing(Chart({"x", "y"}), {{"x", 1}, {"y", 1}}, true);
  REQUIRE(reg.ambient.coords == std::vector<std::string>{"x", "y", "s1", "s2"});
  CHECK(reg.ambient.periodic(2));
  const auto& p = reg.patches[0];
  CHECK(p.thetas[0].c[0] == Expr(1));
  CHECK(p.thetas[0].c[2] == v("x"));
  CHECK(p.thetas[1].c[1] == Expr(1));
  CHECK(p.thetas[1].c[3] == v("y"));
  auto rep = verify_regularisation(reg, 500);
  CHECK(rep.bracket < 1e-10);
  CHECK(rep.pass(1e-10));

  auto single = regularise_selfcrossing(Chart({"z", "x"}), {{"z", 1}});
  auto triv = regularise_trivial(Chart({"z", "x"}), v("z"), 1);
  CHECK(single.ambient == triv.ambient);
  for (std::size_t i = 0; i < triv.patches[0].thetas[0].c.size(); ++i) {
    CHECK(single.patches[0].thetas[0].c[i] == triv.patches[0].thetas[0].c[i]);
  }
  CHECK_THROWS_AS(regularise_selfcrossing(Chart({"x", "y"}), {{"x", 1}, {"x", 2}}), DuplicateCoordinate);
}

TEST_CASE("cutoff and compact variants") {
  Chart ch({"z", "x"});
  RegOptions o;
  o.cutoff = CutoffProfile{};
  auto cut = regularise_trivial(ch, v("z"), 1, o);
  CHECK(cut.kind == RegKind::Cutoff);
  CHECK(cut.patches.size() == 4);
  CHECK(o.cutoff->value(0.2) == 1.0);
  CHECK(o.cutoff->value(1.5) == 0.0);
  CHECK(o.cutoff->value(0.75) == doctest::Approx(0.5));
  double prev = 1.0;
  for (int i = 0; i <= 50; ++i) {
    double c = o.cutoff->value(0.5 + 0.01 * i);
    CHECK(c <= prev + 1e-15);
    prev = c;
  }
  auto rep = verify_regularisation(cut, 600);
  CHECK(rep.tangency < 1e-12);
  CHECK(rep.graphical_failures == 0);
  CHECK(rep.pass(1e-9));

  auto triv = regularise_trivial(ch, v("z"), 1);
  std::vector<Point> inside, outside;
  for (const auto& p : triv.domain(400, 5).points()) {
    double z = std::fabs(p.at("z"));
    if (z < 0.5) inside.push_back(p);
    if (z > 1.2) outside.push_back(p);
  }
  CHECK(form_difference(cut, triv, inside) < 1e-14);
  CHECK(form_difference(cut, triv, outside) > 0.1);

  RegOptions comp;
  comp.compact = true;
  auto cr = regularise_trivial(ch, v("z"), 1, comp);
  CHECK(cr.kind == RegKind::Compact);
  CHECK(cr.ambient.periodic(2));
  auto rc = verify_regularisation(cr, 300), rt = verify_regularisation(triv, 300);
  CHECK(rc.pass(1e-10));
  CHECK(rc.morphism() == doctest::Approx(rt.morphism()).epsilon(1e-6));
}

TEST_CASE("corrupted lift map is detected") {
  auto reg = regularise_trivial(Chart({"z", "x"}), v("z"), 1);
  auto bad = reg;
  auto& psi = bad.patches[0].psi_inv;
  psi[0][2] = -psi[0][2];
  bad.patches[0].F = make_custom(AlgebroidKind::Foliation, bad.ambient, reg.source->labels, psi, reg.source->structure);
  auto rep = verify_regularisation(bad, 300);
  CHECK(rep.morphism() > 0.1);
  CHECK_FALSE(rep.pass());
}

TEST_CASE("lifting forms and distributions") {
  auto A = make_bk(t3_chart(), "t1", 1, sin(v("t1")));
  AForm a = t3_alpha(A);
  RegOptions o;
  o.compact = true;
  o.sign = -1;
  auto reg = regularise_trivial(t3_chart(), sin(v("t1")), 1, o);
  REQUIRE(reg.source->labels == A->labels);
  // lift through the regularisation's own source
  AForm alpha = a.rehome(reg.source);
  AForm la = lift(reg, alpha);
  auto xi = Distribution::kernel(alpha);
  auto lxi = Distribution::kernel(la);
  auto c0 = classify(xi, alpha), c1 = classify(lxi, la);
  CHECK(c1.contact.value);
  CHECK(c0.contact.value == c1.contact.value);
  CHECK(c0.flag_ranks == c1.flag_ranks);
  CHECK(lift_commutation_residual(reg, alpha) < 1e-10);

  auto cl = central_leaf(reg, alpha);
  CHECK(cl.form.c[0].is_zero());
  CHECK(cl.form.c[1] == cos(v("t2")));
  CHECK(cl.form.c[2] == sin(v("t2")));
  CHECK(central_leaf_residual(reg, alpha) < 1e-12);
  Expr vol = contact_volume(cl.form);
  for (const auto& p : cl.leaf->domain().with_count(100).points()) CHECK(std::fabs(evaluate(vol, p)) > 0.99);

  AForm theta0 = AForm::basis(reg.source, {0});
  auto cl0 = central_leaf(reg, theta0);
  CHECK(cl0.form.c[2] == Expr(1));
  CHECK(cl0.form.c[0].is_zero());
  CHECK(contact_volume(cl0.form).is_zero());

  std::vector<Section> inv{Section::basis(reg.source, 1)};
  auto linv = lie_flag(lift(reg, Distribution::spanned(reg.source, inv, 1)));
  CHECK(linv.involutive);
  CHECK_THROWS_AS(lift(reg, a), ChartMismatch);
  CHECK_THROWS_AS(central_leaf(regularise_intrinsic(Chart({"z"}), v("z")), AForm::zero(A, 1)), NotBK);
}

TEST_CASE("transversality precondition") {
  CHECK_THROWS_AS(regularise_trivial(Chart({"z", "x"}), v("z") * v("z"), 1), NonTransverse);
  CHECK_THROWS_AS(regularise_intrinsic(Chart({"z"}), v("z") * v("z") * v("z")), NonTransverse);
  CHECK_NOTHROW(regularise_trivial(Chart({"z", "x"}), v("z") - v("x") * v("x"), 1));
  auto pts = regularise_trivial(Chart({"z", "x"}), v("z") - v("x") * v("x"), 1).locus_points(20, 3);
  for (const auto& p : pts) CHECK(std::fabs(p.at("z") - p.at("x") * p.at("x")) < 1e-12);
}
