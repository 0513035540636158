#include <cmath>

#include "balg/algebroid.hpp"
#include "doctest.h"

using namespace balg;

namespace {

Expr v(const char* n) { return Expr::var(n); }

AlgebroidPtr heisenberg() {
  AlgebroidSpec s;
  s.kind = "lie_algebra";
  s.chart = Chart({"x"});
  s.labels = {"p", "q", "z"};
  s.brackets = {{"p", "q", "z", Rational(1)}};
  return build_algebroid(s);
}

double max_at(const std::vector<Expr>& es, const SampleDomain& dom) {
  double m = 0;
  for (const auto& p : dom.points()) {
    for (const auto& e : es) m = std::max(m, std::fabs(evaluate(e, p)));
  }
  return m;
}

std::vector<AlgebroidPtr> builtins() {
  Chart r2({"z", "x"});
  Chart t3({"t1", "t2", "t3"}, {kTwoPi, kTwoPi, kTwoPi});
  return {
      make_tangent(r2),
      make_bk(r2, "z", 1),
      make_bk(r2, "z", 2),
      make_bk(Chart({"z", "x", "y"}), "z", 3),
      make_bk(t3, "t1", 1, sin(v("t1"))),
      make_bk(r2, "z", 2, v("z") - v("x") * v("x"), false),
      make_elliptic(Chart({"x", "y", "w"}), "x", "y"),
      make_selfcrossing(Chart({"x", "y", "w"}), {{"x", 1, Expr()}, {"y", 2, Expr()}}),
      heisenberg(),
      make_product(make_bk(r2, "z", 1), {"t"}, {0.0}),
  };
}

}  // namespace

TEST_CASE("b-frame on the plane") {
  auto A = make_bk(Chart({"z", "x"}), "z", 1);
  CHECK(A->labels == std::vector<std::string>{"bz", "x"});
  CHECK(A->anchor[0][0] == v("z"));
  CHECK(A->anchor[0][1].is_zero());
  CHECK(A->anchor[1][1] == Expr(1));
  for (const auto& c : A->structure) CHECK(c.is_zero());
  Section e0 = Section::basis(A, 0);
  Section xe1 = v("x") * Section::basis(A, 1);
  Section b = bracket(e0, xe1);
  CHECK(b.c[0].is_zero());
  CHECK(b.c[1].is_zero());
}

TEST_CASE("Heisenberg structure constants") {
  auto A = heisenberg();
  CHECK(A->c(0, 1, 2) == Expr(1));
  CHECK(A->c(1, 0, 2) == Expr(-1));
  for (const auto& row : A->anchor) {
    for (const auto& e : row) CHECK(e.is_zero());
  }
  Section b = bracket(Section::basis(A, 0), Section::basis(A, 1));
  CHECK(b.c[2] == Expr(1));
  AForm zs = AForm::basis(A, {2});
  AForm dz = d(zs);
  CHECK(dz.at({0, 1}) == Expr(-1));
  CHECK(dz.at({0, 2}).is_zero());
}

TEST_CASE("elliptic determinant vanishes only at the origin") {
  auto A = make_elliptic(Chart({"x", "y"}), "x", "y");
  Expr det = A->anchor_det();
  Expr x = v("x"), y = v("y");
  Expr hand = x * x - (-y) * y;
  CHECK(structurally_zero(det - hand));
  CHECK(evaluate(det, Point{{"x", "y"}, {0, 0}}) == 0.0);
  CHECK(evaluate(det, Point{{"x", "y"}, {0.1, 0}}) > 0.0);
}

TEST_CASE("b^2 bracket against pushforward vector fields") {
  auto A = make_bk(Chart({"z", "x"}), "z", 2);
  Section X = Section::basis(A, 0);
  Section Y = v("z") * Section::basis(A, 0);
  Section B = bracket(X, Y);
  CHECK(B.c[0] == pow(v("z"), 2));
  CHECK(B.c[1].is_zero());
  // [z^2 d_z, z^3 d_z] = z^4 d_z computed from the vector fields
  SampleDomain dom;
  dom.add("z", Range::interval(-2, 2));
  dom.add("x", Range::interval(-2, 2));
  dom.exclude(v("z"), 0.1);
  Expr a = pow(v("z"), 2), b = pow(v("z"), 3);
  Expr push = a * differentiate(b, "z") - b * differentiate(a, "z");
  auto rho = anchor_of(B);
  CHECK(numeric_equiv(rho[0], push, dom, 1e-12).pass);
}

TEST_CASE("exterior derivative on functions") {
  auto A = make_bk(Chart({"z", "x"}), "z", 1);
  AForm dz = d(A, v("z"));
  CHECK(dz.c[0] == v("z"));
  CHECK(dz.c[1].is_zero());
}

TEST_CASE("wedge and interior basics") {
  auto A = make_bk(Chart({"z", "x"}), "z", 1);
  AForm t0 = AForm::basis(A, {0}), t1 = AForm::basis(A, {1});
  AForm a = wedge(t0, t1), b = wedge(t1, t0);
  CHECK((a + b).structurally_zero());
  CHECK(interior(Section::basis(A, 0), a).c[1] == Expr(1));
  CHECK(interior(Section::basis(A, 0), a).c[0].is_zero());
  CHECK(wedge(t0 + t1, t0 + t1).structurally_zero());
  CHECK_THROWS_AS(wedge(a, t0), DegreeOverflow);
  auto B = make_bk(Chart({"z", "y"}), "z", 1);
  CHECK_THROWS_AS(wedge(t0, AForm::basis(B, {1})), ChartMismatch);
}

TEST_CASE("multi-index helpers") {
  for (int r = 1; r <= 7; ++r) {
    for (int p = 0; p <= r; ++p) {
      const auto& s = subsets(r, p);
      CHECK(static_cast<long>(s.size()) == binomial(r, p));
      for (std::size_t i = 0; i < s.size(); ++i) CHECK(subset_index(r, s[i]) == static_cast<int>(i));
    }
  }
}

TEST_CASE("residue and locus restriction") {
  Chart t3({"t1", "t2", "t3"}, {kTwoPi, kTwoPi, kTwoPi});
  auto A = make_bk(t3, "t1", 1, sin(v("t1")));
  AForm alpha = AForm::zero(A, 1);
  alpha.c[0] = sin(v("t2"));
  alpha.c[2] = cos(v("t2"));
  AForm res = residue(alpha);
  CHECK(res.p == 0);
  CHECK(res.c[0] == sin(v("t2")));
  auto L = restrict_to_locus(alpha);
  CHECK(L.u == sin(v("t2")));
  CHECK(L.beta.c[0].is_zero());
  CHECK(L.beta.c[1] == cos(v("t2")));
  CHECK(L.Z->chart.coords == std::vector<std::string>{"t2", "t3"});

  AForm only = AForm::basis(A, {0});
  auto L1 = restrict_to_locus(only);
  CHECK(L1.u == Expr(1));
  CHECK(L1.beta.structurally_zero());

  AForm none = AForm::basis(A, {2});
  CHECK(residue(none).c[0].is_zero());

  auto N = make_bk(Chart({"z", "x1", "y1", "x2", "y2"}), "z", 2);
  AForm a = AForm::zero(N, 1);
  a.c[N->label_index("x1")] = Expr(1);
  a.c[0] = Expr(1) + v("y1");
  a.c[N->label_index("y2")] = v("x2");
  auto LN = restrict_to_locus(a);
  CHECK(LN.u == Expr(1) + v("y1"));
  CHECK(LN.beta.c[LN.Z->label_index("x1")] == Expr(1));
  CHECK(LN.beta.c[LN.Z->label_index("y2")] == v("x2"));

  CHECK_THROWS_AS(residue(AForm::basis(make_tangent(t3), {0})), NotBK);
}

TEST_CASE("invalid algebroid input") {
  AlgebroidSpec s;
  s.kind = "bk";
  s.chart = Chart({"z", "x"});
  s.z = "w";
  CHECK_THROWS_AS(build_algebroid(s), InvalidSpec);
  s.z = "z";
  s.k = 0;
  CHECK_THROWS_AS(build_algebroid(s), InvalidSpec);
  s.kind = "nonsense";
  CHECK_THROWS_AS(build_algebroid(s), UnknownKind);
  AlgebroidSpec l;
  l.kind = "lie_algebra";
  l.chart = Chart({"x"});
  l.labels = {"a", "b", "c"};
  l.brackets = {{"a", "b", "a", Rational(1)}, {"b", "c", "b", Rational(1)}, {"a", "c", "c", Rational(1)}};
  CHECK_THROWS_AS(build_algebroid(l), InvalidSpec);
  CHECK_THROWS_AS(Chart({"x", "x"}), DuplicateCoordinate);
  CHECK_THROWS_AS(make_selfcrossing(Chart({"x", "y"}), {{"x", 1, Expr()}, {"x", 1, Expr()}}), DuplicateCoordinate);
}

TEST_CASE("structural invariants on built-in algebroids") {
  for (const auto& A : builtins()) {
    CAPTURE(to_string(A->kind));
    auto r = check_algebroid(A, 10, 30, 42);
    CHECK(r.jacobi < 1e-9);
    CHECK(r.leibniz < 1e-9);
    CHECK(r.anchor < 1e-9);
    CHECK(r.d_squared < 1e-10);
    if (r.has_det) {
      CHECK(r.det_off_min > 0.0);
      CHECK(r.det_on_max < 1e-12);
    }
    for (int a = 0; a < A->rank(); ++a) {
      for (int b = 0; b < A->rank(); ++b) {
        for (int c = 0; c < A->rank(); ++c) CHECK(structurally_zero(A->c(a, b, c) + A->c(b, a, c)));
      }
    }
  }
}

TEST_CASE("d squared vanishes on one-forms over a curved frame") {
  auto A = make_bk(Chart({"z", "x", "y"}), "z", 2, v("z") - v("x") * v("x") + v("y"), false);
  AForm w = AForm::zero(A, 1);
  w.c[0] = sin(v("x")) * v("z");
  w.c[1] = v("y") * v("y");
  w.c[2] = exp(v("z"));
  SampleDomain dom = A->domain(1.0).with_count(200);
  CHECK(max_at(d(d(w)).c, dom) < 1e-10);
}
