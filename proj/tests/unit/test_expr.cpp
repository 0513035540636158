#include <cmath>
#include <random>

#include "balg/expr.hpp"
#include "balg/sample.hpp"
#include "doctest.h"

using namespace balg;

namespace {

Expr v(const char* n) { return Expr::var(n); }

double central_difference(const Expr& e, Point p, const std::string& var, double h = 1e-5) {
  double x = p.at(var);
  p.set(var, x + h);
  double a = evaluate(e, p);
  p.set(var, x - h);
  double b = evaluate(e, p);
  return (a - b) / (2 * h);
}

Expr random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, 7);
  const char* names[] = {"x", "y", "z"};
  if (depth == 0) {
    int k = pick(rng);
    if (k < 3) return Expr(k + 1) / Expr(2);
    return v(names[k % 3]);
  }
  Expr a = random_expr(rng, depth - 1), b = random_expr(rng, depth - 1);
  switch (pick(rng)) {
    case 0: return a + b;
    case 1: return a - b;
    case 2: return a * b;
    case 3: return pow(a, 2) + b;
    case 4: return sin(a) * b;
    case 5: return cos(a) + b;
    case 6: return exp(sin(a)) * b;
    default: return a * pow(b, 3);
  }
}

}  // namespace

TEST_CASE("power rule and trig derivatives") {
  CHECK(differentiate(pow(v("z"), 3), "z") == Expr(3) * pow(v("z"), 2));
  CHECK(differentiate(sin(v("t2")), "t2") == cos(v("t2")));
  CHECK(differentiate(v("x"), "y").is_zero());
}

TEST_CASE("log derivative matches central difference") {
  Expr e = log(v("z"));
  Point p{{"z"}, {2.0}};
  double dd = evaluate(differentiate(e, "z"), p);
  CHECK(dd == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::fabs(dd - central_difference(e, p, "z")) < 1e-8);
}

TEST_CASE("evaluate basics") {
  Point p{{"z", "s"}, {2.0, 3.0}};
  CHECK(evaluate(v("z") * v("s"), p) == 6.0);
  CHECK(evaluate(sin(v("t1")), Point{{"t1"}, {0.0}}) == 0.0);
  CHECK_THROWS_AS(evaluate(log(v("z")), Point{{"z"}, {0.0}}), DomainError);
  CHECK_THROWS_AS(evaluate(Expr(1) / v("z"), Point{{"z"}, {0.0}}), DomainError);
  CHECK_THROWS_AS(evaluate(sqrt(v("z")), Point{{"z"}, {-1.0}}), DomainError);
  CHECK_THROWS_AS(evaluate(v("w"), Point{{"z"}, {1.0}}), DomainError);
}

TEST_CASE("random expressions differentiate like finite differences") {
  std::mt19937_64 rng(7);
  SampleDomain dom;
  dom.add("x", Range::interval(-1, 1));
  dom.add("y", Range::interval(-1, 1));
  dom.add("z", Range::interval(-1, 1));
  auto pts = dom.with_count(50).points();
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    Expr e = random_expr(rng, 3);
    for (const char* var : {"x", "y", "z"}) {
      Expr de = differentiate(e, var);
      for (const auto& p : pts) {
        double a = evaluate(de, p);
        double b = central_difference(e, p, var);
        double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
        REQUIRE(std::fabs(a - b) / scale < 1e-6);
        ++checked;
      }
    }
  }
  CHECK(checked == 100 * 3 * 50);
}

TEST_CASE("constant folding preserves values") {
  std::mt19937_64 rng(11);
  Point p{{"x", "y", "z"}, {0.3, -0.7, 1.1}};
  for (int i = 0; i < 100; ++i) {
    Expr e = random_expr(rng, 3);
    double direct = evaluate(e, p);
    CHECK(evaluate(expand(e), p) == doctest::Approx(direct).epsilon(1e-9));
    CHECK(evaluate(e + Expr(0), p) == doctest::Approx(direct).epsilon(1e-15));
    CHECK(evaluate(e * Expr(1), p) == doctest::Approx(direct).epsilon(1e-15));
  }
}

TEST_CASE("numeric_equiv verdicts") {
  SampleDomain dom;
  dom.add("x", Range::interval(-3, 3));
  Expr x = v("x");
  auto r = numeric_equiv(pow(sin(x), 2) + pow(cos(x), 2), Expr(1), dom, 1e-12);
  CHECK(r.pass);
  CHECK(r.max_abs < 1e-12);
  CHECK(r.used == 1000);

  SampleDomain pos;
  pos.add("z", Range::interval(0.1, 10));
  Expr z = v("z");
  CHECK(numeric_equiv(differentiate(z * log(z), "z"), log(z) + Expr(1), pos, 1e-12).pass);

  SampleDomain unit;
  unit.add("z", Range::interval(0, 2));
  auto bad = numeric_equiv(z, z * z, unit, 1e-9);
  CHECK_FALSE(bad.pass);
  double w = bad.witness.at("z");
  CHECK(std::fabs(w - w * w) / std::max({1.0, w, w * w}) == doctest::Approx(bad.max_scaled));
}

TEST_CASE("numeric_equiv is symmetric and reflexive") {
  SampleDomain dom;
  dom.add("x", Range::interval(-2, 2));
  Expr a = sin(v("x")) * v("x"), b = v("x") * sin(v("x")) + Expr(1) / Expr(1000000);
  CHECK(numeric_equiv(a, a, dom, 0).pass);
  for (double tol : {1e-9, 1e-5}) {
    CHECK(numeric_equiv(a, b, dom, tol).pass == numeric_equiv(b, a, dom, tol).pass);
  }
}

TEST_CASE("sampling is deterministic and respects exclusions") {
  SampleDomain dom;
  dom.add("t", Range::circle());
  dom.add("z", Range::interval(-1, 1));
  dom.exclude(v("z"), 0.5);
  auto p1 = dom.points(), p2 = dom.points();
  REQUIRE(p1.size() == 1000);
  for (std::size_t i = 0; i < p1.size(); ++i) {
    CHECK(p1[i].values == p2[i].values);
    CHECK(std::fabs(p1[i].at("z")) >= 0.5);
    CHECK(p1[i].at("t") >= 0.0);
    CHECK(p1[i].at("t") < kTwoPi);
  }
  SampleDomain empty;
  empty.add("z", Range::interval(-1, 1));
  empty.exclude(Expr(0), 1.0);
  CHECK_THROWS_AS(empty.points(), EmptyDomain);
}

TEST_CASE("parser round trips") {
  Expr e = parse("sin(t2)*cos(t1)^2 - 3/4*z**3 + exp(x)/2 + 1.5e-1*log(y) + sqrt(w)");
  Point p{{"t1", "t2", "z", "x", "y", "w"}, {0.4, 1.3, -0.6, 0.2, 2.5, 0.9}};
  double ref = std::sin(1.3) * std::pow(std::cos(0.4), 2) - 0.75 * std::pow(-0.6, 3) + std::exp(0.2) / 2 +
               0.15 * std::log(2.5) + std::sqrt(0.9);
  CHECK(evaluate(e, p) == doctest::Approx(ref).epsilon(1e-14));
  CHECK(evaluate(parse(e.str()), p) == doctest::Approx(ref).epsilon(1e-14));
  CHECK(parse("-x^2") == -(v("x") * v("x")));
  CHECK_THROWS_AS(parse("sin(x"), ParseError);
  CHECK_THROWS_AS(parse("x^y"), ParseError);
  CHECK_THROWS_AS(parse(""), ParseError);
}

TEST_CASE("structural simplification") {
  Expr x = v("x"), y = v("y");
  CHECK((x + y - x).str() == "y");
  CHECK(structurally_zero(pow(x + y, 2) - x * x - Expr(2) * x * y - y * y));
  CHECK(sin(-x) == -sin(x));
  CHECK(cos(-x) == cos(x));
  CHECK(log(exp(x)) == x);
  CHECK(depends_on(x * sin(y), "y"));
  CHECK_FALSE(depends_on(x * sin(y), "z"));
}

TEST_CASE("compiled evaluation matches tree evaluation") {
  Expr e = parse("sin(a)*b^3 - exp(a*b)/(1+b^2) + sqrt(1+a^2)");
  CompiledExpr ce(e, {"a", "b"});
  double x[2] = {0.37, -1.2};
  CHECK(ce(x) == doctest::Approx(evaluate(e, Point{{"a", "b"}, {0.37, -1.2}})).epsilon(1e-15));
}
