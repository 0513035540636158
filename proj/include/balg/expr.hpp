#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "balg/errors.hpp"

namespace balg {

/// Exact rational with 64-bit numerator/denominator; overflow throws std::overflow_error.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t n) : num_(n) {}  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t n, std::int64_t d);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  bool is_zero() const { return num_ == 0; }
  bool is_one() const { return num_ == 1 && den_ == 1; }
  bool is_integer() const { return den_ == 1; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string str() const;

  Rational operator-() const;
  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend int compare(const Rational& a, const Rational& b);
  Rational pow(int e) const;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

enum class ExprKind { Const, Var, Add, Mul, Pow, Func };
enum class Fn { Sin, Cos, Exp, Log, Sqrt };

struct ExprNode;

/// Immutable expression handle. Construction folds constants and flattens
/// sums and products, collecting numeric coefficients of equal terms.
class Expr {
 public:
  Expr();
  Expr(std::int64_t v);           // NOLINT(google-explicit-constructor)
  Expr(int v) : Expr(static_cast<std::int64_t>(v)) {}  // NOLINT
  Expr(const Rational& r);        // NOLINT(google-explicit-constructor)
  static Expr var(const std::string& name);
  static Expr number(double v);   // exact binary value of a double

  ExprKind kind() const;
  const Rational& value() const;  // Const only
  const std::string& name() const;  // Var only
  const std::vector<Expr>& args() const;  // Add/Mul operands; Pow base; Func argument
  int exponent() const;  // Pow only
  Fn fn() const;         // Func only

  bool is_const() const { return kind() == ExprKind::Const; }
  bool is_zero() const;
  bool is_one() const;
  std::size_t hash() const;
  std::string str() const;

  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }
  friend bool operator<(const Expr& a, const Expr& b);
  friend int compare(const Expr& a, const Expr& b);

  explicit Expr(std::shared_ptr<const ExprNode> n) : n_(std::move(n)) {}
  const ExprNode* node() const { return n_.get(); }

 private:
  std::shared_ptr<const ExprNode> n_;
};

struct ExprNode {
  ExprKind kind;
  Rational value;
  std::string name;
  std::vector<Expr> args;
  int exponent = 0;
  Fn fn = Fn::Sin;
  std::size_t hash = 0;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr& operator+=(Expr& a, const Expr& b);
Expr& operator-=(Expr& a, const Expr& b);
Expr& operator*=(Expr& a, const Expr& b);

Expr sum(const std::vector<Expr>& terms);
Expr product(const std::vector<Expr>& factors);
Expr pow(const Expr& base, int e);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr sqrt(const Expr& a);

/// Structural partial derivative.
Expr differentiate(const Expr& e, const std::string& var);

/// Replace variables by expressions (simultaneous substitution).
Expr substitute(const Expr& e, const std::map<std::string, Expr>& repl);
Expr substitute(const Expr& e, const std::string& var, const Expr& value);

/// Distribute products over sums and expand positive integer powers of sums.
Expr expand(const Expr& e);

/// True when expand(e) folds to the constant 0.
bool structurally_zero(const Expr& e);

std::set<std::string> free_variables(const Expr& e);
bool depends_on(const Expr& e, const std::string& var);

/// Coordinate assignment: names with values; lookup is by name.
struct Point {
  std::vector<std::string> names;
  std::vector<double> values;
  double at(const std::string& n) const;
  void set(const std::string& n, double v);
};

/// Floating evaluation. Throws DomainError on invalid log/sqrt/division
/// arguments and for unassigned variables.
double evaluate(const Expr& e, const Point& p);

/// Flattened evaluator over a fixed coordinate ordering.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const Expr& e, const std::vector<std::string>& coords);
  double operator()(const double* x) const;

 private:
  struct Op {
    std::uint8_t code;
    int arg;
    double c;
  };
  std::vector<Op> prog_;
  int depth_ = 0;
  void emit(const Expr& e, const std::vector<std::string>& coords, int& d);
};

/// Parse conventional infix syntax: rationals/decimals, identifiers,
/// + - * / ^ (integer exponents), sin cos exp log sqrt.
Expr parse(std::string_view text);

}  // namespace balg
