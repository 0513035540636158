#include "balg/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace balg {

// ---------------------------------------------------------------- Rational

namespace {

using i128 = __int128;

std::int64_t narrow(i128 v) {
  if (v > static_cast<i128>(INT64_MAX) || v < -static_cast<i128>(INT64_MAX))
    throw std::overflow_error("rational overflow");
  return static_cast<std::int64_t>(v);
}

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Rational make_rational(i128 n, i128 d) {
  if (d == 0) throw DomainError("division by zero");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  i128 g = gcd128(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  return Rational(narrow(n), narrow(d));
}

}  // namespace

Rational::Rational(std::int64_t n, std::int64_t d) {
  if (d == 0) throw DomainError("division by zero");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  std::int64_t g = std::gcd(n < 0 ? -n : n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  num_ = n;
  den_ = d;
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::operator-() const { return Rational(-num_, den_); }

Rational operator+(const Rational& a, const Rational& b) {
  return make_rational(static_cast<i128>(a.num_) * b.den_ + static_cast<i128>(b.num_) * a.den_,
                       static_cast<i128>(a.den_) * b.den_);
}
Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
Rational operator*(const Rational& a, const Rational& b) {
  return make_rational(static_cast<i128>(a.num_) * b.num_, static_cast<i128>(a.den_) * b.den_);
}
Rational operator/(const Rational& a, const Rational& b) {
  if (b.num_ == 0) throw DomainError("division by zero");
  return make_rational(static_cast<i128>(a.num_) * b.den_, static_cast<i128>(a.den_) * b.num_);
}
int compare(const Rational& a, const Rational& b) {
  i128 l = static_cast<i128>(a.num_) * b.den_;
  i128 r = static_cast<i128>(b.num_) * a.den_;
  return l < r ? -1 : (l > r ? 1 : 0);
}

Rational Rational::pow(int e) const {
  if (e == 0) return Rational(1);
  if (e < 0) {
    if (num_ == 0) throw DomainError("division by zero");
    return Rational(1) / pow(-e);
  }
  Rational r(1), b = *this;
  while (e > 0) {
    if (e & 1) r = r * b;
    e >>= 1;
    if (e) b = b * b;
  }
  return r;
}

// ---------------------------------------------------------------- nodes

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

Expr make_node(ExprNode n) {
  std::size_t h = static_cast<std::size_t>(n.kind) * 1315423911u;
  switch (n.kind) {
    case ExprKind::Const:
      h = mix(h, std::hash<std::int64_t>{}(n.value.num()));
      h = mix(h, std::hash<std::int64_t>{}(n.value.den()));
      break;
    case ExprKind::Var:
      h = mix(h, std::hash<std::string>{}(n.name));
      break;
    case ExprKind::Pow:
      h = mix(h, static_cast<std::size_t>(n.exponent + 1000));
      break;
    case ExprKind::Func:
      h = mix(h, static_cast<std::size_t>(n.fn) + 77);
      break;
    default:
      break;
  }
  for (const auto& a : n.args) h = mix(h, a.hash());
  n.hash = h;
  return Expr(std::make_shared<const ExprNode>(std::move(n)));
}

Expr make_const(const Rational& r) {
  ExprNode n;
  n.kind = ExprKind::Const;
  n.value = r;
  return make_node(std::move(n));
}

const Expr& zero_expr() {
  static const Expr z = make_const(Rational(0));
  return z;
}

}  // namespace

Expr::Expr() : n_(zero_expr().n_) {}
Expr::Expr(std::int64_t v) : Expr(make_const(Rational(v))) {}
Expr::Expr(const Rational& r) : Expr(make_const(r)) {}

Expr Expr::var(const std::string& name) {
  if (name.empty()) throw ParseError("empty variable name");
  ExprNode n;
  n.kind = ExprKind::Var;
  n.name = name;
  return make_node(std::move(n));
}

Expr Expr::number(double v) {
  if (!std::isfinite(v)) throw DomainError("non-finite constant");
  if (v == std::floor(v) && std::fabs(v) < 9e18) return Expr(static_cast<std::int64_t>(v));
  int ex = 0;
  double m = std::frexp(v, &ex);  // v = m * 2^ex, 0.5 <= |m| < 1
  auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
  int shift = 53 - ex;
  while (shift > 0 && (mant % 2) == 0) {
    mant /= 2;
    --shift;
  }
  if (shift > 62) throw std::overflow_error("constant not representable as 64-bit rational");
  if (shift <= 0) return Expr(Rational(mant) * Rational(std::int64_t{1} << -shift));
  return Expr(Rational(mant, std::int64_t{1} << shift));
}

ExprKind Expr::kind() const { return n_->kind; }
const Rational& Expr::value() const { return n_->value; }
const std::string& Expr::name() const { return n_->name; }
const std::vector<Expr>& Expr::args() const { return n_->args; }
int Expr::exponent() const { return n_->exponent; }
Fn Expr::fn() const { return n_->fn; }
bool Expr::is_zero() const { return n_->kind == ExprKind::Const && n_->value.is_zero(); }
bool Expr::is_one() const { return n_->kind == ExprKind::Const && n_->value.is_one(); }
std::size_t Expr::hash() const { return n_->hash; }

int compare(const Expr& a, const Expr& b) {
  if (a.n_ == b.n_) return 0;
  if (a.kind() != b.kind()) return static_cast<int>(a.kind()) < static_cast<int>(b.kind()) ? -1 : 1;
  switch (a.kind()) {
    case ExprKind::Const:
      return compare(a.value(), b.value());
    case ExprKind::Var:
      return a.name() < b.name() ? -1 : (a.name() > b.name() ? 1 : 0);
    case ExprKind::Pow: {
      int c = compare(a.args()[0], b.args()[0]);
      if (c != 0) return c;
      return a.exponent() < b.exponent() ? -1 : (a.exponent() > b.exponent() ? 1 : 0);
    }
    case ExprKind::Func:
      if (a.fn() != b.fn()) return static_cast<int>(a.fn()) < static_cast<int>(b.fn()) ? -1 : 1;
      return compare(a.args()[0], b.args()[0]);
    default: {
      const auto& x = a.args();
      const auto& y = b.args();
      std::size_t m = std::min(x.size(), y.size());
      for (std::size_t i = 0; i < m; ++i) {
        int c = compare(x[i], y[i]);
        if (c != 0) return c;
      }
      return x.size() < y.size() ? -1 : (x.size() > y.size() ? 1 : 0);
    }
  }
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.n_ == b.n_) return true;
  if (a.hash() != b.hash()) return false;
  return compare(a, b) == 0;
}
bool operator<(const Expr& a, const Expr& b) { return compare(a, b) < 0; }

// ---------------------------------------------------------------- construction

namespace {

struct ExprLess {
  bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};

Expr raw(ExprKind k, std::vector<Expr> args) {
  ExprNode n;
  n.kind = k;
  n.args = std::move(args);
  return make_node(std::move(n));
}

Expr raw_pow(const Expr& b, int e) {
  if (e == 1) return b;
  ExprNode n;
  n.kind = ExprKind::Pow;
  n.args = {b};
  n.exponent = e;
  return make_node(std::move(n));
}

Expr raw_func(Fn f, const Expr& a) {
  ExprNode n;
  n.kind = ExprKind::Func;
  n.fn = f;
  n.args = {a};
  return make_node(std::move(n));
}

// Split a term into numeric coefficient and remaining monomial (nullopt-free: Expr(1) for none).
std::pair<Rational, Expr> split_coeff(const Expr& t) {
  if (t.kind() == ExprKind::Const) return {t.value(), Expr(1)};
  if (t.kind() == ExprKind::Mul && t.args()[0].kind() == ExprKind::Const) {
    const auto& a = t.args();
    if (a.size() == 2) return {a[0].value(), a[1]};
    return {a[0].value(), raw(ExprKind::Mul, std::vector<Expr>(a.begin() + 1, a.end()))};
  }
  return {Rational(1), t};
}

Expr scale_term(const Rational& c, const Expr& rest) {
  if (c.is_zero()) return Expr();
  if (rest.is_one()) return Expr(c);
  if (c.is_one()) return rest;
  std::vector<Expr> f{Expr(c)};
  if (rest.kind() == ExprKind::Mul) {
    f.insert(f.end(), rest.args().begin(), rest.args().end());
  } else {
    f.push_back(rest);
  }
  return raw(ExprKind::Mul, std::move(f));
}

bool negative_leading(const Expr& e) {
  if (e.kind() == ExprKind::Const) return compare(e.value(), Rational(0)) < 0;
  if (e.kind() == ExprKind::Mul && e.args()[0].kind() == ExprKind::Const)
    return compare(e.args()[0].value(), Rational(0)) < 0;
  return false;
}

}  // namespace

Expr sum(const std::vector<Expr>& terms) {
  std::vector<Expr> flat;
  flat.reserve(terms.size());
  for (const auto& t : terms) {
    if (t.kind() == ExprKind::Add) {
      flat.insert(flat.end(), t.args().begin(), t.args().end());
    } else if (!t.is_zero()) {
      flat.push_back(t);
    }
  }
  if (flat.empty()) return Expr();
  if (flat.size() == 1) return flat[0];
  Rational constant(0);
  std::map<Expr, Rational, ExprLess> groups;
  for (const auto& t : flat) {
    auto [c, rest] = split_coeff(t);
    if (rest.is_one()) {
      constant = constant + c;
      continue;
    }
    auto it = groups.find(rest);
    if (it == groups.end()) {
      groups.emplace(rest, c);
    } else {
      it->second = it->second + c;
    }
  }
  std::vector<Expr> out;
  if (!constant.is_zero()) out.push_back(Expr(constant));
  for (const auto& [rest, c] : groups) {
    if (!c.is_zero()) out.push_back(scale_term(c, rest));
  }
  if (out.empty()) return Expr();
  if (out.size() == 1) return out[0];
  return raw(ExprKind::Add, std::move(out));
}

Expr product(const std::vector<Expr>& factors) {
  Rational coeff(1);
  std::map<Expr, int, ExprLess> groups;
  std::function<void(const Expr&)> absorb = [&](const Expr& f) {
    switch (f.kind()) {
      case ExprKind::Const:
        coeff = coeff * f.value();
        return;
      case ExprKind::Mul:
        for (const auto& g : f.args()) absorb(g);
        return;
      case ExprKind::Pow:
        groups[f.args()[0]] += f.exponent();
        return;
      default:
        groups[f] += 1;
    }
  };
  for (const auto& f : factors) {
    absorb(f);
    if (coeff.is_zero()) return Expr();
  }
  std::vector<Expr> out;
  for (const auto& [b, e] : groups) {
    if (e == 0) continue;
    Expr p = pow(b, e);
    if (p.kind() == ExprKind::Const) {
      coeff = coeff * p.value();
    } else if (p.kind() == ExprKind::Mul) {
      // pow may have produced a coefficient (e.g. (2x)^2 already distributed)
      for (const auto& g : p.args()) {
        if (g.kind() == ExprKind::Const) {
          coeff = coeff * g.value();
        } else {
          out.push_back(g);
        }
      }
    } else {
      out.push_back(p);
    }
  }
  if (coeff.is_zero()) return Expr();
  std::sort(out.begin(), out.end(), ExprLess{});
  if (out.empty()) return Expr(coeff);
  if (out.size() == 1 && coeff.is_one()) return out[0];
  if (!coeff.is_one()) out.insert(out.begin(), Expr(coeff));
  return raw(ExprKind::Mul, std::move(out));
}

Expr pow(const Expr& base, int e) {
  if (e == 0) return Expr(1);
  if (e == 1) return base;
  switch (base.kind()) {
    case ExprKind::Const:
      return Expr(base.value().pow(e));
    case ExprKind::Pow:
      return pow(base.args()[0], base.exponent() * e);
    case ExprKind::Mul: {
      std::vector<Expr> f;
      for (const auto& g : base.args()) f.push_back(pow(g, e));
      return product(f);
    }
    default:
      return raw_pow(base, e);
  }
}

Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}); }
Expr operator-(const Expr& a) { return product({Expr(-1), a}); }
Expr operator-(const Expr& a, const Expr& b) { return sum({a, -b}); }
Expr operator*(const Expr& a, const Expr& b) { return product({a, b}); }
Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_zero()) throw DomainError("division by zero");
  return product({a, pow(b, -1)});
}
Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }

Expr sin(const Expr& a) {
  if (a.is_zero()) return Expr();
  if (negative_leading(a)) return -sin(-a);
  return raw_func(Fn::Sin, a);
}
Expr cos(const Expr& a) {
  if (a.is_zero()) return Expr(1);
  if (negative_leading(a)) return cos(-a);
  return raw_func(Fn::Cos, a);
}
Expr exp(const Expr& a) {
  if (a.is_zero()) return Expr(1);
  return raw_func(Fn::Exp, a);
}
Expr log(const Expr& a) {
  if (a.is_one()) return Expr();
  if (a.is_const() && compare(a.value(), Rational(0)) <= 0) throw DomainError("log of non-positive constant");
  if (a.kind() == ExprKind::Func && a.fn() == Fn::Exp) return a.args()[0];
  return raw_func(Fn::Log, a);
}
Expr sqrt(const Expr& a) {
  if (a.is_const()) {
    const Rational& r = a.value();
    if (compare(r, Rational(0)) < 0) throw DomainError("sqrt of negative constant");
    auto isq = [](std::int64_t v, std::int64_t& out) {
      auto s = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(v))));
      for (std::int64_t c = std::max<std::int64_t>(0, s - 2); c <= s + 2; ++c) {
        if (c * c == v) {
          out = c;
          return true;
        }
      }
      return false;
    };
    std::int64_t n = 0, d = 0;
    if (isq(r.num(), n) && isq(r.den(), d)) return Expr(Rational(n, d));
  }
  return raw_func(Fn::Sqrt, a);
}

// ---------------------------------------------------------------- calculus

Expr differentiate(const Expr& e, const std::string& v) {
  switch (e.kind()) {
    case ExprKind::Const:
      return Expr();
    case ExprKind::Var:
      return e.name() == v ? Expr(1) : Expr();
    case ExprKind::Add: {
      std::vector<Expr> t;
      for (const auto& a : e.args()) t.push_back(differentiate(a, v));
      return sum(t);
    }
    case ExprKind::Mul: {
      const auto& f = e.args();
      std::vector<Expr> t;
      for (std::size_t i = 0; i < f.size(); ++i) {
        Expr d = differentiate(f[i], v);
        if (d.is_zero()) continue;
        std::vector<Expr> p{d};
        for (std::size_t j = 0; j < f.size(); ++j)
          if (j != i) p.push_back(f[j]);
        t.push_back(product(p));
      }
      return sum(t);
    }
    case ExprKind::Pow: {
      const Expr& b = e.args()[0];
      Expr d = differentiate(b, v);
      if (d.is_zero()) return Expr();
      return product({Expr(e.exponent()), pow(b, e.exponent() - 1), d});
    }
    case ExprKind::Func: {
      const Expr& u = e.args()[0];
      Expr d = differentiate(u, v);
      if (d.is_zero()) return Expr();
      switch (e.fn()) {
        case Fn::Sin:
          return cos(u) * d;
        case Fn::Cos:
          return -(sin(u) * d);
        case Fn::Exp:
          return e * d;
        case Fn::Log:
          return d * pow(u, -1);
        case Fn::Sqrt:
          return product({Expr(Rational(1, 2)), d, pow(e, -1)});
      }
    }
  }
  return Expr();
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& repl) {
  switch (e.kind()) {
    case ExprKind::Const:
      return e;
    case ExprKind::Var: {
      auto it = repl.find(e.name());
      return it == repl.end() ? e : it->second;
    }
    case ExprKind::Add: {
      std::vector<Expr> t;
      for (const auto& a : e.args()) t.push_back(substitute(a, repl));
      return sum(t);
    }
    case ExprKind::Mul: {
      std::vector<Expr> t;
      for (const auto& a : e.args()) t.push_back(substitute(a, repl));
      return product(t);
    }
    case ExprKind::Pow:
      return pow(substitute(e.args()[0], repl), e.exponent());
    case ExprKind::Func: {
      Expr a = substitute(e.args()[0], repl);
      switch (e.fn()) {
        case Fn::Sin:
          return sin(a);
        case Fn::Cos:
          return cos(a);
        case Fn::Exp:
          return exp(a);
        case Fn::Log:
          return log(a);
        case Fn::Sqrt:
          return sqrt(a);
      }
    }
  }
  return e;
}

Expr substitute(const Expr& e, const std::string& var, const Expr& value) {
  return substitute(e, std::map<std::string, Expr>{{var, value}});
}

namespace {

std::vector<Expr> terms_of(const Expr& e) {
  if (e.kind() == ExprKind::Add) return e.args();
  return {e};
}

Expr distribute(const std::vector<Expr>& factors) {
  std::vector<Expr> acc{Expr(1)};
  for (const auto& f : factors) {
    auto ft = terms_of(f);
    if (ft.size() == 1) {
      for (auto& a : acc) a = a * ft[0];
      continue;
    }
    std::vector<Expr> next;
    next.reserve(acc.size() * ft.size());
    for (const auto& a : acc)
      for (const auto& t : ft) next.push_back(a * t);
    acc = std::move(next);
  }
  return sum(acc);
}

}  // namespace

Expr expand(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::Const:
    case ExprKind::Var:
      return e;
    case ExprKind::Add: {
      std::vector<Expr> t;
      for (const auto& a : e.args()) t.push_back(expand(a));
      return sum(t);
    }
    case ExprKind::Mul: {
      std::vector<Expr> f;
      for (const auto& a : e.args()) f.push_back(expand(a));
      return distribute(f);
    }
    case ExprKind::Pow: {
      Expr b = expand(e.args()[0]);
      int n = e.exponent();
      if (n > 0 && b.kind() == ExprKind::Add) return distribute(std::vector<Expr>(n, b));
      return pow(b, n);
    }
    case ExprKind::Func: {
      Expr a = expand(e.args()[0]);
      switch (e.fn()) {
        case Fn::Sin:
          return sin(a);
        case Fn::Cos:
          return cos(a);
        case Fn::Exp:
          return exp(a);
        case Fn::Log:
          return log(a);
        case Fn::Sqrt:
          return sqrt(a);
      }
    }
  }
  return e;
}

bool structurally_zero(const Expr& e) { return e.is_zero() || expand(e).is_zero(); }

namespace {
void collect_vars(const Expr& e, std::set<std::string>& out) {
  if (e.kind() == ExprKind::Var) {
    out.insert(e.name());
    return;
  }
  for (const auto& a : e.args()) collect_vars(a, out);
}
}  // namespace

std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> s;
  collect_vars(e, s);
  return s;
}

bool depends_on(const Expr& e, const std::string& var) {
  if (e.kind() == ExprKind::Var) return e.name() == var;
  for (const auto& a : e.args())
    if (depends_on(a, var)) return true;
  return false;
}

// ---------------------------------------------------------------- printing

namespace {

void print(const Expr& e, std::ostringstream& os, int prec);

void print_factor(const Expr& f, std::ostringstream& os) {
  if (f.kind() == ExprKind::Pow) {
    print(f.args()[0], os, 3);
    os << '^';
    if (f.exponent() < 0) {
      os << '(' << f.exponent() << ')';
    } else {
      os << f.exponent();
    }
    return;
  }
  print(f, os, 2);
}

// prec: 0 top/sum, 1 sum term, 2 product factor, 3 power base
void print(const Expr& e, std::ostringstream& os, int prec) {
  switch (e.kind()) {
    case ExprKind::Const: {
      bool neg = compare(e.value(), Rational(0)) < 0;
      bool frac = !e.value().is_integer();
      bool wrap = (neg && prec >= 1) || (frac && prec >= 2);
      if (wrap) os << '(';
      os << e.value().str();
      if (wrap) os << ')';
      return;
    }
    case ExprKind::Var:
      os << e.name();
      return;
    case ExprKind::Add: {
      bool wrap = prec >= 2;
      if (wrap) os << '(';
      bool first = true;
      for (const auto& t : e.args()) {
        if (!first) {
          if (negative_leading(t)) {
            os << " - ";
            print(-t, os, 1);
          } else {
            os << " + ";
            print(t, os, 1);
          }
        } else {
          print(t, os, 1);
        }
        first = false;
      }
      if (wrap) os << ')';
      return;
    }
    case ExprKind::Mul: {
      const auto& f = e.args();
      std::size_t start = 0;
      bool neg = false;
      bool wrap = prec >= 3;
      if (wrap) os << '(';
      if (f[0].kind() == ExprKind::Const) {
        start = 1;
        Rational c = f[0].value();
        if (compare(c, Rational(0)) < 0) {
          neg = true;
          c = -c;
        }
        if (neg) {
          if (prec >= 1 && !wrap) {
            os << '(';
            wrap = true;
          }
          os << '-';
        }
        if (!c.is_one()) {
          if (c.is_integer()) {
            os << c.str();
          } else {
            os << '(' << c.str() << ')';
          }
          os << '*';
        }
      }
      for (std::size_t i = start; i < f.size(); ++i) {
        if (i > start) os << '*';
        print_factor(f[i], os);
      }
      if (wrap) os << ')';
      return;
    }
    case ExprKind::Pow: {
      bool wrap = prec >= 3;
      if (wrap) os << '(';
      print_factor(e, os);
      if (wrap) os << ')';
      return;
    }
    case ExprKind::Func: {
      static const char* names[] = {"sin", "cos", "exp", "log", "sqrt"};
      os << names[static_cast<int>(e.fn())] << '(';
      print(e.args()[0], os, 0);
      os << ')';
      return;
    }
  }
}

}  // namespace

std::string Expr::str() const {
  std::ostringstream os;
  print(*this, os, 0);
  return os.str();
}

// ---------------------------------------------------------------- evaluation

double Point::at(const std::string& n) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == n) return values[i];
  throw DomainError("unassigned variable '" + n + "'");
}

void Point::set(const std::string& n, double v) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == n) {
      values[i] = v;
      return;
    }
  }
  names.push_back(n);
  values.push_back(v);
}

namespace {

double apply_fn(Fn f, double a) {
  switch (f) {
    case Fn::Sin:
      return std::sin(a);
    case Fn::Cos:
      return std::cos(a);
    case Fn::Exp:
      return std::exp(a);
    case Fn::Log:
      if (!(a > 0)) throw DomainError("log of non-positive value");
      return std::log(a);
    case Fn::Sqrt:
      if (a < 0) throw DomainError("sqrt of negative value");
      return std::sqrt(a);
  }
  return 0;
}

double ipow(double b, int e) {
  if (e < 0) {
    if (b == 0) throw DomainError("division by zero");
    return 1.0 / ipow(b, -e);
  }
  double r = 1;
  while (e > 0) {
    if (e & 1) r *= b;
    e >>= 1;
    if (e) b *= b;
  }
  return r;
}

double eval_rec(const Expr& e, const Point& p) {
  switch (e.kind()) {
    case ExprKind::Const:
      return e.value().to_double();
    case ExprKind::Var:
      return p.at(e.name());
    case ExprKind::Add: {
      double s = 0;
      for (const auto& a : e.args()) s += eval_rec(a, p);
      return s;
    }
    case ExprKind::Mul: {
      double s = 1;
      for (const auto& a : e.args()) s *= eval_rec(a, p);
      return s;
    }
    case ExprKind::Pow:
      return ipow(eval_rec(e.args()[0], p), e.exponent());
    case ExprKind::Func:
      return apply_fn(e.fn(), eval_rec(e.args()[0], p));
  }
  return 0;
}

}  // namespace

double evaluate(const Expr& e, const Point& p) {
  double v = eval_rec(e, p);
  if (!std::isfinite(v)) throw DomainError("non-finite value of " + e.str());
  return v;
}

enum : std::uint8_t { OpConst, OpVar, OpAdd, OpMul, OpPow, OpFn };

CompiledExpr::CompiledExpr(const Expr& e, const std::vector<std::string>& coords) {
  int d = 0;
  emit(e, coords, d);
}

void CompiledExpr::emit(const Expr& e, const std::vector<std::string>& coords, int& d) {
  switch (e.kind()) {
    case ExprKind::Const:
      prog_.push_back({OpConst, 0, e.value().to_double()});
      depth_ = std::max(depth_, ++d);
      return;
    case ExprKind::Var: {
      auto it = std::find(coords.begin(), coords.end(), e.name());
      if (it == coords.end()) throw UnknownCoordinate("variable '" + e.name() + "' is not a chart coordinate");
      prog_.push_back({OpVar, static_cast<int>(it - coords.begin()), 0});
      depth_ = std::max(depth_, ++d);
      return;
    }
    case ExprKind::Add:
    case ExprKind::Mul: {
      for (const auto& a : e.args()) emit(a, coords, d);
      auto n = static_cast<int>(e.args().size());
      prog_.push_back({e.kind() == ExprKind::Add ? OpAdd : OpMul, n, 0});
      d -= n - 1;
      return;
    }
    case ExprKind::Pow:
      emit(e.args()[0], coords, d);
      prog_.push_back({OpPow, e.exponent(), 0});
      return;
    case ExprKind::Func:
      emit(e.args()[0], coords, d);
      prog_.push_back({OpFn, static_cast<int>(e.fn()), 0});
      return;
  }
}

double CompiledExpr::operator()(const double* x) const {
  std::array<double, 128> small{};
  std::vector<double> big;
  double* st = small.data();
  if (depth_ > static_cast<int>(small.size())) {
    big.resize(depth_);
    st = big.data();
  }
  int sp = 0;
  for (const auto& op : prog_) {
    switch (op.code) {
      case OpConst:
        st[sp++] = op.c;
        break;
      case OpVar:
        st[sp++] = x[op.arg];
        break;
      case OpAdd: {
        double s = 0;
        for (int i = 0; i < op.arg; ++i) s += st[sp - op.arg + i];
        sp -= op.arg;
        st[sp++] = s;
        break;
      }
      case OpMul: {
        double s = 1;
        for (int i = 0; i < op.arg; ++i) s *= st[sp - op.arg + i];
        sp -= op.arg;
        st[sp++] = s;
        break;
      }
      case OpPow:
        st[sp - 1] = ipow(st[sp - 1], op.arg);
        break;
      case OpFn:
        st[sp - 1] = apply_fn(static_cast<Fn>(op.arg), st[sp - 1]);
        break;
    }
  }
  double v = sp ? st[0] : 0.0;
  if (!std::isfinite(v)) throw DomainError("non-finite value");
  return v;
}

// ---------------------------------------------------------------- parser

namespace {

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  Expr run() {
    skip();
    if (pos_ >= s_.size()) fail("empty expression");
    Expr e = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
    return e;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg + " at column " + std::to_string(pos_ + 1) + " in \"" + std::string(s_) + "\"");
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expr() {
    Expr e = term();
    for (;;) {
      if (accept('+')) {
        e = e + term();
      } else if (accept('-')) {
        e = e - term();
      } else {
        return e;
      }
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      skip();
      if (pos_ + 1 < s_.size() && s_[pos_] == '*' && s_[pos_ + 1] == '*') return e;
      if (accept('*')) {
        e = e * unary();
      } else if (accept('/')) {
        Expr d = unary();
        if (d.is_zero()) fail("division by zero");
        e = e / d;
      } else {
        return e;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr b = atom();
    skip();
    bool caret = accept('^');
    if (!caret && pos_ + 1 < s_.size() && s_[pos_] == '*' && s_[pos_ + 1] == '*') {
      pos_ += 2;
      caret = true;
    }
    if (!caret) return b;
    Expr ex = unary();
    if (!ex.is_const() || !ex.value().is_integer()) fail("exponent must be an integer constant");
    std::int64_t n = ex.value().num();
    if (n > 1000 || n < -1000) fail("exponent out of range");
    return pow(b, static_cast<int>(n));
  }

  Expr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expr();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t st = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      std::string id(s_.substr(st, pos_ - st));
      static const std::map<std::string, Fn> fns = {
          {"sin", Fn::Sin}, {"cos", Fn::Cos}, {"exp", Fn::Exp}, {"log", Fn::Log}, {"sqrt", Fn::Sqrt}};
      auto it = fns.find(id);
      if (it != fns.end()) {
        if (!accept('(')) fail("function '" + id + "' requires an argument list");
        Expr a = expr();
        if (!accept(')')) fail("expected ')'");
        switch (it->second) {
          case Fn::Sin:
            return sin(a);
          case Fn::Cos:
            return cos(a);
          case Fn::Exp:
            return exp(a);
          case Fn::Log:
            return log(a);
          case Fn::Sqrt:
            return sqrt(a);
        }
      }
      return Expr::var(id);
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  Expr number() {
    std::int64_t mant = 0;
    int scale = 0;
    bool digits = false;
    auto push = [&](char d) {
      if (mant > (INT64_MAX - 9) / 10) fail("numeric literal too long");
      mant = mant * 10 + (d - '0');
      digits = true;
    };
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) push(s_[pos_++]);
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        push(s_[pos_++]);
        --scale;
      }
    }
    if (!digits) fail("malformed number");
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      int sign = 1;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) {
        if (s_[pos_] == '-') sign = -1;
        ++pos_;
      }
      if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        pos_ = save;
      } else {
        int ex = 0;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
          ex = ex * 10 + (s_[pos_++] - '0');
          if (ex > 40) fail("exponent too large");
        }
        scale += sign * ex;
      }
    }
    try {
      Rational r(mant);
      Rational ten(10);
      r = scale >= 0 ? r * ten.pow(scale) : r / ten.pow(-scale);
      return Expr(r);
    } catch (const std::overflow_error&) {
      fail("numeric literal not representable");
    }
  }
};

}  // namespace

Expr parse(std::string_view text) { return Parser(text).run(); }

}  // namespace balg
