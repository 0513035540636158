#include "balg/algebroid.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace balg {

Chart::Chart(std::vector<std::string> c, std::vector<double> per) : coords(std::move(c)), period(std::move(per)) {
  if (period.empty()) period.assign(coords.size(), 0.0);
  if (period.size() != coords.size()) throw InvalidSpec("periodic flags do not match coordinate count");
  for (std::size_t i = 0; i < coords.size(); ++i) {
    for (std::size_t j = i + 1; j < coords.size(); ++j) {
      if (coords[i] == coords[j]) throw DuplicateCoordinate(coords[i]);
    }
  }
}

int Chart::index(const std::string& name) const {
  for (int i = 0; i < dim(); ++i) {
    if (coords[i] == name) return i;
  }
  throw UnknownCoordinate(name);
}

bool Chart::has(const std::string& name) const {
  return std::find(coords.begin(), coords.end(), name) != coords.end();
}

Chart Chart::without(const std::string& name) const {
  int k = index(name);
  Chart c = *this;
  c.coords.erase(c.coords.begin() + k);
  c.period.erase(c.period.begin() + k);
  return c;
}

Chart Chart::with(const std::string& name, double per) const {
  if (has(name)) throw DuplicateCoordinate(name);
  Chart c = *this;
  c.coords.push_back(name);
  c.period.push_back(per);
  return c;
}

SampleDomain Chart::domain(double lim) const {
  SampleDomain d;
  for (int i = 0; i < dim(); ++i) {
    d.add(coords[i], periodic(i) ? Range::circle(period[i]) : Range::interval(-lim, lim));
  }
  return d;
}

std::string to_string(AlgebroidKind k) {
  switch (k) {
    case AlgebroidKind::Tangent: return "tangent";
    case AlgebroidKind::BK: return "bk";
    case AlgebroidKind::Elliptic: return "elliptic";
    case AlgebroidKind::SelfCrossing: return "selfcrossing";
    case AlgebroidKind::LieAlgebra: return "lie_algebra";
    case AlgebroidKind::Product: return "product";
    case AlgebroidKind::Pullback: return "pullback";
    case AlgebroidKind::Foliation: return "foliation";
    case AlgebroidKind::Jet: return "jet";
    case AlgebroidKind::Locus: return "locus";
  }
  return "unknown";
}

Expr DivisorData::defining() const {
  switch (type) {
    case Type::None: return Expr(1);
    case Type::Elliptic: {
      Expr x = Expr::var(this->x), y = Expr::var(this->y);
      return x * x + y * y;
    }
    case Type::BK:
    case Type::SelfCrossing: {
      std::vector<Expr> fs;
      for (const auto& c : components) fs.push_back(pow(c.f, c.k));
      return product(fs);
    }
  }
  return Expr(1);
}

int AlgebroidChart::label_index(const std::string& label) const {
  for (int a = 0; a < rank(); ++a) {
    if (labels[a] == label) return a;
  }
  throw UnknownCoordinate("no frame element '" + label + "'");
}

Expr AlgebroidChart::rho(int a, const Expr& g) const {
  std::vector<Expr> t;
  for (int i = 0; i < dim(); ++i) {
    if (anchor[a][i].is_zero()) continue;
    Expr dg = differentiate(g, chart.coords[i]);
    if (!dg.is_zero()) t.push_back(anchor[a][i] * dg);
  }
  return sum(t);
}

namespace {

Expr det_rec(const std::vector<std::vector<Expr>>& m, std::vector<int>& cols, int row) {
  int n = static_cast<int>(m.size());
  if (row == n) return Expr(1);
  std::vector<Expr> terms;
  int sign = 1;
  for (std::size_t ci = 0; ci < cols.size(); ++ci) {
    int c = cols[ci];
    if (!m[row][c].is_zero()) {
      std::vector<int> rest = cols;
      rest.erase(rest.begin() + static_cast<long>(ci));
      Expr minor = det_rec(m, rest, row + 1);
      if (!minor.is_zero()) terms.push_back(Expr(sign) * m[row][c] * minor);
    }
    sign = -sign;
  }
  return sum(terms);
}

}  // namespace

Expr symbolic_det(const std::vector<std::vector<Expr>>& m) {
  std::vector<int> cols(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) cols[i] = static_cast<int>(i);
  return det_rec(m, cols, 0);
}

Expr AlgebroidChart::anchor_det() const {
  if (rank() != dim()) throw RankMismatch("anchor determinant needs rank == dim");
  return symbolic_det(anchor);
}

namespace {

std::shared_ptr<AlgebroidChart> blank(AlgebroidKind kind, const Chart& chart, std::vector<std::string> labels) {
  auto a = std::make_shared<AlgebroidChart>();
  a->kind = kind;
  a->chart = chart;
  a->labels = std::move(labels);
  int r = a->rank();
  a->anchor.assign(r, std::vector<Expr>(chart.dim()));
  a->structure.assign(static_cast<std::size_t>(r) * r * r, Expr());
  return a;
}

void set_c(AlgebroidChart& A, int a, int b, int c, const Expr& v) {
  int r = A.rank();
  A.structure[(a * r + b) * r + c] = v;
  A.structure[(b * r + a) * r + c] = -v;
}

}  // namespace

AlgebroidPtr make_tangent(const Chart& chart) {
  if (chart.dim() < 1) throw InvalidSpec("chart must have at least one coordinate");
  auto a = blank(AlgebroidKind::Tangent, chart, chart.coords);
  for (int i = 0; i < chart.dim(); ++i) a->anchor[i][i] = Expr(1);
  return a;
}

AlgebroidPtr make_bk(const Chart& chart, const std::string& z, int k, const Expr& f_in, bool adapted) {
  if (k < 1) throw InvalidSpec("order k must be >= 1");
  if (!chart.has(z)) throw InvalidSpec("divisor coordinate '" + z + "' not in chart");
  int zi = chart.index(z);
  Expr f = f_in.is_zero() ? Expr::var(z) : f_in;
  for (const auto& v : free_variables(f)) {
    if (!chart.has(v)) throw UnknownCoordinate(v);
  }
  Expr fz = differentiate(f, z);
  if (adapted) {
    auto fv = free_variables(f);
    if (fv.size() != 1 || !fv.count(z)) throw InvalidSpec("adapted jet must depend on '" + z + "' only");
    Point p{{z}, {0.0}};
    if (std::fabs(evaluate(f, p)) > 1e-14) throw InvalidSpec("jet must vanish at " + z + " = 0");
    if (std::fabs(evaluate(fz, p)) < 1e-12) throw InvalidSpec("jet must vanish transversely at " + z + " = 0");
  }
  std::vector<std::string> labels;
  labels.push_back("b" + z);
  for (int i = 0; i < chart.dim(); ++i) {
    if (i != zi) labels.push_back(chart.coords[i]);
  }
  auto a = blank(AlgebroidKind::BK, chart, labels);
  a->anchor[0][zi] = pow(f, k);
  int row = 1;
  for (int i = 0; i < chart.dim(); ++i) {
    if (i == zi) continue;
    a->anchor[row][i] = Expr(1);
    Expr fi = differentiate(f, chart.coords[i]);
    if (!fi.is_zero()) {
      Expr g = fi / fz;
      a->anchor[row][zi] = -g;
      set_c(*a, 0, row, 0, -differentiate(g, z));
    }
    ++row;
  }
  a->divisor.type = DivisorData::Type::BK;
  a->divisor.components.push_back({z, k, f});
  return a;
}

AlgebroidPtr make_bk(const Chart& chart, const std::string& z, int k) { return make_bk(chart, z, k, Expr(), true); }

AlgebroidPtr make_elliptic(const Chart& chart, const std::string& x, const std::string& y) {
  if (!chart.has(x) || !chart.has(y)) throw InvalidSpec("elliptic pair not in chart");
  if (x == y) throw DuplicateCoordinate(x);
  int xi = chart.index(x), yi = chart.index(y);
  std::vector<std::string> labels{"rad", "ang"};
  std::vector<int> rest;
  for (int i = 0; i < chart.dim(); ++i) {
    if (i != xi && i != yi) {
      labels.push_back(chart.coords[i]);
      rest.push_back(i);
    }
  }
  auto a = blank(AlgebroidKind::Elliptic, chart, labels);
  Expr X = Expr::var(x), Y = Expr::var(y);
  a->anchor[0][xi] = X;
  a->anchor[0][yi] = Y;
  a->anchor[1][xi] = -Y;
  a->anchor[1][yi] = X;
  for (std::size_t j = 0; j < rest.size(); ++j) a->anchor[2 + j][rest[j]] = Expr(1);
  a->divisor.type = DivisorData::Type::Elliptic;
  a->divisor.x = x;
  a->divisor.y = y;
  return a;
}

AlgebroidPtr make_selfcrossing(const Chart& chart, const std::vector<BKComponent>& comps) {
  if (comps.empty()) throw InvalidSpec("self-crossing divisor needs at least one component");
  std::vector<int> zs;
  for (const auto& c : comps) {
    if (!chart.has(c.z)) throw InvalidSpec("divisor coordinate '" + c.z + "' not in chart");
    if (c.k < 1) throw InvalidSpec("order k must be >= 1");
    int zi = chart.index(c.z);
    if (std::find(zs.begin(), zs.end(), zi) != zs.end()) throw DuplicateCoordinate(c.z);
    zs.push_back(zi);
  }
  std::vector<std::string> labels;
  for (const auto& c : comps) labels.push_back("b" + c.z);
  std::vector<int> rest;
  for (int i = 0; i < chart.dim(); ++i) {
    if (std::find(zs.begin(), zs.end(), i) == zs.end()) {
      labels.push_back(chart.coords[i]);
      rest.push_back(i);
    }
  }
  auto a = blank(AlgebroidKind::SelfCrossing, chart, labels);
  a->divisor.type = DivisorData::Type::SelfCrossing;
  for (std::size_t j = 0; j < comps.size(); ++j) {
    BKComponent c = comps[j];
    if (c.f.is_zero()) c.f = Expr::var(c.z);
    auto fv = free_variables(c.f);
    if (fv.size() != 1 || !fv.count(c.z)) throw InvalidSpec("adapted jet must depend on '" + c.z + "' only");
    a->anchor[j][zs[j]] = pow(c.f, c.k);
    a->divisor.components.push_back(c);
  }
  for (std::size_t j = 0; j < rest.size(); ++j) a->anchor[comps.size() + j][rest[j]] = Expr(1);
  return a;
}

AlgebroidPtr make_lie_algebra(const Chart& chart, const std::vector<std::string>& labels,
                              const std::vector<double>& c) {
  int r = static_cast<int>(labels.size());
  if (r < 1) throw InvalidSpec("Lie algebra needs at least one generator");
  if (static_cast<int>(c.size()) != r * r * r) throw InvalidSpec("structure constant table has wrong size");
  auto C = [&](int a, int b, int d) { return c[(a * r + b) * r + d]; };
  for (int a = 0; a < r; ++a) {
    for (int b = 0; b < r; ++b) {
      for (int d = 0; d < r; ++d) {
        if (std::fabs(C(a, b, d) + C(b, a, d)) > 1e-12) throw InvalidSpec("structure constants not antisymmetric");
      }
    }
  }
  for (int a = 0; a < r; ++a) {
    for (int b = 0; b < r; ++b) {
      for (int e = 0; e < r; ++e) {
        for (int m = 0; m < r; ++m) {
          double s = 0;
          for (int d = 0; d < r; ++d) {
            s += C(a, b, d) * C(d, e, m) + C(b, e, d) * C(d, a, m) + C(e, a, d) * C(d, b, m);
          }
          if (std::fabs(s) > 1e-10) throw InvalidSpec("structure constants violate the Jacobi identity");
        }
      }
    }
  }
  auto A = blank(AlgebroidKind::LieAlgebra, chart, labels);
  for (int i = 0; i < r * r * r; ++i) A->structure[i] = Expr::number(c[i]);
  return A;
}

AlgebroidPtr make_product(const AlgebroidPtr& a, const std::vector<std::string>& coords,
                          const std::vector<double>& periods, AlgebroidKind kind) {
  Chart ch = a->chart;
  for (std::size_t i = 0; i < coords.size(); ++i) ch = ch.with(coords[i], i < periods.size() ? periods[i] : 0.0);
  std::vector<std::string> labels = a->labels;
  for (const auto& c : coords) {
    if (std::find(labels.begin(), labels.end(), c) != labels.end()) throw DuplicateCoordinate(c);
    labels.push_back(c);
  }
  auto p = blank(kind, ch, labels);
  int r0 = a->rank(), n0 = a->dim();
  for (int x = 0; x < r0; ++x) {
    for (int i = 0; i < n0; ++i) p->anchor[x][i] = a->anchor[x][i];
  }
  for (std::size_t j = 0; j < coords.size(); ++j) p->anchor[r0 + j][n0 + j] = Expr(1);
  int r = p->rank();
  for (int x = 0; x < r0; ++x) {
    for (int y = 0; y < r0; ++y) {
      for (int z = 0; z < r0; ++z) p->structure[(x * r + y) * r + z] = a->c(x, y, z);
    }
  }
  p->divisor = a->divisor;
  return p;
}

AlgebroidPtr make_custom(AlgebroidKind kind, const Chart& chart, std::vector<std::string> labels,
                         std::vector<std::vector<Expr>> anchor, std::vector<Expr> structure) {
  auto a = std::make_shared<AlgebroidChart>();
  a->kind = kind;
  a->chart = chart;
  a->labels = std::move(labels);
  int r = a->rank();
  if (static_cast<int>(anchor.size()) != r) throw InvalidSpec("anchor rows do not match rank");
  for (const auto& row : anchor) {
    if (static_cast<int>(row.size()) != chart.dim()) throw InvalidSpec("anchor columns do not match dimension");
  }
  if (static_cast<int>(structure.size()) != r * r * r) throw InvalidSpec("structure table has wrong size");
  a->anchor = std::move(anchor);
  a->structure = std::move(structure);
  return a;
}

AlgebroidPtr locus_algebroid(const AlgebroidPtr& a) {
  if (a->divisor.type != DivisorData::Type::BK || a->divisor.components.size() != 1) {
    throw NotBK("locus restriction needs a single b^k divisor");
  }
  const std::string& z = a->divisor.components[0].z;
  int zi = a->chart.index(z);
  Chart zc = a->chart.without(z);
  int r = a->rank();
  std::vector<std::string> labels(a->labels.begin() + 1, a->labels.end());
  std::vector<std::vector<Expr>> anchor;
  for (int x = 1; x < r; ++x) {
    std::vector<Expr> row;
    for (int i = 0; i < a->dim(); ++i) {
      if (i != zi) row.push_back(substitute(a->anchor[x][i], z, Expr()));
    }
    anchor.push_back(row);
  }
  int rz = r - 1;
  std::vector<Expr> st(static_cast<std::size_t>(rz) * rz * rz);
  for (int x = 1; x < r; ++x) {
    for (int y = 1; y < r; ++y) {
      for (int w = 1; w < r; ++w) st[((x - 1) * rz + (y - 1)) * rz + (w - 1)] = substitute(a->c(x, y, w), z, Expr());
    }
  }
  return make_custom(AlgebroidKind::Locus, zc, labels, anchor, st);
}

AlgebroidPtr build_algebroid(const AlgebroidSpec& s) {
  if (s.chart.dim() < 1) throw InvalidSpec("chart must have at least one coordinate");
  if (s.kind == "tangent") return make_tangent(s.chart);
  if (s.kind == "bk") {
    if (s.z.empty()) throw InvalidSpec("bk algebroid needs a divisor coordinate z");
    return make_bk(s.chart, s.z, s.k, s.f, true);
  }
  if (s.kind == "elliptic") return make_elliptic(s.chart, s.x, s.y);
  if (s.kind == "selfcrossing") return make_selfcrossing(s.chart, s.components);
  if (s.kind == "lie_algebra") {
    int r = static_cast<int>(s.labels.size());
    std::vector<double> c(static_cast<std::size_t>(r) * r * r, 0.0);
    auto idx = [&](const std::string& l) {
      for (int i = 0; i < r; ++i) {
        if (s.labels[i] == l) return i;
      }
      throw InvalidSpec("unknown generator '" + l + "'");
    };
    for (const auto& [x, y, w, v] : s.brackets) {
      int a = idx(x), b = idx(y), d = idx(w);
      if (a == b) throw InvalidSpec("bracket of a generator with itself");
      c[(a * r + b) * r + d] += v.to_double();
      c[(b * r + a) * r + d] -= v.to_double();
    }
    return make_lie_algebra(s.chart, s.labels, c);
  }
  throw UnknownKind("algebroid kind '" + s.kind + "'");
}

Expr random_function(const Chart& chart, std::uint64_t& state, int degree) {
  std::mt19937_64 rng(state);
  auto pick = [&](int n) { return static_cast<int>(unit_interval(rng()) * n); };
  std::vector<Expr> terms;
  terms.push_back(Expr(Rational(pick(9) - 4, 2)));
  int nterms = 3 + pick(3);
  for (int t = 0; t < nterms; ++t) {
    int num = pick(8) - 4;
    if (num >= 0) ++num;
    std::vector<Expr> fs{Expr(Rational(num, 2))};
    int nf = 1 + pick(degree);
    for (int j = 0; j < nf; ++j) {
      int i = pick(chart.dim());
      Expr x = Expr::var(chart.coords[i]);
      if (chart.periodic(i)) {
        double per = chart.period[i];
        Expr arg = std::fabs(per - kTwoPi) < 1e-12 ? x : Expr::number(kTwoPi / per) * x;
        fs.push_back(pick(2) ? sin(arg) : cos(arg));
      } else {
        fs.push_back(x);
      }
    }
    terms.push_back(product(fs));
  }
  state = rng();
  return sum(terms);
}

}  // namespace balg
