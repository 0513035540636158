#include "balg/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace balg {

std::vector<Point> check_points(const AlgebroidPtr& A, int count, std::uint64_t seed, bool include_locus) {
  SampleDomain dom = A->domain(2.0).with_count(count).with_seed(seed);
  auto pts = dom.points();
  if (!include_locus) return pts;
  const auto& dv = A->divisor;
  SampleDomain on = dom.with_count(std::max(4, count / 5)).with_seed(seed + 1);
  if (dv.type == DivisorData::Type::Elliptic) {
    on.pin(dv.x, 0.0);
    on.pin(dv.y, 0.0);
  } else if (dv.type == DivisorData::Type::BK || dv.type == DivisorData::Type::SelfCrossing) {
    const auto& c = dv.components[0];
    if (free_variables(c.f).size() > 1) return pts;
    on.pin(c.z, 0.0);
  } else {
    return pts;
  }
  for (const auto& p : on.points()) pts.push_back(p);
  return pts;
}

namespace {

int max_rank(const std::vector<Section>& s, const std::vector<Point>& pts, int* min_rank = nullptr) {
  int mx = 0, mn = 1 << 30;
  for (const auto& p : pts) {
    int r = numerical_rank(eval_sections(s, p));
    mx = std::max(mx, r);
    mn = std::min(mn, r);
  }
  if (min_rank) *min_rank = pts.empty() ? 0 : mn;
  return mx;
}

bool all_zero(const Section& s) {
  return std::all_of(s.c.begin(), s.c.end(), [](const Expr& e) { return structurally_zero(e); });
}

}  // namespace

Distribution Distribution::spanned(const AlgebroidPtr& A, std::vector<Section> span, int rank) {
  for (const auto& s : span) check_same(A, s.A);
  if (rank > A->rank()) throw RankMismatch("distribution rank exceeds algebroid rank");
  return Distribution{A, std::move(span), rank};
}

Distribution Distribution::kernel(const AForm& alpha) {
  if (alpha.p != 1) throw DegreeOverflow("kernel needs a 1-form");
  const auto& A = alpha.A;
  int r = A->rank();
  std::vector<Section> span;
  int k = -1;
  for (int a = 0; a < r; ++a) {
    if (alpha.c[a].is_const() && !alpha.c[a].is_zero()) {
      k = a;
      break;
    }
  }
  bool zero = std::all_of(alpha.c.begin(), alpha.c.end(), [](const Expr& e) { return structurally_zero(e); });
  if (zero) {
    for (int a = 0; a < r; ++a) span.push_back(Section::basis(A, a));
  } else if (k >= 0) {
    for (int a = 0; a < r; ++a) {
      if (a == k) continue;
      Section s = Section::basis(A, a);
      s.c[k] = -(alpha.c[a] / alpha.c[k]);
      span.push_back(s);
    }
  } else {
    for (int i = 0; i < r; ++i) {
      for (int j = i + 1; j < r; ++j) {
        if (alpha.c[i].is_zero() && alpha.c[j].is_zero()) continue;
        Section s{A, std::vector<Expr>(r)};
        s.c[i] = alpha.c[j];
        s.c[j] = -alpha.c[i];
        span.push_back(s);
      }
    }
  }
  int rank = max_rank(span, check_points(A, 30, 42));
  return Distribution{A, span, rank};
}

FlagReport lie_flag(const Distribution& xi, int max_depth, int samples, std::uint64_t seed) {
  FlagReport fr;
  const int r = xi.A->rank();
  auto pts = check_points(xi.A, samples, seed);
  std::vector<Section> first, current;
  for (const auto& s : xi.span) {
    if (!all_zero(s)) first.push_back(s);
  }
  current = first;
  int mn = 0;
  int rk = max_rank(current, pts, &mn);
  if (mn != rk) fr.regular = false;
  fr.steps.push_back(current);
  fr.ranks.push_back(rk);
  std::vector<Section> fresh = first;
  for (int depth = 1; depth < max_depth && rk < r; ++depth) {
    std::vector<Section> added;
    for (const auto& v : first) {
      for (const auto& w : fresh) {
        Section b = bracket(v, w);
        if (all_zero(b)) continue;
        bool raises = false;
        for (const auto& p : pts) {
          std::vector<Section> trial = current;
          trial.insert(trial.end(), added.begin(), added.end());
          int before = numerical_rank(eval_sections(trial, p));
          trial.push_back(b);
          if (numerical_rank(eval_sections(trial, p)) > before) {
            raises = true;
            break;
          }
        }
        if (raises) added.push_back(b);
      }
    }
    if (added.empty()) {
      fr.steps.push_back(current);
      fr.ranks.push_back(rk);
      break;
    }
    current.insert(current.end(), added.begin(), added.end());
    rk = max_rank(current, pts, &mn);
    if (mn != rk) fr.regular = false;
    fr.steps.push_back(current);
    fr.ranks.push_back(rk);
    fresh = added;
  }
  fr.bracket_generating = fr.ranks.back() == r;
  fr.involutive = fr.ranks.front() == r || (fr.ranks.size() >= 2 && fr.ranks[1] == fr.ranks[0]);
  if (fr.bracket_generating) {
    fr.step = static_cast<int>(fr.ranks.size());
  } else {
    fr.step = static_cast<int>(fr.ranks.size()) - 1;
  }
  return fr;
}

namespace {

Vec modulo(const std::vector<Section>& span, const Vec& v, const Point& p) {
  if (span.empty()) return v;
  Mat c = complement_basis(eval_sections(span, p));
  return c * (c.transpose() * v);
}

void require_member(const std::vector<Section>& span, const Section& v, const Point& p, const char* what) {
  Vec x = eval_vector(v.c, p);
  double res = span_residual(eval_sections(span, p), x);
  if (res > 1e-6 * std::max(1.0, x.norm())) {
    throw NotInFlag(std::string(what) + " not in the requested flag stage (residual " + std::to_string(res) + ")");
  }
}

}  // namespace

CurvatureValue curvature_eval(const FlagReport& flag, int i, int j, const Section& v, const Section& w,
                              const Point& p) {
  auto stage = [&](int k) -> std::vector<Section> {
    if (k <= 0) return {};
    return flag.steps[std::min<int>(k, static_cast<int>(flag.steps.size())) - 1];
  };
  require_member(stage(i), v, p, "first argument");
  require_member(stage(j), w, p, "second argument");
  auto below = stage(i + j - 1);
  CurvatureValue out;
  out.value = modulo(below, eval_vector(bracket(v, w).c, p), p);
  out.shift_residual = 0;
  auto prev = stage(i - 1);
  if (!prev.empty()) {
    std::uint64_t st = 5;
    Expr f = random_function(v.A->chart, st, 2);
    Section shifted = v + f * prev.front();
    Vec again = modulo(below, eval_vector(bracket(shifted, w).c, p), p);
    out.shift_residual = (again - out.value).norm();
  }
  return out;
}

Predicate contact_volume_check(const AForm& alpha, int samples, std::uint64_t seed) {
  Predicate pr;
  Expr vol = contact_volume(alpha);
  double mn = INFINITY;
  for (const auto& p : check_points(alpha.A, samples, seed)) {
    double v = std::fabs(evaluate(vol, p));
    if (v < mn) {
      mn = v;
      pr.witness = p;
    }
  }
  pr.margin = mn;
  pr.value = mn > 1e-10;
  return pr;
}

namespace {

struct CurvatureRanks {
  int min_rank = 0, max_rank = 0;
  double margin = INFINITY;
  Point witness;
};

CurvatureRanks curvature_ranks(const Distribution& xi, const std::vector<Point>& pts) {
  CurvatureRanks out;
  out.min_rank = 1 << 30;
  const auto& s = xi.span;
  int m = static_cast<int>(s.size());
  std::vector<std::vector<Section>> br(m, std::vector<Section>(m));
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) br[a][b] = bracket(s[a], s[b]);
  }
  for (const auto& p : pts) {
    Mat S = eval_sections(s, p);
    Mat N = complement_basis(S);
    Mat Q = Mat::Zero(m, m);
    for (int a = 0; a < m; ++a) {
      for (int b = a + 1; b < m; ++b) {
        Vec q = N.transpose() * eval_vector(br[a][b].c, p);
        Q(a, b) = q.size() ? q(0) : 0.0;
        Q(b, a) = -Q(a, b);
      }
    }
    int rk = numerical_rank(Q);
    out.min_rank = std::min(out.min_rank, rk);
    out.max_rank = std::max(out.max_rank, rk);
    Eigen::JacobiSVD<Mat> svd(Q);
    int k = xi.rank;
    double sk = k > 0 && k <= svd.singularValues().size() ? svd.singularValues()(k - 1) : 0.0;
    if (sk < out.margin) {
      out.margin = sk;
      out.witness = p;
    }
  }
  return out;
}

}  // namespace

Classification classify(const Distribution& xi, const std::optional<AForm>& alpha, int samples, std::uint64_t seed) {
  Classification c;
  const int r = xi.A->rank();
  FlagReport fl = lie_flag(xi, 6, samples, seed);
  c.flag_ranks = fl.ranks;
  c.involutive.value = fl.involutive;
  c.bracket_generating.value = fl.bracket_generating;
  c.bracket_generating.margin = fl.ranks.back();
  auto pts = check_points(xi.A, samples, seed);
  if (r - xi.rank == 1 && xi.rank > 0) {
    auto cr = curvature_ranks(xi, pts);
    c.contact.margin = cr.margin;
    c.contact.witness = cr.witness;
    if (xi.rank % 2 == 0) {
      c.contact.value = cr.min_rank == xi.rank;
    } else {
      c.even_contact.value = cr.min_rank == xi.rank - 1 && cr.max_rank == xi.rank - 1;
      c.even_contact.margin = cr.margin;
    }
  }
  c.engel.value = r == 4 && xi.rank == 2 && fl.ranks == std::vector<int>{2, 3, 4};
  c.engel.margin = fl.ranks.back();
  if (alpha && r % 2 == 1) {
    Predicate vol = contact_volume_check(*alpha, samples, seed);
    c.volume_min = vol.margin;
    c.volume_agrees = vol.value == c.contact.value;
  }
  return c;
}

ReebSolve reeb_at(const AForm& alpha, const Point& p) {
  int r = alpha.A->rank();
  Vec a = eval_vector(alpha.c, p);
  Mat W = two_form_matrix(d(alpha), p);
  Mat M(r + 1, r);
  M.row(0) = a.transpose();
  M.bottomRows(r) = W.transpose();
  Vec rhs = Vec::Zero(r + 1);
  rhs(0) = 1.0;
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  ReebSolve out;
  out.min_singular = svd.singularValues()(r - 1);
  if (out.min_singular < 1e-9) throw Degenerate("Reeb system singular: form not contact at this point");
  out.R = svd.solve(rhs);
  out.residual = (M * out.R - rhs).norm();
  return out;
}

ReebCheck verify_reeb(const AForm& alpha, const Section& R, const SampleDomain& dom, double tol) {
  check_same(alpha.A, R.A);
  ReebCheck out;
  Expr norm = contract(alpha, {R}) - Expr(1);
  AForm k = interior(R, d(alpha));
  for (const auto& p : dom.points()) {
    out.normalisation = std::max(out.normalisation, std::fabs(evaluate(norm, p)));
    for (const auto& e : k.c) {
      if (!e.is_zero()) out.kernel = std::max(out.kernel, std::fabs(evaluate(e, p)));
    }
  }
  out.pass = out.normalisation < tol && out.kernel < tol;
  return out;
}

namespace {

std::vector<std::string> fibre_names(const Chart& ch, int k, std::vector<std::string> given) {
  if (!given.empty()) {
    if (static_cast<int>(given.size()) != k) throw InvalidSpec("fibre coordinate count mismatch");
    return given;
  }
  for (const char* pre : {"t", "p", "tau", "y"}) {
    std::vector<std::string> out;
    bool ok = true;
    for (int i = 1; i <= k; ++i) {
      std::string n = std::string(pre) + std::to_string(i);
      if (ch.has(n)) ok = false;
      out.push_back(n);
    }
    if (ok) return out;
  }
  throw InvalidSpec("cannot choose fibre coordinate names");
}

}  // namespace

Section lift_to_product(const Section& s, const AlgebroidPtr& P) {
  Section out{P, s.c};
  out.c.resize(P->rank());
  return out;
}

AForm lift_to_product(const AForm& w, const AlgebroidPtr& P) {
  AForm out = AForm::zero(P, w.p);
  const auto& sets = subsets(w.A->rank(), w.p);
  for (std::size_t i = 0; i < sets.size(); ++i) out.coef(sets[i]) = w.c[i];
  return out;
}

AForm pullback(const AForm& w, const AlgebroidPtr& C, const std::vector<std::vector<Expr>>& M,
               const std::map<std::string, Expr>& subst) {
  AForm ws = w;
  for (auto& e : ws.c) e = substitute(e, subst);
  AForm out = AForm::zero(C, w.p);
  if (w.p == 0) {
    out.c[0] = ws.c[0];
    return out;
  }
  const auto& sets = subsets(C->rank(), w.p);
  for (std::size_t J = 0; J < sets.size(); ++J) {
    std::vector<Section> xs;
    for (int b : sets[J]) xs.push_back(Section{w.A, M[b]});
    out.c[J] = contract(ws, xs);
  }
  return out;
}

LiouvilleData liouville(const AlgebroidPtr& A, std::vector<std::string> fibre) {
  std::vector<AForm> cof;
  for (int a = 0; a < A->rank(); ++a) cof.push_back(AForm::basis(A, {a}));
  return bott_from_coframe(A, cof, std::move(fibre));
}

LiouvilleData bott_from_coframe(const AlgebroidPtr& A, const std::vector<AForm>& ann, std::vector<std::string> fibre) {
  int k = static_cast<int>(ann.size());
  LiouvilleData L;
  L.fibre = fibre_names(A->chart, k, std::move(fibre));
  L.total = make_product(A, L.fibre, {}, AlgebroidKind::Pullback);
  L.lambda = AForm::zero(L.total, 1);
  for (int j = 0; j < k; ++j) {
    check_same(A, ann[j].A);
    L.lambda = L.lambda + Expr::var(L.fibre[j]) * lift_to_product(ann[j], L.total);
  }
  L.omega = Expr(-1) * d(L.lambda);
  return L;
}

LiouvilleData bott(const Distribution& xi, std::vector<std::string> fibre) {
  int r = xi.A->rank();
  std::vector<std::vector<Rational>> rows;
  for (const auto& s : xi.span) {
    std::vector<Rational> row;
    for (const auto& e : s.c) {
      if (!e.is_const()) throw NonConstantSpan("Bott form needs constant span coefficients");
      row.push_back(e.value());
    }
    rows.push_back(row);
  }
  auto ns = rational_null_space(rows, r);
  std::vector<AForm> ann;
  for (const auto& v : ns) {
    AForm a = AForm::zero(xi.A, 1);
    for (int i = 0; i < r; ++i) a.c[i] = Expr(v[i]);
    ann.push_back(a);
  }
  return bott_from_coframe(xi.A, ann, std::move(fibre));
}

AForm bott_local_display(const LiouvilleData& L, const std::vector<AForm>& ann) {
  AForm out = AForm::zero(L.total, 2);
  for (std::size_t j = 0; j < ann.size(); ++j) {
    Expr t = Expr::var(L.fibre[j]);
    AForm a = lift_to_product(ann[j], L.total);
    out = out + wedge(d(L.total, t), a) + t * d(a);
  }
  return out;
}

FatReport is_fat(const LiouvilleData& L, int samples, std::uint64_t seed) {
  FatReport out;
  out.min_abs_det = INFINITY;
  int k = static_cast<int>(L.fibre.size());
  const auto& base = L.total;
  std::vector<std::string> base_coords;
  for (const auto& c : base->chart.coords) {
    if (std::find(L.fibre.begin(), L.fibre.end(), c) == L.fibre.end()) base_coords.push_back(c);
  }
  SampleDomain dom;
  for (int i = 0; i < base->dim(); ++i) {
    const auto& c = base->chart.coords[i];
    if (std::find(L.fibre.begin(), L.fibre.end(), c) != L.fibre.end()) continue;
    dom.add(c, base->chart.periodic(i) ? Range::circle(base->chart.period[i]) : Range::interval(-2, 2));
  }
  dom = dom.with_count(samples).with_seed(seed);
  std::mt19937_64 rng(seed + 17);
  std::normal_distribution<double> g;
  for (auto p : dom.points()) {
    std::vector<double> t(k);
    double n = 0;
    for (int i = 0; i < k; ++i) {
      t[i] = g(rng);
      n += t[i] * t[i];
    }
    n = std::sqrt(n);
    for (int i = 0; i < k; ++i) {
      p.names.push_back(L.fibre[i]);
      p.values.push_back(t[i] / n);
    }
    double det = std::fabs(two_form_matrix(L.omega, p).determinant());
    if (det < out.min_abs_det) {
      out.min_abs_det = det;
      out.witness = p;
    }
  }
  out.fat = out.min_abs_det > 1e-8;
  return out;
}

std::pair<int, int> form_rank_range(const AForm& w, int samples, std::uint64_t seed) {
  int mn = 1 << 30, mx = 0;
  for (const auto& p : w.A->domain(2.0).with_count(samples).with_seed(seed).points()) {
    int r = numerical_rank(two_form_matrix(w, p));
    mn = std::min(mn, r);
    mx = std::max(mx, r);
  }
  return {mn, mx};
}

ContactElements contact_elements(const AlgebroidPtr& A) {
  int r = A->rank();
  ContactElements ce;
  if (r == 2) {
    ce.angles = {"psi"};
    ce.total = make_product(A, ce.angles, {kTwoPi});
    Expr psi = Expr::var("psi");
    ce.alpha = AForm::zero(ce.total, 1);
    ce.alpha.c[0] = cos(psi);
    ce.alpha.c[1] = sin(psi);
    ce.domain = ce.total->domain(2.0);
  } else if (r == 3) {
    ce.angles = {"psi", "phi"};
    ce.total = make_product(A, ce.angles, {kTwoPi, 0.0});
    Expr psi = Expr::var("psi"), phi = Expr::var("phi");
    ce.alpha = AForm::zero(ce.total, 1);
    ce.alpha.c[0] = cos(phi) * cos(psi);
    ce.alpha.c[1] = cos(phi) * sin(psi);
    ce.alpha.c[2] = sin(phi);
    ce.domain = ce.total->domain(2.0);
    for (std::size_t i = 0; i < ce.domain.coords.size(); ++i) {
      if (ce.domain.coords[i] == "phi") ce.domain.ranges[i] = Range::interval(-kPi / 2 + 0.2, kPi / 2 - 0.2);
    }
  } else {
    throw UnsupportedRank("contact elements need rank 2 or 3");
  }
  return ce;
}

Prolongation prolong(const Distribution& xi, const std::string& m) {
  if (xi.rank != 2) throw RankMismatch("prolongation needs a rank-2 distribution");
  if (xi.A->rank() == 3) {
    auto c = classify(xi);
    if (!c.contact.value) throw NotContact("prolongation needs a contact distribution");
  }
  std::vector<Section> gens;
  for (const auto& s : xi.span) {
    if (!all_zero(s)) gens.push_back(s);
    if (gens.size() == 2) break;
  }
  if (gens.size() < 2) throw RankMismatch("need two spanning sections");
  Prolongation pr;
  pr.m = m;
  pr.total = make_product(xi.A, {m}, {0.0});
  Section v1 = lift_to_product(gens[0], pr.total), v2 = lift_to_product(gens[1], pr.total);
  Section line = v1 + Expr::var(m) * v2;
  Section dm = Section::basis(pr.total, pr.total->rank() - 1);
  pr.D = Distribution::spanned(pr.total, {line, dm}, 2);
  return pr;
}

}  // namespace balg
