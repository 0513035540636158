#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "balg/commands.hpp"
#include "balg/contact.hpp"
#include "balg/dynamics.hpp"
#include "balg/jacobi.hpp"
#include "balg/multivector.hpp"
#include "balg/numeric.hpp"

using namespace balg;

namespace {

constexpr double kIdentityTol = 1e-10;
constexpr double kIdentitySeconds = 5.0;
constexpr double kMorphismTol = 1e-9;
constexpr int kMorphismSamples = 1000;
constexpr double kCorruptedFloor = 0.1;
constexpr double kUnitVolumeTol = 1e-12;
constexpr double kReebTol = 1e-12;
constexpr double kGammaTol = 1e-10;
constexpr double kPeriodTol = 1e-6;
constexpr double kClosureTol = 1e-9;
constexpr double kTorusSeconds = 30.0;
constexpr double kCoherenceTol = 1e-8;
constexpr double kReebDividingTol = 1e-8;
constexpr double kCosympTol = 1e-9;
constexpr double kJacobiTol = 1e-9;
constexpr double kDiagramTol = 1e-8;
constexpr double kDisplayTol = 1e-12;
constexpr double kBottDetFloor = 0.1;
constexpr double kLiftTol = 1e-10;
constexpr double kCorpusSeconds = 180.0;
/// pair_from_contact uses i_X d alpha = -(b - b(R) alpha); the normal-form display carries the opposite orientation of Lambda.
constexpr int kNormalFormOrientation = -1;

Expr v(const char* n) { return Expr::var(n); }

std::string path_of(const std::string& name) { return std::string(BALG_SCENE_DIR) + "/" + name + ".json"; }

std::string num(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::map<std::string, Report> g_verify;

const Report& verified(const std::string& name) {
  auto it = g_verify.find(name);
  if (it == g_verify.end()) it = g_verify.emplace(name, execute(parse_scene(path_of(name)), "verify", {})).first;
  return it->second;
}

std::vector<std::string> scene_names() {
  std::vector<std::string> out;
  for (const auto& p : list_scenes(BALG_SCENE_DIR)) out.push_back(parse_scene(p).name);
  return out;
}

bool has_divisor(const Scene& s) { return s.algebroid.kind != "tangent" && s.algebroid.kind != "lie_algebra"; }

bool is_b_contact(const Scene& s) {
  return (s.algebroid.kind == "bk" || s.algebroid.kind == "elliptic") &&
         (!s.contact_form.empty() || s.derived == "contact_elements");
}

/// Requires at least one check whose name contains `key`; all of them must pass.
int require_checks(Outcome& o, const Report& r, const std::string& key, double* worst = nullptr) {
  int n = 0;
  for (const auto& c : r.checks) {
    if (c.name.find(key) == std::string::npos) continue;
    ++n;
    o.require(c.pass, r.scene + " " + c.name + " = " + num(c.residual));
    if (worst && c.bound == Bound::Upper) *worst = std::max(*worst, c.residual);
  }
  o.require(n > 0, r.scene + " has no " + key + " checks");
  return n;
}

double max_coef(const AForm& w, const std::vector<Point>& pts) {
  double m = 0;
  for (const auto& p : pts) {
    for (double x : w.eval(p)) m = std::max(m, std::fabs(x));
  }
  return m;
}

Outcome criterion1() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  double worst = 0;
  struct Case {
    Chart chart;
    Expr f;
  };
  std::vector<Case> cases{{Chart({"x", "z"}), v("z")}, {Chart({"x", "z"}), v("z") - v("x") * v("x")}};
  for (const auto& cs : cases) {
    for (int k : {1, 2, 3}) {
      auto reg = regularise_trivial(cs.chart, cs.f, k);
      // independent construction of df + f^k ds on the ambient
      const auto& T = reg.T;
      AForm theta = d(T, cs.f) + pow(cs.f, k) * d(T, Expr::var(reg.vertical[0]));
      auto pts = reg.domain(400, 7).points();
      double wedge_res = max_coef(wedge(theta, d(theta)), pts);
      double span = max_coef(wedge(theta, reg.patches[0].thetas[0]), pts);
      worst = std::max({worst, wedge_res, span});
      o.require(wedge_res < kIdentityTol, "theta^dtheta = " + num(wedge_res) + " for k=" + std::to_string(k));
      o.require(span < kIdentityTol, "module form differs from df + f^k ds for k=" + std::to_string(k));
    }
  }
  double t = elapsed(t0);
  o.require(t < kIdentitySeconds, "runtime " + num(t) + " s");
  o.detail = "max |theta^dtheta| " + num(worst) + ", " + num(t) + " s" + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome criterion2() {
  Outcome o;
  double worst = 0;
  int scenes = 0;
  for (const auto& name : scene_names()) {
    Scene s = parse_scene(path_of(name));
    if (!has_divisor(s)) continue;
    ++scenes;
    Report r = execute(s, "regularise", {});
    require_checks(o, r, "regularisation.", &worst);
  }
  auto reg = regularise_trivial(Chart({"z", "x"}), v("z"), 1);
  auto bad = reg;
  auto& psi = bad.patches[0].psi_inv;
  psi[0][2] = -psi[0][2];
  bad.patches[0].F = make_custom(AlgebroidKind::Foliation, bad.ambient, reg.source->labels, psi, reg.source->structure);
  auto rep = verify_regularisation(bad, kMorphismSamples);
  o.require(rep.morphism() > kCorruptedFloor, "corrupted lift residual " + num(rep.morphism()));
  o.require(worst < kMorphismTol, "worst residual " + num(worst));
  o.detail = std::to_string(scenes) + " scenes, worst " + num(worst) + ", corrupted control " + num(rep.morphism()) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome criterion3() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  Scene s = parse_scene(path_of("t3"));
  auto A = s.build();
  AForm alpha = s.form(A, "alpha");
  auto cl = classify(Distribution::kernel(alpha), alpha);
  o.require(cl.contact.value, "not contact");
  Expr vol = contact_volume(alpha);
  double vgap = 0;
  for (const auto& p : A->domain().with_count(500).points()) vgap = std::max(vgap, std::fabs(std::fabs(evaluate(vol, p)) - 1));
  o.require(vgap < kUnitVolumeTol, "volume deviation " + num(vgap));

  Section cand = s.section(A, "reeb_candidate");
  auto rc = verify_reeb(alpha, cand, A->domain().with_count(500), kReebTol);
  o.require(rc.normalisation < kReebTol && rc.kernel < kReebTol, "candidate Reeb residual");
  auto field = anchor_of(cand);
  double disp = 0;
  for (const auto& p : A->domain().with_count(100).points()) {
    double t1 = p.at("t1"), t2 = p.at("t2");
    disp = std::max({disp, std::fabs(evaluate(field[0], p) - std::sin(t2) * std::sin(t1)),
                     std::fabs(evaluate(field[1], p)),
                     std::fabs(evaluate(field[2], p) - std::cos(t2))});
  }
  o.require(disp < kReebTol, "candidate field differs from the display");

  auto ds = dividing_set(alpha, 256);
  double gap = ds.points.empty() ? 1.0 : 0.0;
  bool hit0 = false, hitpi = false;
  for (const auto& p : ds.points) {
    double t2 = std::fmod(p.at("t2") + kTwoPi, kTwoPi);
    double d0 = std::min(t2, kTwoPi - t2), dpi = std::fabs(t2 - kPi);
    gap = std::max(gap, std::min(d0, dpi));
    hit0 |= d0 < kGammaTol;
    hitpi |= dpi < kGammaTol;
  }
  o.require(gap < kGammaTol && hit0 && hitpi, "dividing set gap " + num(gap));

  RegOptions ro;
  ro.compact = true;
  ro.sign = -1;
  auto reg = regularise_trivial(A->chart, sin(v("t1")), 1, ro);
  AForm a = alpha.rehome(reg.source);
  auto flow = central_leaf_flow(reg, a);
  auto seeds = seed_lattice(flow.chart, "t2", 16, Vec::Zero(flow.chart.dim()));
  auto res = search_orbits(flow, seeds, {"t3", 0.0, 0});
  for (int k : {0, 8}) {
    const auto& so = res.at(k);
    o.require(so.classification == "horizontal" && so.orbit.has_value(), "seed " + std::to_string(k) + " not horizontal");
    if (!so.orbit) continue;
    o.require(std::fabs(so.orbit->period - kTwoPi) < kPeriodTol, "period " + num(so.orbit->period));
    o.require(so.orbit->closure < kClosureTol, "closure " + num(so.orbit->closure));
    auto proj = project_orbit(reg, a, flow, *so.orbit);
    double t2dev = 0;
    bool on_z = true;
    for (const auto& p : proj.points) {
      on_z &= p.at("t1") == 0.0;
      t2dev = std::max(t2dev, std::fabs(p.at("t2") - proj.points.front().at("t2")));
    }
    o.require(on_z && t2dev < kClosureTol && proj.displacement > 1.0, "projection is not a d_t3 orbit in Z");
  }
  for (int k : {4, 12}) o.require(res.at(k).classification == "vertical", "seed " + std::to_string(k) + " not vertical");
  double t = elapsed(t0);
  o.require(t < kTorusSeconds, "runtime " + num(t) + " s");
  o.detail = "volume gap " + num(vgap) + ", Reeb " + num(std::max(rc.normalisation, rc.kernel)) + ", Gamma gap " +
             num(gap) + ", " + num(t) + " s" + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome suite_over_b_contact(const std::vector<std::string>& keys) {
  Outcome o;
  double worst = 0;
  int scenes = 0;
  for (const auto& name : scene_names()) {
    if (!is_b_contact(parse_scene(path_of(name)))) continue;
    ++scenes;
    for (const auto& k : keys) require_checks(o, verified(name), k, &worst);
  }
  o.require(scenes >= 3, "fewer than three b-contact scenes");
  o.detail = std::to_string(scenes) + " b-contact scenes, worst " + num(worst) + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

AForm scene_alpha(const std::string& name) {
  Scene s = parse_scene(path_of(name));
  return s.form(s.build(), s.contact_form);
}

Outcome criterion7() {
  Outcome o;
  AForm nf = scene_alpha("normal_form");
  auto pr = pair_from_contact(nf);
  const Chart& ch = pr.Lambda.chart;
  auto bv = [&](const Chart& c, const char* a, const char* b) { return Multivector::basis(c, {a, b}); };
  Multivector disp = v("z") * bv(ch, "z", "y1") + bv(ch, "y2", "x2") + (v("y1") + Expr(1)) * bv(ch, "y1", "x1") +
                     v("x2") * bv(ch, "x2", "x1");
  auto pts = ch.domain().with_count(300).points();
  double dl = max_abs(pr.Lambda - Expr(kNormalFormOrientation) * disp, pts);
  double dr = max_abs(pr.R - Multivector::basis(ch, {"x1"}), pts);
  o.require(dl < kDisplayTol && dr < kDisplayTol, "normal-form pair differs from the display");
  auto rz = restrict_pair(pr, "z");
  const Chart& Z = rz.Lambda.chart;
  Multivector dz = bv(Z, "y2", "x2") + (v("y1") + Expr(1)) * bv(Z, "y1", "x1") + v("x2") * bv(Z, "x2", "x1");
  double dzl = max_abs(rz.Lambda - Expr(kNormalFormOrientation) * dz, Z.domain().with_count(300).points());
  o.require(dzl < kDisplayTol, "restricted pair differs from the display");

  double worst = 0;
  std::vector<std::string> names{"darboux_r3", "normal_form", "t3"};
  std::vector<JacobiPair> pairs;
  for (const auto& n : names) pairs.push_back(pair_from_contact(scene_alpha(n)));
  auto A = make_tangent(Chart({"x", "y", "z"}));
  AForm scaled = AForm::zero(A, 1);
  scaled.c[1] = exp(v("y")) * v("x");
  scaled.c[2] = exp(v("y"));
  pairs.push_back(pair_from_contact(scaled));
  names.push_back("e^y(dz + x dy)");
  int diagrams = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    auto vp = verify_pair(p);
    worst = std::max({worst, vp.lambda_residual, vp.r_residual});
    o.require(vp.pass, names[i] + " verify_pair");
    for (int variant : {1, 2}) {
      double pres = poisson_residual(poissonise(p, variant));
      worst = std::max(worst, pres);
      o.require(pres < kJacobiTol, names[i] + " Poissonisation " + std::to_string(variant) + " = " + num(pres));
    }
    o.require(inversion_maps_pi2_to_pi1(p), names[i] + " inversion");
    auto dg = commuting_diagram_check(p);
    if (dg.residual < kDiagramTol) ++diagrams;
    o.require(dg.residual < kDiagramTol, names[i] + " diagram " + num(dg.residual));
  }
  o.require(diagrams >= 3, "fewer than three commuting diagrams");
  double dec = 0;
  for (std::size_t i = 0; i < 2; ++i) dec = std::max(dec, check_reps(canonical_reps(pairs[i])).decomposition);
  o.require(dec < kJacobiTol, "nabla4 decomposition " + num(dec));
  o.detail = "display " + num(std::max({dl, dr, dzl})) + " (orientation " + std::to_string(kNormalFormOrientation) +
             "), pair/Poisson worst " + num(worst) + ", " + std::to_string(diagrams) + " diagrams, nabla4 " + num(dec) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome criterion8() {
  Outcome o;
  for (const auto& [name, flag, cls] : std::vector<std::tuple<std::string, std::vector<int>, std::string>>{
           {"heisenberg", {2, 3}, "contact"}, {"engel", {2, 3, 4}, "engel"}}) {
    Scene s = parse_scene(path_of(name));
    auto A = s.build();
    auto c = classify(s.distribution(A, "xi"));
    o.require(c.flag_ranks == flag, name + " flag");
    bool ok = cls == "contact" ? c.contact.value : c.engel.value;
    o.require(ok, name + " not " + cls);
  }
  Scene h = parse_scene(path_of("heisenberg"));
  auto H = h.build();
  auto P = prolong(h.distribution(H, "xi"));
  o.require(classify(P.D).engel.value, "prolongation not Engel");

  Scene e = parse_scene(path_of("elliptic4"));
  auto E = e.build();
  auto B = bott(e.distribution(E, "xi"), {"a", "b"});
  const auto& T = B.total;
  auto idx = [&](const std::string& l) { return T->label_index(l); };
  auto one = [&](const std::string& l) { return AForm::basis(T, {idx(l)}); };
  // display of omega^xi: da ^ e5* + db ^ e6* + a (e1*^e2* + e3*^e4*) + b (e1*^e3* - e2*^e4*)
  AForm display = wedge(one("a"), one("e5")) + wedge(one("b"), one("e6")) +
                  v("a") * (wedge(one("e1"), one("e2")) + wedge(one("e3"), one("e4"))) +
                  v("b") * (wedge(one("e1"), one("e3")) - wedge(one("e2"), one("e4")));
  // the display uses de^k = +c_ij^k e^i ^ e^j; e^i -> -e^i on the algebra coframe intertwines it with d here
  AForm reflected = B.omega;
  const auto& sets = subsets(T->rank(), 2);
  for (std::size_t I = 0; I < sets.size(); ++I) {
    int alg = (sets[I][0] < E->rank()) + (sets[I][1] < E->rank());
    if (alg % 2) reflected.c[I] = Expr(-1) * reflected.c[I];
  }
  Point at{{"x", "a", "b"}, {0.3, 1.0, 0.0}};
  double dgap = 0;
  for (double x : (reflected - display).eval(at)) dgap = std::max(dgap, std::fabs(x));
  o.require(dgap < kDisplayTol, "Bott form differs from the display by " + num(dgap));
  double mindet = INFINITY;
  for (int k = 0; k < 360; ++k) {
    double phi = kTwoPi * k / 360;
    Point p{{"x", "a", "b"}, {0.3, std::cos(phi), std::sin(phi)}};
    mindet = std::min(mindet, std::fabs(two_form_matrix(B.omega, p).determinant()));
  }
  o.require(mindet > kBottDetFloor, "min |det| on the unit circle " + num(mindet));
  o.detail = "display gap " + num(dgap) + " (coframe reflection), min |det| " + num(mindet) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome criterion9() {
  Outcome o;
  double worst = 0;
  int with = 0, without = 0;
  for (const auto& name : scene_names()) {
    if (!has_divisor(parse_scene(path_of(name)))) {
      ++without;
      continue;
    }
    ++with;
    const Report& r = verified(name);
    require_checks(o, r, "lift.commutes_with_d", &worst);
    for (const auto& c : r.checks) {
      if (c.name.rfind("lift.", 0) == 0) o.require(c.pass, name + " " + c.name);
    }
  }
  o.require(worst < kLiftTol, "lift commutation " + num(worst));
  o.detail = std::to_string(with) + " scenes with a divisor, worst " + num(worst) + ", " + std::to_string(without) +
             " without a divisor (no regularisation)" + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome criterion10() {
  Outcome o;
  const Report& r = verified("elliptic_disk");
  for (const std::string k : {"distribution.class", "contact.volume_min", "elliptic.c_star_invariant", "blowup.class",
                              "blowup.dividing_set.location", "blowup.reeb_dividing.", "regularisation."}) {
    require_checks(o, r, k);
  }
  o.require(r.pass(), "elliptic_disk verify fails");
  o.detail = std::to_string(r.checks.size()) + " checks" + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome criterion11() {
  Outcome o;
  auto t0 = std::chrono::steady_clock::now();
  Report a = verify_all(BALG_SCENE_DIR, {});
  double t = elapsed(t0);
  Report b = verify_all(BALG_SCENE_DIR, {});
  o.require(render_json(a) == render_json(b), "reports differ");
  o.require(render_text(a) == render_text(b), "text reports differ");
  o.require(a.pass(), "corpus verify fails");
  o.require(t < kCorpusSeconds, "runtime " + num(t) + " s");
  o.detail = std::to_string(a.checks.size()) + " checks, " + num(t) + " s" + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"regularisation identity", criterion1},
      {"morphism suite", criterion2},
      {"torus example", criterion3},
      {"dividing set and central leaf",
       [] { return suite_over_b_contact({"coherence.", "dividing_set.count", "central_leaf."}); }},
      {"Reeb field and dividing set", [] { return suite_over_b_contact({"reeb_dividing."}); }},
      {"cosymplectic identities", [] { return suite_over_b_contact({"cosymplectic."}); }},
      {"Jacobi suite", criterion7},
      {"distribution suite", criterion8},
      {"lift commutation", criterion9},
      {"elliptic pipeline", criterion10},
      {"determinism", criterion11},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = e.what();
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << i + 1 << " " << criteria[i].first << ": " << o.detail << std::endl;
  }
  return failed ? 1 : 0;
}
