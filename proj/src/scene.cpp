#include "balg/scene.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace balg {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ParseError("at key '" + key + "': " + what);
}

const json& need(const json& j, const std::string& k, const std::string& path) {
  if (!j.is_object() || !j.contains(k)) fail(path.empty() ? k : path + "." + k, "missing");
  return j.at(k);
}

std::string str_at(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

double num_at(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int int_at(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

double period_value(const std::string& text, const std::string& path) {
  if (text == "2pi") return kTwoPi;
  if (text == "pi") return kPi;
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used == text.size() && v >= 0) return v;
  } catch (const std::exception&) {
  }
  fail(path, "period must be a non-negative number, 'pi' or '2pi'");
}

Expr expr_at(const json& j, const std::string& path, const Chart& chart) {
  std::string text;
  if (j.is_number_integer()) {
    text = std::to_string(j.get<long long>());
  } else {
    text = str_at(j, path);
  }
  Expr e;
  try {
    e = parse(text);
  } catch (const ParseError& err) {
    fail(path, err.what());
  }
  for (const auto& v : free_variables(e)) {
    if (!chart.has(v)) throw UnknownCoordinate("coordinate '" + v + "' at key '" + path + "' is not in the chart");
  }
  return e;
}

std::map<std::string, Expr> coefficient_map(const json& j, const std::string& path, const Chart& chart) {
  if (!j.is_object()) fail(path, "expected an object of coefficients");
  std::map<std::string, Expr> out;
  for (const auto& [k, v] : j.items()) out[k] = expr_at(v, path + "." + k, chart);
  return out;
}

json coefficient_json(const std::map<std::string, Expr>& m) {
  json o = json::object();
  for (const auto& [k, v] : m) o[k] = v.str();
  return o;
}

std::vector<std::string> split_labels(const std::string& key) {
  std::vector<std::string> out;
  std::stringstream ss(key);
  std::string part;
  while (std::getline(ss, part, '^')) out.push_back(part);
  return out;
}

int label_of(const AlgebroidPtr& A, const std::string& l, const std::string& ctx) {
  for (int i = 0; i < A->rank(); ++i) {
    if (A->labels[i] == l) return i;
  }
  throw UnknownCoordinate("frame label '" + l + "' in " + ctx + " is not a generator of the algebroid");
}

}  // namespace

Scene parse_scene_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError(origin + ": top level must be an object");
  Scene s;
  s.path = origin;
  s.name = str_at(need(j, "name", ""), "name");
  if (j.contains("description")) s.description = str_at(j["description"], "description");

  const json& ch = need(j, "chart", "");
  std::vector<std::string> coords;
  const json& cj = need(ch, "coords", "chart");
  if (!cj.is_array() || cj.empty()) fail("chart.coords", "expected a non-empty array");
  for (std::size_t i = 0; i < cj.size(); ++i) coords.push_back(str_at(cj[i], "chart.coords"));
  std::vector<double> periods(coords.size(), 0.0);
  s.periods_text.assign(coords.size(), "0");
  if (ch.contains("periods")) {
    const json& pj = ch["periods"];
    if (!pj.is_array() || pj.size() != coords.size()) fail("chart.periods", "expected one entry per coordinate");
    for (std::size_t i = 0; i < pj.size(); ++i) {
      std::string t;
      if (pj[i].is_string()) {
        t = pj[i].get<std::string>();
      } else if (pj[i].is_number()) {
        t = json(pj[i]).dump();
      } else {
        fail("chart.periods", "expected numbers or strings");
      }
      periods[i] = period_value(t, "chart.periods");
      s.periods_text[i] = t;
    }
  }
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (std::count(coords.begin(), coords.end(), coords[i]) > 1) throw DuplicateCoordinate(coords[i]);
  }
  Chart chart(coords, periods);

  const json& aj = need(j, "algebroid", "");
  AlgebroidSpec& a = s.algebroid;
  a.chart = chart;
  a.kind = str_at(need(aj, "kind", "algebroid"), "algebroid.kind");
  static const std::vector<std::string> kinds{"tangent", "bk", "elliptic", "selfcrossing", "lie_algebra"};
  if (std::find(kinds.begin(), kinds.end(), a.kind) == kinds.end()) {
    throw UnknownKind("algebroid kind '" + a.kind + "' at key 'algebroid.kind'");
  }
  auto coord_at = [&](const json& v, const std::string& path) {
    std::string c = str_at(v, path);
    if (!chart.has(c)) throw UnknownCoordinate("coordinate '" + c + "' at key '" + path + "' is not in the chart");
    return c;
  };
  if (a.kind == "bk") {
    a.z = coord_at(need(aj, "z", "algebroid"), "algebroid.z");
    if (aj.contains("k")) a.k = int_at(aj["k"], "algebroid.k");
    if (aj.contains("f")) a.f = expr_at(aj["f"], "algebroid.f", chart);
  } else if (a.kind == "elliptic") {
    a.x = coord_at(need(aj, "x", "algebroid"), "algebroid.x");
    a.y = coord_at(need(aj, "y", "algebroid"), "algebroid.y");
  } else if (a.kind == "selfcrossing") {
    const json& comps = need(aj, "components", "algebroid");
    if (!comps.is_array()) fail("algebroid.components", "expected an array");
    for (std::size_t i = 0; i < comps.size(); ++i) {
      std::string p = "algebroid.components[" + std::to_string(i) + "]";
      BKComponent c;
      c.z = coord_at(need(comps[i], "z", p), p + ".z");
      if (comps[i].contains("k")) c.k = int_at(comps[i]["k"], p + ".k");
      c.f = Expr::var(c.z);
      a.components.push_back(c);
    }
  } else if (a.kind == "lie_algebra") {
    const json& lj = need(aj, "labels", "algebroid");
    if (!lj.is_array()) fail("algebroid.labels", "expected an array");
    for (const auto& l : lj) a.labels.push_back(str_at(l, "algebroid.labels"));
    if (aj.contains("brackets")) {
      for (const auto& b : aj["brackets"]) {
        if (!b.is_array() || b.size() != 4) fail("algebroid.brackets", "entries are [a, b, c, coefficient]");
        Expr cv = expr_at(b[3], "algebroid.brackets", Chart());
        if (!cv.is_const()) fail("algebroid.brackets", "coefficients must be rational constants");
        a.brackets.emplace_back(str_at(b[0], "algebroid.brackets"), str_at(b[1], "algebroid.brackets"),
                                str_at(b[2], "algebroid.brackets"), cv.value());
      }
    }
  }

  if (j.contains("forms")) {
    for (const auto& [name, fj] : j["forms"].items()) {
      std::string p = "forms." + name;
      FormSpec f;
      f.degree = int_at(need(fj, "degree", p), p + ".degree");
      f.coefficients = coefficient_map(need(fj, "coefficients", p), p + ".coefficients", chart);
      s.forms[name] = f;
    }
  }
  if (j.contains("sections")) {
    for (const auto& [name, sj] : j["sections"].items()) s.sections[name] = coefficient_map(sj, "sections." + name, chart);
  }
  if (j.contains("distributions")) {
    for (const auto& [name, dj] : j["distributions"].items()) {
      std::string p = "distributions." + name;
      DistributionSpec d;
      if (dj.contains("kernel")) {
        d.kernel = str_at(dj["kernel"], p + ".kernel");
        if (!s.forms.count(d.kernel)) fail(p + ".kernel", "unknown form '" + d.kernel + "'");
      } else {
        const json& sp = need(dj, "span", p);
        if (!sp.is_array()) fail(p + ".span", "expected an array");
        for (const auto& e : sp) d.span.push_back(coefficient_map(e, p + ".span", chart));
      }
      s.distributions[name] = d;
    }
  }
  auto form_ref = [&](const char* key) {
    std::string n = str_at(j[key], key);
    if (!s.forms.count(n)) fail(key, "unknown form '" + n + "'");
    return n;
  };
  if (j.contains("contact_form")) s.contact_form = form_ref("contact_form");
  if (j.contains("symplectic_form")) s.symplectic_form = form_ref("symplectic_form");
  if (j.contains("derived")) {
    s.derived = str_at(j["derived"], "derived");
    if (s.derived != "contact_elements") throw UnknownKind("derived construction '" + s.derived + "'");
  }
  if (j.contains("regularisation")) {
    const json& rj = j["regularisation"];
    s.has_regularisation = true;
    if (rj.contains("sign")) s.reg_sign = int_at(rj["sign"], "regularisation.sign");
    if (rj.contains("compact")) {
      if (!rj["compact"].is_boolean()) fail("regularisation.compact", "expected a boolean");
      s.reg_compact = rj["compact"].get<bool>();
    }
  }
  if (j.contains("orbits")) {
    const json& oj = j["orbits"];
    OrbitSpec o;
    o.seed_coord = coord_at(need(oj, "seed_coord", "orbits"), "orbits.seed_coord");
    if (oj.contains("seeds")) o.seeds = int_at(oj["seeds"], "orbits.seeds");
    const json& sj = need(oj, "section", "orbits");
    o.section_coord = str_at(need(sj, "coord", "orbits.section"), "orbits.section.coord");
    if (sj.contains("value")) o.section_value = num_at(sj["value"], "orbits.section.value");
    if (oj.contains("base")) {
      for (const auto& b : oj["base"]) o.base.push_back(num_at(b, "orbits.base"));
    }
    s.orbits = o;
  }
  if (j.contains("expect")) {
    const json& ej = j["expect"];
    Expectations& e = s.expect;
    if (ej.contains("flag")) {
      for (const auto& r : ej["flag"]) e.flag.push_back(int_at(r, "expect.flag"));
    }
    if (ej.contains("class")) e.classification = str_at(ej["class"], "expect.class");
    if (ej.contains("unit_volume")) e.unit_volume = ej["unit_volume"].get<bool>();
    if (ej.contains("prolongation")) e.prolongation = str_at(ej["prolongation"], "expect.prolongation");
    if (ej.contains("bott_min_det")) e.bott_min_det = num_at(ej["bott_min_det"], "expect.bott_min_det");
    if (ej.contains("gamma")) {
      const json& gj = ej["gamma"];
      e.gamma_coord = str_at(need(gj, "coord", "expect.gamma"), "expect.gamma.coord");
      for (const auto& g : need(gj, "values", "expect.gamma")) e.gamma.push_back(num_at(g, "expect.gamma.values"));
    }
  }
  if (j.contains("options")) {
    const json& oj = j["options"];
    SceneOptions& o = s.options;
    if (oj.contains("seed")) o.seed = oj["seed"].get<std::uint64_t>();
    if (oj.contains("samples")) o.samples = int_at(oj["samples"], "options.samples");
    if (oj.contains("tol")) o.tol = num_at(oj["tol"], "options.tol");
    if (oj.contains("grid")) o.grid = int_at(oj["grid"], "options.grid");
    if (oj.contains("eps")) {
      for (const auto& e : oj["eps"]) o.eps.push_back(num_at(e, "options.eps"));
    }
  }
  AlgebroidPtr A = s.build();
  for (const auto& [name, f] : s.forms) s.form(A, name);
  for (const auto& [name, x] : s.sections) s.section(A, name);
  return s;
}

Scene parse_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open scene file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene_text(ss.str(), path);
}

std::string emit_scene(const Scene& s) {
  json j;
  j["name"] = s.name;
  if (!s.description.empty()) j["description"] = s.description;
  const auto& a = s.algebroid;
  j["chart"]["coords"] = a.chart.coords;
  bool periodic = std::any_of(a.chart.period.begin(), a.chart.period.end(), [](double p) { return p > 0; });
  if (periodic) j["chart"]["periods"] = s.periods_text;
  json aj;
  aj["kind"] = a.kind;
  if (a.kind == "bk") {
    aj["z"] = a.z;
    aj["k"] = a.k;
    if (!a.f.is_zero()) aj["f"] = a.f.str();
  } else if (a.kind == "elliptic") {
    aj["x"] = a.x;
    aj["y"] = a.y;
  } else if (a.kind == "selfcrossing") {
    aj["components"] = json::array();
    for (const auto& c : a.components) aj["components"].push_back({{"z", c.z}, {"k", c.k}});
  } else if (a.kind == "lie_algebra") {
    aj["labels"] = a.labels;
    aj["brackets"] = json::array();
    for (const auto& [x, y, w, v] : a.brackets) aj["brackets"].push_back({x, y, w, v.str()});
  }
  j["algebroid"] = aj;
  if (!s.forms.empty()) {
    for (const auto& [n, f] : s.forms) {
      j["forms"][n] = {{"degree", f.degree}, {"coefficients", coefficient_json(f.coefficients)}};
    }
  }
  for (const auto& [n, sec] : s.sections) j["sections"][n] = coefficient_json(sec);
  for (const auto& [n, d] : s.distributions) {
    if (!d.kernel.empty()) {
      j["distributions"][n] = {{"kernel", d.kernel}};
    } else {
      json sp = json::array();
      for (const auto& m : d.span) sp.push_back(coefficient_json(m));
      j["distributions"][n] = {{"span", sp}};
    }
  }
  if (!s.contact_form.empty()) j["contact_form"] = s.contact_form;
  if (!s.symplectic_form.empty()) j["symplectic_form"] = s.symplectic_form;
  if (!s.derived.empty()) j["derived"] = s.derived;
  if (s.has_regularisation) j["regularisation"] = {{"sign", s.reg_sign}, {"compact", s.reg_compact}};
  if (s.orbits) {
    const auto& o = *s.orbits;
    json oj = {{"seed_coord", o.seed_coord},
               {"seeds", o.seeds},
               {"section", {{"coord", o.section_coord}, {"value", o.section_value}}}};
    if (!o.base.empty()) oj["base"] = o.base;
    j["orbits"] = oj;
  }
  const auto& e = s.expect;
  json ej = json::object();
  if (!e.flag.empty()) ej["flag"] = e.flag;
  if (!e.classification.empty()) ej["class"] = e.classification;
  if (e.unit_volume) ej["unit_volume"] = true;
  if (!e.prolongation.empty()) ej["prolongation"] = e.prolongation;
  if (e.bott_min_det) ej["bott_min_det"] = *e.bott_min_det;
  if (!e.gamma_coord.empty()) ej["gamma"] = {{"coord", e.gamma_coord}, {"values", e.gamma}};
  if (!ej.empty()) j["expect"] = ej;
  const auto& o = s.options;
  json oj = {{"seed", o.seed}, {"samples", o.samples}, {"tol", o.tol}, {"grid", o.grid}};
  if (!o.eps.empty()) oj["eps"] = o.eps;
  j["options"] = oj;
  return j.dump(2) + "\n";
}

std::string scene_digest(const Scene& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : emit_scene(s)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> list_scenes(const std::string& dir) {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(dir, ec)) {
    if (e.path().extension() == ".json") out.push_back(e.path().string());
  }
  if (ec) throw IOError("cannot list scene directory '" + dir + "'");
  std::sort(out.begin(), out.end());
  return out;
}

AlgebroidPtr Scene::build() const { return build_algebroid(algebroid); }

AForm Scene::form(const AlgebroidPtr& A, const std::string& name) const {
  auto it = forms.find(name);
  if (it == forms.end()) throw InvalidSpec("scene has no form '" + name + "'");
  AForm w = AForm::zero(A, it->second.degree);
  for (const auto& [key, v] : it->second.coefficients) {
    auto labels = split_labels(key);
    if (static_cast<int>(labels.size()) != w.p) {
      throw InvalidSpec("key '" + key + "' of form '" + name + "' does not match its degree");
    }
    std::vector<int> idx;
    for (const auto& l : labels) idx.push_back(label_of(A, l, "form '" + name + "'"));
    std::vector<int> sorted = idx;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw InvalidSpec("repeated label in key '" + key + "'");
    }
    AForm b = AForm::basis(A, idx);
    w = w + v * b;
  }
  return w;
}

Section Scene::section(const AlgebroidPtr& A, const std::string& name) const {
  auto it = sections.find(name);
  if (it == sections.end()) throw InvalidSpec("scene has no section '" + name + "'");
  Section s{A, std::vector<Expr>(A->rank())};
  for (const auto& [l, v] : it->second) s.c[label_of(A, l, "section '" + name + "'")] = v;
  return s;
}

Distribution Scene::distribution(const AlgebroidPtr& A, const std::string& name) const {
  auto it = distributions.find(name);
  if (it == distributions.end()) throw InvalidSpec("scene has no distribution '" + name + "'");
  if (!it->second.kernel.empty()) return Distribution::kernel(form(A, it->second.kernel));
  std::vector<Section> span;
  for (const auto& m : it->second.span) {
    Section s{A, std::vector<Expr>(A->rank())};
    for (const auto& [l, v] : m) s.c[label_of(A, l, "distribution '" + name + "'")] = v;
    span.push_back(s);
  }
  int rank = static_cast<int>(span.size());
  return Distribution::spanned(A, span, rank);
}

}  // namespace balg
