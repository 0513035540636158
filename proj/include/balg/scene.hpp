#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "balg/distribution.hpp"

namespace balg {

struct FormSpec {
  int degree = 1;
  std::map<std::string, Expr> coefficients;  // key: frame labels joined by '^'
};

struct DistributionSpec {
  std::string kernel;                                // name of a 1-form, or empty
  std::vector<std::map<std::string, Expr>> span;     // sections by frame label
};

struct OrbitSpec {
  std::string seed_coord;
  int seeds = 16;
  std::string section_coord;
  double section_value = 0;
  std::vector<double> base;
};

struct Expectations {
  std::vector<int> flag;
  std::string classification;  // contact, engel, even_contact, involutive
  bool unit_volume = false;
  std::string prolongation;
  std::optional<double> bott_min_det;
  std::string gamma_coord;    // coordinate of Z cut out by the dividing set
  std::vector<double> gamma;  // its expected values on the dividing set
};

struct SceneOptions {
  std::uint64_t seed = 42;
  int samples = 200;
  double tol = 1e-9;
  int grid = 256;
  std::vector<double> eps;
};

/// Parsed scene file; emit_scene(parse_scene_text(emit_scene(s))) reproduces emit_scene(s).
struct Scene {
  std::string name;
  std::string description;
  AlgebroidSpec algebroid;
  std::vector<std::string> periods_text;  // as written ("2pi" or a number)
  std::map<std::string, FormSpec> forms;
  std::map<std::string, std::map<std::string, Expr>> sections;
  std::map<std::string, DistributionSpec> distributions;
  std::string contact_form;
  std::string symplectic_form;
  std::string derived;  // "", "contact_elements"
  bool has_regularisation = false;
  int reg_sign = 1;
  bool reg_compact = false;
  std::optional<OrbitSpec> orbits;
  Expectations expect;
  SceneOptions options;
  std::string path;

  AlgebroidPtr build() const;
  AForm form(const AlgebroidPtr& A, const std::string& name) const;
  Section section(const AlgebroidPtr& A, const std::string& name) const;
  Distribution distribution(const AlgebroidPtr& A, const std::string& name) const;
};

Scene parse_scene(const std::string& path);
Scene parse_scene_text(const std::string& text, const std::string& origin = "<memory>");
std::string emit_scene(const Scene& s);
/// FNV-1a over the canonical emission.
std::string scene_digest(const Scene& s);
/// Bundled scene files in name order.
std::vector<std::string> list_scenes(const std::string& dir);

}  // namespace balg
