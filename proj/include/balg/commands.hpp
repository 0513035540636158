#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "balg/report.hpp"
#include "balg/scene.hpp"

namespace balg {

struct CommandOptions {
  std::string kind;                 // regularisation kind; empty selects the divisor's own
  bool compact = false;             // or the scene setting
  std::optional<int> sign;          // overrides the scene sign
  std::vector<double> eps;          // level-set values
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::string out;                  // artifact directory; empty disables artifacts
  std::string format = "json";
  std::string where = "central-leaf";
  // contact
  bool dividing_set = false, induced = false, cosymp = false;
  // jacobi
  int poissonise = 0;
  bool modular = false, diagram = false;
};

inline const std::vector<std::string> kCommands{"verify", "regularise", "contact", "orbits", "jacobi", "plot"};

/// Dispatches one command on a parsed scene; deterministic given the scene, options and seed.
Report execute(const Scene& scene, const std::string& command, const CommandOptions& opts);
/// verify over every scene file of `dir`, checks prefixed by scene name.
Report verify_all(const std::string& dir, const CommandOptions& opts);

}  // namespace balg
