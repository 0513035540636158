#include <algorithm>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "balg/commands.hpp"

#ifndef BALG_SCENE_DIR
#define BALG_SCENE_DIR "scenes"
#endif

int main(int argc, char** argv) {
  using namespace balg;
  CLI::App app{"Singular Lie algebroid verification and plotting"};
  std::string command, scene_arg;
  CommandOptions o;
  int sign = 0;
  double tol = 0;
  std::uint64_t seed = 0;
  std::string scenes_dir = BALG_SCENE_DIR;
  app.add_option("command", command, "verify | regularise | contact | orbits | jacobi | plot")
      ->required()
      ->check(CLI::IsMember(kCommands));
  app.add_option("scene", scene_arg, "scene JSON file, or --all for verify")->required();
  app.add_option("--kind", o.kind, "regularisation kind")
      ->check(CLI::IsMember({"trivial", "intrinsic", "elliptic", "selfcrossing"}));
  app.add_flag("--compact", o.compact, "use the circle as vertical factor");
  app.add_option("--sign", sign, "vertical sign")->check(CLI::IsMember({-1, 1}));
  app.add_option("--eps", o.eps, "level-set values");
  app.add_option("--seed", seed, "sampling seed");
  app.add_option("--tol", tol, "tolerance of the generic checks")->check(CLI::PositiveNumber);
  app.add_option("--out", o.out, "artifact directory");
  app.add_option("--format", o.format, "report format")->check(CLI::IsMember({"json", "text"}));
  app.add_option("--where", o.where, "orbit search space")->check(CLI::IsMember({"base", "central-leaf", "level-set"}));
  app.add_flag("--dividing-set", o.dividing_set, "contact: dividing set");
  app.add_flag("--induced", o.induced, "contact: induced structures on Z");
  app.add_flag("--cosymp-check", o.cosymp, "contact: cosymplectic identities");
  app.add_option("--poissonise", o.poissonise, "jacobi: Poissonisation variant")->check(CLI::IsMember({1, 2}));
  app.add_flag("--modular", o.modular, "jacobi: modular structures");
  app.add_flag("--diagram", o.diagram, "jacobi: commuting diagram");
  app.add_option("--scenes", scenes_dir, "scene directory for --all");
  app.allow_extras(false);
  // "--all" stands in for the scene path
  std::vector<std::string> args(argv + 1, argv + argc);
  for (auto& a : args) {
    if (a == "--all") a = "ALL";
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  if (sign) o.sign = sign;
  if (tol > 0) o.tol = tol;
  if (app.count("--seed")) o.seed = seed;
  try {
    Report r;
    if (scene_arg == "ALL") {
      if (command != "verify") throw InvalidSpec("--all is only available for verify");
      r = verify_all(scenes_dir, o);
    } else {
      Scene s = parse_scene(scene_arg);
      r = execute(s, command, o);
    }
    std::string text = render(r, o.format);
    if (!o.out.empty()) {
      std::filesystem::create_directories(o.out);
      std::string file = r.scene + "_" + r.command + (o.format == "json" ? ".json" : ".txt");
      write_file((std::filesystem::path(o.out) / file).string(), text);
    }
    std::cout << text;
    return exit_code(r);
  } catch (const std::exception& e) {
    std::cerr << "balgebroid: " << command << " " << scene_arg << ": " << e.what() << "\n";
    return 2;
  }
}
