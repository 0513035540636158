#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "balg/commands.hpp"

namespace py = pybind11;
using namespace balg;

namespace {

CommandOptions options(const std::string& kind, bool compact, std::optional<int> sign, std::vector<double> eps,
                       std::optional<std::uint64_t> seed, std::optional<double> tol, const std::string& out,
                       const std::string& where, bool dividing_set, bool induced, bool cosymp, int poissonise,
                       bool modular, bool diagram) {
  CommandOptions o;
  o.kind = kind;
  o.compact = compact;
  o.sign = sign;
  o.eps = std::move(eps);
  o.seed = seed;
  o.tol = tol;
  o.out = out;
  o.where = where;
  o.dividing_set = dividing_set;
  o.induced = induced;
  o.cosymp = cosymp;
  o.poissonise = poissonise;
  o.modular = modular;
  o.diagram = diagram;
  return o;
}

}  // namespace

PYBIND11_MODULE(_balgebroid, m) {
  m.doc() = "Singular Lie algebroid verification core";

  auto base = py::register_exception<Error>(m, "BalgError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<UnknownCoordinate>(m, "UnknownCoordinate", base.ptr());
  py::register_exception<UnknownKind>(m, "UnknownKind", base.ptr());
  py::register_exception<InvalidSpec>(m, "InvalidSpec", base.ptr());
  py::register_exception<IOError>(m, "IOError", base.ptr());

  m.attr("DEFAULT_SCENE_DIR") = BALG_SCENE_DIR;
  m.attr("COMMANDS") = kCommands;

  m.def("canonical_scene", [](const std::string& path) { return emit_scene(parse_scene(path)); }, py::arg("path"),
        "Canonical JSON of a scene file.");
  m.def("canonical_scene_text", [](const std::string& text) { return emit_scene(parse_scene_text(text)); },
        py::arg("text"), "Canonical JSON of scene text.");
  m.def("scene_digest", [](const std::string& path) { return scene_digest(parse_scene(path)); }, py::arg("path"));
  m.def("list_scenes", &list_scenes, py::arg("dir") = std::string(BALG_SCENE_DIR));

  m.def(
      "execute",
      [](const std::string& path, const std::string& command, const std::string& format, const std::string& kind,
         bool compact, std::optional<int> sign, std::vector<double> eps, std::optional<std::uint64_t> seed,
         std::optional<double> tol, const std::string& out, const std::string& where, bool dividing_set,
         bool induced, bool cosymp, int poissonise, bool modular, bool diagram) {
        Scene s = parse_scene(path);
        auto o = options(kind, compact, sign, std::move(eps), seed, tol, out, where, dividing_set, induced, cosymp,
                         poissonise, modular, diagram);
        Report r;
        {
          py::gil_scoped_release release;
          r = execute(s, command, o);
        }
        return py::make_tuple(render(r, format), exit_code(r));
      },
      py::arg("path"), py::arg("command"), py::arg("format") = "json", py::arg("kind") = "",
      py::arg("compact") = false, py::arg("sign") = py::none(), py::arg("eps") = std::vector<double>{},
      py::arg("seed") = py::none(), py::arg("tol") = py::none(), py::arg("out") = "",
      py::arg("where") = "central-leaf", py::arg("dividing_set") = false, py::arg("induced") = false,
      py::arg("cosymp") = false, py::arg("poissonise") = 0, py::arg("modular") = false, py::arg("diagram") = false,
      "Runs one command; returns (rendered report, exit code).");

  m.def(
      "verify_all",
      [](const std::string& dir, const std::string& format) {
        Report r;
        {
          py::gil_scoped_release release;
          r = verify_all(dir, {});
        }
        return py::make_tuple(render(r, format), exit_code(r));
      },
      py::arg("dir") = std::string(BALG_SCENE_DIR), py::arg("format") = "json");
}
