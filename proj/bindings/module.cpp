#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sci/cantor.hpp"
#include "sci/dynamics.hpp"
#include "sci/experiment.hpp"
#include "sci/koopman.hpp"
#include "sci/spectral_set.hpp"
#include "sci/tower.hpp"
#include "sci/xi.hpp"

namespace py = pybind11;
using namespace sci;

namespace {

SymbolicMap map_from_json_str(const std::string& descriptor) {
  return map_from_json(json::parse(descriptor));
}

}  // namespace

PYBIND11_MODULE(_sci, m) {
  m.doc() = "Cantor-space Koopman spectra, SCI towers and Xi_m decision experiments";

  py::class_<Word>(m, "Word")
      .def(py::init([](const std::string& s) { return Word::from_string(s); }))
      .def("__str__", &Word::to_string)
      .def("__len__", &Word::size);

  py::class_<CantorPoint>(m, "CantorPoint")
      .def(py::init([](const std::string& s) { return CantorPoint::from_string(s); }))
      .def_static("all_ones", &CantorPoint::all_ones)
      .def_static("all_zeros", &CantorPoint::all_zeros)
      .def("bit_at", &CantorPoint::bit_at)
      .def("__str__", &CantorPoint::to_string)
      .def("__eq__", [](const CantorPoint& a, const CantorPoint& b) { return a == b; });

  m.def("ultrametric_distance", [](const CantorPoint& x, const CantorPoint& y) {
    return ultrametric_distance(x, y).to_double();
  });
  m.def("truncate_2adic", &truncate_2adic);
  m.def("add_2adic", &add_2adic);

  py::class_<SymbolicMap>(m, "SymbolicMap")
      .def("__call__", [](const SymbolicMap& f, const CantorPoint& x) { return f(x); })
      .def("info_depth", &SymbolicMap::info_depth)
      .def_property_readonly("kind",
                             [](const SymbolicMap& f) { return f.descriptor().kind_name(); });

  m.def("identity_map", &identity_map);
  m.def("translation_map", &translation_map);
  m.def("single_toggle_map", &single_toggle_map);
  m.def("map_from_descriptor", &map_from_json_str,
        "build a gadget from its JSON descriptor string");

  py::class_<FiniteTree>(m, "FiniteTree")
      .def_static("full", &FiniteTree::full)
      .def_property_readonly("max_depth", &FiniteTree::max_depth);
  m.def("silver_tree", [](const std::vector<int>& A, const std::string& x, int M) {
    return silver_tree(std::set<int>(A.begin(), A.end()), Word::from_string(x), M);
  });
  m.def("star_counts", &star_counts);
  m.def("build_tree_map", [](const FiniteTree& S, const std::string& version) {
    return build_tree_map(S, version == "dump" ? TreeMapVersion::dump : TreeMapVersion::odometer);
  });
  m.def("check_measure_preservation", [](const SymbolicMap& F, int depth) {
    return check_measure_preservation(F, depth).max_deviation.to_double();
  });

  py::class_<SpectralSet>(m, "SpectralSet")
      .def(py::init<std::vector<std::complex<double>>, double>())
      .def_property_readonly("points", &SpectralSet::points)
      .def_property_readonly("resolution", &SpectralSet::resolution);
  m.def("hausdorff_distance", &hausdorff_distance);
  m.def("roots_of_unity", &roots_of_unity);
  m.def("circle_grid", &circle_grid);

  py::class_<FiniteSection>(m, "FiniteSection")
      .def_readonly("dict_depth", &FiniteSection::dict_depth)
      .def_readonly("quad_depth", &FiniteSection::quad_depth)
      .def_readonly("is_permutation", &FiniteSection::is_permutation);
  m.def("assemble_section", &assemble_section);
  m.def("lower_norm", [](const FiniteSection& sec, std::complex<double> z, int p) {
    return lower_norm(sec, z, p).value;
  });
  m.def("verify_character_eigenpair", &verify_character_eigenpair);

  m.def("run_pseudospectrum_tower",
        [](const std::string& descriptor, double eps, std::vector<int> n2_list, int p,
           int dict_cap) {
          TowerSchedule sched;
          sched.n2_list = std::move(n2_list);
          sched.p = p;
          sched.dict_cap = dict_cap;
          const SymbolicMap F = map_from_json_str(descriptor);
          sched.one_index = F.descriptor().lipschitz_certified();
          const TowerResult res = run_pseudospectrum_tower(F, eps, sched);
          return py::make_tuple(res.set.points(), res.final_mesh,
                                res.trace.outer_stabilized && res.trace.inner_stabilized);
        },
        py::arg("descriptor"), py::arg("eps"), py::arg("n2_list"), py::arg("p") = 2,
        py::arg("dict_cap") = -1);

  m.def("xi_exact_threshold_random", [](int mm, int T, std::uint64_t seed) {
    InstanceSpec spec;
    spec.kind = InstanceSpec::Kind::threshold_random;
    spec.m = mm;
    spec.T = T;
    spec.seed = seed;
    return xi_exact(instance_generator(spec).thresholded);
  });
  m.def("run_xi_tower_threshold_random",
        [](int mm, int T, std::uint64_t seed, std::uint64_t hi) {
          InstanceSpec spec;
          spec.kind = InstanceSpec::Kind::threshold_random;
          spec.m = mm;
          spec.T = T;
          spec.seed = seed;
          const auto inst = instance_generator(spec);
          std::vector<std::vector<std::uint64_t>> schedule;
          for (int r = 0; r < mm; ++r) {
            std::vector<std::uint64_t> lst;
            for (std::uint64_t v = 1; v <= hi; ++v) lst.push_back(v);
            schedule.push_back(lst);
          }
          const auto res = run_xi_tower(*inst.thresholded.oracle, mm, schedule);
          return py::make_tuple(res.value, res.stabilized);
        });

  m.def("run_experiment", [](const std::string& config_json, const std::string& out_dir) {
    const auto outcome = run_experiment(json::parse(config_json), out_dir);
    return py::make_tuple(outcome.exit_code, outcome.message);
  });

  m.attr("__version__") = "0.1.0";
}
