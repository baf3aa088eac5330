#include "sci/experiment.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "sci/xi.hpp"

namespace sci {

namespace {

constexpr const char* kVersion = "sci-0.1.0";

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::string& dir, const std::string& name, const std::string& payload) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir + "/" + name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file " + name);
  out << payload;
}

json set_json(const SpectralSet& s) { return spectral_set_to_json(s); }

}  // namespace

json tree_to_json(const FiniteTree& tree) {
  json levels = json::object();
  for (int m = 0; m <= tree.max_depth(); ++m) {
    json arr = json::array();
    for (const auto& w : tree.level(m)) arr.push_back(w.to_string());
    levels[std::to_string(m)] = arr;
  }
  return json{{"max_depth", tree.max_depth()}, {"levels", levels}};
}

FiniteTree tree_from_json(const json& j) {
  const int M = j.at("max_depth").get<int>();
  std::vector<std::vector<Word>> levels(static_cast<std::size_t>(M) + 1);
  for (const auto& [key, arr] : j.at("levels").items()) {
    const int m = std::stoi(key);
    if (m < 0 || m > M) throw std::invalid_argument("tree_from_json: level out of range");
    for (const auto& w : arr) levels[static_cast<std::size_t>(m)].push_back(
        Word::from_string(w.get<std::string>()));
  }
  return FiniteTree(M, std::move(levels));
}

json descriptor_to_json(const MapDescriptor& d) {
  json j{{"kind", d.kind_name()}};
  switch (d.kind) {
    case MapDescriptor::Kind::translation: j["r"] = d.r; break;
    case MapDescriptor::Kind::single_toggle: j["n"] = d.n; j["r"] = d.r; break;
    case MapDescriptor::Kind::tree_dump:
    case MapDescriptor::Kind::tree_odometer: j["tree_depth"] = d.tree_depth; break;
    default: break;
  }
  return j;
}

json spectral_set_to_json(const SpectralSet& s) {
  json pts = json::array();
  for (const auto& p : s.points()) pts.push_back(json::array({p.real(), p.imag()}));
  return json{{"points", pts}, {"resolution", s.resolution()}};
}

SpectralSet spectral_set_from_json(const json& j) {
  std::vector<std::complex<double>> pts;
  for (const auto& p : j.at("points"))
    pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  return SpectralSet(std::move(pts), j.at("resolution").get<double>());
}

SymbolicMap map_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "identity") return identity_map();
  if (kind == "translation") return translation_map(j.at("r").get<int>());
  if (kind == "single_toggle")
    return single_toggle_map(j.at("n").get<int>(), j.at("r").get<int>());
  if (kind == "tree_dump" || kind == "tree_odometer") {
    const auto version = kind == "tree_dump" ? TreeMapVersion::dump : TreeMapVersion::odometer;
    if (j.contains("silver")) {
      const auto& s = j.at("silver");
      std::set<int> A;
      for (const auto& a : s.at("A")) A.insert(a.get<int>());
      return build_tree_map(
          silver_tree(A, Word::from_string(s.at("x").get<std::string>()), s.at("M").get<int>()),
          version);
    }
    return build_tree_map(tree_from_json(j.at("tree")), version);
  }
  throw std::invalid_argument("map_from_json: unknown kind \"" + kind + "\"");
}

std::string config_hash(const json& config) {
  const std::string canon = config.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

std::string section_to_csv(const FiniteSection& sec) {
  std::string out = "node_word,image_cylinder_word,weight_numerator,weight_exponent\n";
  for (std::int64_t P = 0; P < sec.node_count(); ++P) {
    out += Word::from_lex_rank(static_cast<std::uint64_t>(P), sec.quad_depth).to_string();
    out += ",";
    out += Word::from_lex_rank(
               static_cast<std::uint64_t>(sec.action[static_cast<std::size_t>(P)]),
               sec.dict_depth)
               .to_string();
    out += ",1,-" + std::to_string(sec.quad_depth) + "\n";
  }
  return out;
}

std::string spectral_set_to_svg(const SpectralSet& set) {
  // 500x500 viewport mapping [-2.2, 2.2]^2; unit circle guide.
  auto sx = [](double x) { return 250.0 + x * 113.0; };
  auto sy = [](double y) { return 250.0 - y * 113.0; };
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"500\" height=\"500\" "
      "viewBox=\"0 0 500 500\">\n"
      "<rect width=\"500\" height=\"500\" fill=\"white\"/>\n"
      "<circle cx=\"250\" cy=\"250\" r=\"113\" fill=\"none\" stroke=\"#bbbbbb\"/>\n"
      "<line x1=\"0\" y1=\"250\" x2=\"500\" y2=\"250\" stroke=\"#eeeeee\"/>\n"
      "<line x1=\"250\" y1=\"0\" x2=\"250\" y2=\"500\" stroke=\"#eeeeee\"/>\n";
  for (const auto& p : set.points()) {
    svg += "<circle cx=\"" + fmt(sx(p.real())) + "\" cy=\"" + fmt(sy(p.imag())) +
           "\" r=\"2.5\" fill=\"#1f4e99\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

namespace {

TowerSchedule schedule_from_json(const json& config) {
  TowerSchedule s;
  if (config.contains("n2")) s.n2_list = config.at("n2").get<std::vector<int>>();
  if (config.contains("n1_rule")) s.one_index = config.at("n1_rule").get<std::string>() != "sweep";
  if (config.contains("stab")) {
    const auto& st = config.at("stab");
    if (st.contains("K")) s.stabilization_window = st.at("K").get<int>();
    if (st.contains("tol")) s.tolerance = st.at("tol").get<double>();
  }
  if (config.contains("dict_cap")) s.dict_cap = config.at("dict_cap").get<int>();
  if (config.contains("grid_cap")) s.grid_radius_abs = config.at("grid_cap").get<double>();
  if (config.contains("p")) {
    const int p = config.at("p").get<int>();
    s.p = p == 99 ? 0 : p;  // 99 spells infinity in configs
  }
  return s;
}

std::string residual_csv(const ResidualField& field) {
  std::string out = "z_re,z_im,h\n";
  for (std::size_t i = 0; i < field.values.size(); ++i)
    out += fmt(field.grid.points[i].real()) + "," + fmt(field.grid.points[i].imag()) + "," +
           fmt(field.values[i]) + "\n";
  return out;
}

ExperimentOutcome run_spectrum(const json& config, const std::string& out_dir, int threads,
                               bool sigma_ap) {
  const SymbolicMap F = map_from_json(config.at("map"));
  TowerSchedule sched = schedule_from_json(config);
  sched.threads = threads;
  if (sched.one_index && !F.descriptor().lipschitz_certified()) sched.one_index = false;

  const std::string stamp = "config_hash=" + config_hash(config) + " version=" + kVersion;
  json result{{"config_hash", config_hash(config)}, {"version", kVersion},
              {"name", config.value("name", "")}, {"task", sigma_ap ? "sigma_ap" : "pseudospectrum"},
              {"map", descriptor_to_json(F.descriptor())}};
  bool stabilized = true;
  SpectralSet final_set({{0.0, 0.0}}, 0.0);
  double csv_radius = 0.0;
  int csv_n2 = 0;
  if (sigma_ap) {
    const int m_max = config.value("m_max", 4);
    const SigmaApResult res = run_sigma_ap_tower(F, sched, m_max);
    stabilized = res.all_stabilized;
    final_set = res.set;
    result["final_set"] = set_json(res.set)["points"];
    result["mesh"] = res.set.resolution();
    json dists = json::array();
    for (double d : res.distance_to_last) dists.push_back(d);
    result["d_H_to_last"] = dists;
    json trace = json::array();
    for (std::size_t m = 0; m < res.stages.size(); ++m)
      trace.push_back(json{{"m", m + 1}, {"size", res.stages[m].points().size()}});
    result["trace"] = trace;
    csv_n2 = 0;
    for (int n2 : sched.n2_list)
      if (n2 > m_max) csv_n2 = std::max(csv_n2, n2);
    if (csv_n2 == 0) csv_n2 = 2 * m_max;
    csv_radius = sched.grid_radius_abs > 0.0 ? sched.grid_radius_abs
                                             : 1.0 + 1.0 / m_max + 1.0;
  } else {
    const double eps = config.at("epsilon").get<double>();
    const TowerResult res = run_pseudospectrum_tower(F, eps, sched);
    stabilized = res.trace.outer_stabilized && res.trace.inner_stabilized;
    final_set = res.set;
    result["final_set"] = set_json(res.set)["points"];
    result["mesh"] = res.final_mesh;
    result["stabilized"] = stabilized;
    json trace = json::array();
    for (const auto& st : res.trace.stages)
      trace.push_back(json{{"indices", st.indices}, {"size", st.set.points().size()}});
    result["trace"] = trace;
    csv_n2 = res.final_n2;
    csv_radius = res.grid_radius;
  }
  {
    // Residual/section artifacts of the final stage, stamped for provenance.
    const int dict = sched.dict_cap > 0 ? std::min(sched.dict_cap, csv_n2) : csv_n2;
    const int n1 = sched.one_index ? dict : std::max(dict, F.info_depth(dict));
    const SpectralGrid grid = spectral_grid(csv_n2, csv_radius);
    const ResidualField field = residual_field(F, dict, n1, sched.p, grid, sched.method, threads);
    write_file(out_dir, "residual.csv", "# " + stamp + "\n" + residual_csv(field));
    const FiniteSection sec = assemble_section(F, dict, n1);
    write_file(out_dir, "section.csv", "# " + stamp + "\n" + section_to_csv(sec));
    write_file(out_dir, "set.svg",
               "<!-- " + stamp + " -->\n" + spectral_set_to_svg(final_set));
  }
  if (config.contains("reference")) {
    // e.g. {"reference": {"kind": "circle_grid", "n": 64}} or roots_of_unity
    const auto& ref = config.at("reference");
    SpectralSet target = ref.at("kind") == "circle_grid"
                             ? circle_grid(ref.at("n").get<int>())
                             : roots_of_unity(ref.at("n").get<std::int64_t>());
    result["d_H_to_reference"] =
        hausdorff_distance(spectral_set_from_json(json{{"points", result["final_set"]},
                                                       {"resolution", 0.0}}),
                           target);
  }
  write_file(out_dir, "result.json", result.dump(2) + "\n");
  return {stabilized ? 0 : 2, stabilized ? "stabilized" : "budget exhausted before stabilization"};
}

ExperimentOutcome run_gadget(const json& config, const std::string& out_dir) {
  const SymbolicMap F = map_from_json(config.at("map"));
  const int depth = config.value("depth", 8);
  json result{{"config_hash", config_hash(config)}, {"version", kVersion},
              {"name", config.value("name", "")}, {"task", "gadget_check"},
              {"map", descriptor_to_json(F.descriptor())}};
  bool ok = true;
  std::string failed;

  const MeasureReport meas = check_measure_preservation(F, depth);
  result["measure_deviation"] = meas.max_deviation.to_double();
  result["measure_deviation_exact"] = meas.max_deviation.to_string();
  if (F.descriptor().measure_preserving_certified() && !meas.max_deviation.is_zero()) {
    ok = false;
    failed = "measure_preservation";
  }

  const DensityReport dens = estimate_density(F, std::min(depth, 8));
  result["density_sup"] = dens.sup_ratio.to_double();

  const ModulusReport mod = modulus_probe(F, std::min(depth, 10));
  result["one_lipschitz"] = mod.one_lipschitz;
  json table = json::array();
  for (double v : mod.worst_output_distance) table.push_back(v);
  result["modulus_table"] = table;
  if (F.descriptor().lipschitz_certified() && !mod.one_lipschitz) {
    ok = false;
    failed = "modulus";
  }

  const auto& d = F.descriptor();
  if (d.kind == MapDescriptor::Kind::single_toggle) {
    // ||F - id||_inf over an exhaustive depth vs the 2^-(r+1) bound.
    const int D = std::min(2 * d.r + 4, exhaustive_depth_cap());
    double sup = 0.0;
    for (std::int64_t w = 0; w < (std::int64_t{1} << D); ++w) {
      const CantorPoint x =
          CantorPoint::zeros_tail(Word::from_lex_rank(static_cast<std::uint64_t>(w), D));
      sup = std::max(sup, ultrametric_distance(F(x), x).to_double());
    }
    const double bound = std::ldexp(1.0, -(d.r + 1));
    result["perturbation_sup"] = sup;
    result["perturbation_bound"] = bound;
    if (sup > bound) { ok = false; failed = "perturbation_bound"; }
  }
  if (config.at("map").contains("silver") || config.at("map").contains("tree")) {
    const FiniteTree tree =
        config.at("map").contains("tree")
            ? tree_from_json(config.at("map").at("tree"))
            : [&] {
                const auto& s = config.at("map").at("silver");
                std::set<int> A;
                for (const auto& a : s.at("A")) A.insert(a.get<int>());
                return silver_tree(A, Word::from_string(s.at("x").get<std::string>()),
                                   s.at("M").get<int>());
              }();
    result["star_counts"] = star_counts(tree);
  }
  result["pass"] = ok;
  if (!ok) result["failed_invariant"] = failed;
  write_file(out_dir, "result.json", result.dump(2) + "\n");
  return {ok ? 0 : 2, ok ? "gadget checks passed" : ("invariant failed: " + failed)};
}

GeneratedInstance xi_instance_from_json(const json& xc) {
  InstanceSpec spec;
  const std::string kind = xc.value("kind", "thresholded");
  spec.m = xc.at("m").get<int>();
  if (kind == "constant") {
    spec.kind = InstanceSpec::Kind::constant;
    spec.bit = xc.at("bit").get<int>();
    return instance_generator(spec);
  }
  if (kind == "witness_at") {
    spec.kind = InstanceSpec::Kind::witness_at;
    spec.witness = xc.at("witness").get<std::vector<std::uint64_t>>();
    return instance_generator(spec);
  }
  if (kind == "delayed") {
    spec.kind = InstanceSpec::Kind::delayed;
    spec.flip_index = xc.at("flip_index").get<std::uint64_t>();
    return instance_generator(spec);
  }
  if (kind == "thresholded" || kind == "threshold_random") {
    const int T = xc.at("T").get<int>();
    const std::string base = xc.value("base", kind == "threshold_random" ? "seed" : "");
    if (base == "table") {
      // flat row-major table over {1..T+1}^m, n_1 slowest
      const auto table = xc.at("table").get<std::vector<int>>();
      const int m = spec.m;
      const std::uint64_t side = static_cast<std::uint64_t>(T) + 1;
      std::uint64_t expect = 1;
      for (int r = 0; r < m; ++r) expect *= side;
      if (table.size() != expect)
        throw std::invalid_argument("xi config: table size must be (T+1)^m");
      GeneratedInstance out;
      out.thresholded = make_thresholded(
          m, T, [table, side, m](const std::vector<std::uint64_t>& t) {
            std::uint64_t idx = 0;
            for (int r = 0; r < m; ++r) idx = idx * side + (t[static_cast<std::size_t>(r)] - 1);
            return table[static_cast<std::size_t>(idx)];
          });
      out.has_ground_truth = true;
      out.ground_truth = xi_exact(out.thresholded);
      return out;
    }
    spec.kind = InstanceSpec::Kind::threshold_random;
    spec.T = T;
    spec.seed = xc.value("seed", 0);
    return instance_generator(spec);
  }
  throw std::invalid_argument("xi config: unknown instance kind");
}

ExperimentOutcome run_xi(const json& config, const std::string& out_dir) {
  const auto& xc = config.at("xi");
  if (xc.value("codec", "cantor") != "cantor")
    throw std::invalid_argument("xi config: only the \"cantor\" codec is built in");
  const GeneratedInstance inst = xi_instance_from_json(xc);
  const int spec_m = xc.at("m").get<int>();
  const int spec_T = inst.thresholded.T;

  std::vector<std::vector<std::uint64_t>> schedule;
  if (xc.contains("schedule")) {
    schedule = xc.at("schedule").get<std::vector<std::vector<std::uint64_t>>>();
  } else {
    const std::uint64_t hi = static_cast<std::uint64_t>(std::max(spec_T, 1)) + 4;
    for (int r = 0; r < spec_m; ++r) {
      std::vector<std::uint64_t> lst;
      for (std::uint64_t v = 1; v <= hi; ++v) lst.push_back(v);
      schedule.push_back(lst);
    }
  }
  const XiTowerResult res = run_xi_tower(*inst.thresholded.oracle, spec_m, schedule);

  json result{{"config_hash", config_hash(config)}, {"version", kVersion},
              {"name", config.value("name", "")}, {"task", "xi_tower"},
              {"value", res.value}, {"stabilized", res.stabilized},
              {"queries", inst.thresholded.oracle->query_count()}};
  if (inst.has_ground_truth) {
    result["ground_truth"] = inst.ground_truth;
    result["agrees"] = (inst.ground_truth == res.value);
  }
  std::string csv = "# config_hash=" + config_hash(config) + " version=" + kVersion + "\n";
  csv += "level,index,value,flipped\n";
  for (const auto& e : res.trace)
    csv += std::to_string(e.level) + "," + std::to_string(e.index) + "," +
           std::to_string(e.value) + "," + (e.flipped ? "1" : "0") + "\n";
  write_file(out_dir, "trace.csv", csv);
  write_file(out_dir, "result.json", result.dump(2) + "\n");
  const bool ok = res.stabilized && (!inst.has_ground_truth || inst.ground_truth == res.value);
  return {ok ? 0 : 2, ok ? "xi tower stabilized" : "xi tower unstable or mismatched"};
}

ExperimentOutcome run_reduction(const json& config, const std::string& out_dir, int threads) {
  const auto& rc = config.at("reduction");
  std::set<int> A;
  for (const auto& a : rc.at("A")) A.insert(a.get<int>());
  const Word x = Word::from_string(rc.at("x").get<std::string>());
  const int M = rc.at("M").get<int>();
  const auto version = rc.value("version", std::string("odometer")) == "dump"
                           ? TreeMapVersion::dump
                           : TreeMapVersion::odometer;
  const int r_max = rc.value("r_max", 8);

  const FiniteTree tree = silver_tree(A, x, M);
  const SymbolicMap F = build_tree_map(tree, version);
  const auto ks = star_counts(tree);
  const SpectralSet predicted = predicted_spectrum_tree(tree, version, r_max);

  // Pipeline cross-check: the tower at dictionary depth n2 is compared with
  // the exact cycle spectrum of that section's cylinder permutation (blocks
  // beyond the dictionary resolution cannot contribute at this stage).
  const int n2 = std::min(rc.value("n2", 4), M + 1);
  const double eps = rc.value("epsilon", 0.2);
  TowerSchedule sched;
  const int n2_final = std::max({8, 4 * n2, static_cast<int>(std::ceil(2.0 / eps))});
  sched.n2_list = {n2_final};
  sched.dict_cap = n2;
  sched.one_index = version == TreeMapVersion::odometer;
  sched.p = 2;
  sched.threads = threads;
  const TowerResult tower = run_pseudospectrum_tower(F, eps, sched);

  const FiniteSection sec = assemble_section(F, n2, std::max(n2, F.info_depth(n2)));
  std::vector<std::int64_t> lengths;
  for (const auto& cyc : cycle_decomposition(sec).cycles) lengths.push_back(cyc.length);
  const SpectralSet section_prediction = exact_cycle_spectrum(lengths);
  const double d_section = hausdorff_distance(tower.set, section_prediction);
  const double budget = eps + tower.final_mesh + 2.0 / tower.final_n2;

  json result{{"config_hash", config_hash(config)}, {"version", kVersion},
              {"name", config.value("name", "")}, {"task", "reduction_demo"},
              {"star_counts", ks},
              {"predicted", set_json(predicted)},
              {"section_prediction", set_json(section_prediction)},
              {"tower_set", set_json(tower.set)},
              {"tower_mesh", tower.final_mesh},
              {"d_H_tower_vs_section_prediction", d_section},
              {"tower_matches_section_prediction", d_section <= budget},
              {"match_budget", budget}};

  const std::string stamp = "config_hash=" + config_hash(config) + " version=" + kVersion;
  if (rc.contains("z0_theta")) {
    const double theta = rc.at("z0_theta").get<double>();
    const std::complex<double> z0(std::cos(2.0 * std::numbers::pi * theta),
                                  std::sin(2.0 * std::numbers::pi * theta));
    std::string csv = "# " + stamp + "\nr,lambda_re,lambda_im,error,envelope\n";
    for (int r = 0; r <= r_max; ++r) {
      const auto ap = dyadic_root_approximant(z0, r);
      csv += std::to_string(r) + "," + fmt(ap.root.real()) + "," + fmt(ap.root.imag()) + "," +
             fmt(ap.error) + "," + fmt(2.0 * std::numbers::pi * std::ldexp(1.0, -r)) + "\n";
    }
    write_file(out_dir, "dyadic_roots.csv", csv);
  }
  write_file(out_dir, "predicted.svg", "<!-- " + stamp + " -->\n" + spectral_set_to_svg(predicted));
  write_file(out_dir, "tower.svg", "<!-- " + stamp + " -->\n" + spectral_set_to_svg(tower.set));
  write_file(out_dir, "result.json", result.dump(2) + "\n");
  return {0, "reduction demo complete"};
}

}  // namespace

ExperimentOutcome run_experiment(const json& config, const std::string& out_dir, int threads) {
  try {
    const std::string task = config.at("task").get<std::string>();
    if (task == "pseudospectrum") return run_spectrum(config, out_dir, threads, false);
    if (task == "sigma_ap") return run_spectrum(config, out_dir, threads, true);
    if (task == "gadget_check") return run_gadget(config, out_dir);
    if (task == "xi_tower") return run_xi(config, out_dir);
    if (task == "reduction_demo") return run_reduction(config, out_dir, threads);
    return {1, "unknown task \"" + task + "\""};
  } catch (const json::exception& e) {
    return {1, std::string("config error: ") + e.what()};
  } catch (const std::invalid_argument& e) {
    return {1, std::string("config error: ") + e.what()};
  }
}

ExperimentOutcome run_experiment_file(const std::string& config_path, const std::string& out_dir,
                                      int threads) {
  std::ifstream in(config_path);
  if (!in) return {1, "cannot open config file " + config_path};
  json config;
  try {
    in >> config;
  } catch (const json::exception& e) {
    return {1, std::string("config parse error: ") + e.what()};
  }
  return run_experiment(config, out_dir, threads);
}

}  // namespace sci
