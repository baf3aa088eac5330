#pragma once

#include <optional>
#include <string>

#include "sci/dynamics.hpp"
#include "sci/koopman.hpp"
#include "sci/spectral_set.hpp"
#include "sci/tower.hpp"

#include "json.hpp"

namespace sci {

using json = nlohmann::json;

/// JSON (de)serialization of the artifact's wire formats.
json tree_to_json(const FiniteTree& tree);
FiniteTree tree_from_json(const json& j);
json descriptor_to_json(const MapDescriptor& d);
SpectralSet spectral_set_from_json(const json& j);
json spectral_set_to_json(const SpectralSet& s);

/// Builds a gadget from its config JSON descriptor.
SymbolicMap map_from_json(const json& j);

/// FNV-1a hash of the canonical (sorted-key) dump, hex-encoded.
std::string config_hash(const json& config);

/// Section dump rows: node_word, image_cylinder_word, weight_numerator,
/// weight_exponent.
std::string section_to_csv(const FiniteSection& sec);

/// Point scatter with a unit-circle guide; deterministic output.
std::string spectral_set_to_svg(const SpectralSet& set);

struct ExperimentOutcome {
  int exit_code = 0;  // 0 ok/stabilized, 1 config error, 2 budget/unstabilized
  std::string message;
};

/// Runs one experiment config (already parsed) and writes artifacts into
/// out_dir. Tasks: pseudospectrum, sigma_ap, gadget_check, xi_tower,
/// reduction_demo.
ExperimentOutcome run_experiment(const json& config, const std::string& out_dir,
                                 int threads = 1);

/// Convenience: load config from a file and run.
ExperimentOutcome run_experiment_file(const std::string& config_path,
                                      const std::string& out_dir, int threads = 1);

}  // namespace sci
