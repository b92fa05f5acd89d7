#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "compton/full_solver.hpp"
#include "compton/reduced_solver.hpp"

namespace compton {

inline constexpr const char* kCodeVersion = "0.1.0";

struct GridSpec {
  double min = 0.04;
  double max = 40.0;
  int n = 256;
};

struct InitialSpec {
  std::string kind = "planck_mu";  // planck_mu | scaled_planck | bump | atoms | zero
  double mu = -1.0;
  double scale = 1.0;
  double bump_amplitude = 0.0;
  double bump_center = 3.0;
  double bump_width = 1.0;
  double origin_mass = 0.0;
  double support_min = 0.0;
  double support_max = 1e300;
  std::vector<Atom> atoms;
};

struct ReducedSpec {
  std::string mode = "picard";  // picard | atoms
  std::vector<double> rate_matrix;  // optional synthetic table for atoms mode
  double rtol = 1e-10;
  double r = 1.0;
  double iter_tol = 1e-13;
  double limit_tol = 1e-8;
  double limit_window = 1.0;
  bool disable_phi = false;
  int outputs = 100;
};

struct DerivedConstants {
  double rho_star = 0.0;
  double rho1 = 0.0;
  double c_star = 0.0;
  double c_eta = 0.0;
  double c0 = 0.0;
  double x_eta0 = 0.0;
};

struct ExperimentConfig {
  std::string mode = "full";  // full | reduced
  PhysicalParams physical;
  double theta = 0.5;
  double delta_star = 1.0;
  double theta1 = 0.7;
  TruncationParams truncation;
  GridSpec grid;
  InitialSpec initial;
  SolverConfig solver;
  int n = 20;
  double kernel_tol = 1e-10;
  ReducedSpec reduced;
  std::uint64_t seed = 42;
  DerivedConstants derived;
  std::string canonical;  // normalized JSON with defaults filled

  std::string hash() const;
};

/// Parses and validates; throws ParseError (with JSON path or line:column) or
/// ValidationError (naming the violated parameter condition).
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

HybridMeasure make_initial(const ExperimentConfig& cfg);

struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunManifest {
  std::string preset;  // empty for config-driven runs
  std::string config_hash;
  std::string code_version = kCodeVersion;
  std::string started_at;
  std::string finished_at;
  std::string derived_json;
  std::vector<std::string> outputs;
  std::vector<Assertion> assertions;

  bool all_passed() const;
  std::string to_json() const;
};

RunManifest simulate_full(const ExperimentConfig& cfg, const std::string& out_dir);
RunManifest simulate_reduced(const ExperimentConfig& cfg, const std::string& out_dir);

std::vector<std::string> preset_names();
/// JSON text of a named preset's configuration; throws UnknownPreset.
std::string preset_config(const std::string& name);
RunManifest run_preset(const std::string& name, const std::string& out_dir);

/// CSV writers used by the CLI.
std::string kernel_table_csv(const PhysicalParams& p, const Grid& g, double tol);
std::string region_dump_csv(const TruncationParams& tp, const Grid& g);

/// Formats with 17 significant digits.
std::string fmt17(double v);

}  // namespace compton
