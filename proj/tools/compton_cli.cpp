#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "compton/errors.hpp"
#include "compton/harness.hpp"
#include "compton/parallel.hpp"
#include "compton/verify.hpp"

using namespace compton;

namespace {

int emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return 0;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    return 1;
  }
  out << text;
  return 0;
}

int report(const RunManifest& m, const std::string& out_dir) {
  for (const auto& a : m.assertions)
    std::cout << (a.passed ? "[PASS] " : "[FAIL] ") << a.name << (a.detail.empty() ? "" : ": " + a.detail) << "\n";
  std::cout << "outputs in " << out_dir << " (config hash " << m.config_hash << ")\n";
  return m.all_passed() ? 0 : 1;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  configure_threads_from_env();

  CLI::App app{"Compton scattering kinetic solver"};
  app.require_subcommand(1);

  double beta = 1.0, m = 1.0, tol = 1e-10, gmin = 0.04, gmax = 40.0;
  int gpoints = 64;
  std::string out_path;
  auto* kt = app.add_subcommand("kernel-table", "tabulate B_beta on a log-spaced grid (CSV)");
  kt->add_option("--beta", beta, "inverse temperature")->capture_default_str();
  kt->add_option("--m", m, "electron mass parameter")->capture_default_str();
  kt->add_option("--tol", tol, "relative quadrature tolerance")->capture_default_str();
  kt->add_option("--grid-min", gmin)->capture_default_str();
  kt->add_option("--grid-max", gmax)->capture_default_str();
  kt->add_option("--grid-points", gpoints)->capture_default_str();
  kt->add_option("--out", out_path, "output file (default stdout)");

  double theta = 0.5, delta_star = 1.0, theta1 = 0.7;
  auto* rd = app.add_subcommand("region-dump", "truncation curves as CSV");
  rd->add_option("--theta", theta)->capture_default_str();
  rd->add_option("--delta-star", delta_star)->capture_default_str();
  rd->add_option("--theta1", theta1)->capture_default_str();
  rd->add_option("--grid-min", gmin)->capture_default_str();
  rd->add_option("--grid-max", gmax)->capture_default_str();
  rd->add_option("--grid-points", gpoints)->capture_default_str();
  rd->add_option("--out", out_path, "output file (default stdout)");

  std::string config_path, out_dir = "out", mode;
  auto* sf = app.add_subcommand("simulate-full", "run the regularized full equation");
  sf->add_option("--config", config_path, "JSON config")->required();
  sf->add_option("--out", out_dir, "output directory")->capture_default_str();

  auto* sr = app.add_subcommand("simulate-reduced", "run the reduced quadratic equation");
  sr->add_option("--config", config_path, "JSON config")->required();
  sr->add_option("--mode", mode, "override reduced.mode")->check(CLI::IsMember({"picard", "atoms"}));
  sr->add_option("--out", out_dir, "output directory")->capture_default_str();

  int criterion = 0;
  auto* vf = app.add_subcommand("verify", "run the acceptance suite");
  vf->add_option("--criterion", criterion, "run a single criterion (1-12)");

  std::string preset;
  bool list = false;
  auto* pr = app.add_subcommand("preset", "run a named experiment");
  pr->add_option("name", preset, "preset name");
  pr->add_flag("--list", list, "list preset names");
  pr->add_option("--out", out_dir, "output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*kt) {
      const PhysicalParams p{beta, m};
      p.validate();
      if (gpoints < 2 || !(gmin > 0 && gmax > gmin)) throw ValidationError("grid: need 0 < min < max, points >= 2");
      return emit(kernel_table_csv(p, Grid::log_spaced(gmin, gmax, gpoints), tol), out_path);
    }
    if (*rd) {
      const TruncationParams tp = TruncationParams::make(theta, delta_star, theta1);
      if (gpoints < 2 || !(gmin > 0 && gmax > gmin)) throw ValidationError("grid: need 0 < min < max, points >= 2");
      return emit(region_dump_csv(tp, Grid::log_spaced(gmin, gmax, gpoints)), out_path);
    }
    if (*sf) return report(simulate_full(load_config(config_path), out_dir), out_dir);
    if (*sr) {
      std::string text = read_file(config_path);
      if (!mode.empty()) {
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error&) {
          j = nullptr;  // let parse_config report the position
        }
        if (j.is_object()) {
          j["reduced"]["mode"] = mode;
          text = j.dump();
        }
      }
      return report(simulate_reduced(parse_config(text), out_dir), out_dir);
    }
    if (*vf) {
      std::vector<CriterionResult> res;
      if (criterion != 0) res.push_back(run_criterion(criterion));
      else res = run_acceptance();
      bool ok = true;
      for (const auto& r : res) {
        std::cout << format_result_line(r) << std::endl;
        ok = ok && r.passed;
      }
      return ok ? 0 : 1;
    }
    if (*pr) {
      if (list) {
        for (const auto& n : preset_names()) std::cout << n << "\n";
        return 0;
      }
      if (preset.empty()) throw UnknownPreset("preset name required (see --list)");
      return report(run_preset(preset, out_dir), out_dir);
    }
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "invalid parameters: " << e.what() << "\n";
    return 2;
  } catch (const UnknownPreset& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
