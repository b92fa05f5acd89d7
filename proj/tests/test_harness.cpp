#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "compton/errors.hpp"
#include "compton/harness.hpp"

using namespace compton;

namespace {
std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}
std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

TEST_CASE("minimal config fills defaults") {
  const ExperimentConfig c = parse_config(R"({"grid":{"n":32}})");
  CHECK(c.mode == "full");
  CHECK(c.physical.beta == 1.0);
  CHECK(c.theta == 0.5);
  CHECK(c.solver.eta == 0.4);
  CHECK(c.derived.rho_star == doctest::Approx(0.5773502692));
  CHECK(c.derived.c_star > 0.0);
  CHECK(c.derived.c_eta > 0.0);
  CHECK(c.derived.x_eta0 > 0.0);
  CHECK(c.hash().size() == 16);
  CHECK(parse_config(R"({"grid":{"n":32}})").hash() == c.hash());
  CHECK(parse_config(R"({"grid":{"n":33}})").hash() != c.hash());
}

TEST_CASE("eta above 1/2 is rejected for the full solver") {
  CHECK_THROWS_AS(parse_config(R"({"diagnostics":{"eta":0.6}})"), ValidationError);
  CHECK(error_of(R"({"diagnostics":{"eta":0.6}})").find("eta < 1/2") != std::string::npos);
  CHECK(error_of(R"({"diagnostics":{"eta":0.2}})").find("(1-theta)/2") != std::string::npos);
}

TEST_CASE("reduced mode accepts eta above 1/2") {
  CHECK_NOTHROW(parse_config(R"({"mode":"reduced","diagnostics":{"eta":0.6},
      "grid":{"min":0.5,"max":30,"n":40},"initial":{"kind":"planck_mu","mu":0}})"));
}

TEST_CASE("theta1 must exceed theta") {
  CHECK_THROWS_AS(parse_config(R"({"truncation":{"theta":0.5,"theta1":0.5}})"), ValidationError);
  CHECK(error_of(R"({"truncation":{"theta":0.5,"theta1":0.4}})").find("theta1") != std::string::npos);
}

TEST_CASE("parse errors carry a location") {
  CHECK(error_of("{\n  \"grid\": {\"n\": 3,}\n}").find("line 2") != std::string::npos);
  CHECK(error_of(R"({"grid":{"points":3}})").find("/grid/points") != std::string::npos);
  CHECK(error_of(R"({"solver":{"t_end":"long"}})").find("/solver/t_end") != std::string::npos);
  CHECK_THROWS_AS(parse_config(R"({"initial":{"kind":"unknown"}})"), ParseError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ParseError);
}

TEST_CASE("initial data") {
  const ExperimentConfig c = parse_config(
      R"({"grid":{"n":40},"initial":{"kind":"scaled_planck","mu":-1,"scale":2,"origin_mass":0.1}})");
  const HybridMeasure u = make_initial(c);
  CHECK(u.origin_mass() == 0.1);
  CHECK(u.density[10] == doctest::Approx(2 * u.grid.nodes[10] * u.grid.nodes[10] /
                                         (std::exp(u.grid.nodes[10] + 1) - 1)));
}

TEST_CASE("presets") {
  CHECK(preset_names().size() == 8);
  for (const auto& n : preset_names()) CHECK_NOTHROW(preset_config(n));
  CHECK_THROWS_AS(preset_config("nope"), UnknownPreset);
  CHECK_THROWS_AS(run_preset("nope", "unused"), UnknownPreset);
}

TEST_CASE("example51 preset is deterministic and lists its outputs") {
  const auto base = std::filesystem::temp_directory_path() / "compton_harness_test";
  std::filesystem::remove_all(base);
  const RunManifest a = run_preset("example51", (base / "a").string());
  const RunManifest b = run_preset("example51", (base / "b").string());
  CHECK(a.all_passed());
  CHECK(a.config_hash == b.config_hash);
  CHECK(a.outputs == b.outputs);
  for (const auto& f : a.outputs) {
    CHECK(std::filesystem::exists(base / "a" / f));
    if (f != "manifest.json") CHECK(slurp(base / "a" / f) == slurp(base / "b" / f));
  }
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(base / "a")) ++files;
  CHECK(files == a.outputs.size());
  std::filesystem::remove_all(base);
}

TEST_CASE("csv writers") {
  const Grid g = Grid::log_spaced(0.5, 2.0, 3);
  const std::string k = kernel_table_csv({1, 1}, g, 1e-10);
  CHECK(k.rfind("x,y,B,err\n", 0) == 0);
  CHECK(std::count(k.begin(), k.end(), '\n') == 10);
  const std::string r = region_dump_csv(TruncationParams::make(0.5, 1, 0.7), g);
  CHECK(r.rfind("x,gamma1,gamma2,d1_lower,d1_upper\n", 0) == 0);
  CHECK(fmt17(0.1) == "0.10000000000000001");
}
