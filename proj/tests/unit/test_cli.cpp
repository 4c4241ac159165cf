#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "fracsl/cli/config.hpp"
#include "fracsl/cli/manifest.hpp"
#include "fracsl/cli/plot.hpp"
#include "fracsl/cli/run.hpp"
#include "fracsl/error.hpp"
#include "fracsl/uniqueness.hpp"

using namespace fracsl;
using namespace fracsl::cli;
namespace fs = std::filesystem;

namespace {

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fracsl_test_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int exit_status(const std::string& cmd) {
  const int raw = std::system((cmd + " > /dev/null 2>&1").c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

const char* kMinimalEigensolve =
    R"({"command": "eigensolve", "parameters": {"potential": {"type": "constant", "value": 0}, "n_max": 5}})";

}  // namespace

TEST(Validate, SpecExamples) {
  EXPECT_TRUE(validate(kMinimalEigensolve).empty());

  const auto missing = validate(R"({"command": "forward", "parameters": {
      "potential": {"type": "constant", "value": 0},
      "drive": {"type": "power", "power": 2, "T": 1}}})");
  ASSERT_EQ(missing.size(), 1u);
  EXPECT_EQ(missing[0].path, "parameters.alpha");

  const auto range = validate(R"({"command": "counting", "parameters": {
      "potential": {"type": "constant", "value": 0}, "x0": 1.5}})");
  ASSERT_EQ(range.size(), 1u);
  EXPECT_EQ(range[0].path, "parameters.x0");
}

TEST(Validate, UnknownKeysAndMalformedInput) {
  const auto top = validate(R"({"command": "region-map", "parameters": {"resolution": 10}, "colour": 1})");
  ASSERT_EQ(top.size(), 1u);
  EXPECT_EQ(top[0].path, "colour");
  const auto nested = validate(R"({"command": "eigensolve", "parameters": {
      "potential": {"type": "constant", "value": 0, "slope": 2}, "n_max": 5}})");
  ASSERT_EQ(nested.size(), 1u);
  EXPECT_EQ(nested[0].path, "parameters.potential.slope");
  EXPECT_FALSE(validate("{not json").empty());
  EXPECT_FALSE(validate(R"({"command": "dance", "parameters": {}})").empty());
  EXPECT_FALSE(validate(R"({"command": "region-map", "parameters": {"resolution": 10}, "seed": -3})").empty());
  // several problems are reported together
  EXPECT_EQ(validate(R"({"command": "counting", "parameters": {"x0": 2, "tau": -1}})").size(), 3u);
  try {
    parse_config(R"({"command": "counting", "parameters": {}})");
    ADD_FAILURE() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.errors().size(), 2u);
  }
}

TEST(Validate, DefaultsFilledAndSchemaPublished) {
  const auto cfg = parse_config(kMinimalEigensolve);
  EXPECT_EQ(cfg.command, "eigensolve");
  EXPECT_EQ(cfg.parameters["h"], 0.0);
  EXPECT_EQ(cfg.seed, 0u);
  const auto schema = published_schema();
  EXPECT_EQ(schema["$schema"], "https://json-schema.org/draft/2020-12/schema");
  const auto dump = schema.dump();
  for (const auto& name : command_names()) EXPECT_NE(dump.find("\"" + name + "\""), std::string::npos) << name;
}

TEST(Builders, PotentialsAndDrives) {
  const auto well = build_potential(json{{"type", "well"}, {"depth", 0.8}, {"d", 0.5}});
  EXPECT_NEAR(well(0.0), -0.8, 1e-12);
  EXPECT_EQ(well(0.75), 0.0);
  const auto bump = build_potential(json{{"type", "bump"}, {"amplitude", -0.5}, {"a", 0.0}, {"b", 0.5}});
  EXPECT_NEAR(bump(0.25), -0.5, 1e-6);
  const auto drive = build_drive(json{{"type", "power"}, {"power", 2.0}, {"T", 2.0}, {"n", 64}});
  EXPECT_EQ(drive.intervals(), 64);
  EXPECT_NEAR(drive(2.0), 4.0, 1e-12);
  EXPECT_EQ(drive(0.0), 0.0);
}

TEST(Plot, LinePolylines) {
  const auto t = CsvTable::parse("x,y\n1,2\n2,3\n3,5\n");
  PlotSpec spec;
  spec.x = "x";
  spec.y = {"y"};
  const auto svg = render_svg(t, spec);
  EXPECT_EQ(count_of(svg, "<polyline"), 1u);
  EXPECT_EQ(svg, render_svg(t, spec));
  const auto t2 = CsvTable::parse("x,a,b\n1,2,3\n2,3,4\n");
  spec.y = {"a", "b"};
  EXPECT_EQ(count_of(render_svg(t2, spec), "<polyline"), 2u);
}

TEST(Plot, HeatmapOneRectPerRow) {
  std::ostringstream os;
  uq::region_map(12).write_csv(os);
  const auto t = CsvTable::parse(os.str());
  PlotSpec spec;
  spec.kind = "heatmap";
  spec.x = "d";
  spec.y = {"x0"};
  spec.z = "verdict";
  EXPECT_EQ(count_of(render_svg(t, spec), "<rect"), 144u);
}

TEST(Plot, Diagnostics) {
  const auto t = CsvTable::parse("s,v\n1,2\n2,0\n3,1\n");
  PlotSpec spec;
  spec.x = "s";
  spec.y = {"v"};
  spec.log_y = true;
  try {
    render_svg(t, spec);
    ADD_FAILURE() << "expected EmptyData";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyData);
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
  spec.log_y = false;
  spec.y = {"w"};
  try {
    render_svg(t, spec);
    ADD_FAILURE() << "expected MissingColumn";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMissingColumn);
  }
  spec.y = {"v"};
  try {
    render_svg(CsvTable::parse("s,v\n"), spec);
    ADD_FAILURE() << "expected EmptyData";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyData);
  }
  const auto from = PlotSpec::from_json(json{{"kind", "line"}, {"x", "s"}, {"y", {"v"}}, {"log_x", true}});
  EXPECT_TRUE(from.log_x);
  EXPECT_EQ(from.y.size(), 1u);
}

TEST(Manifest, DigestsAndRoundTrip) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const auto dir = scratch_dir("digest");
  fs::create_directories(dir / "sub");
  write_file(dir / "b.txt", "abc");
  write_file(dir / "sub" / "a.txt", "");
  write_file(dir / kManifestName, "{}");
  const auto files = digest_directory(dir);
  ASSERT_EQ(files.size(), 2u);
  EXPECT_EQ(files[0].path, "b.txt");
  EXPECT_EQ(files[1].path, "sub/a.txt");
  EXPECT_EQ(files[0].bytes, 3u);
  EXPECT_EQ(files[0].sha256, sha256_hex("abc"));

  RunManifest m;
  m.version = "1";
  m.command = "kernel";
  m.files = files;
  m.checks.push_back({"c", true, 1.0, 2.0, ">="});
  m.error_kind = "DomainError";
  const auto back = RunManifest::from_json(m.to_json());
  EXPECT_EQ(back.to_json(), m.to_json());
  EXPECT_EQ(back.checks[0].relation, ">=");
}

TEST(Run, RegionMapArtifactsManifestAndDeterminism) {
  const auto root = scratch_dir("run");
  const auto cfg = parse_config(R"({"command": "region-map", "parameters": {"resolution": 20}, "seed": 4})");
  const auto m1 = run(cfg, root / "a");
  EXPECT_EQ(m1.exit_code, kExitPass);
  EXPECT_EQ(m1.status, "pass");
  EXPECT_EQ(m1.seed, 4u);
  EXPECT_EQ(m1.version, tool_version());
  EXPECT_FALSE(m1.checks.empty());

  // every file left in the directory is listed with its digest
  std::set<std::string> on_disk;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (e.is_regular_file()) on_disk.insert(fs::relative(e.path(), root / "a").generic_string());
  }
  std::set<std::string> listed;
  for (const auto& f : m1.files) {
    listed.insert(f.path);
    EXPECT_EQ(f.sha256, sha256_file(root / "a" / f.path));
  }
  listed.insert(kManifestName);
  EXPECT_EQ(on_disk, listed);
  EXPECT_EQ(RunManifest::from_json(json::parse(slurp(root / "a" / kManifestName))).files.size(), m1.files.size());

  const auto csv = CsvTable::read(root / "a" / "region_map.csv");
  EXPECT_EQ(csv.rows.size(), 400u);

  const auto m2 = run(cfg, root / "b");
  ASSERT_EQ(m1.files.size(), m2.files.size());
  for (std::size_t i = 0; i < m1.files.size(); ++i) EXPECT_EQ(m1.files[i].sha256, m2.files[i].sha256) << m1.files[i].path;
  EXPECT_EQ(m1.config_sha256, m2.config_sha256);

  // nothing is written next to the output directories
  std::set<std::string> top;
  for (const auto& e : fs::directory_iterator(root)) top.insert(e.path().filename().string());
  EXPECT_EQ(top, (std::set<std::string>{"a", "b"}));
}

TEST(Run, NumericalFailureRecorded) {
  const auto root = scratch_dir("numerr");
  const auto cfg = parse_config(
      R"({"command": "eigensolve", "parameters": {"potential": {"type": "constant", "value": 0.5}, "n_max": 3}})");
  const auto m = run(cfg, root / "o");
  EXPECT_EQ(m.exit_code, kExitNumericalError);
  EXPECT_EQ(m.status, "numerical_error");
  ASSERT_TRUE(m.error_kind.has_value());
  EXPECT_EQ(*m.error_kind, "DomainError");
  EXPECT_TRUE(fs::exists(root / "o" / kManifestName));
}

TEST(Binary, ExitCodes) {
  const std::string bin = FRACSL_BIN;
  const auto root = scratch_dir("bin");
  write_file(root / "ok.json", R"({"command": "region-map", "parameters": {"resolution": 10}})");
  write_file(root / "fail.json", R"({"command": "counting", "parameters": {
      "potential": {"type": "constant", "value": 0}, "x0": 0.5, "A": 0.99, "n_max": 100}})");
  write_file(root / "bad.json", R"({"command": "region-map", "parameters": {"resolution": 3}})");
  write_file(root / "num.json", R"({"command": "eigensolve", "parameters": {
      "potential": {"type": "constant", "value": 0.5}, "n_max": 3}})");
  const auto out = (root / "out").string();
  EXPECT_EQ(exit_status(bin + " region-map --config " + (root / "ok.json").string() + " --out " + out + "/0"), 0);
  EXPECT_EQ(exit_status(bin + " counting --config " + (root / "fail.json").string() + " --out " + out + "/1"), 1);
  EXPECT_EQ(exit_status(bin + " region-map --config " + (root / "bad.json").string() + " --out " + out + "/2"), 2);
  EXPECT_EQ(exit_status(bin + " eigensolve --config " + (root / "ok.json").string() + " --out " + out + "/2b"), 2);
  EXPECT_EQ(exit_status(bin + " eigensolve --config " + (root / "num.json").string() + " --out " + out + "/3"), 3);
  EXPECT_EQ(exit_status(bin + " validate --config " + (root / "bad.json").string()), 2);
  EXPECT_EQ(exit_status(bin + " validate --config " + (root / "ok.json").string()), 0);
  EXPECT_FALSE(fs::exists(out + "/2"));
}
