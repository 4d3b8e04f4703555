#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "weyl/cli.hpp"

using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "weylsys");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = weyl::run_cli(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string cfg(const std::string& name) {
  return std::string(WEYL_CONFIG_DIR) + "/" + name + ".json";
}

std::filesystem::path tmp(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("weylsys_test_" + name);
}

}  // namespace

TEST_CASE("fnv1a reference values") {
  CHECK(weyl::fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(weyl::fnv1a("a") == 0xaf63dc4c8601ec8cull);
  CHECK(weyl::fnv1a("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("coeffs: Dirac a_global = pi, b_global = 0") {
  const Result r = run({"coeffs", "--config", cfg("dirac"), "--grid", "3"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(std::abs(j["a_global"].get<double>() - std::numbers::pi) < 1e-10);
  CHECK(std::abs(j["b_global"].get<double>()) < 1e-12);
}

TEST_CASE("coeffs: shifted Dirac b_global = -2 pi c") {
  const Result r = run({"coeffs", "--config", cfg("shifted_dirac"), "--grid", "3"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(std::abs(j["b_global"].get<double>() + 2.0 * std::numbers::pi * 0.3) < 1e-10);
}

TEST_CASE("output file gets a manifest with the config hash") {
  const auto out = tmp("coeffs.json");
  const Result r = run({"coeffs", "--config", cfg("dirac"), "--grid", "2", "--out", out.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream cf(cfg("dirac"), std::ios::binary);
  const std::string text((std::istreambuf_iterator<char>(cf)), std::istreambuf_iterator<char>());
  char want[32];
  std::snprintf(want, sizeof want, "fnv1a:%016llx",
                static_cast<unsigned long long>(weyl::fnv1a(text)));
  std::ifstream mf(out.string() + ".manifest.json");
  REQUIRE(mf);
  const json m = json::parse(mf);
  CHECK(m["command"] == "coeffs");
  CHECK(m["config_hash"] == want);
  CHECK(m["tool_version"] == weyl::kToolVersion);
  CHECK(m.contains("normalization"));
  CHECK(m.contains("timing_seconds"));
  std::filesystem::remove(out);
  std::filesystem::remove(out.string() + ".manifest.json");
}

TEST_CASE("invalid matrix exits 2 and names the field") {
  const auto path = tmp("bad.json");
  {
    std::ofstream f(path);
    f << R"({"name":"bad","n":2,"m":2,"form":"symbol",
      "A1":[["p1","p1 - i*p2"],["p1 + 2*i*p2","0"]],"A0":"0"})";
  }
  const Result r = run({"coeffs", "--config", path.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("A1") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("exit codes for usage and io") {
  CHECK(run({}).code == 2);
  CHECK(run({"coeffs", "--grid", "x", "--config", cfg("dirac")}).code == 2);
  CHECK(run({"coeffs", "--config", "/nonexistent/dirac.json"}).code == 4);
  CHECK(run({"flow", "--config", cfg("dirac"), "--point", "0,0"}).code == 2);
  CHECK(run({"--version"}).code == 0);
}

TEST_CASE("verify refuses T0 beyond the loop length without --force") {
  const Result r =
      run({"verify", "--config", cfg("dirac_torus"), "--mollifier-width", "7", "--K", "8"});
  CHECK(r.code == 2);
  CHECK(r.err.find("SupportExceedsT") != std::string::npos);
}

TEST_CASE("identities are deterministic and pass on the fixtures") {
  for (const char* name : {"dirac", "perturbed_dirac", "spin1"}) {
    CAPTURE(name);
    const Result a = run({"identities", "--config", cfg(name), "--samples", "20", "--seed", "7"});
    const Result b = run({"identities", "--config", cfg(name), "--samples", "20", "--seed", "7"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("FAIL") == std::string::npos);
  }
}

TEST_CASE("identities catch a dropped curvature term") {
  const Result r = run({"identities", "--config", cfg("dirac"), "--samples", "10",
                        "--debug-drop-curvature"});
  CHECK(r.code == 1);
  CHECK(r.out.find("FAIL b(x) U(m) invariance") != std::string::npos);
}

TEST_CASE("asym passes on shifted and perturbed Dirac") {
  for (const char* name : {"shifted_dirac", "perturbed_dirac"}) {
    CAPTURE(name);
    const Result r = run({"asym", "--config", cfg(name), "--samples", "6"});
    CHECK(r.code == 0);
    CHECK(r.out.find("PASS a = a~") != std::string::npos);
    CHECK(r.out.find("PASS b = -b~") != std::string::npos);
  }
}

TEST_CASE("flow writes a CSV trajectory") {
  const Result r =
      run({"flow", "--config", cfg("dirac"), "--point", "0,0,1,0", "--t-end", "1"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("t,x1,x2,xi1,xi2,phase_re,phase_im\n", 0) == 0);
}

TEST_CASE("loops: Dirac has length 2 pi") {
  const Result r = run({"loops", "--config", cfg("dirac"), "--directions", "8", "--t-max", "7"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(std::abs(j["T_estimate"].get<double>() - 2.0 * std::numbers::pi) < 1e-6);
}
