#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path scratch_root = fs::path(CMVSPEC_SCRATCH) / "cli";

fs::path fresh_dir(const std::string& name) {
  const fs::path p = scratch_root / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string(CMVSPEC_TOOL) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& j) {
  const fs::path p = dir / name;
  std::ofstream(p) << j.dump();
  return p;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("spectrum of the all-zero coefficient block matches the stored fixture") {
  const fs::path dir = fresh_dir("free16");
  const auto cfg = write_config(dir, "c.json", {{"model", "cmv-electric"}, {"a", {1.0, 0.0}}, {"b", {0.0, 0.0}}});
  REQUIRE(run_tool("spectrum --config " + cfg.string() + " --block 16 --out " + dir.string()) == 0);
  const auto got = read_csv(dir / "eigenangles.csv");
  const auto want = read_csv(fs::path(CMVSPEC_FIXTURES) / "free_n16_eigenangles.csv");
  REQUIRE(got.size() == want.size());
  CHECK(got[0] == want[0]);
  for (std::size_t i = 1; i < got.size(); ++i) {
    CHECK(got[i][0] == want[i][0]);
    CHECK(std::abs(std::stod(got[i][1]) - std::stod(want[i][1])) <= 1e-12);
  }
  CHECK(slurp(dir / "eigenangles.csv").find('\r') == std::string::npos);
}

TEST_CASE("reruns of spectrum and certify are byte-identical") {
  const fs::path a = fresh_dir("rerun_a");
  const fs::path b = fresh_dir("rerun_b");
  const auto cfg = write_config(scratch_root, "rerun.json", {{"model", "cmv-electric"}, {"window", 128}, {"block", 64}});
  for (const auto& d : {a, b}) {
    REQUIRE(run_tool("spectrum --config " + cfg.string() + " --out " + d.string()) == 0);
    REQUIRE(run_tool("certify --grid 8 --threads 2 --config " + cfg.string() + " --out " + d.string()) == 0);
  }
  for (const char* f : {"eigenangles.csv", "gaps.json", "certify.csv", "certify.json"})
    CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("manifest lists every data file with its checksum") {
  const fs::path dir = fresh_dir("manifest");
  REQUIRE(run_tool("spectrum --block 32 --out " + dir.string()) == 0);
  const json m = json::parse(slurp(dir / "manifest.json"));
  CHECK(m["command"] == "spectrum");
  CHECK(m["config"]["block"] == 32);
  CHECK(m["exit_code"] == 0);
  REQUIRE(m["files"].size() == 2);
  for (const auto& f : m["files"]) {
    CHECK(f["sha256"] == cmvspec::cli::sha256_file(dir / f["path"].get<std::string>()));
    CHECK(f["bytes"] == fs::file_size(dir / f["path"].get<std::string>()));
  }
}

TEST_CASE("certify on the free shift stays below the certification threshold") {
  const fs::path dir = fresh_dir("free_cert");
  const auto cfg = write_config(dir, "c.json", {{"model", "walk"}, {"a", {1.0, 0.0}}, {"b", {0.0, 0.0}}, {"window", 512}});
  REQUIRE(run_tool("certify --grid 8 --config " + cfg.string() + " --out " + dir.string()) == 0);
  const auto rows = read_csv(dir / "certify.csv");
  REQUIRE(rows.size() == 9);
  CHECK(rows[0] == std::vector<std::string>{"z_angle_turns", "window", "sigma_min"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][1] == "512");
    CHECK(std::stod(rows[i][2]) <= 0.05);
  }
}

TEST_CASE("verify commands succeed on default and skew configs") {
  const fs::path dir = fresh_dir("verify");
  CHECK(run_tool("verify identities --out " + dir.string()) == 0);
  const json rep = json::parse(slurp(dir / "verify_identities.json"));
  CHECK(rep["passed"] == true);
  CHECK(run_tool("verify gauge --block 64 --out " + dir.string()) == 0);
  CHECK(run_tool("verify covariance --block 64 --out " + dir.string()) == 0);
  const auto skew = write_config(dir, "s.json",
                                 {{"model", "cmv-skew"}, {"d", 3}, {"omega", "2/7"}, {"x", {"1/5", "1/3", "3/8"}},
                                  {"tau", "1/3"}, {"window", 128}, {"block", 64}});
  CHECK(run_tool("verify gauge --exact --config " + skew.string() + " --out " + dir.string()) == 0);
  CHECK(run_tool("verify tau --exact --config " + skew.string() + " --out " + dir.string()) == 0);
}

TEST_CASE("sweep deduplicates and reproduces the rational/irrational contrast") {
  const fs::path dir = fresh_dir("sweep");
  REQUIRE(run_tool("sweep --omegas 1/2,0.5,golden --block 400 --out " + dir.string()) == 0);
  const auto rows = read_csv(dir / "sweep_gaps.csv");
  REQUIRE(rows.size() == 3);
  const double half_gap = std::stod(rows[1][2]);
  const double golden_gap = std::stod(rows[2][2]);
  CHECK(half_gap > 10.0 * golden_gap);
  CHECK(read_csv(dir / "sweep.csv").size() == 801);
}

TEST_CASE("exit-code contract") {
  const fs::path dir = fresh_dir("negative");
  const auto bad_omega = write_config(dir, "bad_omega.json", {{"omega", "abc"}});
  CHECK(run_tool("spectrum --config " + bad_omega.string() + " --out " + dir.string()) == 2);
  const auto plain = write_config(dir, "plain.json", {{"model", "cmv-electric"}, {"convention", "plain"}});
  CHECK(run_tool("verify gauge --config " + plain.string() + " --out " + dir.string()) == 1);
  CHECK(run_tool("spectrum --out " + (dir / "missing").string()) == 3);
  CHECK(run_tool("certify --grid 0 --out " + dir.string()) == 2);
  CHECK(run_tool("sweep --omegas '' --out " + dir.string()) == 2);
  CHECK(run_tool("spectrum --config " + (dir / "absent.json").string() + " --out " + dir.string()) == 3);
  const auto coin = write_config(dir, "coin.json", {{"a", {0.6, 0.0}}, {"b", {0.6, 0.0}}});
  CHECK(run_tool("spectrum --config " + coin.string() + " --out " + dir.string()) == 2);
  const auto typo = write_config(dir, "typo.json", {{"omgea", "1/3"}});
  CHECK(run_tool("spectrum --config " + typo.string() + " --out " + dir.string()) == 2);
  CHECK(run_tool("verify nonsense --out " + dir.string()) == 2);
  CHECK(run_tool("verify gauge --exact --out " + dir.string()) == 2);
}

TEST_CASE("angle parsing") {
  using cmvspec::cli::AngleSpec;
  CHECK(AngleSpec::parse("1/3").exact.has_value());
  CHECK(AngleSpec::parse("-1/4").value == 0.75);
  CHECK_FALSE(AngleSpec::parse("0.25").exact.has_value());
  CHECK(AngleSpec::parse("0.25").value == 0.25);
  CHECK(AngleSpec::parse("golden").value == cmvspec::torus::golden_turn().value());
  CHECK_THROWS_AS(AngleSpec::parse("abc"), cmvspec::cli::ConfigError);
  CHECK_THROWS_AS(AngleSpec::parse("1e-3"), cmvspec::cli::ConfigError);
  CHECK_THROWS_AS(AngleSpec::parse("1/0"), cmvspec::cli::ConfigError);
  CHECK(cmvspec::cli::format_double(0.1) == "0.10000000000000001");
}
