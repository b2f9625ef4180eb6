#pragma once

// Command-line front end: experiment configs, the four commands and their
// file outputs (CSV, JSON reports, run manifest).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmvspec/model.hpp"
#include "cmvspec/torus.hpp"

namespace cmvspec::cli {

using numerics::Complex;
using torus::RationalTurn;
using torus::Turn;

enum ExitCode : int { exit_ok = 0, exit_verification_failed = 1, exit_usage = 2, exit_io = 3 };

/// Malformed or inconsistent configuration (exit 2).
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Unreadable input or unwritable output (exit 3).
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class ModelKind { walk, cmv_electric, cmv_skew };

std::string to_string(ModelKind m);

/// An angle as written in a config: a decimal number, "p/q", or "golden".
struct AngleSpec {
  std::string text;
  double value = 0.0;
  std::optional<RationalTurn> exact;

  static AngleSpec from_json(const nlohmann::json& v);
  static AngleSpec parse(std::string_view text);

  Turn turn() const { return Turn(value); }
  /// @throws ConfigError when the angle has no exact form.
  RationalTurn rational() const;

  template <class Number>
  torus::BasicTurn<Number> as() const;
};

struct ExperimentConfig {
  ModelKind model = ModelKind::walk;
  int d = 2;
  AngleSpec omega = AngleSpec::parse("golden");
  AngleSpec theta = AngleSpec::parse("0");
  AngleSpec eta = AngleSpec::parse("0");
  AngleSpec tau = AngleSpec::parse("1/4");
  Complex a{0.6, 0.0};
  Complex b{0.8, 0.0};
  /// Empty means the origin of T^d.
  std::vector<AngleSpec> x;
  std::int64_t window = 256;
  std::int64_t block = 200;
  std::uint64_t seed = 0;
  model::ElectricConvention convention{false, true};
  std::vector<AngleSpec> omegas;

  template <class Number>
  model::WalkParams<Number> walk_params() const;
  template <class Number>
  model::SkewParams<Number> skew_params() const;

  /// Normalized echo for manifests.
  nlohmann::json to_json() const;
};

/// @throws ConfigError on unknown fields, bad types or invalid parameters.
ExperimentConfig parse_config(const nlohmann::json& j);
/// @throws IoError when the file cannot be read, ConfigError when it does not parse.
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunOptions {
  std::string command;
  std::string verify_kind;
  std::optional<std::filesystem::path> config_path;
  std::filesystem::path out_dir = ".";
  std::optional<std::int64_t> grid;
  std::optional<std::int64_t> window;
  std::optional<std::int64_t> block;
  unsigned threads = 1;
  bool exact = false;
  std::optional<std::string> omegas;
};

/// Runs one command and returns its exit code. Diagnostics go to stderr.
int run(const RunOptions& opts);

/// Parses argv (CLI11) and dispatches to run().
int main_entry(int argc, char** argv);

/// "%.17g".
std::string format_double(double v);

/// SHA-256 hex digest of a file. @throws IoError.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace cmvspec::cli
