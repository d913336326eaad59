#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace chaoslab {

/// Minimal TOML value: strings, booleans, integers, floats, flat arrays.
struct TomlValue {
  enum class Kind { kString, kBool, kInt, kFloat, kArray };
  Kind kind = Kind::kString;
  std::string s;
  bool b = false;
  std::int64_t i = 0;
  double f = 0.0;
  std::vector<TomlValue> arr;

  double number() const; ///< int or float as double, else ValidationError
};

/// Keys are flattened as "section.key". Supports [section] headers, comments,
/// quoted strings, booleans, integers, floats, and one-level arrays — the
/// subset the experiment configs use. Throws ValidationError with the line
/// number on malformed input.
std::map<std::string, TomlValue> parse_toml(const std::string& text);
std::map<std::string, TomlValue> parse_toml_file(const std::string& path);

enum class KernelFamily { kBoundedConfidence, kCoulomb, kBessel, kCustom };

struct KernelConfig {
  KernelFamily family = KernelFamily::kBoundedConfidence;
  double R = 1.0;           ///< bounded-confidence radius
  std::string route = "force";
  int d = 1;                ///< coulomb / bessel ambient dimension
  std::string w_file;       ///< custom: grid file for W
  std::string v_file;       ///< custom: grid file for V
  std::string mode = "gradient"; ///< custom: product | gradient
  double force_sign = -1.0; ///< custom
  double a_W = 0.0;         ///< custom declared exponents
  double a_V = 0.0;
};

struct InitConfig {
  std::string kind = "gaussian"; ///< gaussian | uniform
  double mean = 0.0;
  double std_dev = 1.0;
  double a = -1.0; ///< uniform support
  double b = 1.0;
};

struct ExperimentConfig {
  KernelConfig kernel;
  InitConfig init;
  // schedule
  double beta = 0.05;
  std::vector<int> N_list = {128, 256, 512, 1024, 2048, 4096};
  // sde
  double sigma = 0.5;
  double T = 0.5;
  double dt = 1.0 / 128.0;
  int save_count = 64; ///< save times k*T/save_count, k = 0..save_count
  // grid
  double L = 8.0;
  std::int64_t n = 1024;
  // diagnostics
  double alpha = 0.3;
  double delta = 0.05;
  double gamma = 2.0;
  int replicas = 200;
  std::string lln_path = "deposit"; ///< deposit | direct
  // sweeps
  std::vector<double> eps_list = {0.2, 0.1, 0.05, 0.025};
  double eps_override = -1.0; ///< fixed eps for liouville-oracle (< 0: 2^-beta)
  // output
  std::string output_dir = "out";
  bool write_trajectories = false;
  std::uint64_t seed = 1;
};

enum class Command { kSimulate, kKernelCheck, kLiouvilleOracle, kPdeCompare, kRateSweep };

/// Build a config from parsed TOML over the defaults; unknown keys are
/// rejected (ValidationError naming the key).
ExperimentConfig config_from_toml(const std::map<std::string, TomlValue>& t);

/// Cross-field validation for the given subcommand; throws ValidationError.
void validate_config(const ExperimentConfig& cfg, Command cmd);

/// Canonical key=value serialization (sorted keys, %.17g numbers) — the
/// hashing and idempotency contract.
std::string canonical_string(const ExperimentConfig& cfg);

/// FNV-1a 64-bit hash of canonical_string.
std::uint64_t config_hash(const ExperimentConfig& cfg);

const char* command_name(Command cmd);

} // namespace chaoslab
