#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace polyrefute {

inline constexpr int kSchemaVersion = 1;

// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitNegative = 2,
  kExitDegenerate = 3,
  kExitUsage = 64,
};

// Thrown when a config violates a module precondition.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  std::string command;  // refute | phase2 | ldlr | ldlr-mc | pseudocal | distinguish
  std::size_t n = 0;
  std::optional<std::size_t> m;  // unset with m_auto for refute
  bool m_auto = false;
  std::vector<std::size_t> m_grid;
  unsigned D = 2, d = 4;
  std::size_t tau = 4;
  std::optional<double> scaling;  // unset: module default
  std::optional<std::size_t> trials;
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 0;
  unsigned coeff_bits = 32;
  std::size_t budget = 5000;
  double svd_cutoff = 1e-8;
  unsigned jobs = 1;
  std::string out;        // primary artifact (CSV for phase2, JSON otherwise)
  std::string emit_cert;  // refute only
};

nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const nlohmann::json& j);

// Resolves defaults (--m auto, trial counts) and checks preconditions.
// Throws UsageError naming the violated condition.
ExperimentConfig validate(ExperimentConfig c);

// Parses "a:b:s" (inclusive) or "a,b,c".
std::vector<std::size_t> parse_grid(const std::string& text);

std::string build_id();

// FNV-1a 64 over bytes, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

struct RunRecord {
  ExperimentConfig config;
  std::string build;
  double wall_time = 0.0;
  int exit_code = kExitOk;
  std::string status;
  nlohmann::json trials = nlohmann::json::array();
  nlohmann::json summary = nlohmann::json::object();
  std::map<std::string, std::string> artifacts;  // name -> exact bytes

  nlohmann::json to_json() const;
  static RunRecord from_json(const nlohmann::json& j);
  // Digest over config, trials, summary and artifacts; excludes wall time.
  std::string digest() const;
};

// Runs a validated config. Writes config.out / config.emit_cert when set.
RunRecord dispatch(const ExperimentConfig& config);

struct ReplayReport {
  bool ok = false;
  std::vector<std::string> drift;
  RunRecord rerun;
};

// Reruns the embedded config and compares trials, summary and artifacts.
// Exact fields must match; floating fields within rel_tol.
ReplayReport replay(const nlohmann::json& record, double rel_tol = 1e-9);

}  // namespace polyrefute
