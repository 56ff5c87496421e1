#pragma once

// Command-line entry point. Every subcommand reads an optional JSON config
// (--config), applies flag overrides, validates the result and embeds the
// resolved config in its JSON report.
//
// Exit codes: 0 success, 2 invalid input, 3 refusal (a precondition of the
// theory fails or a budget is exceeded), 4 inconclusive certification.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace efcp {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kExitOk = 0, kExitInvalid = 2, kExitRefused = 3, kExitInconclusive = 4 };

/// Resolved experiment settings: the config file merged with flags, with
/// every default made explicit. Accessors validate and name the field on
/// failure.
class ExperimentConfig {
 public:
  explicit ExperimentConfig(nlohmann::json values);

  int get_int(const std::string& key, int fallback, int min_value);
  std::uint64_t get_seed();
  double get_double(const std::string& key, double fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::string get_string(const std::string& key, const std::string& fallback);
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback);
  std::vector<int> get_ints(const std::string& key, std::vector<int> fallback, int min_value);
  const nlohmann::json& law() const;
  bool has(const std::string& key) const { return values_.contains(key); }

  const nlohmann::json& resolved() const { return values_; }

 private:
  nlohmann::json values_;
};

/// args excludes the program name.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace efcp
