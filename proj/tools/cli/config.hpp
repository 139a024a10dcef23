// config.hpp: strict JSON run-configuration access
#pragma once

#include <json.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pointersim::cli {

/// Invalid configuration file; maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses JSON text; syntax errors become ConfigError with a line number.
nlohmann::json parse_config_text(const std::string& text, const std::string& origin);

/// One JSON object whose keys are consumed by typed getters. Every value
/// read (or defaulted) is copied into `resolved`; `finish` rejects whatever
/// was not read.
class Section {
 public:
  Section(const nlohmann::json& obj, std::string path, const std::string* raw_text);

  double real(const char* key);
  double real(const char* key, double fallback);
  int integer(const char* key);
  int integer(const char* key, int fallback);
  std::uint64_t u64(const char* key, std::uint64_t fallback);
  std::string text(const char* key, const std::string& fallback);
  bool flag(const char* key, bool fallback);
  std::vector<double> reals(const char* key);
  std::vector<double> reals(const char* key, const std::vector<double>& fallback);
  std::vector<int> integers(const char* key);
  /// Marks a key as known without reading it (nested sections).
  void consume(const char* key) { seen_.emplace_back(key); }

  bool has(const char* key) const;
  void finish() const;

  const nlohmann::json& resolved() const noexcept { return resolved_; }
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

 private:
  const nlohmann::json& lookup(const char* key);

  const nlohmann::json& obj_;
  std::string path_;
  const std::string* raw_;
  std::vector<std::string> seen_;
  nlohmann::json resolved_ = nlohmann::json::object();
};

}  // namespace pointersim::cli
