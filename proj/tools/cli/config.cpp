#include "config.hpp"

#include <algorithm>
#include <limits>

namespace pointersim::cli {

using nlohmann::json;

namespace {

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

}  // namespace

json parse_config_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    // Drop nlohmann's "[json.exception.parse_error.101] " prefix.
    if (const auto p = msg.find("] "); p != std::string::npos) msg = msg.substr(p + 2);
    throw ConfigError(origin + ":" + std::to_string(line_of_offset(text, e.byte)) + ": " + msg);
  }
}

Section::Section(const json& obj, std::string path, const std::string* raw_text)
    : obj_(obj), path_(std::move(path)), raw_(raw_text) {
  if (!obj_.is_object()) throw ConfigError("section '" + path_ + "' must be a JSON object");
}

void Section::fail(const std::string& key, const std::string& what) const {
  std::string where;
  if (raw_ != nullptr) {
    const auto pos = raw_->find("\"" + key + "\"");
    if (pos != std::string::npos) where = "line " + std::to_string(line_of_offset(*raw_, pos)) + ": ";
  }
  const std::string full = path_.empty() ? key : path_ + "." + key;
  throw ConfigError(where + "key '" + full + "': " + what);
}

bool Section::has(const char* key) const { return obj_.contains(key); }

const json& Section::lookup(const char* key) {
  seen_.emplace_back(key);
  return obj_.at(key);
}

double Section::real(const char* key) {
  if (!has(key)) fail(key, "required key is missing");
  const json& v = lookup(key);
  if (!v.is_number()) fail(key, "expected a number");
  resolved_[key] = v.get<double>();
  return v.get<double>();
}

double Section::real(const char* key, double fallback) {
  if (!has(key)) {
    seen_.emplace_back(key);
    resolved_[key] = fallback;
    return fallback;
  }
  return real(key);
}

int Section::integer(const char* key) {
  if (!has(key)) fail(key, "required key is missing");
  const json& v = lookup(key);
  if (!v.is_number_integer()) fail(key, "expected an integer");
  const auto x = v.get<std::int64_t>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) fail(key, "integer out of range");
  resolved_[key] = x;
  return static_cast<int>(x);
}

int Section::integer(const char* key, int fallback) {
  if (!has(key)) {
    seen_.emplace_back(key);
    resolved_[key] = fallback;
    return fallback;
  }
  return integer(key);
}

std::uint64_t Section::u64(const char* key, std::uint64_t fallback) {
  if (!has(key)) {
    seen_.emplace_back(key);
    resolved_[key] = fallback;
    return fallback;
  }
  const json& v = lookup(key);
  if (!v.is_number_unsigned()) fail(key, "expected a non-negative integer");
  resolved_[key] = v.get<std::uint64_t>();
  return v.get<std::uint64_t>();
}

std::string Section::text(const char* key, const std::string& fallback) {
  if (!has(key)) {
    seen_.emplace_back(key);
    resolved_[key] = fallback;
    return fallback;
  }
  const json& v = lookup(key);
  if (!v.is_string()) fail(key, "expected a string");
  resolved_[key] = v.get<std::string>();
  return v.get<std::string>();
}

bool Section::flag(const char* key, bool fallback) {
  if (!has(key)) {
    seen_.emplace_back(key);
    resolved_[key] = fallback;
    return fallback;
  }
  const json& v = lookup(key);
  if (!v.is_boolean()) fail(key, "expected true or false");
  resolved_[key] = v.get<bool>();
  return v.get<bool>();
}

std::vector<double> Section::reals(const char* key) {
  if (!has(key)) fail(key, "required key is missing");
  const json& v = lookup(key);
  if (!v.is_array() || v.empty()) fail(key, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) fail(key, "expected a non-empty array of numbers");
    out.push_back(e.get<double>());
  }
  resolved_[key] = out;
  return out;
}

std::vector<double> Section::reals(const char* key, const std::vector<double>& fallback) {
  if (!has(key)) {
    seen_.emplace_back(key);
    resolved_[key] = fallback;
    return fallback;
  }
  return reals(key);
}

std::vector<int> Section::integers(const char* key) {
  if (!has(key)) fail(key, "required key is missing");
  const json& v = lookup(key);
  if (!v.is_array() || v.empty()) fail(key, "expected a non-empty array of integers");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) fail(key, "expected a non-empty array of integers");
    const auto x = e.get<std::int64_t>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) fail(key, "integer out of range");
    out.push_back(static_cast<int>(x));
  }
  resolved_[key] = out;
  return out;
}

void Section::finish() const {
  for (auto it = obj_.begin(); it != obj_.end(); ++it) {
    if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) fail(it.key(), "unknown key");
  }
}

}  // namespace pointersim::cli
