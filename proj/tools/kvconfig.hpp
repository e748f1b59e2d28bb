#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace sccp::cli {

// Flat `key = value` configuration file; '#' starts a comment.
struct KvConfig {
  std::map<std::string, std::string> values;

  static KvConfig from_file(const std::string& path);
  static KvConfig from_string(std::string_view text);

  std::optional<std::string> get(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<uint64_t> get_u64(const std::string& key) const;
};

// Parses "inf"/"-inf" in addition to ordinary doubles.
double parse_double(const std::string& text, const std::string& what);

}  // namespace sccp::cli
