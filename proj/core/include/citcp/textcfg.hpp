#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace citcp {

// Flat key/value view of an INI-style file. `[section]` headers prefix the
// keys that follow ("section.key"); dotted keys work directly at top level.
// Later assignments to the same key override earlier ones in place.
struct TextConfig {
  std::vector<std::pair<std::string, std::string>> entries;  // insertion order

  bool has(const std::string& key) const;
  const std::string* find(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  // Keys under "<prefix>." with the prefix stripped, in insertion order.
  std::vector<std::pair<std::string, std::string>> section(const std::string& prefix) const;
  // Distinct "<child>" names occurring as "<prefix>.<child>.<rest>".
  std::vector<std::string> child_sections(const std::string& prefix) const;
};

// '#' and ';' start full-line comments. Throws ConfigError with src:line on
// malformed lines, bad section headers, or invalid key characters.
TextConfig parse_text_config(std::istream& in, const std::string& src);
TextConfig parse_text_config_file(const std::string& path);

// "dotted.key=value" command-line override; throws ConfigError when the '='
// is missing or the key is malformed.
void apply_override(TextConfig& cfg, const std::string& assignment);

// Re-parseable rendering, one "key = value" line per entry.
std::string render_text_config(const TextConfig& cfg);

}  // namespace citcp
