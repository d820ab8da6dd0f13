#include "citcp/textcfg.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "citcp/errors.hpp"

namespace citcp {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool valid_key(const std::string& key) {
  if (key.empty() || key.front() == '.' || key.back() == '.') return false;
  for (char c : key) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
      return false;
  }
  return key.find("..") == std::string::npos;
}

}  // namespace

bool TextConfig::has(const std::string& key) const { return find(key) != nullptr; }

const std::string* TextConfig::find(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return &v;
  return nullptr;
}

void TextConfig::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries.emplace_back(key, value);
}

std::vector<std::pair<std::string, std::string>> TextConfig::section(
    const std::string& prefix) const {
  const std::string want = prefix + ".";
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [k, v] : entries)
    if (k.rfind(want, 0) == 0) out.emplace_back(k.substr(want.size()), v);
  return out;
}

std::vector<std::string> TextConfig::child_sections(const std::string& prefix) const {
  const std::string want = prefix + ".";
  std::set<std::string> seen;
  std::vector<std::string> out;
  for (const auto& [k, v] : entries) {
    if (k.rfind(want, 0) != 0) continue;
    const std::size_t dot = k.find('.', want.size());
    if (dot == std::string::npos) continue;
    const std::string child = k.substr(want.size(), dot - want.size());
    if (seen.insert(child).second) out.push_back(child);
  }
  return out;
}

TextConfig parse_text_config(std::istream& in, const std::string& src) {
  TextConfig cfg;
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string text = trim(line);
    if (text.empty() || text.front() == '#' || text.front() == ';') continue;
    if (text.front() == '[') {
      if (text.back() != ']')
        throw ConfigError(src + ":" + std::to_string(lineno) + ": unterminated section header");
      section = trim(text.substr(1, text.size() - 2));
      if (!valid_key(section))
        throw ConfigError(src + ":" + std::to_string(lineno) + ": invalid section name '" +
                          section + "'");
      continue;
    }
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError(src + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (!valid_key(key))
      throw ConfigError(src + ":" + std::to_string(lineno) + ": invalid key '" + key + "'");
    cfg.set(section.empty() ? key : section + "." + key, value);
  }
  return cfg;
}

TextConfig parse_text_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_text_config(in, path);
}

void apply_override(TextConfig& cfg, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override '" + assignment + "' must look like key=value");
  const std::string key = trim(assignment.substr(0, eq));
  if (!valid_key(key)) throw ConfigError("override has invalid key '" + key + "'");
  cfg.set(key, trim(assignment.substr(eq + 1)));
}

std::string render_text_config(const TextConfig& cfg) {
  std::ostringstream out;
  for (const auto& [k, v] : cfg.entries) out << k << " = " << v << '\n';
  return out.str();
}

}  // namespace citcp
