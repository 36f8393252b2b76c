#include "alspg/scenario.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace alspg::harness {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

KeyValueFile KeyValueFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str(), path);
}

KeyValueFile KeyValueFile::parse_string(const std::string& text, const std::string& origin) {
  KeyValueFile kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string current;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ParseError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
      }
      current = trim(t.substr(1, t.size() - 2));
      if (current.empty()) {
        throw ParseError(origin + ":" + std::to_string(lineno) + ": empty section name");
      }
      kv.section_ref(current);
      continue;
    }
    const size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParseError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ParseError(origin + ":" + std::to_string(lineno) + ": empty key");
    }
    kv.set(current, key, value);
  }
  return kv;
}

KeyValueFile::Section& KeyValueFile::section_ref(const std::string& name) {
  for (auto& s : sections_) {
    if (s.name == name) return s;
  }
  sections_.push_back({name, {}});
  return sections_.back();
}

const KeyValueFile::Section* KeyValueFile::find_section(const std::string& name) const {
  for (const auto& s : sections_) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

const std::string* KeyValueFile::find_value(const std::string& section,
                                            const std::string& key) const {
  const Section* s = find_section(section);
  if (!s) return nullptr;
  for (const auto& [k, v] : s->entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

bool KeyValueFile::has(const std::string& section, const std::string& key) const {
  return find_value(section, key) != nullptr;
}

bool KeyValueFile::has_section(const std::string& section) const {
  return find_section(section) != nullptr;
}

std::vector<std::string> KeyValueFile::section_names() const {
  std::vector<std::string> names;
  for (const auto& s : sections_) names.push_back(s.name);
  return names;
}

std::vector<std::string> KeyValueFile::keys(const std::string& section) const {
  std::vector<std::string> out;
  if (const Section* s = find_section(section)) {
    for (const auto& [k, v] : s->entries) out.push_back(k);
  }
  return out;
}

std::string KeyValueFile::get_string(const std::string& section, const std::string& key) const {
  const std::string* v = find_value(section, key);
  if (!v) {
    throw ParseError(origin_ + ": missing key '" + key + "' in section [" +
                     (section.empty() ? "<top>" : section) + "]");
  }
  return *v;
}

std::string KeyValueFile::get_string(const std::string& section, const std::string& key,
                                     const std::string& fallback) const {
  const std::string* v = find_value(section, key);
  return v ? *v : fallback;
}

double KeyValueFile::get_double(const std::string& section, const std::string& key) const {
  const std::string raw = get_string(section, key);
  try {
    size_t pos = 0;
    const double v = std::stod(raw, &pos);
    if (trim(raw.substr(pos)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(origin_ + ": key '" + key + "' is not a number: '" + raw + "'");
}

double KeyValueFile::get_double(const std::string& section, const std::string& key,
                                double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

int KeyValueFile::get_int(const std::string& section, const std::string& key) const {
  const std::string raw = get_string(section, key);
  try {
    size_t pos = 0;
    const long v = std::stol(raw, &pos);
    if (trim(raw.substr(pos)).empty()) return static_cast<int>(v);
  } catch (const std::exception&) {
  }
  throw ParseError(origin_ + ": key '" + key + "' is not an integer: '" + raw + "'");
}

int KeyValueFile::get_int(const std::string& section, const std::string& key, int fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

bool KeyValueFile::get_bool(const std::string& section, const std::string& key,
                            bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string raw = get_string(section, key);
  if (raw == "true" || raw == "1" || raw == "on") return true;
  if (raw == "false" || raw == "0" || raw == "off") return false;
  throw ParseError(origin_ + ": key '" + key + "' is not a boolean: '" + raw + "'");
}

Vector KeyValueFile::get_vector(const std::string& section, const std::string& key) const {
  const std::string raw = get_string(section, key);
  std::istringstream in(raw);
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    try {
      size_t pos = 0;
      values.push_back(std::stod(token, &pos));
      if (pos != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw ParseError(origin_ + ": key '" + key + "' has a non-numeric entry: '" + token + "'");
    }
  }
  if (values.empty()) {
    throw ParseError(origin_ + ": key '" + key + "' is an empty vector");
  }
  Vector v(static_cast<Index>(values.size()));
  for (Index i = 0; i < v.size(); ++i) v[i] = values[static_cast<size_t>(i)];
  return v;
}

Vector KeyValueFile::get_vector(const std::string& section, const std::string& key,
                                const Vector& fallback) const {
  return has(section, key) ? get_vector(section, key) : fallback;
}

void KeyValueFile::set(const std::string& section, const std::string& key,
                       const std::string& value) {
  Section& s = section_ref(section);
  for (auto& [k, v] : s.entries) {
    if (k == key) {
      v = value;
      return;
    }
  }
  s.entries.emplace_back(key, value);
}

void KeyValueFile::set_double(const std::string& section, const std::string& key, double value) {
  set(section, key, format_double(value));
}

void KeyValueFile::set_vector(const std::string& section, const std::string& key,
                              const Vector& value) {
  std::string out;
  for (Index i = 0; i < value.size(); ++i) {
    if (i) out += ' ';
    out += format_double(value[i]);
  }
  set(section, key, out);
}

std::string KeyValueFile::emit() const {
  std::string out;
  for (const auto& s : sections_) {
    if (!s.name.empty()) {
      out += '[';
      out += s.name;
      out += "]\n";
    }
    for (const auto& [k, v] : s.entries) {
      out += k;
      out += " = ";
      out += v;
      out += '\n';
    }
  }
  return out;
}

void KeyValueFile::write_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path);
  out << emit();
}

Scenario load_scenario(const std::string& path, std::optional<std::uint64_t> seed_override) {
  Scenario sc;
  sc.file = KeyValueFile::parse_file(path);
  sc.source_path = path;
  sc.id = sc.file.get_string("", "id");
  sc.problem = sc.file.get_string("", "problem");
  sc.solver = sc.file.get_string("", "solver", "alspg");
  sc.seed = static_cast<std::uint64_t>(sc.file.get_int("", "seed", 0));
  if (seed_override) sc.seed = *seed_override;
  sc.repeat = sc.file.get_int("", "repeat", 1);
  if (sc.repeat < 1) throw ParseError(path + ": repeat must be >= 1");
  return sc;
}

}  // namespace alspg::harness
