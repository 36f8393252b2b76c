#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "alspg/types.hpp"

namespace alspg::harness {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Line-oriented key-value file with typed sections:
///
///   # comment
///   key = value          (top-level pairs come before any section)
///   [section.name]
///   key = 1.5 2.5 3.5    (scalars, strings or whitespace-separated vectors)
///
/// Keys keep insertion order; emit() produces a canonical text that reparses
/// to the same content (parse-emit-parse is a fixpoint).
class KeyValueFile {
 public:
  static KeyValueFile parse_file(const std::string& path);
  static KeyValueFile parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const;
  std::vector<std::string> section_names() const;  // insertion order, "" = top level
  std::vector<std::string> keys(const std::string& section) const;

  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  int get_int(const std::string& section, const std::string& key) const;
  int get_int(const std::string& section, const std::string& key, int fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  Vector get_vector(const std::string& section, const std::string& key) const;
  Vector get_vector(const std::string& section, const std::string& key,
                    const Vector& fallback) const;

  void set(const std::string& section, const std::string& key, const std::string& value);
  void set_double(const std::string& section, const std::string& key, double value);
  void set_vector(const std::string& section, const std::string& key, const Vector& value);

  std::string emit() const;
  void write_file(const std::string& path) const;

 private:
  struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
  };
  Section& section_ref(const std::string& name);
  const Section* find_section(const std::string& name) const;
  const std::string* find_value(const std::string& section, const std::string& key) const;

  std::vector<Section> sections_;
  std::string origin_;
};

/// A serialized benchmark instance: problem id plus parameters, solver
/// choice, seed and repeat count. Problem-specific parameters stay in the
/// underlying key-value sections.
struct Scenario {
  std::string id;
  std::string problem;
  std::string solver;  // alspg | spg | ilqr | alspg-noproj
  std::uint64_t seed = 0;
  int repeat = 1;
  KeyValueFile file;
  std::string source_path;
};

Scenario load_scenario(const std::string& path, std::optional<std::uint64_t> seed_override = {});

}  // namespace alspg::harness
