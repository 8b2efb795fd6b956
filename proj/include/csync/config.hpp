#ifndef CSYNC_CONFIG_HPP
#define CSYNC_CONFIG_HPP

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace csync {

/// Minimal INI-style reader: [section] headers, key = value lines, '#' or
/// ';' comments. Keys are unique per section; line numbers are kept for
/// error reporting.
class IniFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
    mutable bool consumed = false;
  };

  static IniFile parse(std::string_view text, std::string_view source_name = "<config>");

  bool has_section(const std::string& section) const;
  const Entry* find(const std::string& section, const std::string& key) const;
  std::vector<std::string> section_names() const;
  std::vector<std::string> keys(const std::string& section) const;
  const std::string& source_name() const { return source_; }

  /// Keys never looked up by the schema; used for unknown-key rejection.
  std::vector<std::pair<std::string, std::string>> unconsumed() const;

 private:
  std::string source_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

/// Case-sensitive Levenshtein distance, used for "did you mean" hints.
std::size_t edit_distance(std::string_view a, std::string_view b);

/// Closest candidate within distance 2, if any.
std::string suggest(std::string_view unknown, const std::vector<std::string>& candidates);

}  // namespace csync

#endif  // CSYNC_CONFIG_HPP
