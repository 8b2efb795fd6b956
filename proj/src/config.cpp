#include "csync/config.hpp"

#include <algorithm>
#include <limits>

#include "csync/errors.hpp"

namespace csync {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

IniFile IniFile::parse(std::string_view text, std::string_view source_name) {
  IniFile file;
  file.source_ = std::string(source_name);
  std::string section;  // keys before any [section] live in ""
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    const std::size_t comment = line.find_first_of("#;");
    if (comment != std::string_view::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw parse_error(file.source_ + ":" + std::to_string(line_no) + ": malformed section header",
                          line_no);
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      file.sections_[section];  // a section may stay empty
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw parse_error(file.source_ + ":" + std::to_string(line_no) + ": expected key = value",
                        line_no);
    }
    const std::string key{trim(line.substr(0, eq))};
    const std::string value{trim(line.substr(eq + 1))};
    if (key.empty()) {
      throw parse_error(file.source_ + ":" + std::to_string(line_no) + ": empty key", line_no);
    }
    auto [it, inserted] = file.sections_[section].emplace(key, Entry{value, line_no, false});
    if (!inserted) {
      throw parse_error(file.source_ + ":" + std::to_string(line_no) + ": duplicate key '" + key +
                            "' (first set on line " + std::to_string(it->second.line) + ")",
                        line_no);
    }
  }
  return file;
}

bool IniFile::has_section(const std::string& section) const { return sections_.contains(section); }

const IniFile::Entry* IniFile::find(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return nullptr;
  k->second.consumed = true;
  return &k->second;
}

std::vector<std::string> IniFile::section_names() const {
  std::vector<std::string> names;
  names.reserve(sections_.size());
  for (const auto& [name, _] : sections_) names.push_back(name);
  return names;
}

std::vector<std::string> IniFile::keys(const std::string& section) const {
  std::vector<std::string> out;
  const auto s = sections_.find(section);
  if (s == sections_.end()) return out;
  out.reserve(s->second.size());
  for (const auto& [key, _] : s->second) out.push_back(key);
  return out;
}

std::vector<std::pair<std::string, std::string>> IniFile::unconsumed() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [section, entries] : sections_) {
    for (const auto& [key, entry] : entries) {
      if (!entry.consumed) out.emplace_back(section, key);
    }
  }
  return out;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string suggest(std::string_view unknown, const std::vector<std::string>& candidates) {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  std::string best_name;
  for (const std::string& c : candidates) {
    const std::size_t d = edit_distance(unknown, c);
    if (d < best) {
      best = d;
      best_name = c;
    }
  }
  if (best <= 2 && !best_name.empty()) return best_name;
  return {};
}

}  // namespace csync
