#include "courtside/lexicon.hpp"

#include <algorithm>
#include <fstream>

#include <spdlog/spdlog.h>

#include "courtside/error.hpp"
#include "courtside/textnorm.hpp"

namespace courtside {

EntrySet EntrySet::from_displays(std::span<const std::string> displays, EntryKind kind) {
  EntrySet set;
  set.kind_ = kind;
  for (const auto& raw : displays) {
    std::string display = trim(raw);
    std::string normalized = normalize_joined(display);
    if (normalized.empty()) continue;
    std::vector<std::string> variants =
        kind == EntryKind::name ? name_variants(normalized) : std::vector<std::string>{normalized};
    set.entries_.push_back(Canonical{std::move(display), std::move(normalized), std::move(variants)});
  }
  std::sort(set.entries_.begin(), set.entries_.end(),
            [](const Canonical& a, const Canonical& b) { return a.normalized < b.normalized; });
  auto dup = std::adjacent_find(set.entries_.begin(), set.entries_.end(),
                                [](const Canonical& a, const Canonical& b) { return a.normalized == b.normalized; });
  if (dup != set.entries_.end()) {
    throw Error(ErrorCode::duplicate_entry, "duplicate entry: \"" + dup->display + "\" and \"" +
                                                std::next(dup)->display + "\" normalize to \"" +
                                                dup->normalized + "\"");
  }
  return set;
}

const Canonical* EntrySet::find(std::string_view normalized) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), normalized,
                             [](const Canonical& e, std::string_view key) { return e.normalized < key; });
  if (it == entries_.end() || it->normalized != normalized) return nullptr;
  return &*it;
}

bool EntrySet::contains_display(std::string_view display) const {
  const Canonical* entry = find(normalize_joined(display));
  return entry != nullptr && entry->display == display;
}

std::vector<std::string> EntrySet::displays() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.display);
  return out;
}

bool EntrySet::operator==(const EntrySet& other) const {
  if (kind_ != other.kind_ || entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].display != other.entries_[i].display ||
        entries_[i].normalized != other.entries_[i].normalized) {
      return false;
    }
  }
  return true;
}

Lexicon Lexicon::make(EntrySet names, EntrySet jargon, std::string domain_label) {
  for (const auto& term : jargon.entries()) {
    if (const Canonical* clash = names.find(term.normalized)) {
      throw Error(ErrorCode::disjointness, "glossary entry \"" + term.display +
                                               "\" collides with roster name \"" + clash->display + "\"");
    }
  }
  return Lexicon{std::move(names), std::move(jargon), std::move(domain_label)};
}

std::vector<std::string> read_entry_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::string entry = trim(line);
    if (!entry.empty()) lines.push_back(std::move(entry));
  }
  if (lines.empty()) spdlog::warn("{} contains no entries", path.string());
  return lines;
}

EntrySet load_roster(const std::filesystem::path& path) {
  return EntrySet::from_displays(read_entry_lines(path), EntryKind::name);
}

EntrySet load_glossary(const std::filesystem::path& path) {
  return EntrySet::from_displays(read_entry_lines(path), EntryKind::jargon);
}

std::string canonical_display(std::string_view normalized, const Lexicon& lex) {
  if (const Canonical* e = lex.names.find(normalized)) return e->display;
  if (const Canonical* e = lex.jargon.find(normalized)) return e->display;
  throw Error(ErrorCode::unknown_entry, "unknown entry: \"" + std::string(normalized) + "\"");
}

}  // namespace courtside
