#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "courtside/stringsim.hpp"

namespace courtside {

enum class EntryKind { name, jargon };

/// Immutable set of canonical entries, unique on normalized form and kept
/// sorted by it so the set compares equal regardless of source order.
class EntrySet {
 public:
  EntrySet() = default;

  /// Builds a set from display forms. Blank entries are skipped; a repeated
  /// normalized form throws Error(duplicate_entry).
  static EntrySet from_displays(std::span<const std::string> displays, EntryKind kind);

  EntryKind kind() const noexcept { return kind_; }
  std::span<const Canonical> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  const Canonical* find(std::string_view normalized) const;
  bool contains_display(std::string_view display) const;
  std::vector<std::string> displays() const;

  bool operator==(const EntrySet& other) const;

 private:
  EntryKind kind_ = EntryKind::name;
  std::vector<Canonical> entries_;
};

/// Roster of person names plus glossary of domain jargon.
struct Lexicon {
  EntrySet names;
  EntrySet jargon;
  std::string domain_label;

  /// Throws Error(disjointness) when a normalized form appears in both sets.
  static Lexicon make(EntrySet names, EntrySet jargon, std::string domain_label);
};

/// Reads one entry per line; '#' starts a comment, blank lines are ignored.
/// An empty file logs a warning and yields an empty set. A missing file
/// throws Error(io).
std::vector<std::string> read_entry_lines(const std::filesystem::path& path);

EntrySet load_roster(const std::filesystem::path& path);
EntrySet load_glossary(const std::filesystem::path& path);

/// Display form stored for a normalized entry, searched in names then jargon.
/// Throws Error(unknown_entry).
std::string canonical_display(std::string_view normalized, const Lexicon& lex);

}  // namespace courtside
