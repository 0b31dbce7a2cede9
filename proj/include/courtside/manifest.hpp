#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "courtside/lexicon.hpp"

namespace courtside {

/// One unit of audio to transcribe.
struct Segment {
  std::string segment_id;
  std::string audio_ref;
  std::optional<std::string> ground_truth;

  bool operator==(const Segment&) const = default;
};

/// JSON lines of {"segment_id", "audio_ref", "ground_truth"?}. Relative
/// audio_ref paths are resolved against the manifest's directory when that
/// file exists. Duplicate ids are rejected.
std::vector<Segment> load_manifest(const std::filesystem::path& path);

void save_manifest(const std::vector<Segment>& segments, const std::filesystem::path& path);

/// Synthetic play-by-play: `count` segments of 2-4 sentences built from the
/// lexicon's names and jargon, with a few off-topic segments and sentences
/// whose ordinary words double as roster surnames. Audio locators are
/// "synthetic/<segment_id>"; ground_truth is always set.
std::vector<Segment> generate_corpus(const Lexicon& lexicon, std::size_t count, std::uint64_t seed);

}  // namespace courtside
