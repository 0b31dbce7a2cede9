#include <fstream>
#include <random>
#include <set>

#include "courtside/error.hpp"
#include "courtside/lexicon.hpp"
#include "courtside/manifest.hpp"
#include "courtside/textnorm.hpp"
#include "json.hpp"

namespace courtside {

std::vector<Segment> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open manifest " + path.string());
  const auto base = path.parent_path();
  std::vector<Segment> out;
  std::set<std::string> seen;
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (trim(line).empty()) continue;
    Segment seg;
    try {
      auto j = nlohmann::json::parse(line);
      seg.segment_id = j.at("segment_id").get<std::string>();
      seg.audio_ref = j.at("audio_ref").get<std::string>();
      if (j.contains("ground_truth") && !j["ground_truth"].is_null()) seg.ground_truth = j["ground_truth"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::parse, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (seg.segment_id.empty()) throw Error(ErrorCode::parse, path.string() + ":" + std::to_string(line_no) + ": empty segment_id");
    if (!seen.insert(seg.segment_id).second) {
      throw Error(ErrorCode::parse, "duplicate segment_id '" + seg.segment_id + "' in " + path.string());
    }
    std::filesystem::path ref(seg.audio_ref);
    if (ref.is_relative() && std::filesystem::exists(base / ref)) seg.audio_ref = (base / ref).string();
    out.push_back(std::move(seg));
  }
  return out;
}

void save_manifest(const std::vector<Segment>& segments, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write manifest " + path.string());
  for (const auto& seg : segments) {
    nlohmann::ordered_json j{{"segment_id", seg.segment_id}, {"audio_ref", seg.audio_ref}};
    if (seg.ground_truth) j["ground_truth"] = *seg.ground_truth;
    out << j.dump() << '\n';
  }
}

namespace {

// Indexing helpers over the raw engine output, so corpora are identical
// across standard library implementations.
struct Picker {
  std::mt19937_64 engine;
  double uniform() { return double(engine() >> 11) * 0x1.0p-53; }
  std::size_t index(std::size_t n) { return std::size_t(uniform() * double(n)); }
  template <class T>
  const T& pick(const std::vector<T>& v) { return v[index(v.size())]; }
};

const std::vector<std::string> kNameSentences = {
    "{N} brings it up the floor and looks for {M} on the wing.",
    "{N} drives baseline, draws contact and hits both free throws.",
    "Great ball movement, {S} swings it to {M} for the open look.",
    "{N} with the {J}, and the crowd is on its feet.",
    "That is a tremendous defensive possession from {N}.",
    "{S} pulls up and knocks it down again.",
    "Timeout on the floor after {N} converts the {J}.",
    "{N} and {M} run the {J} to perfection.",
    "Here comes {N} in transition, finishing strong at the rim.",
    "Another {J} for {S}, who has been unstoppable tonight.",
    "{M} fights over the screen but {N} still gets the shot off.",
    "What a sequence, {N} finds {M} for the {J}.",
};

const std::vector<std::string> kPlainSentences = {
    "The defense collapses and they have to reset the offense.",
    "Both teams trading baskets in the second quarter.",
    "The home crowd has been electric all evening.",
    "They are shooting much better from the perimeter tonight.",
};

// Everyday words that double as roster surnames.
const std::vector<std::string> kTrapSentences = {
    "The visitors are wearing white tonight and this young group is hungry.",
    "He loses the ball near the green logo at midcourt.",
    "A smart read by the rookie, and the crowd in brown and gold loves it.",
    "It feels like a holiday crowd, the young fans standing in the aisles.",
    "The ball handler keeps it simple and waits for the screen.",
    "Sly as a fox, he jumps the passing lane.",
};

const std::vector<std::string> kOffTopic = {
    "Thanks for staying with us, we will be right back after a short message from our sponsors.",
    "Traffic on the interstate is slow tonight because of road work near the river.",
    "Remember to recycle your cups and bottles on the way out of the building.",
    "Tomorrow brings light rain in the morning and clearing skies by the afternoon.",
};

std::string surname(const std::string& display) {
  auto words = split_whitespace(display);
  while (words.size() > 1) {
    const auto& last = words.back();
    if (last == "Jr." || last == "II" || last == "III") {
      words.pop_back();
    } else {
      break;
    }
  }
  return words.back();
}

void replace_all(std::string& text, const std::string& key, const std::string& value) {
  for (auto at = text.find(key); at != std::string::npos; at = text.find(key, at + value.size())) {
    text.replace(at, key.size(), value);
  }
}

}  // namespace

std::vector<Segment> generate_corpus(const Lexicon& lexicon, std::size_t count, std::uint64_t seed) {
  const auto names = lexicon.names.displays();
  const auto jargon = lexicon.jargon.displays();
  if (names.size() < 2 || jargon.empty()) throw Error(ErrorCode::no_lexicon, "synthetic corpus needs two names and one jargon term");

  Picker rng{std::mt19937_64(seed)};
  std::vector<Segment> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "seg-%04zu", i + 1);
    std::string text;
    if (rng.uniform() < 0.05) {
      text = rng.pick(kOffTopic) + " " + rng.pick(kOffTopic);
    } else {
      const std::string& lead = rng.pick(names);
      std::string other = rng.pick(names);
      while (other == lead) other = rng.pick(names);
      const std::size_t sentences = 2 + rng.index(3);
      const std::size_t trap_at = rng.uniform() < 0.35 ? rng.index(sentences) : sentences;
      std::vector<std::string> parts;
      bool named = false;
      for (std::size_t s = 0; s < sentences; ++s) {
        std::string sentence;
        if (s == trap_at) {
          sentence = rng.pick(kTrapSentences);
        } else if (rng.uniform() < 0.8) {
          sentence = rng.pick(kNameSentences);
          // The first mention of a player is the full name.
          if (!named && sentence.find("{S}") != std::string::npos && sentence.find("{N}") == std::string::npos) {
            replace_all(sentence, "{S}", "{N}");
          }
          replace_all(sentence, "{N}", named ? surname(lead) : lead);
          replace_all(sentence, "{S}", surname(lead));
          replace_all(sentence, "{M}", other);
          replace_all(sentence, "{J}", rng.pick(jargon));
          named = true;
        } else {
          sentence = rng.pick(kPlainSentences);
        }
        parts.push_back(std::move(sentence));
      }
      text = join(parts, " ");
    }
    out.push_back({id, std::string("synthetic/") + id, text});
  }
  return out;
}

}  // namespace courtside
