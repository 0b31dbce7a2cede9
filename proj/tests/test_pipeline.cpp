#include <chrono>
#include <functional>
#include <mutex>
#include <thread>

#include "courtside/error.hpp"
#include "courtside/eval.hpp"
#include "courtside/pipeline.hpp"
#include "courtside/textnorm.hpp"
#include "doctest.h"
#include "json.hpp"
#include "temp_files.hpp"

using namespace courtside;

namespace {

const Lexicon& nba() {
  static const Lexicon lex = Lexicon::make(load_roster("data/nba_roster.txt"),
                                           load_glossary("data/basketball_glossary.txt"), "NBA basketball commentary");
  return lex;
}

using AsrFn = std::function<std::string(const std::string&, const std::optional<std::string>&)>;

struct FakeBackend final : AsrBackend {
  AsrFn fn;
  std::mutex mu;
  std::vector<std::optional<std::string>> prompts;

  explicit FakeBackend(AsrFn f) : fn(std::move(f)) {}

  std::string transcribe(const std::string& audio, const std::optional<std::string>& prompt) override {
    {
      std::lock_guard lock(mu);
      prompts.push_back(prompt);
    }
    return fn(audio, prompt);
  }
  std::size_t second_passes() {
    std::lock_guard lock(mu);
    return std::count_if(prompts.begin(), prompts.end(), [](const auto& p) { return p.has_value(); });
  }
};

// First pass returns `first`, any prompted pass returns `second`.
FakeBackend two_pass(std::string first, std::string second) {
  return FakeBackend([=](const std::string&, const std::optional<std::string>& p) { return p ? second : first; });
}

using ChatFn = std::function<std::string(AgentKind, const nlohmann::json&)>;

struct FnClient final : ChatClient {
  ChatFn fn;
  std::mutex mu;
  std::vector<AgentKind> calls;

  explicit FnClient(ChatFn f) : fn(std::move(f)) {}

  std::string complete(const std::string& system, const std::string& user, const DecodeParams&) override {
    auto kind = agent_for_system(system);
    REQUIRE(kind.has_value());
    {
      std::lock_guard lock(mu);
      calls.push_back(*kind);
    }
    return fn(*kind, nlohmann::json::parse(user));
  }
  std::size_t count(AgentKind k) {
    std::lock_guard lock(mu);
    return std::count(calls.begin(), calls.end(), k);
  }
};

const std::string kNo = R"({"Answer": "NO", "Reason": "nothing to fix"})";
const std::string kYes = R"({"Answer": "YES", "Reason": "misspelled name"})";

// Scripted agents for a basketball segment: deciders answer as given.
FnClient scripted(const std::string& ner_answer, const std::string& jargon_answer) {
  return FnClient([=](AgentKind k, const nlohmann::json& payload) -> std::string {
    switch (k) {
      case AgentKind::topic: return "NBA basketball commentary";
      case AgentKind::ner: return "Devin Booker";
      case AgentKind::jargon: return "foul line jumper";
      case AgentKind::ner_decider: return ner_answer;
      case AgentKind::jargon_decider: return jargon_answer;
      case AgentKind::best_candidates: return R"({"names": ["Devin Booker"]})";
      case AgentKind::sentence_builder: {
        std::vector<std::string> names = payload.at("names_list").get<std::vector<std::string>>();
        std::vector<std::string> jargon = payload.at("jargon_list").get<std::vector<std::string>>();
        return template_sentence(payload.at("topic").get<std::string>(), names, jargon);
      }
      case AgentKind::fix: return payload.at("transcript").get<std::string>();
    }
    return "";
  });
}

Segment seg(std::string id) { return {id, "audio/" + id + ".wav", std::nullopt}; }

std::string words(std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? " w" : "w") + std::to_string(i);
  return out;
}

const std::string kBaseline = "foul on jumper devon bucker and the foul right now bucker is on guard";
const std::string kEnhanced = "foul line jumper devin booker and the foul right now booker is unguardable";

}  // namespace

TEST_CASE("length safeguard boundary") {
  CHECK(length_safeguard(words(20), words(16)));
  CHECK_FALSE(length_safeguard(words(20), words(15)));
  CHECK(length_safeguard(words(100), words(80)));
  CHECK_FALSE(length_safeguard(words(100), words(79)));
  CHECK(length_safeguard("", "anything at all"));
  CHECK(length_safeguard("  ...  ", ""));
  // Counts are on normalized words, so punctuation does not count.
  CHECK_FALSE(length_safeguard("a b c d e", "a , b , c"));
  CHECK(length_safeguard(words(10), words(7), 0.70));
}

TEST_CASE("variant and reason names") {
  for (auto v : {Variant::baseline, Variant::p1, Variant::p2, Variant::p3, Variant::p4}) {
    CHECK(variant_from_string(to_string(v)) == v);
  }
  CHECK_THROWS_AS(variant_from_string("p5"), Error);
  for (auto r : {FallbackReason::length_safeguard, FallbackReason::decider_no, FallbackReason::agent_failure,
                 FallbackReason::out_of_domain}) {
    CHECK(fallback_reason_from_string(to_string(r)) == r);
  }
}

TEST_CASE("baseline is a single unprompted pass") {
  CorruptionModel quiet;
  quiet.name_sub_rate = quiet.jargon_corrupt_rate = quiet.accent_rate = quiet.segmentation_rate = 0.0;
  MockAsrBackend backend(quiet, nba(), {{"a", "Devin Booker from downtown."}});
  Pipeline pipeline(backend, nullptr, nba());
  auto r = pipeline.run(Variant::baseline, {"s1", "a", "Devin Booker from downtown."});
  CHECK(r.baseline_transcript == "Devin Booker from downtown.");
  CHECK(r.enhanced_transcript == r.baseline_transcript);
  CHECK_FALSE(r.accepted);
  CHECK_FALSE(r.prompt_used.has_value());
  CHECK_FALSE(r.fallback_reason.has_value());
  CHECK(backend.calls() == 1);
  CHECK(backend.prompted_calls() == 0);
}

TEST_CASE("backend failure marks the segment failed") {
  FakeBackend backend([](const std::string&, const std::optional<std::string>&) -> std::string {
    throw Error(ErrorCode::transport, "connection refused");
  });
  auto client = scripted(kYes, kYes);
  Pipeline pipeline(backend, &client, nba());
  auto r = pipeline.run(Variant::p4, seg("x"));
  CHECK(r.failed);
  CHECK(r.error.find("connection refused") != std::string::npos);
  CHECK(client.calls.empty());
}

TEST_CASE("P1 prompts with the topic alone") {
  auto backend = two_pass(kBaseline, kEnhanced);
  auto client = scripted(kNo, kNo);
  Pipeline pipeline(backend, &client, nba());
  auto r = pipeline.run(Variant::p1, seg("a"));
  REQUIRE(backend.prompts.size() == 2);
  CHECK(backend.prompts[1] == std::optional<std::string>("NBA basketball commentary"));
  CHECK(r.accepted);
  CHECK(r.enhanced_transcript == kEnhanced);
  REQUIRE(r.prompt_used.has_value());
  CHECK(r.prompt_used->text == "NBA basketball commentary");
}

TEST_CASE("P1 topic failure keeps the baseline") {
  auto backend = two_pass(kBaseline, kEnhanced);
  FnClient client([](AgentKind, const nlohmann::json&) -> std::string { throw Error(ErrorCode::chat, "down"); });
  Pipeline pipeline(backend, &client, nba());
  auto r = pipeline.run(Variant::p1, seg("a"));
  CHECK_FALSE(r.accepted);
  CHECK(r.enhanced_transcript == kBaseline);
  CHECK(r.fallback_reason == FallbackReason::agent_failure);
  CHECK(backend.second_passes() == 0);
}

TEST_CASE("P1 short second pass is rejected by the safeguard") {
  auto backend = two_pass(words(10), words(7));
  auto client = scripted(kNo, kNo);
  Pipeline pipeline(backend, &client, nba());
  auto r = pipeline.run(Variant::p1, seg("a"));
  CHECK_FALSE(r.accepted);
  CHECK(r.fallback_reason == FallbackReason::length_safeguard);
  CHECK(r.enhanced_transcript == words(10));
  CHECK(r.second_pass_transcript == std::optional<std::string>(words(7)));
}

TEST_CASE("P2 edits the first pass without a second ASR call") {
  auto backend = two_pass("jackson not a smart pass devon bucker from downtown", "unused");
  SUBCASE("edit applied") {
    FnClient client([](AgentKind k, const nlohmann::json& p) -> std::string {
      REQUIRE(k == AgentKind::fix);
      std::string t = p.at("transcript").get<std::string>();
      return t.replace(t.find("devon bucker"), 12, "Devin Booker");
    });
    Pipeline pipeline(backend, &client, nba());
    auto r = pipeline.run(Variant::p2, seg("a"));
    CHECK(r.accepted);
    CHECK(r.enhanced_transcript == "jackson not a smart pass Devin Booker from downtown");
    CHECK_FALSE(r.prompt_used.has_value());
  }
  SUBCASE("echo") {
    auto client = scripted(kNo, kNo);
    Pipeline pipeline(backend, &client, nba());
    auto r = pipeline.run(Variant::p2, seg("a"));
    CHECK(r.enhanced_transcript == r.baseline_transcript);
  }
  SUBCASE("dropped line") {
    FakeBackend two_lines([](const std::string&, const std::optional<std::string>&) { return "line one\nline two"; });
    FnClient client([](AgentKind, const nlohmann::json&) -> std::string { return "line one"; });
    Pipeline pipeline(two_lines, &client, nba());
    auto r = pipeline.run(Variant::p2, seg("a"));
    CHECK(r.enhanced_transcript == "line one\nline two");
    CHECK(two_lines.second_passes() == 0);
  }
  CHECK(backend.second_passes() == 0);
}

TEST_CASE("P3 appends validated names to the topic") {
  auto backend = two_pass(kBaseline, kEnhanced);
  SUBCASE("names found") {
    auto client = scripted(kNo, kNo);
    Pipeline pipeline(backend, &client, nba());
    auto r = pipeline.run(Variant::p3, seg("a"));
    REQUIRE(r.prompt_used.has_value());
    CHECK(r.prompt_used->text == "NBA basketball commentary: Devin Booker");
    CHECK(r.prompt_used->names == std::vector<std::string>{"Devin Booker"});
    CHECK(client.count(AgentKind::ner_decider) == 0);
  }
  SUBCASE("no names behaves as P1") {
    FnClient client([](AgentKind k, const nlohmann::json&) -> std::string {
      return k == AgentKind::topic ? "NBA basketball commentary" : "";
    });
    Pipeline pipeline(backend, &client, nba());
    auto r = pipeline.run(Variant::p3, seg("a"));
    REQUIRE(r.prompt_used.has_value());
    CHECK(r.prompt_used->text == "NBA basketball commentary");
  }
}

TEST_CASE("P4 with both deciders NO makes no second pass") {
  auto backend = two_pass(kBaseline, kEnhanced);
  auto client = scripted(kNo, kNo);
  Pipeline pipeline(backend, &client, nba());
  auto r = pipeline.run(Variant::p4, seg("a"));
  CHECK(backend.second_passes() == 0);
  CHECK(r.fallback_reason == FallbackReason::decider_no);
  CHECK(r.enhanced_transcript == kBaseline);
  CHECK_FALSE(r.prompt_used.has_value());
  CHECK(r.ner_verdict == std::optional<std::string>("NO"));
  CHECK(r.jargon_verdict == std::optional<std::string>("NO"));
  CHECK(client.count(AgentKind::best_candidates) == 0);
  CHECK(client.count(AgentKind::sentence_builder) == 0);
}

TEST_CASE("P4 name decider YES puts the name in the prompt") {
  auto backend = two_pass(kBaseline, kEnhanced);
  auto client = scripted(kYes, kNo);
  Pipeline pipeline(backend, &client, nba());
  auto r = pipeline.run(Variant::p4, seg("a"));
  REQUIRE(r.prompt_used.has_value());
  CHECK(r.prompt_used->text.find("Devin Booker") != std::string::npos);
  CHECK(r.prompt_used->jargon.empty());
  CHECK(r.accepted);
  CHECK(r.enhanced_transcript == kEnhanced);
  CHECK(r.prompt_used->token_count <= 224);
}

TEST_CASE("P4 jargon branch runs independently of the name branch") {
  auto backend = two_pass(kBaseline, kEnhanced);
  auto client = scripted(kNo, kYes);
  Pipeline pipeline(backend, &client, nba());
  auto r = pipeline.run(Variant::p4, seg("a"));
  REQUIRE(r.prompt_used.has_value());
  CHECK(r.prompt_used->names.empty());
  CHECK(r.prompt_used->jargon == std::vector<std::string>{"foul line jumper"});
}

TEST_CASE("P4 safeguard boundary") {
  auto client = scripted(kYes, kYes);
  SUBCASE("0.80 accepted") {
    auto backend = two_pass(words(100), words(80));
    auto r = Pipeline(backend, &client, nba()).run(Variant::p4, seg("a"));
    CHECK(r.accepted);
    CHECK(r.enhanced_transcript == words(80));
  }
  SUBCASE("0.79 rejected") {
    auto backend = two_pass(words(100), words(79));
    auto r = Pipeline(backend, &client, nba()).run(Variant::p4, seg("a"));
    CHECK_FALSE(r.accepted);
    CHECK(r.fallback_reason == FallbackReason::length_safeguard);
    CHECK(r.enhanced_transcript == words(100));
  }
}

TEST_CASE("P4 skips off-topic segments") {
  auto backend = two_pass(kBaseline, kEnhanced);
  FnClient client([](AgentKind k, const nlohmann::json&) -> std::string {
    if (k == AgentKind::topic) return "cooking show recipes";
    return kYes;
  });
  Pipeline pipeline(backend, &client, nba());
  auto r = pipeline.run(Variant::p4, seg("a"));
  CHECK(r.fallback_reason == FallbackReason::out_of_domain);
  CHECK(backend.second_passes() == 0);
  CHECK(client.calls.size() == 1);
}

TEST_CASE("P4 agent errors degrade to the baseline") {
  auto backend = two_pass(kBaseline, kEnhanced);
  FnClient client([](AgentKind k, const nlohmann::json&) -> std::string {
    if (k == AgentKind::topic) return "NBA basketball commentary";
    throw Error(ErrorCode::chat, "model unavailable");
  });
  Pipeline pipeline(backend, &client, nba());
  auto r = pipeline.run(Variant::p4, seg("a"));
  CHECK_FALSE(r.failed);
  CHECK_FALSE(r.accepted);
  CHECK(r.enhanced_transcript == kBaseline);
  CHECK(r.ner_verdict == std::optional<std::string>("FAILED"));
  CHECK(backend.second_passes() == 0);
}

TEST_CASE("second pass failure marks the segment failed") {
  FakeBackend backend([](const std::string&, const std::optional<std::string>& p) -> std::string {
    if (p) throw Error(ErrorCode::asr, "decoder crashed");
    return kBaseline;
  });
  auto client = scripted(kYes, kYes);
  auto r = Pipeline(backend, &client, nba()).run(Variant::p4, seg("a"));
  CHECK(r.failed);
  CHECK(r.enhanced_transcript == kBaseline);
}

TEST_CASE("run_corpus keeps manifest order and records failures") {
  FakeBackend backend([](const std::string& audio, const std::optional<std::string>&) -> std::string {
    // Later segments finish first.
    int n = audio.back() - '0';
    std::this_thread::sleep_for(std::chrono::milliseconds(5 * (9 - n)));
    if (n == 4) throw Error(ErrorCode::asr, "bad file");
    return "text " + std::to_string(n);
  });
  auto client = scripted(kNo, kNo);
  Pipeline pipeline(backend, &client, nba());
  std::vector<Segment> segments;
  for (int i = 0; i < 8; ++i) segments.push_back({"s" + std::to_string(i), "a" + std::to_string(i), std::nullopt});
  std::size_t progress_calls = 0;
  auto results = run_corpus(pipeline, Variant::baseline, segments, 4,
                            [&](const SegmentResult&, std::size_t, std::size_t total) {
                              CHECK(total == 8);
                              ++progress_calls;
                            });
  REQUIRE(results.size() == 8);
  CHECK(progress_calls == 8);
  for (int i = 0; i < 8; ++i) {
    CHECK(results[i].segment_id == "s" + std::to_string(i));
    CHECK(results[i].failed == (i == 4));
    if (i != 4) CHECK(results[i].baseline_transcript == "text " + std::to_string(i));
  }
  CHECK(run_corpus(pipeline, Variant::baseline, {}, 4).empty());
}

TEST_CASE("run artifacts round-trip and are reproducible") {
  const auto corpus = generate_corpus(nba(), 12, 5);
  std::map<std::string, std::string> truths;
  for (const auto& s : corpus) truths[s.audio_ref] = *s.ground_truth;
  CorruptionModel model;
  model.rng_seed = 11;

  auto run_once = [&](std::size_t workers) {
    MockAsrBackend backend(model, nba(), truths);
    LocalAgentClient client(nba(), AgentSettings{});
    Pipeline pipeline(backend, &client, nba());
    return RunArtifact{Variant::p4, run_corpus(pipeline, Variant::p4, corpus, workers)};
  };
  auto a = run_once(1);
  auto b = run_once(3);
  CHECK(render_run_artifact(a) == render_run_artifact(b));

  testutil::TempDir dir;
  write_run_artifact(a, dir.path() / "run.jsonl");
  CHECK(testutil::slurp(dir.path() / "run.jsonl") == render_run_artifact(a));
  CHECK(read_run_artifact(dir.path() / "run.jsonl") == a);

  for (const auto& r : a.results) {
    if (!r.accepted) CHECK(r.enhanced_transcript == r.baseline_transcript);
  }
}

TEST_CASE("run artifact parse errors") {
  CHECK(parse_run_artifact("").results.empty());
  CHECK(parse_run_artifact(R"({"type":"run","variant":"p1","segments":0,"failed":0,"accepted":0})").variant == Variant::p1);
  CHECK_THROWS_AS(parse_run_artifact("{not json"), Error);
  CHECK_THROWS_AS(parse_run_artifact(R"({"type":"segment"})"), Error);
  CHECK_THROWS_AS(parse_run_artifact(R"({"type":"run","variant":"p1","segments":2,"failed":0,"accepted":0})"), Error);
  try {
    parse_run_artifact("{not json");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse);
  }
}

TEST_CASE("manifest round-trip and validation") {
  testutil::TempDir dir;
  std::vector<Segment> segments{{"a", "clips/a.wav", std::string("Devin Booker.")}, {"b", "clips/b.wav", std::nullopt}};
  save_manifest(segments, dir.path() / "m.jsonl");
  CHECK(load_manifest(dir.path() / "m.jsonl") == segments);

  dir.write("clips/a.wav", "x");
  auto resolved = load_manifest(dir.path() / "m.jsonl");
  CHECK(resolved[0].audio_ref == (dir.path() / "clips/a.wav").string());
  CHECK(resolved[1].audio_ref == "clips/b.wav");

  dir.write("dup.jsonl", "{\"segment_id\":\"a\",\"audio_ref\":\"x\"}\n{\"segment_id\":\"a\",\"audio_ref\":\"y\"}\n");
  CHECK_THROWS_AS(load_manifest(dir.path() / "dup.jsonl"), Error);
  dir.write("bad.jsonl", "{\"audio_ref\":\"x\"}\n");
  CHECK_THROWS_AS(load_manifest(dir.path() / "bad.jsonl"), Error);
  CHECK_THROWS_AS(load_manifest(dir.path() / "missing.jsonl"), Error);
}

TEST_CASE("synthetic corpus is seeded") {
  auto a = generate_corpus(nba(), 50, 3);
  CHECK(a.size() == 50);
  CHECK(a == generate_corpus(nba(), 50, 3));
  CHECK(a != generate_corpus(nba(), 50, 4));
  CHECK(a.front().segment_id == "seg-0001");
  for (const auto& s : a) {
    REQUIRE(s.ground_truth.has_value());
    CHECK(!normalize(*s.ground_truth).words.empty());
  }
}

TEST_CASE("seeded simulation: name prompts rescue names") {
  const auto corpus = generate_corpus(nba(), 40, 21);
  std::map<std::string, std::string> truths;
  for (const auto& s : corpus) truths[s.audio_ref] = *s.ground_truth;
  CorruptionModel model;
  model.rng_seed = 21;
  MockAsrBackend backend(model, nba(), truths);
  LocalAgentClient client(nba(), AgentSettings{});
  Pipeline pipeline(backend, &client, nba());
  auto mean_wer = [&](Variant v) {
    auto scores = score_run({v, run_corpus(pipeline, v, corpus)}, corpus);
    double sum = 0;
    for (const auto& s : scores.scores) sum += s.wer();
    return sum / double(scores.scores.size());
  };
  const double base = mean_wer(Variant::baseline);
  CHECK(base > 0.0);
  CHECK(mean_wer(Variant::p3) < base);
  CHECK(mean_wer(Variant::p4) < base);
}
