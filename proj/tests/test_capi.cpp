// Exercises the shared library through its C header only.

#include <filesystem>
#include <string>

#include "courtside/courtside.h"
#include "doctest.h"
#include "temp_files.hpp"

namespace fs = std::filesystem;

namespace {

std::string config_json(const fs::path& out_dir) {
  const fs::path data = fs::absolute("data");
  return R"({
  "lexicon": {
    "roster": ")" + (data / "nba_roster.txt").string() + R"(",
    "glossary": ")" + (data / "basketball_glossary.txt").string() + R"(",
    "domain_label": "NBA basketball commentary"
  },
  "backend": {"kind": "mock"},
  "chat": {"kind": "local"},
  "workers": 2,
  "seed": 5,
  "output_dir": ")" + out_dir.string() + R"("
})";
}

}  // namespace

TEST_CASE("stateless helpers") {
  double w = -1;
  REQUIRE(cs_wer("the cat sat", "the cat", &w) == CS_OK);
  CHECK(w == doctest::Approx(1.0 / 3.0));
  CHECK(std::string(cs_last_error()).empty());

  CHECK(cs_wer("", "anything", &w) == CS_ERR_UNDEFINED_WER);
  CHECK_FALSE(std::string(cs_last_error()).empty());
  CHECK(std::string(cs_status_name(CS_ERR_UNDEFINED_WER)) == "undefined WER");
  CHECK(std::string(cs_status_name(static_cast<cs_status>(99))) == "unknown");

  double s = 0;
  REQUIRE(cs_similarity("Devin Booker", "devon bucker", &s) == CS_OK);
  CHECK(s > 0.7);
  CHECK(s < 1.0);

  int accept = -1;
  REQUIRE(cs_length_safeguard("a b c d e", "a b c d", 0.80, &accept) == CS_OK);
  CHECK(accept == 1);
  REQUIRE(cs_length_safeguard("a b c d e", "a b c", 0.80, &accept) == CS_OK);
  CHECK(accept == 0);

  CHECK(cs_wer(nullptr, "x", &w) == CS_ERR_INVALID_ARGUMENT);
  CHECK(std::string(cs_version()) == "1.0.0");
}

TEST_CASE("config errors surface as status codes") {
  cs_config* config = reinterpret_cast<cs_config*>(1);
  CHECK(cs_config_load("/nonexistent/config.json", &config) == CS_ERR_IO);
  CHECK(config == nullptr);

  testutil::TempDir dir;
  auto bad = dir.write("bad.json", R"({"workers": 2, "surprise": true})");
  CHECK(cs_config_load(bad.c_str(), &config) == CS_ERR_CONFIG);

  auto good = dir.write("good.json", config_json(dir.path()));
  REQUIRE(cs_config_load(good.c_str(), &config) == CS_OK);
  CHECK(cs_config_seed(config) == 5);
  CHECK(cs_config_set_seed(config, 9) == CS_OK);
  CHECK(cs_config_seed(config) == 9);
  CHECK(cs_config_set_workers(config, 0) == CS_ERR_INVALID_ARGUMENT);
  CHECK(fs::path(cs_config_output_dir(config)) == dir.path());
  cs_config_free(config);
  cs_config_free(nullptr);
  cs_session_close(nullptr);
}

TEST_CASE("generate, transcribe, score and compare") {
  testutil::TempDir dir;
  auto cfg = dir.write("config.json", config_json(dir.path()));
  cs_config* config = nullptr;
  REQUIRE(cs_config_load(cfg.c_str(), &config) == CS_OK);
  cs_session* session = nullptr;
  REQUIRE(cs_session_open(config, &session) == CS_OK);

  const auto manifest = (dir.path() / "corpus.jsonl").string();
  REQUIRE(cs_generate_corpus(session, 30, 5, manifest.c_str()) == CS_OK);

  const auto base_run = (dir.path() / "baseline.run.jsonl").string();
  const auto p4_run = (dir.path() / "p4.run.jsonl").string();
  cs_run_summary base{}, p4{};
  std::size_t progress_calls = 0;
  auto progress = [](const char*, size_t, size_t, int, void* user) { ++*static_cast<std::size_t*>(user); };
  REQUIRE(cs_transcribe(session, manifest.c_str(), "baseline", base_run.c_str(), progress, &progress_calls, &base) ==
          CS_OK);
  CHECK(progress_calls == 30);
  CHECK(base.segments == 30);
  CHECK(base.asr_calls == 30);
  CHECK(base.prompted_asr_calls == 0);
  CHECK(base.accepted == 0);

  REQUIRE(cs_transcribe(session, manifest.c_str(), "p4", p4_run.c_str(), nullptr, nullptr, &p4) == CS_OK);
  CHECK(p4.segments == 30);
  CHECK(p4.failed == 0);
  CHECK(p4.asr_calls == 30 + p4.prompted_asr_calls);

  CHECK(cs_transcribe(session, manifest.c_str(), "p9", p4_run.c_str(), nullptr, nullptr, nullptr) ==
        CS_ERR_INVALID_ARGUMENT);

  const auto base_scores = (dir.path() / "baseline.scores.jsonl").string();
  const auto p4_scores = (dir.path() / "p4.scores.jsonl").string();
  std::size_t scored = 0;
  REQUIRE(cs_score(base_run.c_str(), manifest.c_str(), base_scores.c_str(), &scored) == CS_OK);
  CHECK(scored == 30);
  REQUIRE(cs_score(p4_run.c_str(), manifest.c_str(), p4_scores.c_str(), &scored) == CS_OK);

  cs_report_summary summary{};
  char* table = nullptr;
  const auto machine = (dir.path() / "report.jsonl").string();
  REQUIRE(cs_compare(base_scores.c_str(), p4_scores.c_str(), nullptr, machine.c_str(), &summary, &table) == CS_OK);
  REQUIRE(table != nullptr);
  CHECK(std::string(table).find("| Variant |") == 0);
  cs_free_string(table);
  CHECK(summary.evaluated == 30);
  CHECK(summary.improved + summary.degraded + summary.unchanged == 30);
  CHECK(summary.mean_variant <= summary.mean_baseline);
  CHECK(fs::file_size(machine) > 0);

  CHECK(cs_session_finish(session) == CS_OK);
  cs_session_close(session);
  cs_config_free(config);
}
