#include <atomic>
#include <thread>

#include "courtside/asr.hpp"
#include "courtside/error.hpp"
#include "courtside/textnorm.hpp"
#include "courtside/wer.hpp"
#include "doctest.h"
#include "httplib.h"
#include "temp_files.hpp"

using namespace courtside;

namespace {

const Lexicon& nba() {
  static const Lexicon lex = Lexicon::make(load_roster("data/nba_roster.txt"),
                                           load_glossary("data/basketball_glossary.txt"), "NBA basketball commentary");
  return lex;
}

const char* kTruth =
    "Devin Booker drives past Nikola Jokic and finishes the alley-oop. "
    "Stephen Curry answers with a pick and roll, then a deep three from downtown. "
    "Booker again on the fast break, tremendous athleticism tonight.";

CorruptionModel quiet() {
  CorruptionModel m;
  m.name_sub_rate = m.jargon_corrupt_rate = m.accent_rate = m.segmentation_rate = 0.0;
  m.prompt_hallucination_prob = 0.0;
  return m;
}

double wer_of(const std::string& hyp) { return wer(kTruth, hyp).wer(); }

}  // namespace

TEST_CASE("zero rates reproduce the truth") {
  CorruptionModel m = quiet();
  CHECK(mock_transcribe(m, kTruth, nba(), std::nullopt) == kTruth);
  CHECK(mock_transcribe(m, kTruth, nba(), std::string("NBA basketball commentary: LeBron James")) == kTruth);
  CHECK(mock_transcribe(m, "", nba(), std::nullopt).empty());
}

TEST_CASE("seeded corruption is reproducible and stream dependent") {
  CorruptionModel m;
  m.rng_seed = 42;
  std::string a = mock_transcribe(m, kTruth, nba(), std::nullopt, "seg-1");
  CHECK(a == mock_transcribe(m, kTruth, nba(), std::nullopt, "seg-1"));

  int differing = 0;
  double total = 0.0;
  for (int i = 0; i < 20; ++i) {
    std::string out = mock_transcribe(m, kTruth, nba(), std::nullopt, "seg-" + std::to_string(i));
    total += wer_of(out);
    differing += out != a;
  }
  CHECK(total > 0.0);
  CHECK(differing > 0);

  m.rng_seed = 43;
  bool seed_matters = false;
  for (int i = 0; i < 20 && !seed_matters; ++i) {
    CorruptionModel base;
    base.rng_seed = 42;
    std::string stream = "seg-" + std::to_string(i);
    seed_matters = mock_transcribe(m, kTruth, nba(), std::nullopt, stream) !=
                   mock_transcribe(base, kTruth, nba(), std::nullopt, stream);
  }
  CHECK(seed_matters);
}

TEST_CASE("every name site corrupted when the rate is one") {
  CorruptionModel m = quiet();
  m.name_sub_rate = 1.0;
  std::string out = mock_transcribe(m, kTruth, nba(), std::nullopt, "s");
  auto words = normalize(out).words;
  for (const char* w : {"booker", "jokic", "curry"}) {
    CHECK(std::find(words.begin(), words.end(), w) == words.end());
  }
  CHECK(wer_of(out) > 0.0);
}

TEST_CASE("full rescue with every truth name in the prompt removes name errors") {
  CorruptionModel m = quiet();
  m.name_sub_rate = 1.0;
  m.prompt_rescue_prob = 1.0;
  m.prompt_hallucination_prob = 1.0;  // no roster name outside the truth is prompted
  std::string prompt = "NBA basketball commentary featuring Devin Booker, Nikola Jokic, Stephen Curry and Booker.";
  for (int i = 0; i < 10; ++i) {
    CHECK(mock_transcribe(m, kTruth, nba(), prompt, "s" + std::to_string(i)) == kTruth);
  }
}

TEST_CASE("prompting a name absent from the truth can hallucinate it") {
  CorruptionModel m = quiet();
  m.prompt_hallucination_prob = 1.0;
  std::string truth = "The ball goes to Booker near the brown paint.";
  std::string out = mock_transcribe(m, truth, nba(), std::string("NBA basketball commentary: Dillon Brooks"), "s");
  CHECK(out != truth);
  CHECK(out.find("Brooks") != std::string::npos);
  // Without the name in the prompt nothing changes.
  CHECK(mock_transcribe(m, truth, nba(), std::string("NBA basketball commentary"), "s") == truth);
}

TEST_CASE("higher rates never lower the aggregate error count") {
  // Draws are taken per site whatever the rate, so a higher rate corrupts a
  // superset of the sites hit at a lower rate.
  for (double CorruptionModel::*rate :
       {&CorruptionModel::name_sub_rate, &CorruptionModel::jargon_corrupt_rate, &CorruptionModel::accent_rate,
        &CorruptionModel::segmentation_rate}) {
    std::size_t previous = 0;
    for (double r : {0.0, 0.3, 0.6, 1.0}) {
      CorruptionModel m = quiet();
      m.*rate = r;
      std::size_t errors = 0;
      for (std::uint64_t seed = 0; seed < 100; ++seed) {
        m.rng_seed = seed;
        errors += wer(kTruth, mock_transcribe(m, kTruth, nba(), std::nullopt, "x")).errors();
      }
      CHECK(errors >= previous);
      previous = errors;
    }
    CHECK(previous > 0);
  }
}

TEST_CASE("model validation") {
  CorruptionModel m;
  CHECK_NOTHROW(m.validate());
  for (double bad : {1.5, -0.1}) {
    m.accent_rate = bad;
    try {
      m.validate();
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::invalid_argument);
    }
  }
}

TEST_CASE("name respelling") {
  for (double c : {0.0, 0.3, 0.6, 0.99}) {
    CHECK(mangle_name_word("booker", c) != "booker");
    CHECK(!mangle_name_word("booker", c).empty());
  }
  CHECK(mangle_name_word("antetokounmpo", 0.5).find(' ') != std::string::npos);
}

TEST_CASE("mock backend resolves truths and counts calls") {
  testutil::TempDir dir;
  dir.write("a.txt", "Devin Booker scores.");
  MockAsrBackend backend(quiet(), nba(), {{"seg", "Nikola Jokic passes."}});
  CHECK(backend.transcribe("seg", std::nullopt) == "Nikola Jokic passes.");
  CHECK(backend.transcribe((dir.path() / "a.txt").string(), std::string("prompt")) == "Devin Booker scores.");
  CHECK(backend.calls() == 2);
  CHECK(backend.prompted_calls() == 1);
  try {
    backend.transcribe("missing", std::nullopt);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::asr);
  }
}

namespace {

struct StubAsr {
  httplib::Server server;
  int port = 0;
  std::thread thread;
  std::atomic<int> requests{0};
  bool had_prompt = false;
  std::string prompt;
  std::string audio;

  StubAsr() {
    server.Post("/transcribe", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      had_prompt = req.has_file("initial_prompt");
      prompt = had_prompt ? req.get_file_value("initial_prompt").content : "";
      audio = req.get_file_value("audio").content;
      res.set_content(R"({"text": "  Jokić\tfor three!  "})", "application/json");
    });
    server.Post("/reject", [](const httplib::Request&, httplib::Response& res) {
      res.status = 400;
      res.set_content("bad audio", "text/plain");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~StubAsr() {
    server.stop();
    thread.join();
  }
  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port) + path; }
};

}  // namespace

TEST_CASE("http backend sends the prompt only when given and returns text untouched") {
  StubAsr stub;
  testutil::TempDir dir;
  dir.write("clip.wav", std::string("RIFF\0\x01\x02", 7));
  HttpAsrOptions opts;
  opts.endpoint = stub.url("/transcribe");
  auto backend = make_http_asr_backend(opts);
  std::string file = (dir.path() / "clip.wav").string();

  CHECK(backend->transcribe(file, std::nullopt) == "  Jokić\tfor three!  ");
  CHECK_FALSE(stub.had_prompt);
  CHECK(stub.audio == std::string("RIFF\0\x01\x02", 7));

  CHECK(backend->transcribe(file, std::string("NBA basketball commentary")) == "  Jokić\tfor three!  ");
  CHECK(stub.had_prompt);
  CHECK(stub.prompt == "NBA basketball commentary");
}

TEST_CASE("http backend error kinds") {
  StubAsr stub;
  testutil::TempDir dir;
  dir.write("clip.wav", "x");
  std::string file = (dir.path() / "clip.wav").string();

  HttpAsrOptions rejecting;
  rejecting.endpoint = stub.url("/reject");
  try {
    make_http_asr_backend(rejecting)->transcribe(file, std::nullopt);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::asr);
  }

  HttpAsrOptions dead;
  dead.endpoint = "http://127.0.0.1:1/transcribe";
  dead.max_retries = 1;
  dead.backoff_seconds = 0.0;
  dead.timeout_seconds = 2.0;
  try {
    make_http_asr_backend(dead)->transcribe(file, std::nullopt);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::transport);
  }

  try {
    make_http_asr_backend(dead)->transcribe((dir.path() / "none.wav").string(), std::nullopt);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
  }
}
