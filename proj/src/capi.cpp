#include <atomic>
#include <cstring>
#include <fstream>
#include <new>

#include "courtside/config.hpp"
#include "courtside/courtside.h"
#include "courtside/error.hpp"
#include "courtside/eval.hpp"
#include "courtside/pipeline.hpp"
#include "courtside/stringsim.hpp"
#include "courtside/wer.hpp"

struct cs_config {
  courtside::RunConfig config;
  std::string output_dir;
};

struct cs_session {
  std::unique_ptr<courtside::Session> session;
};

namespace {

thread_local std::string last_error;

cs_status status_of(courtside::ErrorCode code) { return static_cast<cs_status>(static_cast<int>(code) + 1); }

// Runs `fn`, turning exceptions into a status and the thread's error text.
template <class Fn>
cs_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return CS_OK;
  } catch (const courtside::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown failure";
  }
  return CS_ERR_INTERNAL;
}

void require(const void* p, const char* what) {
  if (!p) throw courtside::Error(courtside::ErrorCode::invalid_argument, std::string(what) + " must not be null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void write_text(const char* path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw courtside::Error(courtside::ErrorCode::io, std::string("cannot write ") + path);
  out << text;
}

class CountingBackend final : public courtside::AsrBackend {
 public:
  explicit CountingBackend(courtside::AsrBackend& inner) : inner_(inner) {}
  std::string transcribe(const std::string& audio, const std::optional<std::string>& prompt) override {
    ++calls;
    if (prompt) ++prompted;
    return inner_.transcribe(audio, prompt);
  }
  std::atomic<std::size_t> calls{0};
  std::atomic<std::size_t> prompted{0};

 private:
  courtside::AsrBackend& inner_;
};

}  // namespace

extern "C" {

const char* cs_last_error(void) { return last_error.c_str(); }

const char* cs_status_name(cs_status status) {
  if (status == CS_OK) return "ok";
  if (status < CS_OK || status > CS_ERR_INTERNAL) return "unknown";
  return courtside::to_string(static_cast<courtside::ErrorCode>(static_cast<int>(status) - 1));
}

const char* cs_version(void) { return "1.0.0"; }

void cs_free_string(char* s) { std::free(s); }

cs_status cs_wer(const char* reference, const char* hypothesis, double* out_wer) {
  return guarded([&] {
    require(reference, "reference");
    require(hypothesis, "hypothesis");
    require(out_wer, "out_wer");
    *out_wer = courtside::wer(reference, hypothesis).wer();
  });
}

cs_status cs_similarity(const char* a, const char* b, double* out_score) {
  return guarded([&] {
    require(a, "a");
    require(b, "b");
    require(out_score, "out_score");
    *out_score = courtside::combined_similarity(a, b);
  });
}

cs_status cs_length_safeguard(const char* baseline, const char* enhanced, double ratio, int* out_accept) {
  return guarded([&] {
    require(baseline, "baseline");
    require(enhanced, "enhanced");
    require(out_accept, "out_accept");
    *out_accept = courtside::length_safeguard(baseline, enhanced, ratio) ? 1 : 0;
  });
}

cs_status cs_config_load(const char* path, cs_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    auto c = std::make_unique<cs_config>();
    c->config = courtside::load_config(path);
    c->output_dir = c->config.output_dir.string();
    *out = c.release();
  });
}

cs_status cs_config_set_seed(cs_config* config, uint64_t seed) {
  return guarded([&] {
    require(config, "config");
    config->config.seed = seed;
    config->config.corruption.rng_seed = seed;
  });
}

cs_status cs_config_set_workers(cs_config* config, size_t workers) {
  return guarded([&] {
    require(config, "config");
    if (workers == 0) throw courtside::Error(courtside::ErrorCode::invalid_argument, "workers must be at least 1");
    config->config.workers = workers;
  });
}

uint64_t cs_config_seed(const cs_config* config) { return config ? config->config.seed : 0; }

const char* cs_config_output_dir(const cs_config* config) { return config ? config->output_dir.c_str() : ""; }

void cs_config_free(cs_config* config) { delete config; }

cs_status cs_session_open(const cs_config* config, cs_session** out) {
  return guarded([&] {
    require(config, "config");
    require(out, "out");
    *out = nullptr;
    auto s = std::make_unique<cs_session>();
    s->session = std::make_unique<courtside::Session>(config->config);
    *out = s.release();
  });
}

cs_status cs_session_finish(cs_session* session) {
  return guarded([&] {
    require(session, "session");
    session->session->finish();
  });
}

void cs_session_close(cs_session* session) { delete session; }

cs_status cs_generate_corpus(cs_session* session, size_t count, uint64_t seed, const char* manifest_out) {
  return guarded([&] {
    require(session, "session");
    require(manifest_out, "manifest_out");
    courtside::save_manifest(courtside::generate_corpus(session->session->lexicon(), count, seed), manifest_out);
  });
}

cs_status cs_transcribe(cs_session* session, const char* manifest_path, const char* variant,
                        const char* artifact_out, cs_progress_fn progress, void* user, cs_run_summary* out_summary) {
  return guarded([&] {
    require(session, "session");
    require(manifest_path, "manifest_path");
    require(variant, "variant");
    require(artifact_out, "artifact_out");
    const auto v = courtside::variant_from_string(variant);
    const auto manifest = courtside::load_manifest(manifest_path);
    auto& s = *session->session;
    auto backend = s.make_backend(manifest);
    CountingBackend counting(*backend);
    // The baseline never needs a chat client, so it never touches credentials.
    courtside::ChatClient* client = v == courtside::Variant::baseline ? nullptr : s.client();
    courtside::Pipeline pipeline(counting, client, s.lexicon(), s.config().pipeline_config());
    courtside::ProgressFn report;
    if (progress) {
      report = [&](const courtside::SegmentResult& r, std::size_t done, std::size_t total) {
        progress(r.segment_id.c_str(), done, total, r.failed ? 1 : 0, user);
      };
    }
    courtside::RunArtifact artifact{v, courtside::run_corpus(pipeline, v, manifest, s.config().workers, report)};
    courtside::write_run_artifact(artifact, artifact_out);
    if (out_summary) {
      *out_summary = cs_run_summary{};
      out_summary->segments = artifact.results.size();
      for (const auto& r : artifact.results) {
        out_summary->failed += r.failed;
        out_summary->accepted += r.accepted;
      }
      out_summary->asr_calls = counting.calls;
      out_summary->prompted_asr_calls = counting.prompted;
    }
  });
}

cs_status cs_score(const char* artifact_path, const char* manifest_path, const char* scores_out, size_t* out_scored) {
  return guarded([&] {
    require(artifact_path, "artifact_path");
    require(manifest_path, "manifest_path");
    require(scores_out, "scores_out");
    auto scores = courtside::score_run(courtside::read_run_artifact(artifact_path),
                                       courtside::load_manifest(manifest_path));
    courtside::write_scores(scores, scores_out);
    if (out_scored) *out_scored = scores.scores.size();
  });
}

cs_status cs_compare(const char* baseline_scores, const char* variant_scores, const char* table_out,
                     const char* machine_out, cs_report_summary* out_summary, char** out_table) {
  return guarded([&] {
    require(baseline_scores, "baseline_scores");
    require(variant_scores, "variant_scores");
    if (out_table) *out_table = nullptr;
    auto report = courtside::compare(courtside::read_scores(baseline_scores), courtside::read_scores(variant_scores));
    const auto table = courtside::render_report(report, courtside::ReportFormat::table);
    if (table_out) write_text(table_out, table);
    if (machine_out) write_text(machine_out, courtside::render_report(report, courtside::ReportFormat::machine));
    if (out_summary) {
      auto& s = *out_summary;
      s.evaluated = report.evaluated();
      s.improved = report.improved;
      s.degraded = report.degraded;
      s.unchanged = report.unchanged;
      s.mean_baseline = report.mean_baseline;
      s.sd_baseline = report.sd_baseline;
      s.mean_variant = report.mean_variant;
      s.sd_variant = report.sd_variant;
      s.relative_reduction = report.relative_reduction();
      s.statistic = report.test.statistic;
      s.p_value = report.test.p_value;
      s.n_effective = report.test.n_effective;
      s.exact = report.test.exact ? 1 : 0;
      s.effect_size = report.effect.r;
      s.effect_size_defined = report.effect.defined ? 1 : 0;
    }
    if (out_table) *out_table = dup_string(table);
  });
}

}  // extern "C"
