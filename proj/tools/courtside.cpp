// Command-line front end. Everything goes through the C interface.

#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "courtside/courtside.h"

namespace fs = std::filesystem;

namespace {

// Failure of an infrastructure step; the message is already printed.
struct Failed {
  int code = 1;
};

void check(cs_status status, const std::string& what) {
  if (status == CS_OK) return;
  std::fprintf(stderr, "error: %s: %s (%s)\n", what.c_str(), cs_last_error(), cs_status_name(status));
  throw Failed{};
}

struct ConfigHandle {
  cs_config* p = nullptr;
  ~ConfigHandle() { cs_config_free(p); }
};

struct SessionHandle {
  cs_session* p = nullptr;
  ~SessionHandle() { cs_session_close(p); }
};

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
};

void open_session(const Common& common, ConfigHandle& config, SessionHandle& session) {
  check(cs_config_load(common.config.c_str(), &config.p), "loading config " + common.config);
  if (common.seed) check(cs_config_set_seed(config.p, *common.seed), "--seed");
  if (common.workers) check(cs_config_set_workers(config.p, *common.workers), "--workers");
  check(cs_session_open(config.p, &session.p), "validating config " + common.config);
}

void print_progress(const char* id, size_t done, size_t total, int failed, void*) {
  std::fprintf(stderr, "[%zu/%zu] %s %s\n", done, total, id, failed ? "FAILED" : "ok");
}

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
}

cs_run_summary transcribe(cs_session* session, const std::string& manifest, const std::string& variant,
                          const fs::path& out, bool quiet) {
  ensure_parent(out);
  cs_run_summary summary{};
  check(cs_transcribe(session, manifest.c_str(), variant.c_str(), out.string().c_str(),
                      quiet ? nullptr : print_progress, nullptr, &summary),
        "transcribing " + manifest + " with " + variant);
  std::printf("%s: %zu segments, %zu failed, %zu enhanced, %zu ASR calls (%zu prompted) -> %s\n", variant.c_str(),
              summary.segments, summary.failed, summary.accepted, summary.asr_calls, summary.prompted_asr_calls,
              out.string().c_str());
  return summary;
}

void score(const fs::path& artifact, const std::string& manifest, const fs::path& out) {
  ensure_parent(out);
  size_t scored = 0;
  check(cs_score(artifact.string().c_str(), manifest.c_str(), out.string().c_str(), &scored),
        "scoring " + artifact.string());
  std::printf("scored %zu segments -> %s\n", scored, out.string().c_str());
}

cs_report_summary compare(const fs::path& baseline, const fs::path& variant, const fs::path& prefix) {
  ensure_parent(prefix);
  const std::string table_path = prefix.string() + ".md";
  const std::string machine_path = prefix.string() + ".jsonl";
  cs_report_summary summary{};
  char* table = nullptr;
  check(cs_compare(baseline.string().c_str(), variant.string().c_str(), table_path.c_str(), machine_path.c_str(),
                   &summary, &table),
        "comparing " + baseline.string() + " and " + variant.string());
  std::unique_ptr<char, decltype(&cs_free_string)> owned(table, cs_free_string);
  std::printf("%s", table);
  std::printf("-> %s, %s\n", table_path.c_str(), machine_path.c_str());
  return summary;
}

std::string default_out(ConfigHandle& config, const std::string& name) {
  return (fs::path(cs_config_output_dir(config.p)) / name).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ASR transcript enhancement with domain context prompts"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cs_version());

  Common common;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", common.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", common.seed, "Override the configured seed");
    cmd->add_option("--workers", common.workers, "Override the configured worker count")->check(CLI::PositiveNumber);
  };
  const std::vector<std::string> variants{"baseline", "p1", "p2", "p3", "p4"};

  // transcribe
  auto* tr = app.add_subcommand("transcribe", "Run one variant over a manifest and write the run artifact");
  add_common(tr);
  std::string tr_manifest, tr_variant = "p4", tr_out;
  bool tr_quiet = false;
  tr->add_option("--manifest", tr_manifest, "Segment manifest (JSON lines)")->required()->check(CLI::ExistingFile);
  tr->add_option("--variant", tr_variant, "Pipeline variant")->check(CLI::IsMember(variants));
  tr->add_option("--out", tr_out, "Run artifact path (default <output_dir>/<variant>.run.jsonl)");
  tr->add_flag("--quiet", tr_quiet, "No per-segment progress");

  // eval
  auto* ev = app.add_subcommand("eval", "Score a run artifact against the manifest ground truth");
  std::string ev_run, ev_manifest, ev_out;
  ev->add_option("run", ev_run, "Run artifact")->required()->check(CLI::ExistingFile);
  ev->add_option("--manifest", ev_manifest, "Manifest with ground truth")->required()->check(CLI::ExistingFile);
  ev->add_option("--out", ev_out, "Score file (default <run>.scores.jsonl)");

  // compare
  auto* cmp = app.add_subcommand("compare", "Compare two score files");
  std::string cmp_base, cmp_var, cmp_out;
  cmp->add_option("baseline", cmp_base, "Baseline scores")->required()->check(CLI::ExistingFile);
  cmp->add_option("variant", cmp_var, "Variant scores")->required()->check(CLI::ExistingFile);
  cmp->add_option("--out", cmp_out, "Report prefix; writes <prefix>.md and <prefix>.jsonl")->required();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Baseline plus variants on a truth manifest, scored and compared");
  add_common(sim);
  std::string sim_manifest, sim_out;
  std::size_t sim_generate = 0;
  std::vector<std::string> sim_variants{"p1", "p2", "p3", "p4"};
  bool sim_quiet = false;
  auto* sim_m = sim->add_option("--manifest", sim_manifest, "Truth manifest")->check(CLI::ExistingFile);
  auto* sim_g = sim->add_option("--generate", sim_generate, "Generate this many synthetic segments instead");
  sim_m->excludes(sim_g);
  sim->add_option("--variant", sim_variants, "Variants to run against the baseline")
      ->check(CLI::IsMember({"p1", "p2", "p3", "p4"}))
      ->delimiter(',');
  sim->add_option("--out", sim_out, "Output directory (default <output_dir>)");
  sim->add_flag("--quiet", sim_quiet, "No per-segment progress");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*tr) {
      ConfigHandle config;
      SessionHandle session;
      open_session(common, config, session);
      fs::path out = tr_out.empty() ? default_out(config, tr_variant + ".run.jsonl") : tr_out;
      transcribe(session.p, tr_manifest, tr_variant, out, tr_quiet);
      check(cs_session_finish(session.p), "saving recorded chat exchanges");
    } else if (*ev) {
      fs::path out = ev_out.empty() ? fs::path(ev_run).replace_extension("").string() + ".scores.jsonl" : ev_out;
      score(ev_run, ev_manifest, out);
    } else if (*cmp) {
      compare(cmp_base, cmp_var, cmp_out);
    } else if (*sim) {
      if (sim_manifest.empty() && sim_generate == 0) {
        std::fprintf(stderr, "error: simulate needs --manifest or --generate N\n");
        return 2;
      }
      ConfigHandle config;
      SessionHandle session;
      open_session(common, config, session);
      const fs::path dir = sim_out.empty() ? fs::path(cs_config_output_dir(config.p)) : fs::path(sim_out);
      fs::create_directories(dir);
      std::string manifest = sim_manifest;
      if (manifest.empty()) {
        manifest = (dir / "corpus.jsonl").string();
        check(cs_generate_corpus(session.p, sim_generate, cs_config_seed(config.p), manifest.c_str()),
              "generating the synthetic corpus");
        std::printf("generated %zu segments -> %s\n", sim_generate, manifest.c_str());
      }
      auto run_and_score = [&](const std::string& variant) {
        const fs::path artifact = dir / (variant + ".run.jsonl");
        transcribe(session.p, manifest, variant, artifact, sim_quiet);
        const fs::path scores = dir / (variant + ".scores.jsonl");
        score(artifact, manifest, scores);
        return scores;
      };
      const fs::path base_scores = run_and_score("baseline");
      std::printf("\n%-8s %-10s %-10s %-9s %-9s %s\n", "variant", "mean WER", "reduction", "improved", "degraded",
                  "p");
      std::vector<std::pair<std::string, cs_report_summary>> rows;
      for (const auto& v : sim_variants) {
        const fs::path var_scores = run_and_score(v);
        rows.emplace_back(v, compare(base_scores, var_scores, dir / ("report_" + v)));
      }
      for (const auto& [v, s] : rows) {
        char reduction[32], improved[32], degraded[32];
        std::snprintf(reduction, sizeof reduction, "%.1f%%", s.relative_reduction * 100.0);
        std::snprintf(improved, sizeof improved, "%zu/%zu", s.improved, s.evaluated);
        std::snprintf(degraded, sizeof degraded, "%zu/%zu", s.degraded, s.evaluated);
        std::printf("%-8s %-10.4f %-10s %-9s %-9s %.3g\n", v.c_str(), s.mean_variant, reduction, improved, degraded,
                    s.p_value);
      }
      check(cs_session_finish(session.p), "saving recorded chat exchanges");
    }
  } catch (const Failed& f) {
    return f.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
