#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "courtside/error.hpp"
#include "courtside/eval.hpp"
#include "courtside/textnorm.hpp"
#include "json.hpp"

namespace courtside {

namespace {

using OJson = nlohmann::ordered_json;

std::string slurp(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, std::string("cannot read ") + what + " " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class Fn>
void for_each_json_line(std::string_view text, const char* what, Fn&& fn) {
  std::istringstream in{std::string(text)};
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    if (trim(line).empty()) continue;
    try {
      fn(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::parse, std::string(what) + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

// Doubled average ranks of |x| are integers, which keeps the exact null
// distribution in integer arithmetic.
std::vector<long> doubled_ranks(const std::vector<double>& nonzero) {
  std::vector<std::size_t> order(nonzero.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::fabs(nonzero[a]) < std::fabs(nonzero[b]); });
  std::vector<long> ranks(nonzero.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && std::fabs(nonzero[order[j + 1]]) == std::fabs(nonzero[order[i]])) ++j;
    // Positions i..j (0-based) share the average of ranks i+1..j+1.
    const long doubled = long(i + 1) + long(j + 1);
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = doubled;
    i = j + 1;
  }
  return ranks;
}

std::vector<double> nonzero_of(std::span<const double> deltas) {
  std::vector<double> out;
  for (double d : deltas) {
    if (!std::isfinite(d)) throw Error(ErrorCode::invalid_argument, "deltas must be finite");
    if (d != 0.0) out.push_back(d);
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

double sample_sd(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / double(v.size() - 1));
}

}  // namespace

ScoreSet score_run(const RunArtifact& run, const std::vector<Segment>& manifest) {
  std::map<std::string, const Segment*> by_id;
  for (const auto& seg : manifest) by_id[seg.segment_id] = &seg;
  ScoreSet out;
  out.label = to_string(run.variant);
  for (const auto& r : run.results) {
    if (r.failed) {
      spdlog::warn("segment {} failed during transcription and is not scored", r.segment_id);
      continue;
    }
    auto it = by_id.find(r.segment_id);
    if (it == by_id.end()) {
      spdlog::warn("segment {} is not in the manifest and is not scored", r.segment_id);
      continue;
    }
    if (!it->second->ground_truth || normalize(*it->second->ground_truth).words.empty()) {
      spdlog::warn("segment {} has no ground truth and is not scored", r.segment_id);
      continue;
    }
    out.scores.push_back({r.segment_id, wer(*it->second->ground_truth, r.enhanced_transcript)});
  }
  return out;
}

void write_scores(const ScoreSet& scores, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write scores " + path.string());
  out << OJson{{"type", "scores"}, {"label", scores.label}}.dump() << '\n';
  for (const auto& s : scores.scores) {
    OJson j{{"type", "score"},
            {"segment_id", s.segment_id},
            {"wer", s.wer()},
            {"substitutions", s.record.substitutions},
            {"deletions", s.record.deletions},
            {"insertions", s.record.insertions},
            {"reference_length", s.record.reference_length}};
    out << j.dump() << '\n';
  }
}

ScoreSet read_scores(const std::filesystem::path& path) {
  ScoreSet out;
  bool header = false;
  std::set<std::string> seen;
  for_each_json_line(slurp(path, "scores"), "scores", [&](const nlohmann::json& j) {
    const auto type = j.at("type").get<std::string>();
    if (type == "scores") {
      out.label = j.at("label").get<std::string>();
      header = true;
    } else if (type == "score") {
      SegmentScore s;
      s.segment_id = j.at("segment_id").get<std::string>();
      s.record.substitutions = j.at("substitutions").get<std::size_t>();
      s.record.deletions = j.at("deletions").get<std::size_t>();
      s.record.insertions = j.at("insertions").get<std::size_t>();
      s.record.reference_length = j.at("reference_length").get<std::size_t>();
      if (!seen.insert(s.segment_id).second) throw Error(ErrorCode::parse, "duplicate score for " + s.segment_id);
      out.scores.push_back(std::move(s));
    } else {
      throw Error(ErrorCode::parse, "unknown record type '" + type + "' in " + path.string());
    }
  });
  if (!header && !out.scores.empty()) throw Error(ErrorCode::parse, "scores file " + path.string() + " has no header");
  return out;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> deltas) {
  const auto nz = nonzero_of(deltas);
  WilcoxonResult res;
  res.n_effective = nz.size();
  if (nz.empty()) return res;

  const auto ranks = doubled_ranks(nz);
  long plus2 = 0, total2 = 0;
  for (std::size_t i = 0; i < nz.size(); ++i) {
    total2 += ranks[i];
    if (nz[i] > 0) plus2 += ranks[i];
  }
  const long w2 = std::min(plus2, total2 - plus2);
  res.statistic = double(w2) / 2.0;

  if (nz.size() <= 12) {
    // counts[s]: sign assignments whose doubled positive rank sum is s.
    std::vector<std::uint64_t> counts(std::size_t(total2) + 1, 0);
    counts[0] = 1;
    for (long r : ranks) {
      for (long s = total2; s >= r; --s) counts[std::size_t(s)] += counts[std::size_t(s - r)];
    }
    std::uint64_t extreme = 0;
    for (long s = 0; s <= total2; ++s) {
      if (std::min(s, total2 - s) <= w2) extreme += counts[std::size_t(s)];
    }
    res.p_value = std::min(1.0, double(extreme) / double(std::uint64_t(1) << nz.size()));
    res.exact = true;
    return res;
  }

  const double n = double(nz.size());
  double tie_term = 0.0;
  std::map<long, double> tie_sizes;
  for (long r : ranks) tie_sizes[r] += 1.0;
  for (const auto& [rank, t] : tie_sizes) tie_term += t * t * t - t;
  const double mean = n * (n + 1.0) / 4.0;
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
  res.exact = false;
  if (var <= 0.0) return res;
  const double z = std::max(0.0, std::fabs(res.statistic - mean) - 0.5) / std::sqrt(var);
  res.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return res;
}

EffectSize rank_biserial_effect_size(std::span<const double> deltas) {
  const auto nz = nonzero_of(deltas);
  if (nz.empty()) return {0.0, false};
  const auto ranks = doubled_ranks(nz);
  double plus = 0.0, minus = 0.0;
  for (std::size_t i = 0; i < nz.size(); ++i) (nz[i] > 0 ? plus : minus) += double(ranks[i]);
  return {(plus - minus) / (plus + minus), true};
}

double ComparisonReport::percent(std::size_t count) const noexcept {
  return per_segment.empty() ? 0.0 : 100.0 * double(count) / double(per_segment.size());
}

double ComparisonReport::relative_reduction() const noexcept {
  return mean_baseline == 0.0 ? 0.0 : (mean_baseline - mean_variant) / mean_baseline;
}

ComparisonReport compare(const ScoreSet& baseline, const ScoreSet& variant) {
  std::map<std::string, double> variant_by_id;
  for (const auto& s : variant.scores) variant_by_id[s.segment_id] = s.wer();
  std::set<std::string> baseline_ids;
  std::vector<std::string> only_baseline, only_variant;
  for (const auto& s : baseline.scores) {
    baseline_ids.insert(s.segment_id);
    if (!variant_by_id.contains(s.segment_id)) only_baseline.push_back(s.segment_id);
  }
  for (const auto& s : variant.scores) {
    if (!baseline_ids.contains(s.segment_id)) only_variant.push_back(s.segment_id);
  }
  if (!only_baseline.empty() || !only_variant.empty()) {
    std::string msg = "score sets cover different segments";
    if (!only_baseline.empty()) msg += "; only in " + baseline.label + ": " + join(only_baseline, ", ");
    if (!only_variant.empty()) msg += "; only in " + variant.label + ": " + join(only_variant, ", ");
    throw Error(ErrorCode::id_mismatch, msg);
  }

  ComparisonReport rep;
  rep.baseline_label = baseline.label;
  rep.variant_label = variant.label;
  std::vector<double> base, var, deltas;
  for (const auto& s : baseline.scores) {
    ComparisonRow row{s.segment_id, s.wer(), variant_by_id[s.segment_id], 0.0};
    // Snap to 12 decimals so equal error rates reached through different
    // fractions compare as ties.
    row.delta = std::round((row.wer_variant - row.wer_baseline) * 1e12) / 1e12;
    if (row.delta < 0) {
      ++rep.improved;
    } else if (row.delta > 0) {
      ++rep.degraded;
    } else {
      row.delta = 0.0;
      ++rep.unchanged;
    }
    base.push_back(row.wer_baseline);
    var.push_back(row.wer_variant);
    deltas.push_back(row.delta);
    rep.per_segment.push_back(std::move(row));
  }
  rep.mean_baseline = mean_of(base);
  rep.sd_baseline = sample_sd(base, rep.mean_baseline);
  rep.mean_variant = mean_of(var);
  rep.sd_variant = sample_sd(var, rep.mean_variant);
  rep.test = wilcoxon_signed_rank(deltas);
  rep.effect = rank_biserial_effect_size(deltas);
  return rep;
}

namespace {

std::string count_cell(std::size_t count, double pct) { return fmt::format("{} ({:.1f}%)", count, pct); }

std::string render_table(const ComparisonReport& r) {
  std::string out = "| Variant | Mean WER ± SD | Improved | Degraded |\n|---|---|---|---|\n";
  if (r.per_segment.empty()) return out;
  out += fmt::format("| {} | {:.3f} ± {:.3f} | - | - |\n", r.baseline_label, r.mean_baseline, r.sd_baseline);
  out += fmt::format("| {} | {:.3f} ± {:.3f} | {} | {} |\n", r.variant_label, r.mean_variant, r.sd_variant,
                     count_cell(r.improved, r.percent(r.improved)), count_cell(r.degraded, r.percent(r.degraded)));
  out += fmt::format("\nSegments: {} (unchanged {})\n", r.evaluated(), count_cell(r.unchanged, r.percent(r.unchanged)));
  out += fmt::format("Relative mean WER reduction: {:.1f}%\n", 100.0 * r.relative_reduction());
  out += fmt::format("Wilcoxon signed-rank: W = {:g}, p = {:.4g} ({}), n = {}\n", r.test.statistic, r.test.p_value,
                     r.test.exact ? "exact" : "normal approximation", r.test.n_effective);
  if (r.effect.defined) {
    out += fmt::format("Rank-biserial r = {:.3f}\n", r.effect.r);
  } else {
    out += "Rank-biserial r = 0 (undefined: no nonzero deltas)\n";
  }
  return out;
}

std::string render_machine(const ComparisonReport& r) {
  OJson head{{"type", "comparison"},
             {"baseline_label", r.baseline_label},
             {"variant_label", r.variant_label},
             {"segments", r.per_segment.size()},
             {"mean_baseline", r.mean_baseline},
             {"sd_baseline", r.sd_baseline},
             {"mean_variant", r.mean_variant},
             {"sd_variant", r.sd_variant},
             {"improved", r.improved},
             {"degraded", r.degraded},
             {"unchanged", r.unchanged},
             {"statistic", r.test.statistic},
             {"p_value", r.test.p_value},
             {"n_effective", r.test.n_effective},
             {"exact", r.test.exact},
             {"effect_size", r.effect.r},
             {"effect_size_defined", r.effect.defined}};
  std::string out = head.dump() + "\n";
  for (const auto& row : r.per_segment) {
    OJson j{{"type", "row"},
            {"segment_id", row.segment_id},
            {"wer_baseline", row.wer_baseline},
            {"wer_variant", row.wer_variant},
            {"delta", row.delta}};
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace

std::string render_report(const ComparisonReport& report, ReportFormat format) {
  return format == ReportFormat::table ? render_table(report) : render_machine(report);
}

ComparisonReport parse_report(std::string_view machine) {
  ComparisonReport r;
  bool header = false;
  std::size_t expected = 0;
  for_each_json_line(machine, "report", [&](const nlohmann::json& j) {
    const auto type = j.at("type").get<std::string>();
    if (type == "comparison") {
      if (header) throw Error(ErrorCode::parse, "report has two headers");
      header = true;
      r.baseline_label = j.at("baseline_label").get<std::string>();
      r.variant_label = j.at("variant_label").get<std::string>();
      expected = j.at("segments").get<std::size_t>();
      r.mean_baseline = j.at("mean_baseline").get<double>();
      r.sd_baseline = j.at("sd_baseline").get<double>();
      r.mean_variant = j.at("mean_variant").get<double>();
      r.sd_variant = j.at("sd_variant").get<double>();
      r.improved = j.at("improved").get<std::size_t>();
      r.degraded = j.at("degraded").get<std::size_t>();
      r.unchanged = j.at("unchanged").get<std::size_t>();
      r.test.statistic = j.at("statistic").get<double>();
      r.test.p_value = j.at("p_value").get<double>();
      r.test.n_effective = j.at("n_effective").get<std::size_t>();
      r.test.exact = j.at("exact").get<bool>();
      r.effect.r = j.at("effect_size").get<double>();
      r.effect.defined = j.at("effect_size_defined").get<bool>();
    } else if (type == "row") {
      if (!header) throw Error(ErrorCode::parse, "report row before the header");
      r.per_segment.push_back({j.at("segment_id").get<std::string>(), j.at("wer_baseline").get<double>(),
                               j.at("wer_variant").get<double>(), j.at("delta").get<double>()});
    } else {
      throw Error(ErrorCode::parse, "unknown report record '" + type + "'");
    }
  });
  if (!header) throw Error(ErrorCode::parse, "report has no header");
  if (r.per_segment.size() != expected) throw Error(ErrorCode::parse, "report row count does not match its header");
  if (r.improved + r.degraded + r.unchanged != r.per_segment.size()) {
    throw Error(ErrorCode::parse, "report counts do not partition its rows");
  }
  return r;
}

}  // namespace courtside
