#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "courtside/manifest.hpp"
#include "courtside/pipeline.hpp"
#include "courtside/wer.hpp"

namespace courtside {

struct SegmentScore {
  std::string segment_id;
  WerRecord record;

  double wer() const noexcept { return record.wer(); }
  bool operator==(const SegmentScore&) const = default;
};

/// Per-segment scores for one run, labelled with the variant that produced
/// them.
struct ScoreSet {
  std::string label;
  std::vector<SegmentScore> scores;

  bool operator==(const ScoreSet&) const = default;
};

/// WER of each reported transcript against the manifest's ground truth, in
/// result order. Failed segments, segments without ground truth and ids
/// missing from the manifest are skipped with a warning.
ScoreSet score_run(const RunArtifact& run, const std::vector<Segment>& manifest);

/// JSON lines: {"type":"scores","label"} then one record per segment.
void write_scores(const ScoreSet& scores, const std::filesystem::path& path);
ScoreSet read_scores(const std::filesystem::path& path);

struct WilcoxonResult {
  double statistic = 0.0;  // min(W+, W-)
  double p_value = 1.0;    // two-sided
  std::size_t n_effective = 0;
  bool exact = true;

  bool operator==(const WilcoxonResult&) const = default;
};

/// Signed-rank test with zero deltas dropped and average ranks for tied
/// magnitudes. Exact enumeration up to 12 nonzero deltas, otherwise the normal
/// approximation with tie and continuity corrections.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> deltas);

struct EffectSize {
  double r = 0.0;
  bool defined = false;  // false when every delta is zero

  bool operator==(const EffectSize&) const = default;
};

/// Matched-pairs rank-biserial correlation (W+ - W-) / (W+ + W-).
EffectSize rank_biserial_effect_size(std::span<const double> deltas);

struct ComparisonRow {
  std::string segment_id;
  double wer_baseline = 0.0;
  double wer_variant = 0.0;
  double delta = 0.0;  // variant - baseline; negative is an improvement

  bool operator==(const ComparisonRow&) const = default;
};

struct ComparisonReport {
  std::string baseline_label;
  std::string variant_label;
  std::vector<ComparisonRow> per_segment;
  double mean_baseline = 0.0;
  double sd_baseline = 0.0;  // sample standard deviation, 0 below two segments
  double mean_variant = 0.0;
  double sd_variant = 0.0;
  std::size_t improved = 0;
  std::size_t degraded = 0;
  std::size_t unchanged = 0;
  WilcoxonResult test;
  EffectSize effect;

  std::size_t evaluated() const noexcept { return per_segment.size(); }
  /// Share of evaluated segments, in percent; 0 for an empty report.
  double percent(std::size_t count) const noexcept;
  /// (mean_baseline - mean_variant) / mean_baseline, 0 when the baseline is 0.
  double relative_reduction() const noexcept;

  bool operator==(const ComparisonReport&) const = default;
};

/// Pairs the two score sets by segment id. Throws Error(id_mismatch) naming
/// the ids present on only one side.
ComparisonReport compare(const ScoreSet& baseline, const ScoreSet& variant);

enum class ReportFormat { table, machine };

/// `table` mirrors the usual results table (Mean WER ± SD, Improved,
/// Degraded) with the test statistics underneath; `machine` is JSON lines with
/// every per-segment row and parses back with parse_report.
std::string render_report(const ComparisonReport& report, ReportFormat format);

/// Inverse of the machine format. Throws Error(parse).
ComparisonReport parse_report(std::string_view machine);

}  // namespace courtside
