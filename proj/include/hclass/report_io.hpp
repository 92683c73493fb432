#ifndef HCLASS_REPORT_IO_HPP_
#define HCLASS_REPORT_IO_HPP_

#include <optional>
#include <string>
#include <vector>

#include "hclass/metrics.hpp"

namespace hclass {

// Rank-wise evaluation of prediction files whose rank columns need not chain
// into paths (the per-level topology).
struct RankOnlyReport {
  std::size_t n = 0;
  std::map<int, double> ce_per_rank;
  std::map<int, std::size_t> rank_support;
  std::size_t incoherent_rows = 0;
};

struct EvaluationResult {
  std::string mode;  // "full" or "per-rank"
  PrefixPolicy policy = PrefixPolicy::partial_credit;

  std::vector<MetricsReport> per_split;
  std::optional<SplitAggregate> aggregate;

  std::vector<RankOnlyReport> rank_reports;
  std::map<int, ScalarStat> rank_ce_stats;
  std::size_t incoherent_total = 0;
  std::size_t n_total = 0;
};

std::string report_to_json(const EvaluationResult& result, const Taxonomy& taxonomy,
                           const std::string& manifest_hash);

// Aligned plain-text table: deepest-level CE/LCSE, per-rank CE, and the
// error-structure counts summed across splits.
std::string report_to_table(const EvaluationResult& result, const Taxonomy& taxonomy);

}  // namespace hclass

#endif  // HCLASS_REPORT_IO_HPP_
