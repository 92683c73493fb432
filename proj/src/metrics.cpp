#include "hclass/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "hclass/errors.hpp"

namespace hclass {

namespace {

void require_nonempty(std::span<const PredictionRecord> records) {
  if (records.empty()) throw_validation("EmptyInput", "no prediction records");
}

bool exact_match(const PredictionRecord& r) {
  return r.pred.has_value() && *r.pred == r.truth;
}

// First rank where the two sides disagree, treating levels past a path's
// depth as absent. Zero when the record is an exact match.
int first_divergence_rank(const PredictionRecord& r) {
  if (exact_match(r)) return 0;
  const int pred_depth = r.pred ? r.pred->depth() : 0;
  const int limit = std::max(pred_depth, r.truth.depth());
  for (int rank = 1; rank <= limit; ++rank) {
    auto a = r.pred ? ancestor_at_rank(*r.pred, rank) : std::nullopt;
    auto b = ancestor_at_rank(r.truth, rank);
    if (a != b) return rank;
  }
  return 0;  // unreachable for well-formed records
}

}  // namespace

double classification_error(const Taxonomy& taxonomy,
                            std::span<const PredictionRecord> records) {
  require_nonempty(records);
  std::size_t wrong = 0;
  for (const auto& r : records) {
    taxonomy.validate_path(r.truth);
    if (r.pred) taxonomy.validate_path(*r.pred);
    if (!exact_match(r)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(records.size());
}

double cse(const Taxonomy& taxonomy, std::span<const PredictionRecord> records,
           int total_levels, PrefixPolicy policy) {
  require_nonempty(records);
  double sum = 0.0;
  for (const auto& r : records) {
    if (r.truth.depth() > total_levels) {
      throw_validation("BadLevelCount", "truth path deeper than total level count");
    }
    sum += loss_height(taxonomy, r.pred, r.truth, policy);
  }
  return sum / (static_cast<double>(records.size()) * total_levels);
}

double lcse(const Taxonomy& taxonomy, std::span<const PredictionRecord> records,
            PrefixPolicy policy) {
  require_nonempty(records);
  double sum = 0.0;
  for (const auto& r : records) {
    sum += static_cast<double>(loss_height(taxonomy, r.pred, r.truth, policy)) /
           static_cast<double>(r.truth.depth());
  }
  return sum / static_cast<double>(records.size());
}

double ce_at_rank(const Taxonomy& taxonomy,
                  std::span<const PredictionRecord> records, int rank) {
  require_nonempty(records);
  std::size_t eligible = 0;
  std::size_t wrong = 0;
  for (const auto& r : records) {
    taxonomy.validate_path(r.truth);
    if (r.pred) taxonomy.validate_path(*r.pred);
    auto truth_node = ancestor_at_rank(r.truth, rank);
    if (!truth_node) continue;
    ++eligible;
    auto pred_node = r.pred ? ancestor_at_rank(*r.pred, rank) : std::nullopt;
    if (pred_node != truth_node) ++wrong;
  }
  if (eligible == 0) {
    throw_validation("NoEligibleRecords",
                     "no truth path reaches rank " + std::to_string(rank));
  }
  return static_cast<double>(wrong) / static_cast<double>(eligible);
}

std::map<int, std::size_t> error_structure(const Taxonomy& taxonomy,
                                           std::span<const PredictionRecord> records) {
  std::map<int, std::size_t> counts;
  for (const auto& r : records) {
    taxonomy.validate_path(r.truth);
    if (r.pred) taxonomy.validate_path(*r.pred);
    int rank = first_divergence_rank(r);
    if (rank > 0) ++counts[rank];
  }
  return counts;
}

ConfusionMatrix confusion_matrix(const Taxonomy& taxonomy,
                                 std::span<const PredictionRecord> records, int rank) {
  ConfusionMatrix cm;
  cm.rank = rank;
  cm.labels = taxonomy.nodes_at_rank(rank);
  std::map<NodeId, std::size_t> index;
  for (std::size_t i = 0; i < cm.labels.size(); ++i) index[cm.labels[i]] = i;
  cm.counts = Matrix(cm.labels.size(), cm.labels.size() + 1, 0.0);
  const std::size_t absent_col = cm.labels.size();
  for (const auto& r : records) {
    auto truth_node = ancestor_at_rank(r.truth, rank);
    if (!truth_node) continue;
    auto pred_node = r.pred ? ancestor_at_rank(*r.pred, rank) : std::nullopt;
    const std::size_t row = index.at(*truth_node);
    const std::size_t col = pred_node ? index.at(*pred_node) : absent_col;
    cm.counts(row, col) += 1.0;
  }
  return cm;
}

MetricsReport evaluate_records(const Taxonomy& taxonomy,
                               std::span<const PredictionRecord> records,
                               PrefixPolicy policy) {
  require_nonempty(records);
  MetricsReport report;
  report.n = records.size();
  report.policy = policy;
  report.ce_deepest = classification_error(taxonomy, records);
  report.cse = cse(taxonomy, records, taxonomy.height(), policy);
  report.lcse = lcse(taxonomy, records, policy);
  report.err_structure = error_structure(taxonomy, records);
  for (int rank = 1; rank <= taxonomy.height(); ++rank) {
    std::size_t eligible = 0;
    for (const auto& r : records) {
      if (r.truth.depth() >= rank) ++eligible;
    }
    if (eligible == 0) continue;
    report.ce_per_rank[rank] = ce_at_rank(taxonomy, records, rank);
    report.rank_support[rank] = eligible;
    report.confusion[rank] = confusion_matrix(taxonomy, records, rank);
  }
  return report;
}

namespace {

ScalarStat stat_of(const std::vector<double>& values) {
  ScalarStat s;
  const std::size_t n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return s;
}

}  // namespace

SplitAggregate aggregate_splits(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw_validation("EmptyInput", "no reports to aggregate");
  SplitAggregate agg;
  agg.n_reports = reports.size();
  agg.degenerate_sd = reports.size() == 1;

  std::vector<double> ce, cs, lc;
  std::map<int, std::vector<double>> per_rank;
  for (const auto& r : reports) {
    ce.push_back(r.ce_deepest);
    cs.push_back(r.cse);
    lc.push_back(r.lcse);
    for (const auto& [rank, value] : r.ce_per_rank) per_rank[rank].push_back(value);
    for (const auto& [rank, count] : r.err_structure) agg.err_structure_total[rank] += count;
    agg.n_total += r.n;
  }
  agg.ce_deepest = stat_of(ce);
  agg.cse = stat_of(cs);
  agg.lcse = stat_of(lc);
  for (const auto& [rank, values] : per_rank) agg.ce_per_rank[rank] = stat_of(values);
  return agg;
}

}  // namespace hclass
