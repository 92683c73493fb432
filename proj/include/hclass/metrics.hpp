#ifndef HCLASS_METRICS_HPP_
#define HCLASS_METRICS_HPP_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hclass/matrix.hpp"
#include "hclass/taxonomy.hpp"

namespace hclass {

struct PredictionRecord {
  std::string specimen_id;
  LabelPath truth;
  std::optional<LabelPath> pred;  // nullopt = no prediction at all
};

// Confusion at one rank: rows are the truth node (records whose truth reaches
// the rank), columns the predicted node plus a trailing "absent" column.
struct ConfusionMatrix {
  int rank = 0;
  std::vector<NodeId> labels;  // canonical node order at this rank
  Matrix counts;               // labels.size() x (labels.size() + 1)
};

struct MetricsReport {
  std::size_t n = 0;
  double ce_deepest = 0.0;
  double cse = 0.0;
  double lcse = 0.0;
  std::map<int, double> ce_per_rank;         // rank -> error fraction
  std::map<int, std::size_t> rank_support;   // rank -> denominator
  std::map<int, std::size_t> err_structure;  // rank -> first-divergence errors
  std::map<int, ConfusionMatrix> confusion;
  PrefixPolicy policy = PrefixPolicy::partial_credit;
};

struct ScalarStat {
  double mean = 0.0;
  double sd = 0.0;
};

struct SplitAggregate {
  std::size_t n_reports = 0;
  bool degenerate_sd = false;  // single report; sd reported as 0
  ScalarStat ce_deepest;
  ScalarStat cse;
  ScalarStat lcse;
  std::map<int, ScalarStat> ce_per_rank;
  std::map<int, std::size_t> err_structure_total;  // summed across splits
  std::size_t n_total = 0;
};

// Fraction of records whose prediction is not exactly the truth path; a
// missing prediction counts as wrong. Throws EmptyInput.
double classification_error(const Taxonomy& taxonomy,
                            std::span<const PredictionRecord> records);

// (1/(nH)) * sum of loss heights; H must reach the deepest truth.
double cse(const Taxonomy& taxonomy, std::span<const PredictionRecord> records,
           int total_levels, PrefixPolicy policy = PrefixPolicy::partial_credit);

// (1/n) * sum of loss_height_i / depth(truth_i).
double lcse(const Taxonomy& taxonomy, std::span<const PredictionRecord> records,
            PrefixPolicy policy = PrefixPolicy::partial_credit);

// Error fraction at one rank over records whose truth reaches it; a missing
// ancestor on the prediction side is an error. Throws NoEligibleRecords.
double ce_at_rank(const Taxonomy& taxonomy,
                  std::span<const PredictionRecord> records, int rank);

// Counts each erroneous record at the first rank where prediction and truth
// part ways (node mismatch, or exactly one side runs out of levels). Counts
// sum to the number of deepest-level errors.
std::map<int, std::size_t> error_structure(const Taxonomy& taxonomy,
                                           std::span<const PredictionRecord> records);

ConfusionMatrix confusion_matrix(const Taxonomy& taxonomy,
                                 std::span<const PredictionRecord> records, int rank);

// Computes every metric over one split's records.
MetricsReport evaluate_records(const Taxonomy& taxonomy,
                               std::span<const PredictionRecord> records,
                               PrefixPolicy policy = PrefixPolicy::partial_credit);

// Unweighted mean and sample sd (n-1) of each scalar across reports;
// error-structure counts are summed, mirroring how multi-split results are
// reported. Throws EmptyInput.
SplitAggregate aggregate_splits(std::span<const MetricsReport> reports);

}  // namespace hclass

#endif  // HCLASS_METRICS_HPP_
