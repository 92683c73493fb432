#ifndef HCLASS_PIPELINE_HPP_
#define HCLASS_PIPELINE_HPP_

#include <optional>
#include <string>
#include <vector>

#include "hclass/hierarchy.hpp"
#include "hclass/manifest.hpp"
#include "hclass/report_io.hpp"

namespace hclass {

enum class Topology { flat, per_level, cascade };

const char* to_string(Topology t);
Topology topology_from_string(const std::string& name);

// A trained topology plus what cmd_predict needs to run it.
struct Bundle {
  Topology topology = Topology::flat;
  AggregationRule default_rule = AggregationRule::majority_vote;
  std::string manifest_hash;
  FlatModel flat;
  PerLevelModels per_level;
  TrainedCascade cascade;
  std::vector<std::string> warnings;
};

Bundle train_topology(const Dataset& dataset, const Taxonomy& taxonomy,
                      const DataSplit& split, Topology topology, const LearnerSpec& spec);

// Bundle directory: bundle.json plus one model container per classifier.
void save_bundle(const Bundle& bundle, const Taxonomy& taxonomy, const std::string& dir,
                 const RunManifest& manifest);
Bundle load_bundle(const std::string& dir, const Taxonomy& taxonomy);

// One specimen's prediction: a label path for flat/cascade (absent when the
// cascade stopped before rank 1), or per-rank nodes for per-level.
struct PredictionRow {
  std::string specimen_id;
  std::optional<LabelPath> path;
  std::map<int, NodeId> per_rank;
  bool coherent = true;
};

std::vector<PredictionRow> predict_split(const Dataset& dataset, const Taxonomy& taxonomy,
                                         const DataSplit& split, const Bundle& bundle,
                                         AggregationRule rule);

// Prediction of score-view datasets: aggregate each specimen's score rows
// directly, take the argmax label, expand bottom-up.
std::vector<PredictionRow> predict_from_scores(const Dataset& scores,
                                               const Taxonomy& taxonomy,
                                               const std::vector<std::string>& ids,
                                               AggregationRule rule);

// CSV: specimen_id,rank1..rankH with node names; blank = absent. Comment
// lines carry the topology, rule and manifest hash.
std::string predictions_to_csv(const std::vector<PredictionRow>& rows,
                               const Taxonomy& taxonomy, Topology topology,
                               AggregationRule rule, const std::string& manifest_hash);

struct ParsedPredictions {
  std::vector<PredictionRow> rows;
  std::string topology_comment;  // empty when the file does not say
};

ParsedPredictions parse_predictions_csv(const std::string& text, const Taxonomy& taxonomy);

// Truth files share the prediction CSV shape.
std::string truth_to_csv(const Dataset& dataset, const Taxonomy& taxonomy,
                         const std::vector<std::string>& ids);

// Joins prediction files with truth rows and computes the full metric set,
// or rank-wise metrics when forced (or when a file declares the per-level
// topology). mode: "auto", "full", "per-rank".
EvaluationResult evaluate_predictions(const std::vector<ParsedPredictions>& files,
                                      const std::vector<ParsedPredictions>& truths,
                                      const Taxonomy& taxonomy, PrefixPolicy policy,
                                      const std::string& mode);

}  // namespace hclass

#endif  // HCLASS_PIPELINE_HPP_
