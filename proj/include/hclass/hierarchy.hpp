#ifndef HCLASS_HIERARCHY_HPP_
#define HCLASS_HIERARCHY_HPP_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hclass/dataset.hpp"
#include "hclass/grid_search.hpp"
#include "hclass/model.hpp"
#include "hclass/taxonomy.hpp"

namespace hclass {

// Class label of the stop marker inside a mixed-depth node's classifier.
inline constexpr const char* kSentinelLabel = "0";

// One classifier position in the top-down cascade. node == kNoNode is the
// virtual root (the top-rank classifier). Children are candidate child taxa
// in canonical order; sentinel adds the stop class for truths that end at
// this node.
struct PlanEntry {
  NodeId node = kNoNode;
  std::vector<NodeId> children;
  bool sentinel = false;

  int child_rank(const Taxonomy& t) const {
    return node == kNoNode ? 1 : t.node(node).rank + 1;
  }
};

struct CascadePlan {
  std::vector<PlanEntry> entries;  // rank order, canonical within a rank

  const PlanEntry* find(NodeId node) const {
    for (const auto& e : entries) {
      if (e.node == node) return &e;
    }
    return nullptr;
  }
};

// Internal nodes where some truth path terminates (mixed-depth groups that
// need a sentinel class). Derived from the taxonomy's label set, or from the
// truths actually present in a dataset.
std::set<NodeId> census_from_taxonomy(const Taxonomy& taxonomy);
std::set<NodeId> census_from_dataset(const Taxonomy& taxonomy, const Dataset& dataset);

// An entry exists wherever there are at least two effective child classes
// (distinct child taxa, counting the sentinel). Single-child lineages are
// auto-descended without a classifier.
CascadePlan build_cascade_plan(const Taxonomy& taxonomy, const std::set<NodeId>& census);

struct LearnerSpec {
  ModelKind kind = ModelKind::svm;
  GridSpec flat_grid = GridSpec::flat_default();      // flat and per-level
  GridSpec node_grid = GridSpec::per_node_default();  // cascade nodes
  double svm_tol = 1e-3;
  SoftmaxHyper softmax;
  AggregationRule rule = AggregationRule::majority_vote;
  double retained_variance = 1.0;
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct FlatModel {
  TrainedModel model;
  std::vector<NodeId> class_nodes;  // label node per class index
  std::vector<std::string> warnings;
};

struct PerLevelModels {
  std::vector<int> ranks;
  std::map<int, TrainedModel> models;
  std::map<int, std::vector<NodeId>> class_nodes;
  std::vector<std::string> warnings;
};

struct TrainedCascade {
  CascadePlan plan;
  std::map<NodeId, TrainedModel> models;
  // Class node per class index; kNoNode marks the sentinel class.
  std::map<NodeId, std::vector<NodeId>> node_classes;
  // Nodes whose classifier degraded to a single class (or none): the descent
  // action taken instead; kNoNode = stop at the node.
  std::map<NodeId, NodeId> forced;
  std::vector<std::string> warnings;
};

FlatModel train_flat(const Dataset& dataset, const Taxonomy& taxonomy,
                     const DataSplit& split, const LearnerSpec& spec);

PerLevelModels train_per_level(const Dataset& dataset, const Taxonomy& taxonomy,
                               const DataSplit& split, const LearnerSpec& spec,
                               const std::vector<int>& ranks = {1, 2});

TrainedCascade train_cascade(const Dataset& dataset, const Taxonomy& taxonomy,
                             const DataSplit& split, const LearnerSpec& spec,
                             const CascadePlan& plan);

// Views of one specimen restricted to the split's retained image ids.
Matrix views_matrix(const Specimen& specimen, const std::vector<std::string>& retained);

LabelPath predict_specimen_flat(const Taxonomy& taxonomy, const FlatModel& flat,
                                const Matrix& views, AggregationRule rule);

// Per-rank predictions; ranks may disagree with each other. `coherent` is
// set to whether consecutive predicted nodes chain parent-to-child.
std::map<int, NodeId> predict_specimen_per_level(const Taxonomy& taxonomy,
                                                 const PerLevelModels& models,
                                                 const Matrix& views, AggregationRule rule,
                                                 bool* coherent);

// Top-down descent: classify at plan nodes, auto-descend single-child
// lineages, stop at the sentinel or a terminal node. Always returns a valid
// LabelPath (or nullopt if the root immediately degrades to a stop).
std::optional<LabelPath> predict_specimen_cascade(const Taxonomy& taxonomy,
                                                  const TrainedCascade& cascade,
                                                  const Matrix& views, AggregationRule rule);

}  // namespace hclass

#endif  // HCLASS_HIERARCHY_HPP_
