#ifndef HCLASS_DATASET_HPP_
#define HCLASS_DATASET_HPP_

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hclass/taxonomy.hpp"

namespace hclass {

enum class ViewKind { features, scores };

struct View {
  std::string image_id;
  std::vector<double> values;  // feature vector or class-score vector
};

struct Specimen {
  std::string id;
  LabelPath truth;
  std::vector<View> views;
};

struct Dataset {
  ViewKind kind = ViewKind::features;
  std::size_t dim = 0;
  std::vector<Specimen> specimens;  // canonical order = first appearance
  std::unordered_map<std::string, std::size_t> index;

  const Specimen* find(const std::string& id) const {
    auto it = index.find(id);
    return it == index.end() ? nullptr : &specimens[it->second];
  }
};

// Rows: specimen_id,image_id,label_leaf,f1..fK. The truth path is the label
// leaf expanded bottom-up. Throws UnknownLeaf, DimensionMismatch,
// DuplicateImage, EmptyInput.
Dataset ingest_features(std::istream& in, const Taxonomy& taxonomy);
Dataset ingest_features_file(const std::string& path, const Taxonomy& taxonomy);

// Rows: specimen_id,image_id,label_leaf,s_1..s_K with K = label count and
// column order matching the taxonomy's canonical label order.
Dataset ingest_scores(std::istream& in, const Taxonomy& taxonomy);
Dataset ingest_scores_file(const std::string& path, const Taxonomy& taxonomy);

// Uniform view subsample without replacement, keeping file order; identity
// when the cap already holds. Keyed by (seed, specimen id) so the choice is
// independent of processing order.
Specimen subsample_views(const Specimen& specimen, std::size_t cap, std::uint64_t seed);

enum class SplitScheme { comparison, machine_learning };

struct SplitSpec {
  SplitScheme scheme = SplitScheme::machine_learning;
  std::uint64_t seed = 1;
  int n_splits = 10;

  // comparison scheme: per-label test counts; empty = built-in emulation
  // (1 per label plus one extra for a seeded subset, totals 45-46).
  std::map<std::string, int> test_counts;
  double comparison_train_fraction = 0.8;  // remainder split train/val

  // machine-learning scheme
  double ml_train = 0.7;
  double ml_val = 0.1;
  double ml_test = 0.2;
  bool ml_stratified = true;  // false = plain random over the whole pool

  int train_view_cap = 50;
  int test_view_cap = 50;  // comparison scheme defaults to 10 via make_default()

  static SplitSpec make_default(SplitScheme scheme, std::uint64_t seed);
};

struct DataSplit {
  int index = 0;
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  // Retained image ids per specimen after view caps.
  std::map<std::string, std::vector<std::string>> views;
};

// Test sets carry the configured per-label specimen counts; the remainder is
// split train/val per label. Throws InsufficientSpecimens.
std::vector<DataSplit> make_comparison_splits(const Dataset& dataset,
                                              const Taxonomy& taxonomy,
                                              const SplitSpec& spec);

// Stratified proportional allocation with largest-remainder rounding (or
// plain random when ml_stratified is false).
std::vector<DataSplit> make_ml_splits(const Dataset& dataset, const Taxonomy& taxonomy,
                                      const SplitSpec& spec);

struct SyntheticSpec {
  std::size_t dim = 8;
  double separation = 10.0;   // sd of rank-1 clade mean offsets
  double level_decay = 0.6;   // mean offset sd shrink per extra rank
  double alignment = 1.0;     // 1 = clade-clustered means, 0 = independent
  double specimen_sd = 1.0;   // specimen scatter around its class mean
  double view_sd = 0.5;       // per-view noise around the specimen
  int specimens_per_leaf = 30;
  int views_per_specimen = 5;
  std::uint64_t seed = 1;
  // Optional explicit per-label Gaussians (mean, per-feature sd); overrides
  // the alignment construction for listed labels.
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> label_gaussians;
};

// Gaussian feature views for every taxonomy label. Deterministic under seed.
Dataset generate_synthetic(const Taxonomy& taxonomy, const SyntheticSpec& spec);

// Split JSON: {"split":i,"train":[...],"val":[...],"test":[...],
// "views":{id:[image ids]},"manifest":"hex"} .
std::string split_to_json(const DataSplit& split, const std::string& manifest_hash);
DataSplit split_from_json(const std::string& text);

std::string features_to_csv(const Dataset& dataset, const Taxonomy& taxonomy);

}  // namespace hclass

#endif  // HCLASS_DATASET_HPP_
