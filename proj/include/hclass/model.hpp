#ifndef HCLASS_MODEL_HPP_
#define HCLASS_MODEL_HPP_

#include <span>
#include <string>
#include <vector>

#include "hclass/matrix.hpp"
#include "hclass/preprocess.hpp"
#include "hclass/softmax.hpp"
#include "hclass/svm.hpp"

namespace hclass {

enum class ModelKind { svm, softmax };

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// A trained base learner with its preprocessor. `classes` are class label
// strings (taxon label names, or "0" for the genus-only sentinel).
struct TrainedModel {
  ModelKind kind = ModelKind::svm;
  std::vector<std::string> classes;
  Preprocessor pre;
  SvmModel svm;
  SoftmaxModel softmax;
  SoftmaxHyper softmax_hyper;
  // Fingerprint of the specimen ids the model (and its preprocessor) was fit
  // on; lets tests assert that no test specimen leaked into fitting.
  std::string fit_fingerprint;
  std::vector<std::string> warnings;

  const SvmHyper& hyper() const { return svm.hyper; }
};

struct PredictOutput {
  std::vector<int> labels;  // per-row class index
  Matrix scores;            // per-row vote counts (svm) or logits (softmax)
};

// Applies the model's preprocessor to raw rows and predicts each one.
PredictOutput predict_labels(const TrainedModel& model, const Matrix& x_raw);

enum class AggregationRule { average_score, majority_vote };

const char* to_string(AggregationRule rule);
AggregationRule aggregation_rule_from_string(const std::string& name);

struct AggregateOutcome {
  int label = -1;
  std::vector<double> mean_scores;
};

// Combines per-view outputs into one decision. average_score takes the
// argmax of the mean score vector and needs real scores (softmax logits);
// majority_vote is the modal label, ties broken by higher mean score, then
// lower class index. Throws RuleUnsupported, EmptyInput.
AggregateOutcome aggregate_views(const PredictOutput& out,
                                 std::span<const std::size_t> view_rows,
                                 AggregationRule rule, ModelKind kind);

std::string fingerprint_ids(std::span<const std::string> ids);

// Versioned container: magic + JSON header + packed little-endian doubles.
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

}  // namespace hclass

#endif  // HCLASS_MODEL_HPP_
