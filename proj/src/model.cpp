#include "hclass/model.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "hclass/csv.hpp"
#include "hclass/errors.hpp"
#include "hclass/rng.hpp"

namespace hclass {

using nlohmann::json;

const char* to_string(ModelKind kind) {
  return kind == ModelKind::svm ? "svm" : "softmax";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "svm") return ModelKind::svm;
  if (name == "softmax") return ModelKind::softmax;
  throw_validation("BadLearner", "unknown learner '" + name + "'");
}

const char* to_string(AggregationRule rule) {
  return rule == AggregationRule::average_score ? "average" : "vote";
}

AggregationRule aggregation_rule_from_string(const std::string& name) {
  if (name == "average" || name == "average-score") return AggregationRule::average_score;
  if (name == "vote" || name == "majority-vote") return AggregationRule::majority_vote;
  throw_validation("BadRule", "unknown aggregation rule '" + name + "'");
}

PredictOutput predict_labels(const TrainedModel& model, const Matrix& x_raw) {
  PredictOutput out;
  if (x_raw.rows == 0) {
    out.scores = Matrix(0, model.classes.size());
    return out;
  }
  Matrix x = apply_preprocessor(model.pre, x_raw);
  const std::size_t k = model.classes.size();
  out.scores = Matrix(x.rows, k);
  out.labels.resize(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r) {
    std::vector<double> s = model.kind == ModelKind::svm
                                ? model.svm.votes(x.row(r))
                                : model.softmax.logits(x.row(r));
    std::size_t best = 0;
    for (std::size_t i = 1; i < k; ++i) {
      if (s[i] > s[best]) best = i;
    }
    out.labels[r] = static_cast<int>(best);
    std::copy(s.begin(), s.end(), out.scores.row(r).begin());
  }
  return out;
}

AggregateOutcome aggregate_views(const PredictOutput& out,
                                 std::span<const std::size_t> view_rows,
                                 AggregationRule rule, ModelKind kind) {
  if (view_rows.empty()) throw_validation("EmptyInput", "no views to aggregate");
  if (rule == AggregationRule::average_score && kind == ModelKind::svm) {
    throw_validation("RuleUnsupported",
                     "average-score needs score outputs; the svm learner only votes");
  }
  const std::size_t k = out.scores.cols;
  AggregateOutcome agg;
  agg.mean_scores.assign(k, 0.0);
  for (std::size_t r : view_rows) {
    for (std::size_t i = 0; i < k; ++i) agg.mean_scores[i] += out.scores(r, i);
  }
  for (double& v : agg.mean_scores) v /= static_cast<double>(view_rows.size());

  if (rule == AggregationRule::average_score) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < k; ++i) {
      if (agg.mean_scores[i] > agg.mean_scores[best]) best = i;
    }
    agg.label = static_cast<int>(best);
    return agg;
  }

  std::vector<std::size_t> counts(k, 0);
  for (std::size_t r : view_rows) counts[out.labels[r]] += 1;
  const std::size_t top = *std::max_element(counts.begin(), counts.end());
  int best = -1;
  for (std::size_t i = 0; i < k; ++i) {
    if (counts[i] != top) continue;
    if (best < 0 || agg.mean_scores[i] > agg.mean_scores[best]) {
      best = static_cast<int>(i);
    }
  }
  agg.label = best;
  return agg;
}

std::string fingerprint_ids(std::span<const std::string> ids) {
  std::vector<std::string> sorted(ids.begin(), ids.end());
  std::sort(sorted.begin(), sorted.end());
  std::string joined;
  for (const auto& id : sorted) {
    joined += id;
    joined.push_back('\n');
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(joined)));
  return buf;
}

namespace {

constexpr char kMagic[8] = {'H', 'C', 'L', 'M', 'D', 'L', '0', '1'};

struct ArrayDesc {
  std::string name;
  const Matrix* matrix = nullptr;
  const std::vector<double>* vec = nullptr;
};

json pre_to_json(const Preprocessor& pre) {
  json j;
  j["in_dim"] = pre.in_dim();
  j["out_dim"] = pre.out_dim();
  j["constant_features"] = pre.constant_features;
  return j;
}

}  // namespace

void save_model(const TrainedModel& model, const std::string& path) {
  json j;
  j["version"] = 1;
  j["kind"] = to_string(model.kind);
  j["classes"] = model.classes;
  j["fit_fingerprint"] = model.fit_fingerprint;
  j["warnings"] = model.warnings;
  j["pre"] = pre_to_json(model.pre);

  std::vector<ArrayDesc> arrays;
  arrays.push_back({"pre.mean", nullptr, &model.pre.mean});
  arrays.push_back({"pre.sd", nullptr, &model.pre.sd});
  arrays.push_back({"pre.rotation", &model.pre.rotation, nullptr});
  arrays.push_back({"pre.eigenvalues", nullptr, &model.pre.eigenvalues});

  if (model.kind == ModelKind::svm) {
    json s;
    s["c"] = model.svm.hyper.c;
    s["gamma"] = model.svm.hyper.gamma;
    s["n_classes"] = model.svm.n_classes;
    json machines = json::array();
    for (const auto& m : model.svm.machines) {
      json mj;
      mj["pos"] = m.pos;
      mj["neg"] = m.neg;
      mj["bias"] = m.bias;
      mj["sv"] = m.sv;
      machines.push_back(std::move(mj));
    }
    s["machines"] = std::move(machines);
    j["svm"] = std::move(s);
    arrays.push_back({"svm.vectors", &model.svm.vectors, nullptr});
    for (std::size_t i = 0; i < model.svm.machines.size(); ++i) {
      arrays.push_back({"svm.coef." + std::to_string(i), nullptr,
                        &model.svm.machines[i].coef});
    }
  } else {
    json s;
    s["n_classes"] = model.softmax.n_classes;
    s["learning_rate"] = model.softmax_hyper.learning_rate;
    s["epochs"] = model.softmax_hyper.epochs;
    s["l2"] = model.softmax_hyper.l2;
    j["softmax"] = std::move(s);
    arrays.push_back({"softmax.weights", &model.softmax.weights, nullptr});
  }

  json arr = json::array();
  for (const auto& a : arrays) {
    json d;
    d["name"] = a.name;
    if (a.matrix) {
      d["rows"] = a.matrix->rows;
      d["cols"] = a.matrix->cols;
    } else {
      d["rows"] = 1;
      d["cols"] = a.vec->size();
    }
    arr.push_back(std::move(d));
  }
  j["arrays"] = std::move(arr);

  const std::string header = j.dump();
  std::string blob;
  blob.append(kMagic, sizeof(kMagic));
  std::uint64_t len = header.size();
  blob.append(reinterpret_cast<const char*>(&len), sizeof(len));
  blob.append(header);
  for (const auto& a : arrays) {
    const double* ptr = a.matrix ? a.matrix->data.data() : a.vec->data();
    const std::size_t count = a.matrix ? a.matrix->data.size() : a.vec->size();
    blob.append(reinterpret_cast<const char*>(ptr), count * sizeof(double));
  }
  write_file_atomic(path, blob);
}

TrainedModel load_model(const std::string& path) {
  const std::string blob = read_entire_file(path);
  if (blob.size() < sizeof(kMagic) + sizeof(std::uint64_t) ||
      std::memcmp(blob.data(), kMagic, sizeof(kMagic)) != 0) {
    throw_validation("BadModelFile", "not a model container: " + path);
  }
  std::uint64_t len = 0;
  std::memcpy(&len, blob.data() + sizeof(kMagic), sizeof(len));
  const std::size_t header_at = sizeof(kMagic) + sizeof(len);
  if (header_at + len > blob.size()) {
    throw_validation("BadModelFile", "truncated header in " + path);
  }
  json j = json::parse(blob.substr(header_at, len));
  if (j.at("version").get<int>() != 1) {
    throw_validation("BadModelFile", "unsupported container version");
  }

  TrainedModel model;
  model.kind = model_kind_from_string(j.at("kind").get<std::string>());
  model.classes = j.at("classes").get<std::vector<std::string>>();
  model.fit_fingerprint = j.at("fit_fingerprint").get<std::string>();
  model.warnings = j.at("warnings").get<std::vector<std::string>>();
  model.pre.constant_features =
      j.at("pre").at("constant_features").get<std::vector<std::size_t>>();

  std::size_t at = header_at + len;
  std::map<std::string, Matrix> loaded;
  for (const auto& d : j.at("arrays")) {
    Matrix m(d.at("rows").get<std::size_t>(), d.at("cols").get<std::size_t>());
    const std::size_t bytes = m.data.size() * sizeof(double);
    if (at + bytes > blob.size()) {
      throw_validation("BadModelFile", "truncated arrays in " + path);
    }
    std::memcpy(m.data.data(), blob.data() + at, bytes);
    at += bytes;
    loaded.emplace(d.at("name").get<std::string>(), std::move(m));
  }

  model.pre.mean = loaded.at("pre.mean").data;
  model.pre.sd = loaded.at("pre.sd").data;
  model.pre.rotation = loaded.at("pre.rotation");
  model.pre.eigenvalues = loaded.at("pre.eigenvalues").data;

  if (model.kind == ModelKind::svm) {
    const json& s = j.at("svm");
    model.svm.hyper.c = s.at("c").get<double>();
    model.svm.hyper.gamma = s.at("gamma").get<double>();
    model.svm.n_classes = s.at("n_classes").get<std::size_t>();
    model.svm.vectors = loaded.at("svm.vectors");
    std::size_t mi = 0;
    for (const auto& mj : s.at("machines")) {
      BinaryMachine m;
      m.pos = mj.at("pos").get<int>();
      m.neg = mj.at("neg").get<int>();
      m.bias = mj.at("bias").get<double>();
      m.sv = mj.at("sv").get<std::vector<std::uint32_t>>();
      m.coef = loaded.at("svm.coef." + std::to_string(mi)).data;
      if (m.coef.size() != m.sv.size()) {
        throw_validation("BadModelFile", "machine coef/sv size mismatch");
      }
      model.svm.machines.push_back(std::move(m));
      ++mi;
    }
  } else {
    const json& s = j.at("softmax");
    model.softmax.n_classes = s.at("n_classes").get<std::size_t>();
    model.softmax_hyper.learning_rate = s.at("learning_rate").get<double>();
    model.softmax_hyper.epochs = s.at("epochs").get<int>();
    model.softmax_hyper.l2 = s.at("l2").get<double>();
    model.softmax.weights = loaded.at("softmax.weights");
  }
  return model;
}

}  // namespace hclass
