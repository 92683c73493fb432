#include "hclass/hierarchy.hpp"

#include <algorithm>
#include <thread>

#include "hclass/errors.hpp"

namespace hclass {

std::set<NodeId> census_from_taxonomy(const Taxonomy& taxonomy) {
  std::set<NodeId> census;
  for (NodeId id : taxonomy.labels()) {
    if (!taxonomy.node(id).children.empty()) census.insert(id);
  }
  return census;
}

std::set<NodeId> census_from_dataset(const Taxonomy& taxonomy, const Dataset& dataset) {
  std::set<NodeId> census;
  for (const Specimen& s : dataset.specimens) {
    if (s.truth.taxa.empty()) continue;
    NodeId leaf = s.truth.leaf();
    if (!taxonomy.node(leaf).children.empty()) census.insert(leaf);
  }
  return census;
}

CascadePlan build_cascade_plan(const Taxonomy& taxonomy, const std::set<NodeId>& census) {
  CascadePlan plan;
  // Breadth-first by rank so entries come out 1 order level, then family...
  std::vector<NodeId> frontier;  // kNoNode stands for the virtual root
  frontier.push_back(kNoNode);
  while (!frontier.empty()) {
    std::vector<NodeId> next;
    for (NodeId at : frontier) {
      const std::vector<NodeId>& children =
          at == kNoNode ? taxonomy.top_nodes() : taxonomy.node(at).children;
      for (NodeId c : children) next.push_back(c);
      const bool sentinel = at != kNoNode && census.count(at) > 0;
      const std::size_t effective = children.size() + (sentinel ? 1 : 0);
      if (effective >= 2) {
        PlanEntry entry;
        entry.node = at;
        entry.children = children;
        entry.sentinel = sentinel;
        plan.entries.push_back(std::move(entry));
      }
    }
    frontier = std::move(next);
  }
  return plan;
}

Matrix views_matrix(const Specimen& specimen, const std::vector<std::string>& retained) {
  std::set<std::string> keep(retained.begin(), retained.end());
  std::vector<const View*> views;
  for (const View& v : specimen.views) {
    if (keep.empty() || keep.count(v.image_id)) views.push_back(&v);
  }
  if (views.empty()) throw_validation("EmptyInput", "specimen '" + specimen.id +
                                                        "' has no retained views");
  Matrix m(views.size(), views.front()->values.size());
  for (std::size_t r = 0; r < views.size(); ++r) {
    std::copy(views[r]->values.begin(), views[r]->values.end(), m.row(r).begin());
  }
  return m;
}

namespace {

// Rows for a set of specimens, restricted to the split's retained views.
// `label_of` returns the class index, or -1 to skip the specimen.
template <typename LabelFn>
GroupedRows collect_rows(const Dataset& dataset, const DataSplit& split,
                         const std::vector<std::string>& ids, std::size_t dim,
                         LabelFn label_of) {
  static const std::vector<std::string> kAll;
  std::vector<std::pair<Matrix, int>> picked;
  std::vector<std::string> picked_ids;
  std::size_t n_rows = 0;
  for (const std::string& id : ids) {
    const Specimen* s = dataset.find(id);
    if (!s) throw_validation("UnknownSpecimen", "split references unknown id '" + id + "'");
    const int label = label_of(*s);
    if (label < 0) continue;
    auto it = split.views.find(id);
    Matrix m = views_matrix(*s, it != split.views.end() ? it->second : kAll);
    n_rows += m.rows;
    picked.emplace_back(std::move(m), label);
    picked_ids.push_back(id);
  }
  GroupedRows rows;
  rows.x = Matrix(n_rows, dim);
  rows.y.reserve(n_rows);
  rows.group.reserve(n_rows);
  std::size_t at = 0;
  for (std::size_t p = 0; p < picked.size(); ++p) {
    const auto& [m, label] = picked[p];
    for (std::size_t r = 0; r < m.rows; ++r) {
      std::copy(m.row(r).begin(), m.row(r).end(), rows.x.row(at++).begin());
      rows.y.push_back(label);
      rows.group.push_back(picked_ids[p]);
    }
  }
  return rows;
}

TrainedModel train_base_model(const GroupedRows& train, const GroupedRows& val,
                              const std::vector<std::string>& classes,
                              const LearnerSpec& spec, const GridSpec& grid,
                              std::vector<std::string>* warnings) {
  if (spec.kind == ModelKind::svm) {
    GridSearchOutcome out = grid_search_svm(train, val, classes, grid, spec.rule,
                                            spec.svm_tol, spec.seed,
                                            spec.retained_variance, spec.jobs);
    if (warnings) {
      warnings->insert(warnings->end(), out.notes.begin(), out.notes.end());
    }
    return std::move(out.model);
  }
  TrainedModel model;
  model.kind = ModelKind::softmax;
  model.classes = classes;
  model.softmax_hyper = spec.softmax;
  model.pre = fit_preprocessor(train.x, spec.retained_variance);
  Matrix x = apply_preprocessor(model.pre, train.x);
  model.softmax = train_softmax(x, train.y, classes.size(), spec.softmax);
  std::set<std::string> ids(train.group.begin(), train.group.end());
  std::vector<std::string> sorted(ids.begin(), ids.end());
  model.fit_fingerprint = fingerprint_ids(sorted);
  return model;
}

// Class set = taxonomy labels present among the training truths, keeping
// canonical order; specimens of absent labels are skipped with a warning.
struct ClassIndex {
  std::vector<NodeId> nodes;
  std::map<NodeId, int> index;

  int of(NodeId id) const {
    auto it = index.find(id);
    return it == index.end() ? -1 : it->second;
  }
};

ClassIndex labels_present(const Taxonomy& taxonomy, const Dataset& dataset,
                          const std::vector<std::string>& train_ids,
                          std::vector<std::string>* warnings) {
  std::set<NodeId> present;
  for (const std::string& id : train_ids) {
    const Specimen* s = dataset.find(id);
    if (!s) throw_validation("UnknownSpecimen", "split references unknown id '" + id + "'");
    present.insert(s->truth.leaf());
  }
  ClassIndex ci;
  for (NodeId label : taxonomy.labels()) {
    if (present.count(label)) {
      ci.index[label] = static_cast<int>(ci.nodes.size());
      ci.nodes.push_back(label);
    } else if (warnings) {
      warnings->push_back("label '" + taxonomy.node(label).label_name +
                          "' has no training specimens and was dropped");
    }
  }
  return ci;
}

}  // namespace

FlatModel train_flat(const Dataset& dataset, const Taxonomy& taxonomy,
                     const DataSplit& split, const LearnerSpec& spec) {
  if (split.train.empty()) throw_validation("EmptyInput", "empty training set");
  FlatModel flat;
  ClassIndex ci = labels_present(taxonomy, dataset, split.train, &flat.warnings);
  if (ci.nodes.size() < 2) throw_validation("SingleClass", "flat training needs 2+ labels");

  auto label_of = [&](const Specimen& s) { return ci.of(s.truth.leaf()); };
  GroupedRows train = collect_rows(dataset, split, split.train, dataset.dim, label_of);
  GroupedRows val = collect_rows(dataset, split, split.val, dataset.dim, label_of);

  std::vector<std::string> classes;
  for (NodeId id : ci.nodes) classes.push_back(taxonomy.node(id).label_name);
  flat.model = train_base_model(train, val, classes, spec, spec.flat_grid, &flat.warnings);
  flat.class_nodes = ci.nodes;
  return flat;
}

PerLevelModels train_per_level(const Dataset& dataset, const Taxonomy& taxonomy,
                               const DataSplit& split, const LearnerSpec& spec,
                               const std::vector<int>& ranks) {
  if (split.train.empty()) throw_validation("EmptyInput", "empty training set");
  PerLevelModels out;
  out.ranks = ranks;
  for (int rank : ranks) {
    if (rank < 1 || rank > taxonomy.height()) {
      throw_validation("BadRank", "rank " + std::to_string(rank) + " out of range");
    }
    // Classes = nodes at this rank with training truths reaching them.
    std::set<NodeId> present;
    for (const std::string& id : split.train) {
      const Specimen* s = dataset.find(id);
      if (!s) throw_validation("UnknownSpecimen", "unknown id '" + id + "'");
      auto node = ancestor_at_rank(s->truth, rank);
      if (node) present.insert(*node);
    }
    std::vector<NodeId> class_nodes;
    std::map<NodeId, int> index;
    for (NodeId id : taxonomy.nodes_at_rank(rank)) {
      if (present.count(id)) {
        index[id] = static_cast<int>(class_nodes.size());
        class_nodes.push_back(id);
      }
    }
    if (class_nodes.size() < 2) {
      throw_validation("SingleClass",
                       "rank " + std::to_string(rank) + " has fewer than two classes");
    }
    auto label_of = [&](const Specimen& s) {
      auto node = ancestor_at_rank(s.truth, rank);
      if (!node) return -1;
      auto it = index.find(*node);
      return it == index.end() ? -1 : it->second;
    };
    GroupedRows train = collect_rows(dataset, split, split.train, dataset.dim, label_of);
    GroupedRows val = collect_rows(dataset, split, split.val, dataset.dim, label_of);
    std::vector<std::string> classes;
    for (NodeId id : class_nodes) classes.push_back(taxonomy.node(id).name);
    out.models[rank] =
        train_base_model(train, val, classes, spec, spec.flat_grid, &out.warnings);
    out.class_nodes[rank] = std::move(class_nodes);
  }
  return out;
}

TrainedCascade train_cascade(const Dataset& dataset, const Taxonomy& taxonomy,
                             const DataSplit& split, const LearnerSpec& spec,
                             const CascadePlan& plan) {
  if (split.train.empty()) throw_validation("EmptyInput", "empty training set");
  TrainedCascade cascade;
  cascade.plan = plan;

  struct NodeJob {
    const PlanEntry* entry;
    std::vector<NodeId> class_nodes;
    GroupedRows train;
    GroupedRows val;
    std::vector<std::string> classes;
    bool trainable = false;
    NodeId forced = kNoNode;
    TrainedModel model;
    std::vector<std::string> warnings;
  };
  std::vector<NodeJob> jobs(plan.entries.size());

  for (std::size_t e = 0; e < plan.entries.size(); ++e) {
    const PlanEntry& entry = plan.entries[e];
    NodeJob& job = jobs[e];
    job.entry = &entry;
    const int parent_rank = entry.node == kNoNode ? 0 : taxonomy.node(entry.node).rank;

    // Candidate classes: child taxa plus the sentinel (kNoNode) when flagged.
    std::vector<NodeId> candidates = entry.children;
    if (entry.sentinel) candidates.push_back(kNoNode);

    // Class of a specimen at this node: the child its truth passes through,
    // the sentinel if the truth ends here, or none if it bypasses the node.
    auto class_node_of = [&](const Specimen& s) -> std::optional<NodeId> {
      if (entry.node != kNoNode) {
        auto here = ancestor_at_rank(s.truth, parent_rank);
        if (!here || *here != entry.node) return std::nullopt;
      }
      if (s.truth.depth() == parent_rank) return kNoNode;  // ends at the node
      return s.truth.taxa[parent_rank];
    };

    // Drop classes without training data.
    std::map<NodeId, int> seen;
    for (const std::string& id : split.train) {
      const Specimen* s = dataset.find(id);
      if (!s) throw_validation("UnknownSpecimen", "unknown id '" + id + "'");
      auto cls = class_node_of(*s);
      if (cls) seen[*cls] += 1;
    }
    std::map<NodeId, int> index;
    const std::string node_name =
        entry.node == kNoNode ? "<root>" : taxonomy.node(entry.node).name;
    for (NodeId c : candidates) {
      if (seen.count(c)) {
        index[c] = static_cast<int>(job.class_nodes.size());
        job.class_nodes.push_back(c);
      } else {
        job.warnings.push_back("node " + node_name + ": dropped class '" +
                               (c == kNoNode ? kSentinelLabel : taxonomy.node(c).name) +
                               "' (no training data)");
      }
    }

    if (job.class_nodes.size() < 2) {
      job.forced = job.class_nodes.empty() ? kNoNode : job.class_nodes.front();
      job.warnings.push_back("node " + node_name +
                             ": fewer than two classes with data; descending without a "
                             "classifier");
      continue;
    }

    auto label_of = [&](const Specimen& s) {
      auto cls = class_node_of(s);
      if (!cls) return -1;
      auto it = index.find(*cls);
      return it == index.end() ? -1 : it->second;
    };
    job.train = collect_rows(dataset, split, split.train, dataset.dim, label_of);
    job.val = collect_rows(dataset, split, split.val, dataset.dim, label_of);
    for (NodeId c : job.class_nodes) {
      job.classes.push_back(c == kNoNode ? kSentinelLabel : taxonomy.node(c).name);
    }
    job.trainable = true;
  }

  // Node models are independent; spread them over the worker budget.
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t e = begin; e < end; ++e) {
      NodeJob& job = jobs[e];
      if (!job.trainable) continue;
      LearnerSpec node_spec = spec;
      node_spec.jobs = 1;
      job.model = train_base_model(job.train, job.val, job.classes, node_spec,
                                   spec.node_grid, &job.warnings);
    }
  };
  const int workers = std::max(1, std::min<int>(spec.jobs, static_cast<int>(jobs.size())));
  if (workers == 1) {
    run(0, jobs.size());
  } else {
    std::vector<std::thread> threads;
    const std::size_t chunk = (jobs.size() + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(jobs.size(), begin + chunk);
      if (begin < end) threads.emplace_back(run, begin, end);
    }
    for (auto& t : threads) t.join();
  }

  for (NodeJob& job : jobs) {
    cascade.warnings.insert(cascade.warnings.end(), job.warnings.begin(),
                            job.warnings.end());
    if (job.trainable) {
      cascade.models[job.entry->node] = std::move(job.model);
      cascade.node_classes[job.entry->node] = std::move(job.class_nodes);
    } else {
      cascade.forced[job.entry->node] = job.forced;
    }
  }
  return cascade;
}

namespace {

int aggregate_label(const TrainedModel& model, const Matrix& views, AggregationRule rule) {
  PredictOutput out = predict_labels(model, views);
  std::vector<std::size_t> all(views.rows);
  for (std::size_t r = 0; r < all.size(); ++r) all[r] = r;
  return aggregate_views(out, all, rule, model.kind).label;
}

}  // namespace

LabelPath predict_specimen_flat(const Taxonomy& taxonomy, const FlatModel& flat,
                                const Matrix& views, AggregationRule rule) {
  const int label = aggregate_label(flat.model, views, rule);
  return taxonomy.expand_bottom_up(flat.class_nodes[label]);
}

std::map<int, NodeId> predict_specimen_per_level(const Taxonomy& taxonomy,
                                                 const PerLevelModels& models,
                                                 const Matrix& views, AggregationRule rule,
                                                 bool* coherent) {
  std::map<int, NodeId> out;
  for (int rank : models.ranks) {
    const int label = aggregate_label(models.models.at(rank), views, rule);
    out[rank] = models.class_nodes.at(rank)[label];
  }
  if (coherent) {
    *coherent = true;
    for (const auto& [rank, id] : out) {
      auto up = out.find(rank - 1);
      if (up != out.end() && taxonomy.node(id).parent != up->second) {
        *coherent = false;
        break;
      }
    }
  }
  return out;
}

std::optional<LabelPath> predict_specimen_cascade(const Taxonomy& taxonomy,
                                                  const TrainedCascade& cascade,
                                                  const Matrix& views, AggregationRule rule) {
  LabelPath path;
  NodeId at = kNoNode;
  while (true) {
    auto model_it = cascade.models.find(at);
    if (model_it != cascade.models.end()) {
      const int label = aggregate_label(model_it->second, views, rule);
      const NodeId chosen = cascade.node_classes.at(at)[label];
      if (chosen == kNoNode) break;  // sentinel: identified only to this node
      path.taxa.push_back(chosen);
      at = chosen;
      continue;
    }
    auto forced_it = cascade.forced.find(at);
    if (forced_it != cascade.forced.end()) {
      if (forced_it->second == kNoNode) break;
      path.taxa.push_back(forced_it->second);
      at = forced_it->second;
      continue;
    }
    // No classifier here: auto-descend a single child, stop at a terminal.
    const std::vector<NodeId>& children =
        at == kNoNode ? taxonomy.top_nodes() : taxonomy.node(at).children;
    if (children.size() != 1) break;
    path.taxa.push_back(children.front());
    at = children.front();
  }
  if (path.taxa.empty()) return std::nullopt;
  return path;
}

}  // namespace hclass
