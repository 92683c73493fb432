#include "hclass/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hclass/csv.hpp"
#include "hclass/errors.hpp"

namespace hclass {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Topology t) {
  switch (t) {
    case Topology::flat: return "flat";
    case Topology::per_level: return "per-level";
    case Topology::cascade: return "cascade";
  }
  return "flat";
}

Topology topology_from_string(const std::string& name) {
  if (name == "flat") return Topology::flat;
  if (name == "per-level" || name == "per_level") return Topology::per_level;
  if (name == "cascade" || name == "per-parent-node") return Topology::cascade;
  throw_validation("BadTopology", "unknown topology '" + name + "'");
}

Bundle train_topology(const Dataset& dataset, const Taxonomy& taxonomy,
                      const DataSplit& split, Topology topology, const LearnerSpec& spec) {
  Bundle bundle;
  bundle.topology = topology;
  bundle.default_rule = spec.rule;
  switch (topology) {
    case Topology::flat:
      bundle.flat = train_flat(dataset, taxonomy, split, spec);
      bundle.warnings = bundle.flat.warnings;
      break;
    case Topology::per_level:
      bundle.per_level = train_per_level(dataset, taxonomy, split, spec);
      bundle.warnings = bundle.per_level.warnings;
      break;
    case Topology::cascade: {
      CascadePlan plan = build_cascade_plan(taxonomy, census_from_taxonomy(taxonomy));
      bundle.cascade = train_cascade(dataset, taxonomy, split, spec, plan);
      bundle.warnings = bundle.cascade.warnings;
      break;
    }
  }
  return bundle;
}

namespace {

json nodes_to_json(const std::vector<NodeId>& nodes) {
  json out = json::array();
  for (NodeId id : nodes) out.push_back(id);
  return out;
}

std::vector<NodeId> nodes_from_json(const json& j) {
  std::vector<NodeId> out;
  for (const auto& v : j) out.push_back(v.get<NodeId>());
  return out;
}

std::string node_file(NodeId id) {
  return id == kNoNode ? "node_root.bin" : "node_" + std::to_string(id) + ".bin";
}

}  // namespace

void save_bundle(const Bundle& bundle, const Taxonomy& taxonomy, const std::string& dir,
                 const RunManifest& manifest) {
  fs::create_directories(dir);
  json j;
  j["topology"] = to_string(bundle.topology);
  j["rule"] = to_string(bundle.default_rule);
  j["manifest"] = manifest.hash();
  j["warnings"] = bundle.warnings;

  switch (bundle.topology) {
    case Topology::flat: {
      j["class_nodes"] = nodes_to_json(bundle.flat.class_nodes);
      j["model"] = "flat.bin";
      save_model(bundle.flat.model, dir + "/flat.bin");
      break;
    }
    case Topology::per_level: {
      json ranks = json::array();
      for (int rank : bundle.per_level.ranks) {
        json r;
        r["rank"] = rank;
        r["class_nodes"] = nodes_to_json(bundle.per_level.class_nodes.at(rank));
        r["model"] = "rank" + std::to_string(rank) + ".bin";
        save_model(bundle.per_level.models.at(rank), dir + "/rank" + std::to_string(rank) + ".bin");
        ranks.push_back(r);
      }
      j["ranks"] = ranks;
      break;
    }
    case Topology::cascade: {
      json entries = json::array();
      for (const PlanEntry& e : bundle.cascade.plan.entries) {
        json ej;
        ej["node"] = e.node;
        ej["children"] = nodes_to_json(e.children);
        ej["sentinel"] = e.sentinel;
        if (bundle.cascade.models.count(e.node)) {
          ej["model"] = node_file(e.node);
          ej["class_nodes"] = nodes_to_json(bundle.cascade.node_classes.at(e.node));
          save_model(bundle.cascade.models.at(e.node), dir + "/" + node_file(e.node));
        } else {
          ej["forced"] = bundle.cascade.forced.at(e.node);
        }
        entries.push_back(ej);
      }
      j["entries"] = entries;
      break;
    }
  }
  (void)taxonomy;
  write_file_atomic(dir + "/bundle.json", j.dump(2) + "\n");
  write_file_atomic(dir + "/manifest.json", manifest.to_json());
}

Bundle load_bundle(const std::string& dir, const Taxonomy& taxonomy) {
  json j = json::parse(read_entire_file(dir + "/bundle.json"));
  Bundle bundle;
  bundle.topology = topology_from_string(j.at("topology").get<std::string>());
  bundle.default_rule = aggregation_rule_from_string(j.at("rule").get<std::string>());
  bundle.manifest_hash = j.at("manifest").get<std::string>();
  bundle.warnings = j.at("warnings").get<std::vector<std::string>>();

  switch (bundle.topology) {
    case Topology::flat: {
      bundle.flat.class_nodes = nodes_from_json(j.at("class_nodes"));
      for (NodeId id : bundle.flat.class_nodes) taxonomy.node(id);  // validate
      bundle.flat.model = load_model(dir + "/" + j.at("model").get<std::string>());
      break;
    }
    case Topology::per_level: {
      for (const auto& r : j.at("ranks")) {
        const int rank = r.at("rank").get<int>();
        bundle.per_level.ranks.push_back(rank);
        bundle.per_level.class_nodes[rank] = nodes_from_json(r.at("class_nodes"));
        bundle.per_level.models[rank] = load_model(dir + "/" + r.at("model").get<std::string>());
      }
      break;
    }
    case Topology::cascade: {
      for (const auto& ej : j.at("entries")) {
        PlanEntry entry;
        entry.node = ej.at("node").get<NodeId>();
        entry.children = nodes_from_json(ej.at("children"));
        entry.sentinel = ej.at("sentinel").get<bool>();
        bundle.cascade.plan.entries.push_back(entry);
        if (ej.contains("model")) {
          bundle.cascade.node_classes[entry.node] = nodes_from_json(ej.at("class_nodes"));
          bundle.cascade.models[entry.node] =
              load_model(dir + "/" + ej.at("model").get<std::string>());
        } else {
          bundle.cascade.forced[entry.node] = ej.at("forced").get<NodeId>();
        }
      }
      break;
    }
  }
  return bundle;
}

std::vector<PredictionRow> predict_split(const Dataset& dataset, const Taxonomy& taxonomy,
                                         const DataSplit& split, const Bundle& bundle,
                                         AggregationRule rule) {
  static const std::vector<std::string> kAll;
  std::vector<PredictionRow> rows;
  rows.reserve(split.test.size());
  for (const std::string& id : split.test) {
    const Specimen* s = dataset.find(id);
    if (!s) throw_validation("UnknownSpecimen", "split references unknown id '" + id + "'");
    auto it = split.views.find(id);
    Matrix views = views_matrix(*s, it != split.views.end() ? it->second : kAll);

    PredictionRow row;
    row.specimen_id = id;
    switch (bundle.topology) {
      case Topology::flat:
        row.path = predict_specimen_flat(taxonomy, bundle.flat, views, rule);
        break;
      case Topology::per_level:
        row.per_rank = predict_specimen_per_level(taxonomy, bundle.per_level, views, rule,
                                                  &row.coherent);
        break;
      case Topology::cascade:
        row.path = predict_specimen_cascade(taxonomy, bundle.cascade, views, rule);
        break;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<PredictionRow> predict_from_scores(const Dataset& scores,
                                               const Taxonomy& taxonomy,
                                               const std::vector<std::string>& ids,
                                               AggregationRule rule) {
  if (scores.kind != ViewKind::scores) {
    throw_validation("BadInput", "dataset does not hold score views");
  }
  const std::vector<std::string>* use = &ids;
  std::vector<std::string> all;
  if (ids.empty()) {
    for (const Specimen& s : scores.specimens) all.push_back(s.id);
    use = &all;
  }
  std::vector<PredictionRow> rows;
  for (const std::string& id : *use) {
    const Specimen* s = scores.find(id);
    if (!s) throw_validation("UnknownSpecimen", "unknown id '" + id + "'");
    PredictOutput out;
    out.scores = Matrix(s->views.size(), scores.dim);
    out.labels.resize(s->views.size());
    for (std::size_t v = 0; v < s->views.size(); ++v) {
      std::copy(s->views[v].values.begin(), s->views[v].values.end(),
                out.scores.row(v).begin());
      std::size_t best = 0;
      for (std::size_t k = 1; k < scores.dim; ++k) {
        if (out.scores(v, k) > out.scores(v, best)) best = k;
      }
      out.labels[v] = static_cast<int>(best);
    }
    std::vector<std::size_t> all_rows(s->views.size());
    for (std::size_t v = 0; v < all_rows.size(); ++v) all_rows[v] = v;
    // Raw score files behave like score-producing learners for both rules.
    AggregateOutcome agg = aggregate_views(out, all_rows, rule, ModelKind::softmax);
    PredictionRow row;
    row.specimen_id = id;
    row.path = taxonomy.expand_bottom_up(taxonomy.labels()[agg.label]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string predictions_to_csv(const std::vector<PredictionRow>& rows,
                               const Taxonomy& taxonomy, Topology topology,
                               AggregationRule rule, const std::string& manifest_hash) {
  std::ostringstream out;
  if (!manifest_hash.empty()) out << "# manifest: " << manifest_hash << "\n";
  out << "# topology: " << to_string(topology) << "\n";
  out << "# rule: " << to_string(rule) << "\n";
  out << "specimen_id";
  for (int r = 1; r <= taxonomy.height(); ++r) out << ",rank" << r;
  out << "\n";
  for (const PredictionRow& row : rows) {
    out << row.specimen_id;
    for (int r = 1; r <= taxonomy.height(); ++r) {
      out << ',';
      if (row.path) {
        auto node = ancestor_at_rank(*row.path, r);
        if (node) out << taxonomy.node(*node).name;
      } else {
        auto it = row.per_rank.find(r);
        if (it != row.per_rank.end()) out << taxonomy.node(it->second).name;
      }
    }
    out << "\n";
  }
  return out.str();
}

ParsedPredictions parse_predictions_csv(const std::string& text, const Taxonomy& taxonomy) {
  std::istringstream in(text);
  CsvTable table = read_csv(in);
  if (table.header.empty() || table.header[0] != "specimen_id") {
    throw_validation("BadHeader", "prediction files start with specimen_id,rank1,...");
  }
  const int width = static_cast<int>(table.header.size()) - 1;
  if (width < 1 || width > taxonomy.height()) {
    throw_validation("BadHeader", "prediction file has " + std::to_string(width) +
                                      " rank columns; taxonomy height is " +
                                      std::to_string(taxonomy.height()));
  }

  ParsedPredictions parsed;
  for (const std::string& c : table.comments) {
    if (c.rfind("topology:", 0) == 0) {
      parsed.topology_comment = c.substr(9);
      const std::size_t b = parsed.topology_comment.find_first_not_of(' ');
      if (b != std::string::npos) parsed.topology_comment = parsed.topology_comment.substr(b);
    }
  }

  std::size_t row_no = 1;
  for (const auto& cells : table.rows) {
    ++row_no;
    if (cells.size() != table.header.size()) {
      throw_validation("RaggedRow", "row " + std::to_string(row_no) + ": wrong cell count");
    }
    PredictionRow row;
    row.specimen_id = cells[0];
    for (int r = 1; r <= width; ++r) {
      const std::string& name = cells[r];
      if (name.empty() || name == "-") continue;
      NodeId id = taxonomy.find(name, r);
      if (id == kNoNode) {
        throw_validation("ForeignNode", "row " + std::to_string(row_no) + ": unknown taxon '" +
                                            name + "' at rank " + std::to_string(r));
      }
      row.per_rank[r] = id;
    }
    // Try to read the cells as a path: contiguous from rank 1 and chained.
    LabelPath path;
    for (int r = 1; r <= width; ++r) {
      auto it = row.per_rank.find(r);
      if (it == row.per_rank.end()) break;
      path.taxa.push_back(it->second);
    }
    const bool contiguous = static_cast<int>(path.taxa.size()) ==
                            static_cast<int>(row.per_rank.size());
    if (!path.taxa.empty() && contiguous && taxonomy.is_valid_path(path)) {
      row.path = std::move(path);
      row.coherent = true;
    } else {
      row.coherent = row.per_rank.empty();
    }
    parsed.rows.push_back(std::move(row));
  }
  return parsed;
}

std::string truth_to_csv(const Dataset& dataset, const Taxonomy& taxonomy,
                         const std::vector<std::string>& ids) {
  std::vector<PredictionRow> rows;
  const std::vector<std::string>* use = &ids;
  std::vector<std::string> all;
  if (ids.empty()) {
    for (const Specimen& s : dataset.specimens) all.push_back(s.id);
    use = &all;
  }
  std::ostringstream out;
  out << "specimen_id";
  for (int r = 1; r <= taxonomy.height(); ++r) out << ",rank" << r;
  out << "\n";
  for (const std::string& id : *use) {
    const Specimen* s = dataset.find(id);
    if (!s) throw_validation("UnknownSpecimen", "unknown id '" + id + "'");
    out << id;
    for (int r = 1; r <= taxonomy.height(); ++r) {
      out << ',';
      auto node = ancestor_at_rank(s->truth, r);
      if (node) out << taxonomy.node(*node).name;
    }
    out << "\n";
  }
  return out.str();
}

EvaluationResult evaluate_predictions(const std::vector<ParsedPredictions>& files,
                                      const std::vector<ParsedPredictions>& truths,
                                      const Taxonomy& taxonomy, PrefixPolicy policy,
                                      const std::string& mode) {
  if (files.empty()) throw_validation("EmptyInput", "no prediction files");
  if (truths.size() != 1 && truths.size() != files.size()) {
    throw_validation("BadInput", "need one truth file, or one per prediction file");
  }

  // Truth lookup per prediction file.
  auto truth_map = [&](std::size_t i) {
    std::map<std::string, LabelPath> m;
    const ParsedPredictions& t = truths.size() == 1 ? truths[0] : truths[i];
    for (const PredictionRow& row : t.rows) {
      if (!row.path) {
        throw_validation("MissingTruth",
                         "truth row for '" + row.specimen_id + "' is not a full path");
      }
      m[row.specimen_id] = *row.path;
    }
    return m;
  };

  std::string effective = mode;
  if (mode == "auto") {
    effective = "full";
    for (const auto& f : files) {
      if (f.topology_comment == "per-level") effective = "per-rank";
    }
  } else if (mode != "full" && mode != "per-rank") {
    throw_validation("BadInput", "mode must be auto, full or per-rank");
  }

  EvaluationResult result;
  result.mode = effective;
  result.policy = policy;

  if (effective == "full") {
    for (std::size_t i = 0; i < files.size(); ++i) {
      auto truth = truth_map(i);
      std::vector<PredictionRecord> records;
      for (const PredictionRow& row : files[i].rows) {
        auto it = truth.find(row.specimen_id);
        if (it == truth.end()) {
          throw_validation("MissingTruth", "no truth row for '" + row.specimen_id + "'");
        }
        if (!row.per_rank.empty() && !row.path) {
          throw_validation("IncoherentPrediction",
                           "row for '" + row.specimen_id +
                               "' is not a label path; evaluate with --mode per-rank");
        }
        records.push_back({row.specimen_id, it->second, row.path});
      }
      result.per_split.push_back(evaluate_records(taxonomy, records, policy));
      result.n_total += records.size();
    }
    result.aggregate = aggregate_splits(result.per_split);
  } else {
    std::map<int, std::vector<double>> per_rank_values;
    for (std::size_t i = 0; i < files.size(); ++i) {
      auto truth = truth_map(i);
      RankOnlyReport report;
      report.n = files[i].rows.size();
      std::map<int, std::size_t> wrong;
      for (const PredictionRow& row : files[i].rows) {
        auto it = truth.find(row.specimen_id);
        if (it == truth.end()) {
          throw_validation("MissingTruth", "no truth row for '" + row.specimen_id + "'");
        }
        if (!row.coherent) ++report.incoherent_rows;
        for (int r = 1; r <= taxonomy.height(); ++r) {
          auto truth_node = ancestor_at_rank(it->second, r);
          if (!truth_node) continue;
          report.rank_support[r] += 1;
          auto pred_it = row.per_rank.find(r);
          if (pred_it == row.per_rank.end() || pred_it->second != *truth_node) {
            wrong[r] += 1;
          }
        }
      }
      for (const auto& [rank, support] : report.rank_support) {
        report.ce_per_rank[rank] =
            static_cast<double>(wrong[rank]) / static_cast<double>(support);
        per_rank_values[rank].push_back(report.ce_per_rank[rank]);
      }
      result.incoherent_total += report.incoherent_rows;
      result.n_total += report.n;
      result.rank_reports.push_back(std::move(report));
    }
    for (const auto& [rank, values] : per_rank_values) {
      ScalarStat s;
      double sum = 0.0;
      for (double v : values) sum += v;
      s.mean = sum / static_cast<double>(values.size());
      if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
      }
      result.rank_ce_stats[rank] = s;
    }
  }
  return result;
}

}  // namespace hclass
