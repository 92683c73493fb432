#include "hclass/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hclass/csv.hpp"
#include "hclass/errors.hpp"
#include "hclass/rng.hpp"

namespace hclass {

namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Dataset ingest_table(std::istream& in, const Taxonomy& taxonomy, ViewKind kind) {
  CsvTable table = read_csv(in);
  if (table.header.empty() || table.rows.empty()) {
    throw_validation("EmptyInput", "no data rows");
  }
  if (table.header.size() < 3 || table.header[0] != "specimen_id" ||
      table.header[1] != "image_id") {
    throw_validation("BadHeader", "expected specimen_id,image_id,label_leaf,...");
  }
  const bool has_label = table.header[2] == "label_leaf";
  const std::size_t value_start = has_label ? 3 : 2;
  const std::size_t dim = table.header.size() - value_start;
  if (dim == 0) throw_validation("BadHeader", "no value columns");
  if (kind == ViewKind::scores && dim != taxonomy.label_count()) {
    throw_validation("DimensionMismatch",
                     "score files need one column per class label (" +
                         std::to_string(taxonomy.label_count()) + "), got " +
                         std::to_string(dim));
  }
  if (kind == ViewKind::features && !has_label) {
    throw_validation("BadHeader", "feature files need a label_leaf column");
  }

  Dataset ds;
  ds.kind = kind;
  ds.dim = dim;
  std::set<std::pair<std::string, std::string>> seen_images;

  std::size_t row_no = 1;
  for (const auto& cells : table.rows) {
    ++row_no;
    if (cells.size() != table.header.size()) {
      throw_validation("DimensionMismatch",
                       "row " + std::to_string(row_no) + ": expected " +
                           std::to_string(table.header.size()) + " cells, got " +
                           std::to_string(cells.size()));
    }
    const std::string& specimen_id = cells[0];
    const std::string& image_id = cells[1];
    if (!seen_images.emplace(specimen_id, image_id).second) {
      throw_validation("DuplicateImage", "row " + std::to_string(row_no) + ": image '" +
                                             image_id + "' repeated for specimen '" +
                                             specimen_id + "'");
    }

    LabelPath truth;
    if (has_label) {
      NodeId leaf = taxonomy.find_label(cells[2]);
      if (leaf == kNoNode) {
        throw_validation("UnknownLeaf", "row " + std::to_string(row_no) +
                                            ": unknown class label '" + cells[2] + "'");
      }
      truth = taxonomy.expand_bottom_up(leaf);
    }

    View view;
    view.image_id = image_id;
    view.values.reserve(dim);
    for (std::size_t i = value_start; i < cells.size(); ++i) {
      try {
        std::size_t pos = 0;
        view.values.push_back(std::stod(cells[i], &pos));
        if (pos != cells[i].size()) throw std::invalid_argument(cells[i]);
      } catch (const std::exception&) {
        throw_validation("BadValue", "row " + std::to_string(row_no) +
                                         ": non-numeric cell '" + cells[i] + "'");
      }
    }

    auto it = ds.index.find(specimen_id);
    if (it == ds.index.end()) {
      ds.index.emplace(specimen_id, ds.specimens.size());
      Specimen s;
      s.id = specimen_id;
      s.truth = truth;
      s.views.push_back(std::move(view));
      ds.specimens.push_back(std::move(s));
    } else {
      Specimen& s = ds.specimens[it->second];
      if (has_label && s.truth != truth) {
        throw_validation("ConflictingLabel", "row " + std::to_string(row_no) +
                                                 ": specimen '" + specimen_id +
                                                 "' has two different labels");
      }
      s.views.push_back(std::move(view));
    }
  }
  return ds;
}

// Proportional integer allocation by largest remainder; ties go to the
// earlier bucket. Buckets always sum to n.
std::vector<std::size_t> largest_remainder(std::size_t n, const std::vector<double>& fractions) {
  std::vector<std::size_t> base(fractions.size());
  std::vector<double> remainder(fractions.size());
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < fractions.size(); ++j) {
    const double q = fractions[j] * static_cast<double>(n);
    base[j] = static_cast<std::size_t>(std::floor(q + 1e-9));
    remainder[j] = q - static_cast<double>(base[j]);
    assigned += base[j];
  }
  std::vector<std::size_t> order(fractions.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < n; ++i) {
    base[order[i % order.size()]] += 1;
    ++assigned;
  }
  return base;
}

// Specimen indices grouped by class label, in canonical label order.
std::vector<std::pair<NodeId, std::vector<std::size_t>>> group_by_label(
    const Dataset& dataset, const Taxonomy& taxonomy) {
  std::map<NodeId, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < dataset.specimens.size(); ++i) {
    const Specimen& s = dataset.specimens[i];
    if (s.truth.taxa.empty()) {
      throw_validation("MissingTruth", "specimen '" + s.id + "' has no truth label");
    }
    groups[s.truth.leaf()].push_back(i);
  }
  std::vector<std::pair<NodeId, std::vector<std::size_t>>> ordered;
  for (NodeId label : taxonomy.labels()) {
    auto it = groups.find(label);
    if (it != groups.end()) ordered.emplace_back(label, it->second);
  }
  // Labels outside the canonical list cannot occur: truths come from the taxonomy.
  return ordered;
}

void attach_views(const Dataset& dataset, const SplitSpec& spec, DataSplit& split) {
  auto retain = [&](const std::vector<std::string>& ids, int cap) {
    for (const auto& id : ids) {
      const Specimen* s = dataset.find(id);
      const std::string key = "views/" + std::to_string(split.index) + "/" + id;
      Specimen kept = subsample_views(*s, static_cast<std::size_t>(cap),
                                      spec.seed ^ fnv1a64(key));
      std::vector<std::string>& out = split.views[id];
      out.reserve(kept.views.size());
      for (const auto& v : kept.views) out.push_back(v.image_id);
    }
  };
  retain(split.train, spec.train_view_cap);
  retain(split.val, spec.train_view_cap);
  retain(split.test, spec.test_view_cap);
}

}  // namespace

Dataset ingest_features(std::istream& in, const Taxonomy& taxonomy) {
  return ingest_table(in, taxonomy, ViewKind::features);
}

Dataset ingest_features_file(const std::string& path, const Taxonomy& taxonomy) {
  std::ifstream in(path);
  if (!in) throw_validation("FileNotFound", "cannot open " + path);
  return ingest_features(in, taxonomy);
}

Dataset ingest_scores(std::istream& in, const Taxonomy& taxonomy) {
  return ingest_table(in, taxonomy, ViewKind::scores);
}

Dataset ingest_scores_file(const std::string& path, const Taxonomy& taxonomy) {
  std::ifstream in(path);
  if (!in) throw_validation("FileNotFound", "cannot open " + path);
  return ingest_scores(in, taxonomy);
}

Specimen subsample_views(const Specimen& specimen, std::size_t cap, std::uint64_t seed) {
  if (cap < 1) throw_validation("BadCap", "view cap must be at least 1");
  if (specimen.views.size() <= cap) return specimen;
  Rng rng = Rng::stream(seed, "subsample/" + specimen.id);
  std::vector<std::size_t> keep = rng.sample_indices(specimen.views.size(), cap);
  Specimen out;
  out.id = specimen.id;
  out.truth = specimen.truth;
  out.views.reserve(cap);
  for (std::size_t i : keep) out.views.push_back(specimen.views[i]);
  return out;
}

SplitSpec SplitSpec::make_default(SplitScheme scheme, std::uint64_t seed) {
  SplitSpec spec;
  spec.scheme = scheme;
  spec.seed = seed;
  if (scheme == SplitScheme::comparison) spec.test_view_cap = 10;
  return spec;
}

std::vector<DataSplit> make_comparison_splits(const Dataset& dataset,
                                              const Taxonomy& taxonomy,
                                              const SplitSpec& spec) {
  auto groups = group_by_label(dataset, taxonomy);

  // Resolve an explicit per-label test count table once.
  std::map<NodeId, int> explicit_counts;
  for (const auto& [name, count] : spec.test_counts) {
    NodeId leaf = taxonomy.find_label(name);
    if (leaf == kNoNode) {
      throw_validation("UnknownLeaf", "test count for unknown label '" + name + "'");
    }
    if (count < 0) throw_validation("BadCount", "negative test count for '" + name + "'");
    explicit_counts[leaf] = count;
  }

  std::vector<DataSplit> splits;
  for (int si = 0; si < spec.n_splits; ++si) {
    Rng rng = Rng::stream(spec.seed, "comparison/split/" + std::to_string(si));
    DataSplit split;
    split.index = si;

    // Per-label test counts: the explicit table, or the built-in emulation of
    // near-equal tiny test sets (base 1 per label, +1 for a seeded subset;
    // with 10 splits the totals come out 46,46,46,46,46,46,46,45,45,45).
    std::map<NodeId, int> counts;
    if (!spec.test_counts.empty()) {
      for (const auto& [leaf, idxs] : groups) {
        auto it = explicit_counts.find(leaf);
        counts[leaf] = it == explicit_counts.end() ? 0 : it->second;
        (void)idxs;
      }
    } else {
      std::vector<NodeId> eligible_extra;
      for (const auto& [leaf, idxs] : groups) {
        counts[leaf] = idxs.size() >= 2 ? 1 : 0;
        if (idxs.size() >= 3) eligible_extra.push_back(leaf);
      }
      int extras = 0;
      if (spec.n_splits == 10) {
        extras = si < 7 ? 7 : 6;
      } else {
        extras = si % 2 == 0 ? 7 : 6;
      }
      extras = std::min<int>(extras, static_cast<int>(eligible_extra.size()));
      std::vector<std::size_t> chosen =
          rng.sample_indices(eligible_extra.size(), static_cast<std::size_t>(extras));
      for (std::size_t idx : chosen) counts[eligible_extra[idx]] += 1;
    }

    for (const auto& [leaf, group] : groups) {
      const int want = counts[leaf];
      if (want > static_cast<int>(group.size())) {
        throw_validation("InsufficientSpecimens",
                         "label '" + taxonomy.node(leaf).label_name +
                             "' has too few specimens for the requested test count");
      }
      std::vector<std::size_t> test_pick =
          rng.sample_indices(group.size(), static_cast<std::size_t>(want));
      std::vector<bool> in_test(group.size(), false);
      for (std::size_t p : test_pick) in_test[p] = true;
      std::vector<std::size_t> rest;
      for (std::size_t g = 0; g < group.size(); ++g) {
        if (in_test[g]) {
          split.test.push_back(dataset.specimens[group[g]].id);
        } else {
          rest.push_back(group[g]);
        }
      }
      rng.shuffle(rest);
      auto alloc = largest_remainder(
          rest.size(), {spec.comparison_train_fraction, 1.0 - spec.comparison_train_fraction});
      for (std::size_t g = 0; g < rest.size(); ++g) {
        (g < alloc[0] ? split.train : split.val).push_back(dataset.specimens[rest[g]].id);
      }
    }
    attach_views(dataset, spec, split);
    splits.push_back(std::move(split));
  }
  return splits;
}

std::vector<DataSplit> make_ml_splits(const Dataset& dataset, const Taxonomy& taxonomy,
                                      const SplitSpec& spec) {
  if (dataset.specimens.size() < 10) {
    throw_validation("InsufficientSpecimens", "need at least 10 specimens");
  }
  const double fsum = spec.ml_train + spec.ml_val + spec.ml_test;
  if (std::abs(fsum - 1.0) > 1e-9) {
    throw_validation("BadFractions", "train/val/test fractions must sum to 1");
  }

  auto groups = group_by_label(dataset, taxonomy);
  const std::vector<double> fractions = {spec.ml_train, spec.ml_val, spec.ml_test};
  std::vector<DataSplit> splits;
  for (int si = 0; si < spec.n_splits; ++si) {
    Rng rng = Rng::stream(spec.seed, "ml/split/" + std::to_string(si));
    DataSplit split;
    split.index = si;
    if (spec.ml_stratified) {
      for (const auto& [leaf, members] : groups) {
        (void)leaf;
        std::vector<std::size_t> group = members;
        rng.shuffle(group);
        auto alloc = largest_remainder(group.size(), fractions);
        std::size_t at = 0;
        for (std::size_t g = 0; g < alloc[0]; ++g) split.train.push_back(dataset.specimens[group[at++]].id);
        for (std::size_t g = 0; g < alloc[1]; ++g) split.val.push_back(dataset.specimens[group[at++]].id);
        for (std::size_t g = 0; g < alloc[2]; ++g) split.test.push_back(dataset.specimens[group[at++]].id);
      }
    } else {
      std::vector<std::size_t> pool(dataset.specimens.size());
      for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
      rng.shuffle(pool);
      auto alloc = largest_remainder(pool.size(), fractions);
      std::size_t at = 0;
      for (std::size_t g = 0; g < alloc[0]; ++g) split.train.push_back(dataset.specimens[pool[at++]].id);
      for (std::size_t g = 0; g < alloc[1]; ++g) split.val.push_back(dataset.specimens[pool[at++]].id);
      for (std::size_t g = 0; g < alloc[2]; ++g) split.test.push_back(dataset.specimens[pool[at++]].id);
    }
    attach_views(dataset, spec, split);
    splits.push_back(std::move(split));
  }
  return splits;
}

Dataset generate_synthetic(const Taxonomy& taxonomy, const SyntheticSpec& spec) {
  if (spec.specimens_per_leaf < 1) {
    throw_validation("BadSyntheticSpec", "specimens_per_leaf must be at least 1");
  }
  if (spec.views_per_specimen < 1) {
    throw_validation("BadSyntheticSpec", "views_per_specimen must be at least 1");
  }
  if (spec.alignment < 0.0 || spec.alignment > 1.0) {
    throw_validation("BadSyntheticSpec", "alignment must lie in [0, 1]");
  }

  const std::size_t dim = spec.dim;
  auto draw_vec = [&](const std::string& tag, double scale) {
    Rng rng = Rng::stream(spec.seed, tag);
    std::vector<double> v(dim);
    for (double& x : v) x = scale * rng.next_normal();
    return v;
  };

  // Clade-clustered means: each node contributes an offset whose scale
  // shrinks with depth, so siblings share most of their position.
  std::vector<std::vector<double>> node_offset(taxonomy.nodes().size());
  for (const TaxonNode& n : taxonomy.nodes()) {
    const double scale =
        spec.separation * std::pow(spec.level_decay, static_cast<double>(n.rank - 1));
    node_offset[n.id] = draw_vec("synth/offset/" + std::to_string(n.id), scale);
  }

  Dataset ds;
  ds.kind = ViewKind::features;
  ds.dim = dim;
  for (NodeId label : taxonomy.labels()) {
    const TaxonNode& leaf_node = taxonomy.node(label);
    const LabelPath path = taxonomy.expand_bottom_up(label);

    std::vector<double> mean(dim, 0.0);
    std::vector<double> scatter(dim, spec.specimen_sd);
    auto explicit_it = spec.label_gaussians.find(leaf_node.label_name);
    if (explicit_it != spec.label_gaussians.end()) {
      mean = explicit_it->second.first;
      scatter = explicit_it->second.second;
      if (mean.size() != dim || scatter.size() != dim) {
        throw_validation("DimensionMismatch", "explicit gaussian for '" +
                                                  leaf_node.label_name +
                                                  "' has the wrong dimension");
      }
    } else {
      std::vector<double> hier(dim, 0.0);
      for (NodeId id : path.taxa) {
        for (std::size_t d = 0; d < dim; ++d) hier[d] += node_offset[id][d];
      }
      std::vector<double> indep =
          draw_vec("synth/indep/" + std::to_string(label), spec.separation);
      for (std::size_t d = 0; d < dim; ++d) {
        mean[d] = spec.alignment * hier[d] + (1.0 - spec.alignment) * indep[d];
      }
    }

    for (int k = 0; k < spec.specimens_per_leaf; ++k) {
      Specimen s;
      s.id = leaf_node.label_name + "#" + std::to_string(k);
      s.truth = path;
      Rng srng = Rng::stream(spec.seed, "synth/specimen/" + s.id);
      std::vector<double> center(dim);
      for (std::size_t d = 0; d < dim; ++d) {
        center[d] = mean[d] + scatter[d] * srng.next_normal();
      }
      for (int v = 0; v < spec.views_per_specimen; ++v) {
        View view;
        view.image_id = s.id + "/v" + std::to_string(v);
        Rng vrng = Rng::stream(spec.seed, "synth/view/" + view.image_id);
        view.values.resize(dim);
        for (std::size_t d = 0; d < dim; ++d) {
          view.values[d] = center[d] + spec.view_sd * vrng.next_normal();
        }
        s.views.push_back(std::move(view));
      }
      ds.index.emplace(s.id, ds.specimens.size());
      ds.specimens.push_back(std::move(s));
    }
  }
  return ds;
}

std::string split_to_json(const DataSplit& split, const std::string& manifest_hash) {
  json j;
  j["split"] = split.index;
  j["train"] = split.train;
  j["val"] = split.val;
  j["test"] = split.test;
  json views = json::object();
  for (const auto& [id, imgs] : split.views) views[id] = imgs;
  j["views"] = views;
  if (!manifest_hash.empty()) j["manifest"] = manifest_hash;
  return j.dump(2) + "\n";
}

DataSplit split_from_json(const std::string& text) {
  json j = json::parse(text);
  DataSplit split;
  split.index = j.at("split").get<int>();
  split.train = j.at("train").get<std::vector<std::string>>();
  split.val = j.at("val").get<std::vector<std::string>>();
  split.test = j.at("test").get<std::vector<std::string>>();
  for (const auto& [id, imgs] : j.at("views").items()) {
    split.views[id] = imgs.get<std::vector<std::string>>();
  }
  return split;
}

std::string features_to_csv(const Dataset& dataset, const Taxonomy& taxonomy) {
  std::ostringstream out;
  out << "specimen_id,image_id,label_leaf";
  for (std::size_t d = 1; d <= dataset.dim; ++d) out << ",f" << d;
  out << "\n";
  for (const Specimen& s : dataset.specimens) {
    const std::string label = taxonomy.node(s.truth.leaf()).label_name;
    for (const View& v : s.views) {
      out << s.id << ',' << v.image_id << ',' << label;
      for (double x : v.values) out << ',' << format_double(x);
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace hclass
