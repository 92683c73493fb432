#ifndef HCLASS_TESTS_RANDOM_TREE_HPP_
#define HCLASS_TESTS_RANDOM_TREE_HPP_

#include <optional>
#include <string>
#include <vector>

#include "hclass/metrics.hpp"
#include "hclass/rng.hpp"
#include "hclass/taxonomy.hpp"

namespace hclass::testing {

// Random taxonomy with up to `max_height` ranks and roughly up to
// `max_labels` class labels. Every childless node is a label and some
// internal nodes are labels too (the mixed-depth case).
inline Taxonomy random_taxonomy(Rng& rng, int max_height = 4, int max_labels = 20) {
  const int height = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_height)));

  struct Node {
    int rank;
    int parent;
    std::vector<int> children;
    bool label = false;
  };
  std::vector<Node> nodes;
  std::vector<int> frontier;
  const int n_top = 1 + static_cast<int>(rng.below(3));
  for (int i = 0; i < n_top; ++i) {
    nodes.push_back({1, -1, {}, false});
    frontier.push_back(static_cast<int>(nodes.size()) - 1);
  }
  for (int rank = 2; rank <= height; ++rank) {
    std::vector<int> next;
    for (int p : frontier) {
      const int kids = static_cast<int>(rng.below(4));  // 0..3
      for (int k = 0; k < kids && static_cast<int>(nodes.size()) < 3 * max_labels; ++k) {
        nodes.push_back({rank, p, {}, false});
        nodes[p].children.push_back(static_cast<int>(nodes.size()) - 1);
        next.push_back(static_cast<int>(nodes.size()) - 1);
      }
    }
    frontier = std::move(next);
    if (frontier.empty()) break;
  }
  for (auto& n : nodes) {
    if (n.children.empty()) {
      n.label = true;  // every terminal node is a class label
    } else if (rng.below(10) < 3) {
      n.label = true;  // some internal nodes are labels too
    }
  }

  std::vector<Taxonomy::Row> rows;
  int label_count = 0;
  for (std::size_t i = 0; i < nodes.size() && label_count < max_labels; ++i) {
    if (!nodes[i].label) continue;
    Taxonomy::Row row;
    row.taxa = "t" + std::to_string(i);
    std::vector<std::string> lineage;
    int at = static_cast<int>(i);
    while (at >= 0) {
      lineage.push_back("n" + std::to_string(at));
      at = nodes[at].parent;
    }
    std::reverse(lineage.begin(), lineage.end());
    lineage.resize(height, "");
    row.lineage = lineage;
    rows.push_back(std::move(row));
    ++label_count;
  }
  // Keep the tree well formed even if the label cap dropped some terminals:
  // from_rows only builds nodes on emitted rows, so the result is always a
  // valid taxonomy.
  std::vector<std::string> rank_names;
  for (int r = 1; r <= height; ++r) rank_names.push_back("rank" + std::to_string(r));
  return Taxonomy::from_rows(rows, rank_names);
}

// Random prediction set over a taxonomy's labels: a mix of exact matches,
// missing predictions, correct prefixes, over-deep descendants and unrelated
// labels.
inline std::vector<PredictionRecord> random_records(Rng& rng, const Taxonomy& taxonomy,
                                                    std::size_t n) {
  const auto& labels = taxonomy.labels();
  std::vector<PredictionRecord> records;
  for (std::size_t i = 0; i < n; ++i) {
    PredictionRecord r;
    r.specimen_id = "s" + std::to_string(i);
    NodeId truth_leaf = labels[rng.below(labels.size())];
    r.truth = taxonomy.expand_bottom_up(truth_leaf);
    const std::uint64_t kind = rng.below(100);
    if (kind < 20) {
      r.pred = std::nullopt;
    } else if (kind < 40) {
      r.pred = r.truth;
    } else if (kind < 55 && r.truth.depth() > 1) {
      LabelPath prefix = r.truth;
      prefix.taxa.resize(1 + rng.below(static_cast<std::uint64_t>(r.truth.depth() - 1)));
      r.pred = prefix;
    } else if (kind < 70) {
      // a label below the truth node, when one exists
      std::vector<NodeId> below;
      for (NodeId cand : labels) {
        LabelPath p = taxonomy.expand_bottom_up(cand);
        if (p.depth() > r.truth.depth() &&
            std::equal(r.truth.taxa.begin(), r.truth.taxa.end(), p.taxa.begin())) {
          below.push_back(cand);
        }
      }
      if (below.empty()) {
        r.pred = taxonomy.expand_bottom_up(labels[rng.below(labels.size())]);
      } else {
        r.pred = taxonomy.expand_bottom_up(below[rng.below(below.size())]);
      }
    } else {
      r.pred = taxonomy.expand_bottom_up(labels[rng.below(labels.size())]);
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace hclass::testing

#endif  // HCLASS_TESTS_RANDOM_TREE_HPP_
