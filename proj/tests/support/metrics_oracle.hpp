#ifndef HCLASS_TESTS_METRICS_ORACLE_HPP_
#define HCLASS_TESTS_METRICS_ORACLE_HPP_

#include <map>
#include <optional>
#include <vector>

#include "hclass/metrics.hpp"
#include "hclass/taxonomy.hpp"

namespace hclass::testing {

// Independent re-derivation of every metric by explicit parent-pointer
// walking. It never calls dca_depth / loss_height / ancestor_at_rank, only
// Taxonomy::node() for parent and rank lookups, so agreement with the
// library is a genuine cross-check. Float accumulation follows the same
// expression shapes as the definitions so comparisons can be exact.
struct OracleMetrics {
  double ce = 0.0;
  double cse = 0.0;
  double lcse = 0.0;
  std::map<int, std::size_t> err_structure;
  std::map<int, double> ce_per_rank;
  std::map<int, std::size_t> rank_support;
};

// Climb from a node to rank 1, returning ids indexed by rank (1-based).
inline std::vector<NodeId> oracle_chain(const Taxonomy& t, NodeId leaf) {
  std::vector<NodeId> up;
  NodeId at = leaf;
  while (at != kNoNode) {
    up.push_back(at);
    at = t.node(at).parent;
  }
  std::vector<NodeId> by_rank(up.size());
  for (std::size_t i = 0; i < up.size(); ++i) by_rank[up.size() - 1 - i] = up[i];
  return by_rank;
}

// Deepest common ancestor depth by walking both chains up to equal rank and
// then climbing in lockstep until the nodes coincide (0 = only the virtual
// root is shared).
inline int oracle_dca(const Taxonomy& t, NodeId a_leaf, NodeId b_leaf) {
  NodeId a = a_leaf;
  NodeId b = b_leaf;
  while (t.node(a).rank > t.node(b).rank) a = t.node(a).parent;
  while (t.node(b).rank > t.node(a).rank) b = t.node(b).parent;
  while (a != b) {
    a = t.node(a).parent;
    b = t.node(b).parent;
    if (a == kNoNode || b == kNoNode) return 0;
  }
  return a == kNoNode ? 0 : t.node(a).rank;
}

inline int oracle_loss(const Taxonomy& t, const std::optional<LabelPath>& pred,
                       const LabelPath& truth, PrefixPolicy policy) {
  const int truth_depth = static_cast<int>(truth.taxa.size());
  if (!pred) return truth_depth;
  if (pred->taxa == truth.taxa) return 0;
  const int dca = oracle_dca(t, pred->taxa.back(), truth.taxa.back());
  const int pred_depth = static_cast<int>(pred->taxa.size());
  const bool is_prefix = dca == pred_depth && pred_depth < truth_depth;
  if (policy == PrefixPolicy::strict && is_prefix) return truth_depth;
  return std::max(1, truth_depth - dca);
}

inline OracleMetrics oracle_evaluate(const Taxonomy& t,
                                     const std::vector<PredictionRecord>& records,
                                     PrefixPolicy policy) {
  OracleMetrics out;
  const int height = t.height();
  const std::size_t n = records.size();

  std::size_t wrong = 0;
  double loss_sum = 0.0;
  double lcse_sum = 0.0;
  std::map<int, std::size_t> rank_wrong;
  for (const auto& r : records) {
    const bool exact = r.pred.has_value() && r.pred->taxa == r.truth.taxa;
    if (!exact) ++wrong;
    const int loss = oracle_loss(t, r.pred, r.truth, policy);
    loss_sum += loss;
    lcse_sum += static_cast<double>(loss) / static_cast<double>(r.truth.taxa.size());

    // First divergence rank over the union of both depths.
    std::vector<NodeId> truth_chain = oracle_chain(t, r.truth.taxa.back());
    std::vector<NodeId> pred_chain =
        r.pred ? oracle_chain(t, r.pred->taxa.back()) : std::vector<NodeId>{};
    if (!exact) {
      const std::size_t limit = std::max(truth_chain.size(), pred_chain.size());
      for (std::size_t k = 0; k < limit; ++k) {
        const bool has_t = k < truth_chain.size();
        const bool has_p = k < pred_chain.size();
        if (has_t != has_p || (has_t && truth_chain[k] != pred_chain[k])) {
          out.err_structure[static_cast<int>(k) + 1] += 1;
          break;
        }
      }
    }
    for (int rank = 1; rank <= height; ++rank) {
      if (static_cast<std::size_t>(rank) > truth_chain.size()) continue;
      out.rank_support[rank] += 1;
      const bool ok = static_cast<std::size_t>(rank) <= pred_chain.size() &&
                      pred_chain[rank - 1] == truth_chain[rank - 1];
      if (!ok) rank_wrong[rank] += 1;
    }
  }
  out.ce = static_cast<double>(wrong) / static_cast<double>(n);
  out.cse = loss_sum / (static_cast<double>(n) * height);
  out.lcse = lcse_sum / static_cast<double>(n);
  for (const auto& [rank, support] : out.rank_support) {
    out.ce_per_rank[rank] =
        static_cast<double>(rank_wrong[rank]) / static_cast<double>(support);
  }
  return out;
}

}  // namespace hclass::testing

#endif  // HCLASS_TESTS_METRICS_ORACLE_HPP_
