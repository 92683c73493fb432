#ifndef HCLASS_TAXONOMY_HPP_
#define HCLASS_TAXONOMY_HPP_

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hclass {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

// 1-based level of the hierarchy (1 = order in the bundled table).
struct Rank {
  int index = 0;
  std::string name;
};

struct TaxonNode {
  NodeId id = kNoNode;
  std::string name;
  int rank = 0;             // 1-based
  NodeId parent = kNoNode;  // kNoNode for rank-1 nodes (child of the virtual root)
  std::vector<NodeId> children;  // canonical (construction) order
  bool is_label = false;         // appears as a class label (deepest rank of a row)
  std::string label_name;        // display name from the taxa column when is_label
  long specimens = 0;            // optional census column
  long images = 0;               // optional census column
};

// Root-to-deepest list of node ids; taxa[k] sits at rank k+1.
struct LabelPath {
  std::vector<NodeId> taxa;

  int depth() const { return static_cast<int>(taxa.size()); }
  NodeId leaf() const { return taxa.back(); }
  bool operator==(const LabelPath&) const = default;
};

// How a correct strict-prefix prediction is scored by loss_height:
//   partial_credit: h = H_i - depth(pred)   (default)
//   strict:         h = H_i                 (as wrong as a missing prediction)
enum class PrefixPolicy { partial_credit, strict };

const char* to_string(PrefixPolicy policy);
PrefixPolicy prefix_policy_from_string(const std::string& name);

// Immutable rooted tree over taxon nodes. Nodes live at contiguous ranks
// 1..height(); a virtual root above rank 1 is implied and never appears in
// paths. Class labels ("leaves") may sit at different ranks, and a label may
// also be an internal node (a genus whose species are only partly resolved).
class Taxonomy {
 public:
  struct Row {
    std::string taxa;  // display label, may equal the deepest rank name
    std::vector<std::string> lineage;  // rank-1 name first; "" = absent
    long specimens = 0;
    long images = 0;
  };

  // Builds from rows whose lineage columns are ordered top rank first.
  // Throws EmptyTable, RaggedRow, ConflictingParent.
  static Taxonomy from_rows(const std::vector<Row>& rows,
                            const std::vector<std::string>& rank_names);

  // CSV with header taxa,species,genus,family,order[,specimens,images];
  // "-" marks an absent cell. Column order follows the bundled fixture
  // (deepest rank first); rank order is normalized internally.
  static Taxonomy parse_csv(std::istream& in);
  static Taxonomy parse_csv_file(const std::string& path);

  // Re-serializes in the fixture schema; parse(to_csv()) is node-equivalent.
  std::string to_csv() const;

  const std::vector<TaxonNode>& nodes() const { return nodes_; }
  const TaxonNode& node(NodeId id) const;  // throws ForeignNode
  const std::vector<Rank>& ranks() const { return ranks_; }
  int height() const { return static_cast<int>(ranks_.size()); }

  // Class labels in canonical order (first appearance in the input rows).
  const std::vector<NodeId>& labels() const { return labels_; }
  std::size_t label_count() const { return labels_.size(); }

  // Rank-1 nodes in canonical order (children of the virtual root).
  const std::vector<NodeId>& top_nodes() const { return top_nodes_; }

  std::vector<NodeId> nodes_at_rank(int rank) const;
  std::size_t count_at_rank(int rank) const;

  // Lookup by (name, rank); kNoNode when absent. Names are only guaranteed
  // unique per lineage, so this returns the first canonical match.
  NodeId find(const std::string& name, int rank) const;

  // Lookup of a class label by its display (taxa-column) name, falling back
  // to the node name; kNoNode when absent.
  NodeId find_label(const std::string& taxa_name) const;

  // Full root-to-node path for any node. Throws ForeignNode.
  LabelPath expand_bottom_up(NodeId node_id) const;

  bool is_valid_path(const LabelPath& path) const;
  void validate_path(const LabelPath& path) const;  // throws ForeignNode/InvalidPath

  long total_specimens() const { return total_specimens_; }
  long total_images() const { return total_images_; }

 private:
  std::vector<TaxonNode> nodes_;
  std::vector<Rank> ranks_;
  std::vector<NodeId> labels_;
  std::vector<NodeId> top_nodes_;
  std::map<std::pair<std::string, int>, NodeId> by_name_rank_;
  std::map<std::string, NodeId> by_label_name_;
  long total_specimens_ = 0;
  long total_images_ = 0;
};

// Number of leading levels on which the two paths agree; 0 when they part at
// rank 1. Validates both paths. Symmetric.
int dca_depth(const Taxonomy& taxonomy, const LabelPath& a, const LabelPath& b);

// Levels of the truth path below the deepest common ancestor of prediction
// and truth: 0 for an exact match, depth(truth) for a missing prediction, and
// at least 1 for any other mismatch. See PrefixPolicy for prefix handling.
int loss_height(const Taxonomy& taxonomy, const std::optional<LabelPath>& pred,
                const LabelPath& truth,
                PrefixPolicy policy = PrefixPolicy::partial_credit);

// taxa[rank-1] when the path reaches that rank.
std::optional<NodeId> ancestor_at_rank(const LabelPath& path, int rank);

}  // namespace hclass

#endif  // HCLASS_TAXONOMY_HPP_
