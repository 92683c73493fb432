#include "hclass/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "hclass/csv.hpp"
#include "hclass/errors.hpp"

namespace hclass {

const char* to_string(PrefixPolicy policy) {
  return policy == PrefixPolicy::partial_credit ? "partial-credit" : "strict";
}

PrefixPolicy prefix_policy_from_string(const std::string& name) {
  if (name == "partial-credit" || name == "partial") return PrefixPolicy::partial_credit;
  if (name == "strict") return PrefixPolicy::strict;
  throw_validation("BadPrefixPolicy", "unknown prefix policy '" + name + "'");
}

Taxonomy Taxonomy::from_rows(const std::vector<Row>& rows,
                             const std::vector<std::string>& rank_names) {
  if (rows.empty()) throw_validation("EmptyTable", "no taxonomy rows");

  Taxonomy t;
  for (std::size_t r = 0; r < rank_names.size(); ++r) {
    t.ranks_.push_back(Rank{static_cast<int>(r) + 1, rank_names[r]});
  }

  std::size_t row_no = 0;
  for (const Row& row : rows) {
    ++row_no;
    if (row.lineage.size() != rank_names.size()) {
      throw_validation("RaggedRow", "row " + std::to_string(row_no) + ": expected " +
                                        std::to_string(rank_names.size()) + " lineage cells");
    }
    if (row.lineage[0].empty()) {
      throw_validation("RaggedRow",
                       "row " + std::to_string(row_no) + ": missing rank-1 cell");
    }
    int depth = 0;
    for (std::size_t k = 0; k < row.lineage.size(); ++k) {
      if (!row.lineage[k].empty()) {
        if (static_cast<int>(k) != depth) {
          throw_validation("RaggedRow", "row " + std::to_string(row_no) +
                                            ": absent cell followed by a deeper one");
        }
        ++depth;
      }
    }

    NodeId parent = kNoNode;
    NodeId current = kNoNode;
    for (int k = 0; k < depth; ++k) {
      const std::string& name = row.lineage[k];
      auto key = std::make_pair(name, k + 1);
      auto it = t.by_name_rank_.find(key);
      if (it != t.by_name_rank_.end()) {
        current = it->second;
        if (t.nodes_[current].parent != parent) {
          throw_validation("ConflictingParent",
                           "row " + std::to_string(row_no) + ": '" + name +
                               "' at rank " + std::to_string(k + 1) +
                               " already exists under a different parent");
        }
      } else {
        TaxonNode node;
        node.id = static_cast<NodeId>(t.nodes_.size());
        node.name = name;
        node.rank = k + 1;
        node.parent = parent;
        current = node.id;
        t.nodes_.push_back(std::move(node));
        t.by_name_rank_.emplace(std::move(key), current);
        if (parent == kNoNode) {
          t.top_nodes_.push_back(current);
        } else {
          t.nodes_[parent].children.push_back(current);
        }
      }
      parent = current;
    }

    TaxonNode& leaf = t.nodes_[current];
    if (leaf.is_label) {
      throw_validation("ConflictingParent",
                       "row " + std::to_string(row_no) + ": duplicate class label '" +
                           row.taxa + "'");
    }
    leaf.is_label = true;
    leaf.label_name = row.taxa.empty() ? leaf.name : row.taxa;
    leaf.specimens = row.specimens;
    leaf.images = row.images;
    t.labels_.push_back(current);
    t.by_label_name_[leaf.label_name] = current;
    t.total_specimens_ += row.specimens;
    t.total_images_ += row.images;
  }
  return t;
}

namespace {

// Fixture column order: deepest rank first, then ascending toward the top.
const std::vector<std::string> kCsvRankColumns = {"species", "genus", "family", "order"};

long parse_count(const std::string& cell, std::size_t row_no, const char* what) {
  try {
    std::size_t pos = 0;
    long v = std::stol(cell, &pos);
    if (pos != cell.size() || v < 0) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw_validation("BadCount", "row " + std::to_string(row_no) + ": bad " +
                                     std::string(what) + " value '" + cell + "'");
  }
}

}  // namespace

Taxonomy Taxonomy::parse_csv(std::istream& in) {
  CsvTable table = read_csv(in);
  if (table.header.empty()) throw_validation("EmptyTable", "missing header");

  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < table.header.size(); ++i) col[table.header[i]] = i;
  for (const char* required : {"taxa", "species", "genus", "family", "order"}) {
    if (!col.count(required)) {
      throw_validation("BadHeader", std::string("missing column '") + required + "'");
    }
  }
  const bool has_counts = col.count("specimens") && col.count("images");

  if (table.rows.empty()) throw_validation("EmptyTable", "no data rows");

  std::vector<Row> rows;
  rows.reserve(table.rows.size());
  std::size_t row_no = 1;
  for (const auto& cells : table.rows) {
    ++row_no;
    if (cells.size() < table.header.size()) {
      throw_validation("RaggedRow",
                       "row " + std::to_string(row_no) + ": too few columns");
    }
    auto cell = [&](const std::string& name) -> std::string {
      std::string v = cells[col.at(name)];
      return v == "-" ? std::string() : v;
    };
    Row row;
    row.taxa = cell("taxa");
    // Normalize to top-rank-first order.
    for (auto it = kCsvRankColumns.rbegin(); it != kCsvRankColumns.rend(); ++it) {
      row.lineage.push_back(cell(*it));
    }
    if (has_counts) {
      row.specimens = parse_count(cells[col.at("specimens")], row_no, "specimens");
      row.images = parse_count(cells[col.at("images")], row_no, "images");
    }
    rows.push_back(std::move(row));
  }

  std::vector<std::string> rank_names(kCsvRankColumns.rbegin(), kCsvRankColumns.rend());
  return from_rows(rows, rank_names);
}

Taxonomy Taxonomy::parse_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_validation("FileNotFound", "cannot open " + path);
  return parse_csv(in);
}

std::string Taxonomy::to_csv() const {
  std::ostringstream out;
  const bool counts = total_specimens_ > 0 || total_images_ > 0;
  out << "taxa,species,genus,family,order";
  if (counts) out << ",specimens,images";
  out << "\n";
  for (NodeId id : labels_) {
    LabelPath path = expand_bottom_up(id);
    std::vector<std::string> by_rank(ranks_.size(), "-");
    for (std::size_t k = 0; k < path.taxa.size(); ++k) {
      by_rank[k] = nodes_[path.taxa[k]].name;
    }
    const TaxonNode& leaf = nodes_[id];
    out << leaf.label_name;
    for (auto it = by_rank.rbegin(); it != by_rank.rend(); ++it) out << ',' << *it;
    if (counts) out << ',' << leaf.specimens << ',' << leaf.images;
    out << "\n";
  }
  return out.str();
}

const TaxonNode& Taxonomy::node(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
    throw_validation("ForeignNode", "unknown node id " + std::to_string(id));
  }
  return nodes_[id];
}

std::vector<NodeId> Taxonomy::nodes_at_rank(int rank) const {
  std::vector<NodeId> out;
  for (const TaxonNode& n : nodes_) {
    if (n.rank == rank) out.push_back(n.id);
  }
  return out;
}

std::size_t Taxonomy::count_at_rank(int rank) const {
  return nodes_at_rank(rank).size();
}

NodeId Taxonomy::find(const std::string& name, int rank) const {
  auto it = by_name_rank_.find({name, rank});
  return it == by_name_rank_.end() ? kNoNode : it->second;
}

NodeId Taxonomy::find_label(const std::string& taxa_name) const {
  auto it = by_label_name_.find(taxa_name);
  if (it != by_label_name_.end()) return it->second;
  // Fall back to node names so "Leuctra" finds the genus label "Leuctra sp.".
  for (NodeId id : labels_) {
    if (nodes_[id].name == taxa_name) return id;
  }
  return kNoNode;
}

LabelPath Taxonomy::expand_bottom_up(NodeId node_id) const {
  const TaxonNode* n = &node(node_id);
  LabelPath path;
  path.taxa.resize(n->rank);
  for (int k = n->rank - 1; k >= 0; --k) {
    path.taxa[k] = n->id;
    if (k > 0) n = &node(n->parent);
  }
  return path;
}

bool Taxonomy::is_valid_path(const LabelPath& path) const {
  if (path.taxa.empty()) return false;
  for (std::size_t k = 0; k < path.taxa.size(); ++k) {
    NodeId id = path.taxa[k];
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) return false;
    const TaxonNode& n = nodes_[id];
    if (n.rank != static_cast<int>(k) + 1) return false;
    if (k == 0) {
      if (n.parent != kNoNode) return false;
    } else if (n.parent != path.taxa[k - 1]) {
      return false;
    }
  }
  return true;
}

void Taxonomy::validate_path(const LabelPath& path) const {
  if (path.taxa.empty()) throw_validation("InvalidPath", "empty label path");
  for (NodeId id : path.taxa) node(id);  // ForeignNode on unknown ids
  if (!is_valid_path(path)) {
    std::string s;
    for (NodeId id : path.taxa) s += nodes_[id].name + "/";
    throw_validation("InvalidPath", "not a parent-child chain: " + s);
  }
}

int dca_depth(const Taxonomy& taxonomy, const LabelPath& a, const LabelPath& b) {
  taxonomy.validate_path(a);
  taxonomy.validate_path(b);
  const std::size_t limit = std::min(a.taxa.size(), b.taxa.size());
  std::size_t k = 0;
  while (k < limit && a.taxa[k] == b.taxa[k]) ++k;
  return static_cast<int>(k);
}

int loss_height(const Taxonomy& taxonomy, const std::optional<LabelPath>& pred,
                const LabelPath& truth, PrefixPolicy policy) {
  taxonomy.validate_path(truth);
  const int truth_depth = truth.depth();
  if (!pred.has_value()) return truth_depth;
  if (*pred == truth) return 0;
  const int common = dca_depth(taxonomy, *pred, truth);
  if (policy == PrefixPolicy::strict && common == pred->depth() && common < truth_depth) {
    return truth_depth;  // correct prefix scored as wrong as a missing prediction
  }
  // A prediction that extends past the truth's available depth shares the
  // whole truth path; it is still an error, charged one level.
  return std::max(1, truth_depth - common);
}

std::optional<NodeId> ancestor_at_rank(const LabelPath& path, int rank) {
  if (rank < 1 || rank > path.depth()) return std::nullopt;
  return path.taxa[rank - 1];
}

}  // namespace hclass
