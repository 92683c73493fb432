#include "hclass/report_io.hpp"

#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hclass {

using nlohmann::json;

namespace {

std::string rank_display(const Taxonomy& taxonomy, int rank) {
  std::string name = taxonomy.ranks()[rank - 1].name;
  if (!name.empty()) name[0] = static_cast<char>(std::toupper(name[0]));
  return name;
}

json stat_json(const ScalarStat& s) {
  return json{{"mean", s.mean}, {"sd", s.sd}};
}

json report_json(const MetricsReport& r) {
  json j;
  j["n"] = r.n;
  j["ce_deepest"] = r.ce_deepest;
  j["cse"] = r.cse;
  j["lcse"] = r.lcse;
  json per_rank = json::object();
  for (const auto& [rank, v] : r.ce_per_rank) per_rank[std::to_string(rank)] = v;
  j["ce_per_rank"] = per_rank;
  json support = json::object();
  for (const auto& [rank, v] : r.rank_support) support[std::to_string(rank)] = v;
  j["rank_support"] = support;
  json errs = json::object();
  for (const auto& [rank, v] : r.err_structure) errs[std::to_string(rank)] = v;
  j["err_structure"] = errs;
  return j;
}

}  // namespace

std::string report_to_json(const EvaluationResult& result, const Taxonomy& taxonomy,
                           const std::string& manifest_hash) {
  json j;
  j["schema_version"] = 1;
  j["mode"] = result.mode;
  j["prefix_policy"] = to_string(result.policy);
  j["n_total"] = result.n_total;
  if (!manifest_hash.empty()) j["manifest"] = manifest_hash;

  json ranks = json::object();
  for (const Rank& r : taxonomy.ranks()) ranks[std::to_string(r.index)] = r.name;
  j["ranks"] = ranks;

  if (result.mode == "full") {
    j["n_splits"] = result.per_split.size();
    json splits = json::array();
    for (const auto& r : result.per_split) splits.push_back(report_json(r));
    j["splits"] = splits;
    if (result.aggregate) {
      const SplitAggregate& a = *result.aggregate;
      json agg;
      agg["ce_deepest"] = stat_json(a.ce_deepest);
      agg["cse"] = stat_json(a.cse);
      agg["lcse"] = stat_json(a.lcse);
      json per_rank = json::object();
      for (const auto& [rank, s] : a.ce_per_rank) per_rank[std::to_string(rank)] = stat_json(s);
      agg["ce_per_rank"] = per_rank;
      json errs = json::object();
      for (const auto& [rank, v] : a.err_structure_total) errs[std::to_string(rank)] = v;
      agg["err_structure_total"] = errs;
      agg["degenerate_sd"] = a.degenerate_sd;
      j["aggregate"] = agg;
    }
    // Confusion matrices summed across splits, one per rank.
    json confusion = json::object();
    for (int rank = 1; rank <= taxonomy.height(); ++rank) {
      const ConfusionMatrix* first = nullptr;
      for (const auto& r : result.per_split) {
        auto it = r.confusion.find(rank);
        if (it != r.confusion.end()) {
          first = &it->second;
          break;
        }
      }
      if (!first) continue;
      json cj;
      json names = json::array();
      for (NodeId id : first->labels) names.push_back(taxonomy.node(id).name);
      names.push_back("absent");
      cj["labels"] = names;
      Matrix total(first->counts.rows, first->counts.cols, 0.0);
      for (const auto& r : result.per_split) {
        auto it = r.confusion.find(rank);
        if (it == r.confusion.end()) continue;
        for (std::size_t i = 0; i < total.data.size(); ++i) {
          total.data[i] += it->second.counts.data[i];
        }
      }
      json rows = json::array();
      for (std::size_t i = 0; i < total.rows; ++i) {
        json row = json::array();
        for (std::size_t c = 0; c < total.cols; ++c) {
          row.push_back(static_cast<long>(total(i, c)));
        }
        rows.push_back(row);
      }
      cj["counts"] = rows;
      confusion[std::to_string(rank)] = cj;
    }
    j["confusion"] = confusion;
  } else {
    j["n_splits"] = result.rank_reports.size();
    j["incoherent_rows"] = result.incoherent_total;
    json splits = json::array();
    for (const auto& r : result.rank_reports) {
      json s;
      s["n"] = r.n;
      json per_rank = json::object();
      for (const auto& [rank, v] : r.ce_per_rank) per_rank[std::to_string(rank)] = v;
      s["ce_per_rank"] = per_rank;
      json support = json::object();
      for (const auto& [rank, v] : r.rank_support) support[std::to_string(rank)] = v;
      s["rank_support"] = support;
      s["incoherent_rows"] = r.incoherent_rows;
      splits.push_back(s);
    }
    j["splits"] = splits;
    json per_rank = json::object();
    for (const auto& [rank, s] : result.rank_ce_stats) {
      per_rank[std::to_string(rank)] = stat_json(s);
    }
    j["ce_per_rank"] = per_rank;
  }
  return j.dump(2) + "\n";
}

std::string report_to_table(const EvaluationResult& result, const Taxonomy& taxonomy) {
  std::ostringstream out;
  char line[128];
  auto row = [&](const std::string& label, double value) {
    std::snprintf(line, sizeof(line), "%-26s %10.4f\n", label.c_str(), value);
    out << line;
  };
  auto row_count = [&](const std::string& label, std::size_t value) {
    std::snprintf(line, sizeof(line), "%-26s %10zu\n", label.c_str(), value);
    out << line;
  };

  if (result.mode == "full" && result.aggregate) {
    const SplitAggregate& a = *result.aggregate;
    out << "Deepest level\n";
    row("  CE   mean", a.ce_deepest.mean);
    row("  CE   sd", a.ce_deepest.sd);
    row("  LCSE mean", a.lcse.mean);
    row("  LCSE sd", a.lcse.sd);
    for (const auto& [rank, s] : a.ce_per_rank) {
      out << rank_display(taxonomy, rank) << "\n";
      row("  CE   mean", s.mean);
      row("  CE   sd", s.sd);
    }
    out << "Error structure\n";
    for (int rank = 1; rank <= taxonomy.height(); ++rank) {
      auto it = a.err_structure_total.find(rank);
      row_count("  #ERR(" + taxonomy.ranks()[rank - 1].name + ")",
                it == a.err_structure_total.end() ? 0 : it->second);
    }
    row_count("n_total", a.n_total);
  } else {
    for (const auto& [rank, s] : result.rank_ce_stats) {
      out << rank_display(taxonomy, rank) << "\n";
      row("  CE   mean", s.mean);
      row("  CE   sd", s.sd);
    }
    row_count("incoherent_rows", result.incoherent_total);
    row_count("n_total", result.n_total);
  }
  return out.str();
}

}  // namespace hclass
