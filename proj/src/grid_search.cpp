#include "hclass/grid_search.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <thread>

#include "hclass/errors.hpp"
#include "hclass/rng.hpp"

namespace hclass {

GridSpec GridSpec::flat_default() {
  GridSpec g;
  for (int e = 8; e <= 11; ++e) g.c_values.push_back(std::pow(2.0, e));
  for (int e = -11; e <= -8; ++e) g.gamma_values.push_back(std::pow(2.0, e));
  return g;
}

GridSpec GridSpec::per_node_default() {
  GridSpec g;
  for (int e = 1; e <= 15; ++e) g.c_values.push_back(std::pow(2.0, e));
  for (int e = -15; e <= -1; ++e) g.gamma_values.push_back(std::pow(2.0, e));
  g.phase = Phase::coarse_then_refine;
  return g;
}

namespace {

std::map<std::string, std::vector<std::size_t>> rows_by_group(const GroupedRows& rows) {
  std::map<std::string, std::vector<std::size_t>> out;
  for (std::size_t r = 0; r < rows.group.size(); ++r) out[rows.group[r]].push_back(r);
  return out;
}

// One seeded view per specimen, used by the coarse search phase.
GroupedRows one_view_per_specimen(const GroupedRows& rows, std::uint64_t seed) {
  auto groups = rows_by_group(rows);
  std::vector<std::size_t> keep;
  for (const auto& [id, members] : groups) {
    Rng rng = Rng::stream(seed, "grid/coarse/" + id);
    keep.push_back(members[rng.below(members.size())]);
  }
  std::sort(keep.begin(), keep.end());
  GroupedRows out;
  out.x = Matrix(keep.size(), rows.x.cols);
  out.y.resize(keep.size());
  out.group.resize(keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    auto src = rows.x.row(keep[k]);
    std::copy(src.begin(), src.end(), out.x.row(k).begin());
    out.y[k] = rows.y[keep[k]];
    out.group[k] = rows.group[keep[k]];
  }
  return out;
}

double grouped_accuracy(const PredictOutput& out, const GroupedRows& rows,
                        AggregationRule rule, ModelKind kind) {
  auto groups = rows_by_group(rows);
  std::size_t correct = 0;
  for (const auto& [id, members] : groups) {
    AggregateOutcome agg = aggregate_views(out, members, rule, kind);
    if (agg.label == rows.y[members.front()]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(groups.size());
}

struct Candidate {
  SvmHyper hyper;
  double accuracy = -1.0;
};

// Best by accuracy; ties prefer smaller c, then smaller gamma.
bool better(const Candidate& a, const Candidate& b) {
  if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
  if (a.hyper.c != b.hyper.c) return a.hyper.c < b.hyper.c;
  return a.hyper.gamma < b.hyper.gamma;
}

Candidate evaluate_grid(const GroupedRows& train, const GroupedRows& eval_rows,
                        std::size_t n_classes, const std::vector<SvmHyper>& points,
                        AggregationRule rule, double tol, double retained_variance,
                        int jobs) {
  Preprocessor pre = fit_preprocessor(train.x, retained_variance);
  Matrix xtr = apply_preprocessor(pre, train.x);
  Matrix xev = apply_preprocessor(pre, eval_rows.x);

  std::vector<Candidate> results(points.size());
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      SvmModel m = train_svm_ovo(xtr, train.y, n_classes, points[p], tol);
      PredictOutput out;
      out.scores = Matrix(xev.rows, n_classes);
      out.labels.resize(xev.rows);
      for (std::size_t r = 0; r < xev.rows; ++r) {
        std::vector<double> v = m.votes(xev.row(r));
        std::size_t best = 0;
        for (std::size_t i = 1; i < v.size(); ++i) {
          if (v[i] > v[best]) best = i;
        }
        out.labels[r] = static_cast<int>(best);
        std::copy(v.begin(), v.end(), out.scores.row(r).begin());
      }
      results[p] = {points[p], grouped_accuracy(out, eval_rows, rule, ModelKind::svm)};
    }
  };

  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(points.size())));
  if (workers == 1) {
    run(0, points.size());
  } else {
    std::vector<std::thread> threads;
    const std::size_t chunk = (points.size() + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(points.size(), begin + chunk);
      if (begin < end) threads.emplace_back(run, begin, end);
    }
    for (auto& t : threads) t.join();
  }

  Candidate best = results.front();
  for (const Candidate& c : results) {
    if (better(c, best)) best = c;
  }
  return best;
}

std::vector<SvmHyper> cross(const std::vector<double>& cs, const std::vector<double>& gs) {
  std::vector<SvmHyper> points;
  for (double c : cs) {
    for (double g : gs) points.push_back({c, g});
  }
  return points;
}

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

double specimen_accuracy(const TrainedModel& model, const GroupedRows& rows,
                         AggregationRule rule) {
  PredictOutput out = predict_labels(model, rows.x);
  return grouped_accuracy(out, rows, rule, model.kind);
}

GridSearchOutcome grid_search_svm(const GroupedRows& train, const GroupedRows& val,
                                  const std::vector<std::string>& classes,
                                  const GridSpec& grid, AggregationRule rule,
                                  double tol, std::uint64_t seed,
                                  double retained_variance, int jobs) {
  if (grid.c_values.empty() || grid.gamma_values.empty()) {
    throw_validation("EmptyGrid", "grid needs at least one c and one gamma");
  }
  if (train.empty()) throw_validation("EmptyInput", "no training rows");
  const std::vector<double> cs = sorted_unique(grid.c_values);
  const std::vector<double> gs = sorted_unique(grid.gamma_values);

  GridSearchOutcome outcome;
  // With no validation specimens the grid is scored on training accuracy.
  const GroupedRows& eval_rows = val.empty() ? train : val;
  if (val.empty()) outcome.notes.push_back("empty validation set; selected by training accuracy");

  Candidate winner;
  if (grid.phase == GridSpec::Phase::coarse_then_refine) {
    GroupedRows coarse_train = one_view_per_specimen(train, seed);
    GroupedRows coarse_eval = one_view_per_specimen(eval_rows, seed);
    Candidate coarse = evaluate_grid(coarse_train, coarse_eval, classes.size(),
                                     cross(cs, gs), rule, tol, retained_variance, jobs);
    const double cf = cs.size() > 1 ? cs[1] / cs[0] : 2.0;
    const double gf = gs.size() > 1 ? gs[1] / gs[0] : 2.0;
    std::vector<double> rc = {coarse.hyper.c / cf, coarse.hyper.c, coarse.hyper.c * cf};
    std::vector<double> rg = {coarse.hyper.gamma / gf, coarse.hyper.gamma,
                              coarse.hyper.gamma * gf};
    winner = evaluate_grid(train, eval_rows, classes.size(), cross(rc, rg), rule, tol,
                           retained_variance, jobs);
  } else {
    winner = evaluate_grid(train, eval_rows, classes.size(), cross(cs, gs), rule, tol,
                           retained_variance, jobs);
  }

  // Final model: train+val merged, preprocessor refit on the merged rows.
  GroupedRows merged;
  merged.x = Matrix(train.x.rows + val.x.rows, train.x.cols);
  std::copy(train.x.data.begin(), train.x.data.end(), merged.x.data.begin());
  std::copy(val.x.data.begin(), val.x.data.end(),
            merged.x.data.begin() + static_cast<std::ptrdiff_t>(train.x.data.size()));
  merged.y = train.y;
  merged.y.insert(merged.y.end(), val.y.begin(), val.y.end());
  merged.group = train.group;
  merged.group.insert(merged.group.end(), val.group.begin(), val.group.end());

  TrainedModel model;
  model.kind = ModelKind::svm;
  model.classes = classes;
  model.pre = fit_preprocessor(merged.x, retained_variance);
  Matrix xm = apply_preprocessor(model.pre, merged.x);
  model.svm = train_svm_ovo(xm, merged.y, classes.size(), winner.hyper, tol);

  std::set<std::string> id_set(merged.group.begin(), merged.group.end());
  std::vector<std::string> ids(id_set.begin(), id_set.end());
  model.fit_fingerprint = fingerprint_ids(ids);

  outcome.best = winner.hyper;
  outcome.val_accuracy = winner.accuracy;
  outcome.model = std::move(model);
  return outcome;
}

}  // namespace hclass
