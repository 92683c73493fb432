#ifndef HCLASS_GRID_SEARCH_HPP_
#define HCLASS_GRID_SEARCH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "hclass/model.hpp"

namespace hclass {

struct GridSpec {
  std::vector<double> c_values;
  std::vector<double> gamma_values;
  enum class Phase { single, coarse_then_refine };
  Phase phase = Phase::single;

  // c in {2^8..2^11}, gamma in {2^-11..2^-8}; the published flat / per-level grid.
  static GridSpec flat_default();
  // c in {2^1..2^15}, gamma in {2^-15..2^-1} on one view per specimen, then a
  // 3x3 multiplicative neighborhood on all views.
  static GridSpec per_node_default();
};

// Feature rows with their specimen ids; y is uniform within a specimen.
struct GroupedRows {
  Matrix x;
  std::vector<int> y;
  std::vector<std::string> group;

  bool empty() const { return x.rows == 0; }
};

struct GridSearchOutcome {
  SvmHyper best;
  TrainedModel model;          // refit on train+val at `best`
  double val_accuracy = 0.0;   // specimen-level accuracy of the winning point
  std::vector<std::string> notes;
};

// Specimen-level accuracy of a model over grouped rows under `rule`.
double specimen_accuracy(const TrainedModel& model, const GroupedRows& rows,
                         AggregationRule rule);

// Evaluates every grid point by validation specimen accuracy (ties: smaller
// c, then smaller gamma), then refits the winner on train+val. The
// coarse-then-refine phase searches the full grid on one seeded view per
// specimen before refining around the winner on all views.
// Throws EmptyGrid.
GridSearchOutcome grid_search_svm(const GroupedRows& train, const GroupedRows& val,
                                  const std::vector<std::string>& classes,
                                  const GridSpec& grid, AggregationRule rule,
                                  double tol, std::uint64_t seed,
                                  double retained_variance = 1.0, int jobs = 1);

}  // namespace hclass

#endif  // HCLASS_GRID_SEARCH_HPP_
