#ifndef HCLASS_TESTS_FIXTURES_HPP_
#define HCLASS_TESTS_FIXTURES_HPP_

#include <string>
#include <vector>

#include "hclass/taxonomy.hpp"

namespace hclass::testing {

inline const std::vector<std::string> kRankNames = {"order", "family", "genus", "species"};

// The small example tree used throughout: one order; family A is a label at
// depth 2, genus B at depth 3; species A/B sit under genus A, species C under
// genus C.
inline Taxonomy make_small_tree() {
  std::vector<Taxonomy::Row> rows = {
      {"Family A", {"Order A", "Family A", "", ""}, 0, 0},
      {"Species A", {"Order A", "Family B", "Genus A", "Species A"}, 0, 0},
      {"Species B", {"Order A", "Family B", "Genus A", "Species B"}, 0, 0},
      {"Genus B", {"Order A", "Family B", "Genus B", ""}, 0, 0},
      {"Species C", {"Order A", "Family C", "Genus C", "Species C"}, 0, 0},
  };
  return Taxonomy::from_rows(rows, kRankNames);
}

inline LabelPath path_of_names(const Taxonomy& t, const std::vector<std::string>& names) {
  LabelPath p;
  for (std::size_t k = 0; k < names.size(); ++k) {
    p.taxa.push_back(t.find(names[k], static_cast<int>(k) + 1));
  }
  return p;
}

inline Taxonomy load_fixture() {
  return Taxonomy::parse_csv_file(HCLASS_FIXTURE);
}

}  // namespace hclass::testing

#endif  // HCLASS_TESTS_FIXTURES_HPP_
