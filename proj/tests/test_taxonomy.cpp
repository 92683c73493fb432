#include <doctest.h>

#include <sstream>

#include "hclass/errors.hpp"
#include "hclass/taxonomy.hpp"
#include "support/fixtures.hpp"
#include "support/random_tree.hpp"

using namespace hclass;
using namespace hclass::testing;

TEST_CASE("bundled table parses to the published shape") {
  Taxonomy t = load_fixture();
  CHECK(t.label_count() == 39);
  CHECK(t.count_at_rank(1) == 7);
  CHECK(t.count_at_rank(2) == 23);
  CHECK(t.count_at_rank(3) == 30);
  CHECK(t.count_at_rank(4) == 26);
  CHECK(t.total_specimens() == 9631);
  CHECK(t.total_images() == 460004);

  NodeId simuliidae = t.find_label("Simuliidae");
  REQUIRE(simuliidae != kNoNode);
  LabelPath p = t.expand_bottom_up(simuliidae);
  CHECK(p.depth() == 2);
  CHECK(t.node(p.taxa[0]).name == "Diptera");
  CHECK(t.node(p.taxa[1]).name == "Simuliidae");
}

TEST_CASE("fixture round-trips through serialization") {
  Taxonomy t = load_fixture();
  std::istringstream again(t.to_csv());
  Taxonomy t2 = Taxonomy::parse_csv(again);
  CHECK(t2.label_count() == t.label_count());
  for (int r = 1; r <= 4; ++r) CHECK(t2.count_at_rank(r) == t.count_at_rank(r));
  CHECK(t2.total_specimens() == t.total_specimens());
  CHECK(t2.total_images() == t.total_images());
  for (NodeId label : t.labels()) {
    const TaxonNode& n = t.node(label);
    NodeId other = t2.find_label(n.label_name);
    REQUIRE(other != kNoNode);
    CHECK(t2.node(other).rank == n.rank);
  }
}

TEST_CASE("single-row table gives a depth-1 tree") {
  std::vector<Taxonomy::Row> rows = {{"A", {"A", "", "", ""}, 0, 0}};
  Taxonomy t = Taxonomy::from_rows(rows, kRankNames);
  CHECK(t.label_count() == 1);
  CHECK(t.nodes().size() == 1);
  CHECK(t.expand_bottom_up(t.labels()[0]).depth() == 1);
}

TEST_CASE("the small example tree has the hand-counted shape") {
  Taxonomy t = make_small_tree();
  CHECK(t.count_at_rank(1) == 1);
  CHECK(t.count_at_rank(2) == 3);
  CHECK(t.count_at_rank(3) == 3);
  CHECK(t.count_at_rank(4) == 3);
  CHECK(t.label_count() == 5);
}

TEST_CASE("parse errors carry their codes") {
  SUBCASE("conflicting parent") {
    std::vector<Taxonomy::Row> rows = {
        {"x", {"O1", "F1", "G1", ""}, 0, 0},
        {"y", {"O2", "F1", "G2", ""}, 0, 0},  // F1 reused under another order
    };
    try {
      Taxonomy::from_rows(rows, kRankNames);
      FAIL("expected ConflictingParent");
    } catch (const Error& e) {
      CHECK(e.code() == "ConflictingParent");
    }
  }
  SUBCASE("ragged row") {
    std::vector<Taxonomy::Row> rows = {{"x", {"O1", "", "G1", ""}, 0, 0}};
    try {
      Taxonomy::from_rows(rows, kRankNames);
      FAIL("expected RaggedRow");
    } catch (const Error& e) {
      CHECK(e.code() == "RaggedRow");
    }
  }
  SUBCASE("empty table") {
    try {
      Taxonomy::from_rows({}, kRankNames);
      FAIL("expected EmptyTable");
    } catch (const Error& e) {
      CHECK(e.code() == "EmptyTable");
    }
  }
  SUBCASE("csv ragged row") {
    std::istringstream in("taxa,species,genus,family,order\nA,-,G,-,O\n");
    try {
      Taxonomy::parse_csv(in);
      FAIL("expected RaggedRow");
    } catch (const Error& e) {
      CHECK(e.code() == "RaggedRow");
    }
  }
}

TEST_CASE("dca depth on the example tree") {
  Taxonomy t = make_small_tree();
  LabelPath truth = path_of_names(t, {"Order A", "Family B", "Genus A", "Species A"});
  LabelPath sib = path_of_names(t, {"Order A", "Family B", "Genus A", "Species B"});
  LabelPath far = path_of_names(t, {"Order A", "Family C", "Genus C", "Species C"});
  CHECK(dca_depth(t, truth, truth) == 4);
  CHECK(dca_depth(t, truth, sib) == 3);
  CHECK(dca_depth(t, truth, far) == 1);
}

TEST_CASE("loss height on the example tree") {
  Taxonomy t = make_small_tree();
  LabelPath truth = path_of_names(t, {"Order A", "Family B", "Genus A", "Species A"});
  LabelPath sib = path_of_names(t, {"Order A", "Family B", "Genus A", "Species B"});
  CHECK(loss_height(t, truth, truth) == 0);
  CHECK(loss_height(t, sib, truth) == 1);
  CHECK(loss_height(t, std::nullopt, truth) == 4);

  LabelPath prefix = truth;
  prefix.taxa.resize(3);
  CHECK(loss_height(t, prefix, truth) == 1);  // stopped at genus
  CHECK(loss_height(t, prefix, truth, PrefixPolicy::strict) == 4);

  // Truth that stops at the genus label, prediction descending past it.
  LabelPath genus_truth = path_of_names(t, {"Order A", "Family B", "Genus B"});
  LabelPath deeper = path_of_names(t, {"Order A", "Family B", "Genus A", "Species A"});
  CHECK(loss_height(t, deeper, genus_truth) == 2);
  // Over-deep on the same lineage still counts one level of error.
  LabelPath fam_truth = path_of_names(t, {"Order A", "Family A"});
  LabelPath fam_deeper = fam_truth;  // same path; exact
  CHECK(loss_height(t, fam_deeper, fam_truth) == 0);
}

TEST_CASE("over-deep predictions never score zero") {
  // Mixed-depth family: label at the genus, another label one rank below.
  std::vector<Taxonomy::Row> rows = {
      {"G", {"O", "F", "G", ""}, 0, 0},
      {"S", {"O", "F", "G", "S"}, 0, 0},
  };
  Taxonomy t = Taxonomy::from_rows(rows, kRankNames);
  LabelPath genus_truth = t.expand_bottom_up(t.find("G", 3));
  LabelPath species = t.expand_bottom_up(t.find("S", 4));
  CHECK(loss_height(t, species, genus_truth) == 1);
}

TEST_CASE("ancestor_at_rank basics") {
  Taxonomy t = make_small_tree();
  LabelPath truth = path_of_names(t, {"Order A", "Family B", "Genus A", "Species A"});
  CHECK(*ancestor_at_rank(truth, 2) == t.find("Family B", 2));
  CHECK(*ancestor_at_rank(truth, 1) == t.find("Order A", 1));
  LabelPath shallow = path_of_names(t, {"Order A", "Family A"});
  CHECK(!ancestor_at_rank(shallow, 3).has_value());
}

TEST_CASE("expand_bottom_up yields valid paths ending at the node") {
  Taxonomy t = make_small_tree();
  for (NodeId label : t.labels()) {
    LabelPath p = t.expand_bottom_up(label);
    CHECK(t.is_valid_path(p));
    CHECK(p.leaf() == label);
  }
  CHECK_THROWS_AS(t.expand_bottom_up(999), Error);
}

TEST_CASE("foreign nodes are rejected") {
  Taxonomy t = make_small_tree();
  LabelPath bogus;
  bogus.taxa = {0, 999};
  LabelPath truth = path_of_names(t, {"Order A", "Family A"});
  CHECK_THROWS_AS(dca_depth(t, bogus, truth), Error);
}

TEST_CASE("dca properties hold on random trees") {
  Rng rng(2024);
  for (int round = 0; round < 50; ++round) {
    Taxonomy t = random_taxonomy(rng);
    const auto& labels = t.labels();
    for (int k = 0; k < 20; ++k) {
      LabelPath a = t.expand_bottom_up(labels[rng.below(labels.size())]);
      LabelPath b = t.expand_bottom_up(labels[rng.below(labels.size())]);
      CHECK(dca_depth(t, a, b) == dca_depth(t, b, a));
      CHECK(dca_depth(t, a, a) == a.depth());
      const int h = loss_height(t, b, a);
      CHECK(h >= 0);
      CHECK(h <= a.depth());
      CHECK((h == 0) == (a == b));
    }
  }
}
