#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "../common/naive_clustering.hpp"
#include "trustconv/clustering.hpp"
#include "trustconv/error.hpp"

using namespace trustconv;

namespace {

std::vector<std::vector<double>> line_points(std::initializer_list<double> xs) {
  std::vector<std::vector<double>> out;
  for (double x : xs) out.push_back({x});
  return out;
}

std::vector<std::vector<double>> random_points(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> pts(n, std::vector<double>(d));
  for (auto& p : pts)
    for (auto& x : p) x = g(rng);
  return pts;
}

}  // namespace

TEST_CASE("distance matrix examples") {
  EmbeddingTable t(2);
  std::vector<double> a = {1, 0}, b = {0, 1};
  t.insert_or_assign("a", a);
  t.insert_or_assign("a2", a);
  t.insert_or_assign("b", b);
  std::vector<std::string> words = {"a", "a2", "b"};
  DistanceMatrix cos = distance_matrix(t, words, Metric::Cosine);
  CHECK(cos.at(0, 1) == 0.0);
  CHECK(cos.at(0, 2) == doctest::Approx(1.0));
  CHECK(cos.at(2, 0) == cos.at(0, 2));
  CHECK(cos.at(1, 1) == 0.0);
  CHECK(cos.labels() == words);

  DistanceMatrix e = distance_matrix(line_points({0, 3}), Metric::Euclidean);
  CHECK(e.at(0, 1) == 3.0);
  CHECK_THROWS_AS(distance_matrix(line_points({0}), Metric::Euclidean), Error);
}

TEST_CASE("three points on a line") {
  auto pts = line_points({0, 1, 10});
  DistanceMatrix d = distance_matrix(pts, Metric::Euclidean);
  Dendrogram single = agglomerate(d, Linkage::Single);
  REQUIRE(single.merges.size() == 2);
  CHECK(single.merges[0] == Merge{0, 1, 1.0, 3, 2});
  CHECK(single.merges[1] == Merge{2, 3, 9.0, 4, 3});

  Dendrogram average = agglomerate(d, Linkage::Average);
  CHECK(average.merges[1].height == doctest::Approx(9.5));
  Dendrogram complete = agglomerate(d, Linkage::Complete);
  CHECK(complete.merges[1].height == 10.0);

  FlatClustering c = cut_tree(single, TreeCut::at_height(5));
  CHECK(c.k == 2);
  CHECK(c.assignment == std::vector<std::size_t>{0, 0, 1});
  CHECK(cut_tree(single, TreeCut::at_height(100)).k == 1);
  CHECK(cut_tree(single, TreeCut::into(3)).assignment == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("two points merge once at their distance") {
  Dendrogram d = agglomerate(distance_matrix(line_points({2, 7}), Metric::Euclidean), Linkage::Ward);
  REQUIRE(d.merges.size() == 1);
  CHECK(d.merges[0].height == doctest::Approx(5.0));
}

TEST_CASE("ward rejects cosine distances") {
  DistanceMatrix d(3, Metric::Cosine);
  CHECK_THROWS_AS(agglomerate(d, Linkage::Ward), Error);
}

TEST_CASE("ties resolve to the smallest node pair") {
  // Equilateral-ish: all pairwise distances equal.
  DistanceMatrix d(4, Metric::Euclidean);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) d.set(i, j, 1.0);
  Dendrogram g = agglomerate(d, Linkage::Single);
  CHECK(g.merges[0].left == 0);
  CHECK(g.merges[0].right == 1);
  CHECK(g.merges[1].left == 2);
  CHECK(g.merges[1].right == 3);
}

TEST_CASE("agglomerate matches the brute-force oracle") {
  std::mt19937_64 rng(2024);
  for (Linkage linkage : {Linkage::Single, Linkage::Complete, Linkage::Average, Linkage::Ward}) {
    for (int trial = 0; trial < 10; ++trial) {
      auto pts = random_points(rng, 3 + static_cast<std::size_t>(trial), 3);
      Dendrogram g = agglomerate(distance_matrix(pts, Metric::Euclidean), linkage);
      auto oracle = trustconv_test::naive_agglomerate(pts, linkage);
      REQUIRE(g.merges.size() == oracle.size());
      for (std::size_t m = 0; m < oracle.size(); ++m) {
        CHECK(g.merges[m].left == oracle[m].left);
        CHECK(g.merges[m].right == oracle[m].right);
        CHECK(g.merges[m].height == doctest::Approx(oracle[m].height).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("dendrogram structural invariants") {
  std::mt19937_64 rng(5);
  for (Linkage linkage : {Linkage::Single, Linkage::Complete, Linkage::Average, Linkage::Ward}) {
    auto pts = random_points(rng, 15, 4);
    Dendrogram g = agglomerate(distance_matrix(pts, Metric::Euclidean), linkage);
    REQUIRE(g.merges.size() == 14);
    std::set<std::size_t> used;
    for (std::size_t m = 0; m < g.merges.size(); ++m) {
      CHECK(used.insert(g.merges[m].left).second);
      CHECK(used.insert(g.merges[m].right).second);
      CHECK(g.merges[m].node == 15 + m);
      CHECK(g.merges[m].height >= 0.0);
      if (m > 0) CHECK(g.merges[m].height >= g.merges[m - 1].height - 1e-12);
    }
    CHECK(g.merges.back().size == 15);
  }
}

TEST_CASE("cut_tree count mode and monotonicity") {
  std::mt19937_64 rng(9);
  auto pts = random_points(rng, 12, 2);
  Dendrogram g = agglomerate(distance_matrix(pts, Metric::Euclidean), Linkage::Average);
  for (std::size_t k = 1; k <= 12; ++k) {
    FlatClustering c = cut_tree(g, TreeCut::into(k));
    CHECK(c.k == k);
    std::set<std::size_t> ids(c.assignment.begin(), c.assignment.end());
    CHECK(ids.size() == k);
    CHECK(*ids.rbegin() == k - 1);
  }
  std::size_t prev = 13;
  for (double h = 0.0; h < 6.0; h += 0.05) {
    std::size_t k = cut_tree(g, TreeCut::at_height(h)).k;
    CHECK(k <= prev);
    prev = k;
  }
  CHECK_THROWS_AS(cut_tree(g, TreeCut::into(0)), Error);
  CHECK_THROWS_AS(cut_tree(g, TreeCut::into(13)), Error);
}

TEST_CASE("relabeling leaves permutes assignments consistently") {
  std::mt19937_64 rng(17);
  auto pts = random_points(rng, 10, 3);
  std::vector<std::size_t> perm = {3, 7, 0, 9, 1, 5, 2, 8, 6, 4};
  std::vector<std::vector<double>> permuted(10);
  for (std::size_t i = 0; i < 10; ++i) permuted[i] = pts[perm[i]];
  auto a = cut_tree(agglomerate(distance_matrix(pts, Metric::Euclidean), Linkage::Complete), TreeCut::into(4));
  auto b = cut_tree(agglomerate(distance_matrix(permuted, Metric::Euclidean), Linkage::Complete), TreeCut::into(4));
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) {
      CHECK((b.assignment[i] == b.assignment[j]) == (a.assignment[perm[i]] == a.assignment[perm[j]]));
    }
}

TEST_CASE("dendrogram and flat clustering text formats") {
  auto pts = line_points({0, 1, 10});
  DistanceMatrix d(3, Metric::Euclidean, {"x", "y", "z"});
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j) d.set(i, j, std::abs(pts[i][0] - pts[j][0]));
  Dendrogram g = agglomerate(d, Linkage::Single);
  std::ostringstream tree;
  write_dendrogram(g, tree);
  CHECK(tree.str().rfind("merge_index\tleft\tright\theight\tsize\n", 0) == 0);

  FlatClustering c = cut_tree(g, TreeCut::into(2));
  std::ostringstream flat;
  write_flat_clustering(c, flat);
  std::istringstream in(flat.str());
  FlatClustering back = read_flat_clustering(in);
  CHECK(back.words == c.words);
  CHECK(back.assignment == c.assignment);
  CHECK(back.members() == std::vector<std::vector<std::string>>{{"x", "y"}, {"z"}});
}
