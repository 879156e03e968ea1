#include <doctest.h>

#include <random>

#include "trustconv/error.hpp"
#include "trustconv/summarization.hpp"

using namespace trustconv;

namespace {

EmbeddingTable table_of(std::initializer_list<std::pair<std::string, std::vector<double>>> rows) {
  EmbeddingTable t(rows.begin()->second.size());
  for (const auto& [w, v] : rows) t.insert_or_assign(w, v);
  return t;
}

FlatClustering flat(std::vector<std::string> words, std::vector<std::size_t> assignment) {
  FlatClustering c;
  c.words = std::move(words);
  c.assignment = std::move(assignment);
  c.k = *std::max_element(c.assignment.begin(), c.assignment.end()) + 1;
  c.cut = TreeCut::into(c.k);
  return c;
}

}  // namespace

TEST_CASE("centroids") {
  EmbeddingTable t = table_of({{"a", {1, 0}}, {"b", {0, 1}}});
  std::vector<std::string> ab = {"a", "b"};
  CHECK(cluster_centroid(ab, t) == std::vector<double>{0.5, 0.5});
  std::vector<std::string> a = {"a"};
  CHECK(cluster_centroid(a, t) == std::vector<double>{1, 0});
  TermWeights w{{"a", 3.0}, {"b", 1.0}};
  auto c = cluster_centroid(ab, t, &w);
  CHECK(c[0] == doctest::Approx(0.75));
  CHECK(c[1] == doctest::Approx(0.25));
  std::vector<std::string> none;
  CHECK_THROWS_AS(cluster_centroid(none, t), Error);
}

TEST_CASE("centroid of identical vectors is that vector") {
  EmbeddingTable t = table_of({{"x", {0.3, -1.2, 4.0}}, {"y", {0.3, -1.2, 4.0}}, {"z", {0.3, -1.2, 4.0}}});
  std::vector<std::string> m = {"x", "y", "z"};
  TermWeights w{{"x", 5.0}, {"z", 2.0}};
  auto c = cluster_centroid(m, t, &w);
  for (std::size_t i = 0; i < 3; ++i) CHECK(c[i] == doctest::Approx(t.vector("x")[i]));
}

TEST_CASE("nearest terms by cosine") {
  EmbeddingTable t = table_of({{"a", {1, 0}}, {"b", {0, 1}}, {"c", {0.9, 0.1}}});
  std::vector<double> centroid = {1, 0};
  std::vector<std::string> vocab = {"a", "b", "c"};
  auto r = nearest_terms(centroid, vocab, t, 3);
  REQUIRE(r.size() == 3);
  CHECK(r[0].term == "a");
  CHECK(r[1].term == "c");
  CHECK(r[2].term == "b");
  std::vector<std::string> one = {"b"};
  CHECK(nearest_terms(centroid, one, t, 1).front().term == "b");
  std::vector<double> zero = {0, 0};
  try {
    nearest_terms(zero, vocab, t, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroVector);
  }
}

TEST_CASE("summaries pick members of well separated clusters") {
  EmbeddingTable t = table_of({{"p", {1, 0.1}}, {"q", {1, -0.1}}, {"r", {0.95, 0}}, {"x", {0.1, 1}}, {"y", {-0.1, 1}}});
  auto s = summarize_cut(flat({"p", "q", "r", "x", "y"}, {0, 0, 0, 1, 1}), t, {}, {});
  REQUIRE(s.size() == 2);
  CHECK((s[0].selected_term == "p" || s[0].selected_term == "q" || s[0].selected_term == "r"));
  CHECK((s[1].selected_term == "x" || s[1].selected_term == "y"));
  for (const auto& c : s) {
    for (const auto& t2 : c.ranked_terms) CHECK(c.ranked_terms.front().score >= t2.score);
    CHECK(c.selected_term == c.ranked_terms.front().term);
  }
}

TEST_CASE("singleton clusters select their own word") {
  EmbeddingTable t = table_of({{"a", {1, 0}}, {"b", {0, 1}}, {"c", {-1, 0.2}}});
  auto s = summarize_cut(flat({"a", "b", "c"}, {0, 1, 2}), t, {}, {});
  CHECK(s[0].selected_term == "a");
  CHECK(s[1].selected_term == "b");
  CHECK(s[2].selected_term == "c");
}

TEST_CASE("duplicate vectors tie-break lexicographically") {
  EmbeddingTable t = table_of({{"zeta", {1, 1}}, {"alpha", {1, 1}}, {"mid", {1, 1}}});
  auto s = summarize_cut(flat({"zeta", "alpha", "mid"}, {0, 0, 0}), t, {}, {});
  CHECK(s[0].selected_term == "alpha");
  CHECK(s[0].ranked_terms[1].term == "mid");
}

TEST_CASE("concept lexicon terms join every cluster's candidates") {
  EmbeddingTable t = table_of({{"a", {1, 0.2}}, {"b", {1, -0.2}}, {"perform", {1, 0}}, {"x", {0, 1}}});
  std::vector<std::string> concepts = {"perform", "purpos"};  // purpos has no vector
  auto s = summarize_cut(flat({"a", "b", "x"}, {0, 0, 1}), t, concepts, {});
  CHECK(s[0].selected_term == "perform");
  CHECK(s[1].selected_term == "x");
}

TEST_CASE("summaries ignore member order") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  EmbeddingTable t(4);
  std::vector<std::string> words;
  for (int i = 0; i < 12; ++i) {
    std::vector<double> v(4);
    for (auto& x : v) x = g(rng);
    words.push_back("w" + std::to_string(i));
    t.insert_or_assign(words.back(), v);
  }
  std::vector<std::size_t> assign = {0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2};
  auto base = summarize_cut(flat(words, assign), t, {}, {});
  std::vector<std::string> rw(words.rbegin(), words.rend());
  std::vector<std::size_t> ra(assign.rbegin(), assign.rend());
  auto rev = summarize_cut(flat(rw, ra), t, {}, {});
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(base[c].selected_term == rev[c].selected_term);
    CHECK(base[c].members == rev[c].members);
  }
}
