#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trustconv/embedding.hpp"

namespace trustconv {

enum class Metric { Cosine, Euclidean };
enum class Linkage { Single, Complete, Average, Ward };

std::string_view to_string(Metric metric);
std::string_view to_string(Linkage linkage);
std::optional<Metric> parse_metric(std::string_view text);
std::optional<Linkage> parse_linkage(std::string_view text);

/// Dense symmetric n x n distances with zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix(std::size_t n, Metric metric, std::vector<std::string> labels = {});

  std::size_t size() const { return n_; }
  Metric metric() const { return metric_; }
  const std::vector<std::string>& labels() const { return labels_; }

  double at(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }
  void set(std::size_t i, std::size_t j, double d);

 private:
  std::size_t n_;
  Metric metric_;
  std::vector<std::string> labels_;
  std::vector<double> entries_;
};

/// Cosine distance is 1 - cos, clamped at zero. Throws UnknownWord, and
/// InvalidArgument for fewer than two words.
DistanceMatrix distance_matrix(const EmbeddingTable& table, std::span<const std::string> words, Metric metric);
DistanceMatrix distance_matrix(std::span<const std::vector<double>> points, Metric metric);

/// Node ids: leaves are 0..n-1, merge m creates node n+m.
struct Merge {
  std::size_t left = 0;   // smaller child id
  std::size_t right = 0;  // larger child id
  double height = 0.0;
  std::size_t node = 0;
  std::size_t size = 0;  // leaves under the new node

  bool operator==(const Merge&) const = default;
};

struct Dendrogram {
  std::vector<std::string> leaves;
  std::vector<Merge> merges;
  Linkage linkage = Linkage::Average;
};

/// Repeatedly merges the closest pair of active clusters (ties: smallest
/// (left, right) id pair) and updates distances with the Lance-Williams
/// recurrence. Ward runs on squared Euclidean distances and reports heights
/// back in Euclidean units; it rejects cosine input.
Dendrogram agglomerate(const DistanceMatrix& dist, Linkage linkage);

struct TreeCut {
  enum class Mode { Height, Count };
  Mode mode = Mode::Count;
  double height = 0.0;
  std::size_t k = 1;

  static TreeCut at_height(double h) { return {Mode::Height, h, 0}; }
  static TreeCut into(std::size_t k) { return {Mode::Count, 0.0, k}; }
};

struct FlatClustering {
  std::vector<std::string> words;       // leaf order
  std::vector<std::size_t> assignment;  // cluster id per leaf
  std::size_t k = 0;
  TreeCut cut;

  std::vector<std::vector<std::string>> members() const;
};

/// Height mode keeps merges with height <= h; count mode undoes the k-1
/// highest merges. Cluster ids follow each cluster's smallest leaf index.
/// Throws InvalidK when k is outside [1, n].
FlatClustering cut_tree(const Dendrogram& dendrogram, const TreeCut& cut);

/// Tab-separated: header `merge_index left right height size`, then one merge per line.
void write_dendrogram(const Dendrogram& dendrogram, std::ostream& out);
/// `word<TAB>cluster_id` per line.
void write_flat_clustering(const FlatClustering& clustering, std::ostream& out);
FlatClustering read_flat_clustering(std::istream& in);

}  // namespace trustconv
