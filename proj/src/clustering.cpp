#include "trustconv/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "trustconv/error.hpp"

namespace trustconv {

std::string_view to_string(Metric metric) { return metric == Metric::Cosine ? "cosine" : "euclidean"; }

std::string_view to_string(Linkage linkage) {
  switch (linkage) {
    case Linkage::Single: return "single";
    case Linkage::Complete: return "complete";
    case Linkage::Average: return "average";
    case Linkage::Ward: return "ward";
  }
  return "?";
}

std::optional<Metric> parse_metric(std::string_view text) {
  if (text == "cosine") return Metric::Cosine;
  if (text == "euclidean") return Metric::Euclidean;
  return std::nullopt;
}

std::optional<Linkage> parse_linkage(std::string_view text) {
  if (text == "single") return Linkage::Single;
  if (text == "complete") return Linkage::Complete;
  if (text == "average") return Linkage::Average;
  if (text == "ward") return Linkage::Ward;
  return std::nullopt;
}

DistanceMatrix::DistanceMatrix(std::size_t n, Metric metric, std::vector<std::string> labels)
    : n_(n), metric_(metric), labels_(std::move(labels)), entries_(n * n, 0.0) {
  if (labels_.empty()) {
    for (std::size_t i = 0; i < n; ++i) labels_.push_back(std::to_string(i));
  }
  if (labels_.size() != n) throw Error(ErrorCode::InvalidArgument, "one label per point is required");
}

void DistanceMatrix::set(std::size_t i, std::size_t j, double d) {
  if (i == j) return;
  if (!(d >= 0.0)) throw Error(ErrorCode::InvalidArgument, "distances must be non-negative");
  entries_[i * n_ + j] = d;
  entries_[j * n_ + i] = d;
}

namespace {

double pair_distance(std::span<const double> a, std::span<const double> b, Metric metric) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "points of different dimension");
  if (metric == Metric::Cosine) return std::max(0.0, 1.0 - cosine_similarity(a, b));
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(sum);
}

}  // namespace

DistanceMatrix distance_matrix(const EmbeddingTable& table, std::span<const std::string> words, Metric metric) {
  if (words.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two words to cluster");
  std::vector<std::span<const double>> rows;
  rows.reserve(words.size());
  for (const std::string& word : words) rows.push_back(table.vector(word));
  DistanceMatrix dist(words.size(), metric, {words.begin(), words.end()});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) dist.set(i, j, pair_distance(rows[i], rows[j], metric));
  }
  return dist;
}

DistanceMatrix distance_matrix(std::span<const std::vector<double>> points, Metric metric) {
  if (points.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two points to cluster");
  DistanceMatrix dist(points.size(), metric);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) dist.set(i, j, pair_distance(points[i], points[j], metric));
  }
  return dist;
}

Dendrogram agglomerate(const DistanceMatrix& dist, Linkage linkage) {
  const std::size_t n = dist.size();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "need at least two points to cluster");
  if (linkage == Linkage::Ward && dist.metric() != Metric::Euclidean) {
    throw Error(ErrorCode::InvalidArgument, "ward linkage requires euclidean distances");
  }

  // Working matrix indexed by slot; slot s holds the cluster with node id node_of[s].
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double v = dist.at(i, j);
      d[i * n + j] = linkage == Linkage::Ward ? v * v : v;
    }
  }
  std::vector<std::size_t> node_of(n);
  std::iota(node_of.begin(), node_of.end(), std::size_t{0});
  std::vector<std::size_t> size(n, 1);
  std::vector<bool> active(n, true);

  Dendrogram out;
  out.leaves = dist.labels();
  out.linkage = linkage;
  out.merges.reserve(n - 1);

  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t best_a = n;
    std::size_t best_b = n;
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::size_t, std::size_t> best_ids{std::numeric_limits<std::size_t>::max(), 0};
    for (std::size_t a = 0; a < n; ++a) {
      if (!active[a]) continue;
      for (std::size_t b = a + 1; b < n; ++b) {
        if (!active[b]) continue;
        double v = d[a * n + b];
        std::pair<std::size_t, std::size_t> ids = std::minmax(node_of[a], node_of[b]);
        if (v < best || (v == best && ids < best_ids)) {
          best = v;
          best_a = a;
          best_b = b;
          best_ids = ids;
        }
      }
    }

    const double na = static_cast<double>(size[best_a]);
    const double nb = static_cast<double>(size[best_b]);
    const double dab = d[best_a * n + best_b];
    for (std::size_t c = 0; c < n; ++c) {
      if (!active[c] || c == best_a || c == best_b) continue;
      const double dac = d[best_a * n + c];
      const double dbc = d[best_b * n + c];
      const double nc = static_cast<double>(size[c]);
      double merged = 0.0;
      switch (linkage) {
        case Linkage::Single: merged = std::min(dac, dbc); break;
        case Linkage::Complete: merged = std::max(dac, dbc); break;
        case Linkage::Average: merged = (na * dac + nb * dbc) / (na + nb); break;
        case Linkage::Ward: merged = ((na + nc) * dac + (nb + nc) * dbc - nc * dab) / (na + nb + nc); break;
      }
      d[best_a * n + c] = merged;
      d[c * n + best_a] = merged;
    }

    Merge merge;
    merge.left = best_ids.first;
    merge.right = best_ids.second;
    merge.height = linkage == Linkage::Ward ? std::sqrt(std::max(0.0, best)) : best;
    merge.node = n + step;
    merge.size = size[best_a] + size[best_b];
    out.merges.push_back(merge);

    size[best_a] += size[best_b];
    node_of[best_a] = merge.node;
    active[best_b] = false;
  }
  return out;
}

std::vector<std::vector<std::string>> FlatClustering::members() const {
  std::vector<std::vector<std::string>> out(k);
  for (std::size_t leaf = 0; leaf < words.size(); ++leaf) out[assignment[leaf]].push_back(words[leaf]);
  return out;
}

FlatClustering cut_tree(const Dendrogram& dendrogram, const TreeCut& cut) {
  const std::size_t n = dendrogram.leaves.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "dendrogram has no leaves");
  if (cut.mode == TreeCut::Mode::Count && (cut.k < 1 || cut.k > n)) {
    throw Error(ErrorCode::InvalidK, "k = " + std::to_string(cut.k) + " outside [1, " + std::to_string(n) + "]");
  }

  // Union-find over node ids 0..2n-2.
  std::vector<std::size_t> parent(2 * n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };

  const std::size_t keep = cut.mode == TreeCut::Mode::Count ? n - cut.k : dendrogram.merges.size();
  for (std::size_t m = 0; m < keep && m < dendrogram.merges.size(); ++m) {
    const Merge& merge = dendrogram.merges[m];
    if (cut.mode == TreeCut::Mode::Height && merge.height > cut.height) continue;
    parent[find(merge.left)] = merge.node;
    parent[find(merge.right)] = merge.node;
  }

  FlatClustering out;
  out.words = dendrogram.leaves;
  out.cut = cut;
  out.assignment.resize(n);
  std::map<std::size_t, std::size_t> cluster_of_root;
  for (std::size_t leaf = 0; leaf < n; ++leaf) {
    auto [it, inserted] = cluster_of_root.emplace(find(leaf), cluster_of_root.size());
    out.assignment[leaf] = it->second;
  }
  out.k = cluster_of_root.size();
  return out;
}

void write_dendrogram(const Dendrogram& dendrogram, std::ostream& out) {
  out << "merge_index\tleft\tright\theight\tsize\n";
  char buffer[64];
  for (std::size_t m = 0; m < dendrogram.merges.size(); ++m) {
    const Merge& merge = dendrogram.merges[m];
    std::snprintf(buffer, sizeof(buffer), "%.17g", merge.height);
    out << m << '\t' << merge.left << '\t' << merge.right << '\t' << buffer << '\t' << merge.size << '\n';
  }
}

void write_flat_clustering(const FlatClustering& clustering, std::ostream& out) {
  for (std::size_t leaf = 0; leaf < clustering.words.size(); ++leaf) {
    out << clustering.words[leaf] << '\t' << clustering.assignment[leaf] << '\n';
  }
}

FlatClustering read_flat_clustering(std::istream& in) {
  FlatClustering out;
  std::string line;
  std::size_t line_no = 0;
  std::size_t max_id = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word)) continue;
    long long id = -1;
    if (!(fields >> id) || id < 0) {
      throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": expected `word cluster_id`");
    }
    out.words.push_back(word);
    out.assignment.push_back(static_cast<std::size_t>(id));
    max_id = std::max(max_id, static_cast<std::size_t>(id));
  }
  if (out.words.empty()) throw Error(ErrorCode::EmptyInput, "clustering file has no rows");
  out.k = max_id + 1;
  std::vector<bool> seen(out.k, false);
  for (std::size_t id : out.assignment) seen[id] = true;
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw Error(ErrorCode::EmptyCluster, "cluster ids must be dense 0..k-1");
  }
  out.cut = TreeCut::into(out.k);
  return out;
}

}  // namespace trustconv
