#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "trustconv/clustering.hpp"
#include "trustconv/embedding.hpp"

namespace trustconv {

struct ScoredTerm {
  std::string term;
  double score = 0.0;

  bool operator==(const ScoredTerm&) const = default;
};

struct ClusterSummary {
  std::size_t cluster_id = 0;
  std::vector<std::string> members;
  std::vector<double> centroid;
  std::vector<ScoredTerm> ranked_terms;  // similarity desc, then term asc
  std::string selected_term;             // ranked_terms.front().term
};

using TermWeights = std::map<std::string, double, std::less<>>;

/// Weighted mean of the member vectors. Members missing from `weights` count
/// with weight 1; a null `weights` means uniform. Throws EmptyCluster,
/// UnknownWord, or InvalidArgument when the weights sum to zero.
std::vector<double> cluster_centroid(std::span<const std::string> members, const EmbeddingTable& table,
                                     const TermWeights* weights = nullptr);

/// Top-k candidates by cosine similarity to the centroid. Throws ZeroVector
/// for an all-zero centroid and UnknownWord for a candidate without a vector.
std::vector<ScoredTerm> nearest_terms(std::span<const double> centroid, std::span<const std::string> candidates,
                                      const EmbeddingTable& table, std::size_t k);

/// One summary per cluster. Each cluster's candidates are its own members
/// plus the concept lexicon terms that have a vector in `table`.
std::vector<ClusterSummary> summarize_cut(const FlatClustering& clustering, const EmbeddingTable& table,
                                          std::span<const std::string> concept_lexicon,
                                          const TermWeights& frequency_weights, std::size_t top_k = 5);

std::string summary_report_json(std::span<const ClusterSummary> summaries);

}  // namespace trustconv
