#include "trustconv/summarization.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "trustconv/error.hpp"

namespace trustconv {

std::vector<double> cluster_centroid(std::span<const std::string> members, const EmbeddingTable& table,
                                     const TermWeights* weights) {
  if (members.empty()) throw Error(ErrorCode::EmptyCluster, "cannot take the centroid of an empty cluster");
  std::vector<double> centroid(table.dim(), 0.0);
  double total = 0.0;
  for (const std::string& word : members) {
    auto row = table.vector(word);
    double w = 1.0;
    if (weights) {
      auto it = weights->find(word);
      if (it != weights->end()) w = it->second;
    }
    if (!(w >= 0.0)) throw Error(ErrorCode::InvalidArgument, "weight for '" + word + "' is negative");
    for (std::size_t k = 0; k < centroid.size(); ++k) centroid[k] += w * row[k];
    total += w;
  }
  if (total <= 0.0) throw Error(ErrorCode::InvalidArgument, "cluster weights sum to zero");
  for (double& v : centroid) v /= total;
  return centroid;
}

std::vector<ScoredTerm> nearest_terms(std::span<const double> centroid, std::span<const std::string> candidates,
                                      const EmbeddingTable& table, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  if (candidates.empty()) throw Error(ErrorCode::InvalidArgument, "no candidate terms");
  if (std::all_of(centroid.begin(), centroid.end(), [](double v) { return v == 0.0; })) {
    throw Error(ErrorCode::ZeroVector, "centroid is the zero vector");
  }
  std::set<std::string> unique(candidates.begin(), candidates.end());
  std::vector<ScoredTerm> scored;
  scored.reserve(unique.size());
  for (const std::string& term : unique) {
    auto row = table.vector(term);
    double score = std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; })
                       ? 0.0
                       : cosine_similarity(centroid, row);
    scored.push_back({term, score});
  }
  std::sort(scored.begin(), scored.end(), [](const ScoredTerm& a, const ScoredTerm& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.term < b.term;
  });
  if (scored.size() > k) scored.resize(k);
  return scored;
}

std::vector<ClusterSummary> summarize_cut(const FlatClustering& clustering, const EmbeddingTable& table,
                                          std::span<const std::string> concept_lexicon,
                                          const TermWeights& frequency_weights, std::size_t top_k) {
  std::vector<std::string> concepts;
  for (const std::string& term : concept_lexicon) {
    if (table.contains(term)) concepts.push_back(term);
  }
  std::vector<ClusterSummary> out;
  auto groups = clustering.members();
  out.reserve(groups.size());
  for (std::size_t c = 0; c < groups.size(); ++c) {
    if (groups[c].empty()) throw Error(ErrorCode::EmptyCluster, "cluster " + std::to_string(c) + " has no members");
    ClusterSummary summary;
    summary.cluster_id = c;
    summary.members = groups[c];
    std::sort(summary.members.begin(), summary.members.end());
    summary.centroid = cluster_centroid(summary.members, table, &frequency_weights);
    std::vector<std::string> candidates = summary.members;
    candidates.insert(candidates.end(), concepts.begin(), concepts.end());
    summary.ranked_terms = nearest_terms(summary.centroid, candidates, table, top_k);
    summary.selected_term = summary.ranked_terms.front().term;
    out.push_back(std::move(summary));
  }
  return out;
}

std::string summary_report_json(std::span<const ClusterSummary> summaries) {
  nlohmann::json clusters = nlohmann::json::array();
  for (const ClusterSummary& s : summaries) {
    double norm = 0.0;
    for (double v : s.centroid) norm += v * v;
    nlohmann::json ranked = nlohmann::json::array();
    for (const ScoredTerm& t : s.ranked_terms) ranked.push_back({{"term", t.term}, {"score", t.score}});
    clusters.push_back({{"cluster_id", s.cluster_id},
                        {"members", s.members},
                        {"centroid_norm", std::sqrt(norm)},
                        {"ranked_terms", std::move(ranked)},
                        {"selected_term", s.selected_term}});
  }
  return nlohmann::json{{"clusters", std::move(clusters)}}.dump(2) + "\n";
}

}  // namespace trustconv
