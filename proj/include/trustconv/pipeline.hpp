#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "trustconv/clustering.hpp"
#include "trustconv/corpus.hpp"
#include "trustconv/embedding.hpp"
#include "trustconv/prompt_gen.hpp"
#include "trustconv/scale_ranking.hpp"
#include "trustconv/summarization.hpp"

namespace trustconv {

struct PipelineConfig {
  std::optional<std::filesystem::path> corpus;  // bundled corpus when unset
  std::optional<std::filesystem::path> extra_scales;
  Domain domain = Domain::Automation;
  std::optional<Construct> construct = Construct::Situational;
  std::size_t top_domain = 9;
  std::size_t top_construct = 3;
  std::optional<std::filesystem::path> domain_lexicon;
  std::optional<std::filesystem::path> stoplist;
  std::optional<std::filesystem::path> pretrained;  // train GloVe when unset
  int window = 5;
  Weighting weighting = Weighting::InverseDistance;
  GloveConfig glove;
  Metric metric = Metric::Cosine;
  Linkage linkage = Linkage::Average;
  std::optional<std::size_t> k = 6;  // clamped to the vocabulary size
  std::optional<double> height;      // overrides k when set
  std::size_t top_terms = 5;
  std::optional<std::filesystem::path> templates;
  std::optional<std::filesystem::path> concepts;
  std::string prompt_set_id = "default";
};

/// Throws Error(InvalidArgument) describing the first invalid field.
void validate_config(const PipelineConfig& config);

/// A stage failure, tagged with the stage that raised it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::exception& cause);
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineResult {
  RankingReport ranking;
  PromptDatabase database;
  PreprocessedCorpus preprocessed;
  EmbeddingTable embeddings;
  std::vector<double> cost_history;
  Dendrogram dendrogram;
  FlatClustering clustering;
  std::vector<ClusterSummary> summaries;
  PromptSetBuild prompts;
};

/// Filter, rank, build the database, preprocess, embed, cluster, summarize
/// and formulate prompts. Writes the reports into `output_dir` when given.
PipelineResult run_pipeline(const PipelineConfig& config,
                            const std::optional<std::filesystem::path>& output_dir = std::nullopt);

/// File names written by run_pipeline.
inline constexpr const char* kPipelineOutputs[] = {"ranking.json", "vectors.txt", "dendrogram.tsv", "clusters.tsv",
                                                   "summary.json", "prompts.json", "rejected.json"};

}  // namespace trustconv
