#include "trustconv/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "trustconv/error.hpp"
#include "trustconv/textprep.hpp"

namespace trustconv {

namespace fs = std::filesystem;

StageError::StageError(std::string stage, const std::exception& cause)
    : std::runtime_error("stage '" + stage + "': " + cause.what()), stage_(std::move(stage)) {}

void validate_config(const PipelineConfig& config) {
  auto require_file = [](const std::optional<fs::path>& path, const char* what) {
    if (path && !fs::is_regular_file(*path)) {
      throw Error(ErrorCode::InvalidArgument, std::string(what) + " not found: " + path->string());
    }
  };
  require_file(config.corpus, "corpus");
  require_file(config.extra_scales, "extra scales");
  require_file(config.domain_lexicon, "domain lexicon");
  require_file(config.stoplist, "stoplist");
  require_file(config.pretrained, "pretrained vectors");
  require_file(config.templates, "template bank");
  require_file(config.concepts, "concept table");
  if (config.top_domain == 0 || config.top_construct == 0) {
    throw Error(ErrorCode::InvalidArgument, "top-n values must be positive");
  }
  if (config.window < 1) throw Error(ErrorCode::InvalidArgument, "window must be at least 1");
  if (config.glove.dim == 0 || config.glove.epochs < 0 || !(config.glove.x_max > 0) || !(config.glove.alpha > 0) ||
      !(config.glove.learning_rate > 0) || config.glove.threads == 0) {
    throw Error(ErrorCode::InvalidArgument, "invalid embedding hyperparameters");
  }
  if (config.height) {
    if (!std::isfinite(*config.height) || *config.height < 0) {
      throw Error(ErrorCode::InvalidArgument, "cut height must be finite and non-negative");
    }
  } else if (!config.k || *config.k == 0) {
    throw Error(ErrorCode::InvalidArgument, "a positive k or a cut height is required");
  }
  if (config.linkage == Linkage::Ward && config.metric == Metric::Cosine) {
    throw Error(ErrorCode::InvalidArgument, "ward linkage requires the euclidean metric");
  }
  if (config.top_terms == 0) throw Error(ErrorCode::InvalidArgument, "top_terms must be positive");
}

namespace {

template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e);
  }
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

EmbeddingTable pretrained_for(const EmbeddingTable& source, const PreprocessedCorpus& pre) {
  EmbeddingTable table(source.dim());
  for (const auto& [stem, _] : pre.bag.counts) {
    auto surface = pre.display_forms.find(stem);
    if (surface != pre.display_forms.end() && source.contains(surface->second)) {
      table.insert_or_assign(stem, source.vector(surface->second));
    } else if (source.contains(stem)) {
      table.insert_or_assign(stem, source.vector(stem));
    }
  }
  if (table.size() < 2) throw Error(ErrorCode::EmptyInput, "fewer than two corpus terms have pretrained vectors");
  return table;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config, const std::optional<fs::path>& output_dir) {
  stage("config", [&] {
    validate_config(config);
    return 0;
  });
  PipelineResult result;

  ScaleCorpus corpus = stage("ingest", [&] { return config.corpus ? load_corpus(*config.corpus) : bundled_corpus(); });
  std::vector<Scale> extra = stage("ingest", [&] {
    return config.extra_scales ? load_corpus(*config.extra_scales).scales : std::vector<Scale>{};
  });
  WordSet stoplist = stage("ingest", [&] { return config.stoplist ? load_word_list(*config.stoplist) : default_stoplist(); });

  stage("filter", [&] {
    if (filter_scales(corpus, config.domain, std::nullopt).scales.empty()) {
      throw Error(ErrorCode::EmptySelection, "no scale in domain " + std::string(to_string(config.domain)));
    }
    return 0;
  });

  result.ranking = stage("rank", [&] {
    DomainLexicon lexicon = config.domain_lexicon ? load_domain_lexicon(config.domain, *config.domain_lexicon)
                                                  : bundled_domain_lexicon(config.domain);
    SelectionOptions options{config.domain, config.construct, config.top_domain, config.top_construct};
    return select_scales(corpus, options, lexicon, stoplist);
  });

  result.database = stage("database", [&] {
    return build_prompt_database(result.ranking.domain_track, result.ranking.construct_track, corpus, extra);
  });

  result.preprocessed = stage("preprocess", [&] { return preprocess_corpus(result.database, stoplist); });

  result.embeddings = stage("embed", [&] {
    if (config.pretrained) return pretrained_for(load_vectors(*config.pretrained), result.preprocessed);
    CooccurrenceMatrix matrix = build_cooccurrence(result.preprocessed.streams, config.window, config.weighting);
    return train_glove(matrix, config.glove, &result.cost_history);
  });

  stage("cluster", [&] {
    std::vector<std::string> words = result.embeddings.words();
    std::sort(words.begin(), words.end());
    DistanceMatrix dist = distance_matrix(result.embeddings, words, config.metric);
    result.dendrogram = agglomerate(dist, config.linkage);
    TreeCut cut = config.height ? TreeCut::at_height(*config.height) : TreeCut::into(std::min(*config.k, words.size()));
    result.clustering = cut_tree(result.dendrogram, cut);
    return 0;
  });

  ConceptDisplay concepts = stage("summarize", [&] {
    return config.concepts ? parse_concept_display([&] {
      std::ifstream in(*config.concepts);
      std::stringstream buffer;
      buffer << in.rdbuf();
      return buffer.str();
    }())
                           : bundled_concept_display();
  });

  result.summaries = stage("summarize", [&] {
    TermWeights weights;
    for (const auto& [stem, count] : result.preprocessed.bag.counts) weights[stem] = static_cast<double>(count);
    std::vector<std::string> concept_lexicon = concept_terms(concepts);
    return summarize_cut(result.clustering, result.embeddings, concept_lexicon, weights, config.top_terms);
  });

  result.prompts = stage("formulate", [&] {
    TemplateBank bank = config.templates ? load_template_bank(*config.templates) : bundled_template_bank();
    PromptSetOptions options;
    options.id = config.prompt_set_id;
    return build_prompt_set(result.summaries, bank, result.database.items, bundled_valence_lexicon(), concepts,
                            result.preprocessed.display_forms, options);
  });

  if (output_dir) {
    stage("write", [&] {
      fs::create_directories(*output_dir);
      write_text(*output_dir / "ranking.json", ranking_report_json(result.ranking));
      std::ostringstream vectors;
      write_vectors(result.embeddings, vectors);
      write_text(*output_dir / "vectors.txt", vectors.str());
      std::ostringstream dendrogram;
      write_dendrogram(result.dendrogram, dendrogram);
      write_text(*output_dir / "dendrogram.tsv", dendrogram.str());
      std::ostringstream clusters;
      write_flat_clustering(result.clustering, clusters);
      write_text(*output_dir / "clusters.tsv", clusters.str());
      write_text(*output_dir / "summary.json", summary_report_json(result.summaries));
      write_text(*output_dir / "prompts.json", prompt_set_json(result.prompts.set));
      write_text(*output_dir / "rejected.json", rejected_prompts_json(result.prompts.rejected));
      return 0;
    });
  }
  return result;
}

}  // namespace trustconv
