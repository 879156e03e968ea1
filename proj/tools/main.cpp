#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "trustconv/error.hpp"
#include "trustconv/pipeline.hpp"
#include "trustconv/survey_service.hpp"

namespace fs = std::filesystem;
using namespace trustconv;

namespace {

constexpr int kExitStage = 1;
constexpr int kExitConfig = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Enum, typename Parse>
Enum parse_enum(const std::string& text, Parse parse, const char* what) {
  auto value = parse(text);
  if (!value) throw ConfigError(std::string("unknown ") + what + " '" + text + "'");
  return *value;
}

struct SharedOptions {
  std::string corpus, extra, lexicon, stoplist, pretrained, templates, concepts;
  std::string domain = "automation";
  std::string construct = "situational";
  std::size_t top_domain = 9;
  std::size_t top_construct = 3;
  int window = 5;
  std::string weighting = "inverse-distance";
  std::size_t dim = 50;
  double x_max = 100.0;
  double alpha = 0.75;
  double lr = 0.05;
  int epochs = 50;
  std::uint64_t seed = 42;
  std::size_t threads = 1;
  std::string metric = "cosine";
  std::string linkage = "average";
  std::size_t k = 6;
  std::optional<double> height;
  std::size_t top_terms = 5;
};

void add_selection(CLI::App* cmd, SharedOptions& o) {
  cmd->add_option("--corpus", o.corpus, "Scale corpus JSON (bundled corpus when omitted)");
  cmd->add_option("--extra", o.extra, "Extra scales JSON appended to the prompt database");
  cmd->add_option("--domain", o.domain, "automation | e-commerce | human")->capture_default_str();
  cmd->add_option("--construct", o.construct, "dispositional | history-based | situational | none")
      ->capture_default_str();
  cmd->add_option("--top-domain", o.top_domain)->capture_default_str();
  cmd->add_option("--top-construct", o.top_construct)->capture_default_str();
  cmd->add_option("--lexicon", o.lexicon, "Domain lexicon word list");
  cmd->add_option("--stoplist", o.stoplist, "Stopword list");
}

void add_embedding(CLI::App* cmd, SharedOptions& o) {
  cmd->add_option("--pretrained", o.pretrained, "Pretrained vectors (`word v1 ... vd` lines)");
  cmd->add_option("--window", o.window)->capture_default_str();
  cmd->add_option("--weighting", o.weighting, "uniform | inverse-distance")->capture_default_str();
  cmd->add_option("--dim", o.dim)->capture_default_str();
  cmd->add_option("--xmax", o.x_max)->capture_default_str();
  cmd->add_option("--alpha", o.alpha)->capture_default_str();
  cmd->add_option("--lr", o.lr)->capture_default_str();
  cmd->add_option("--epochs", o.epochs)->capture_default_str();
  cmd->add_option("--seed", o.seed)->capture_default_str();
  cmd->add_option("--threads", o.threads)->capture_default_str();
}

void add_clustering(CLI::App* cmd, SharedOptions& o) {
  cmd->add_option("--metric", o.metric, "cosine | euclidean")->capture_default_str();
  cmd->add_option("--linkage", o.linkage, "single | complete | average | ward")->capture_default_str();
  auto* k = cmd->add_option("--k", o.k, "Number of clusters")->capture_default_str();
  cmd->add_option("--height", o.height, "Cut height (overrides --k)")->excludes(k);
}

void add_formulation(CLI::App* cmd, SharedOptions& o) {
  cmd->add_option("--top-terms", o.top_terms)->capture_default_str();
  cmd->add_option("--templates", o.templates, "Template bank JSON");
  cmd->add_option("--concepts", o.concepts, "Concept display table (stem<TAB>phrase)");
}

PipelineConfig make_config(const SharedOptions& o) {
  PipelineConfig c;
  auto path = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<fs::path>(s); };
  c.corpus = path(o.corpus);
  c.extra_scales = path(o.extra);
  c.domain_lexicon = path(o.lexicon);
  c.stoplist = path(o.stoplist);
  c.pretrained = path(o.pretrained);
  c.templates = path(o.templates);
  c.concepts = path(o.concepts);
  c.domain = parse_enum<Domain>(o.domain, parse_domain, "domain");
  c.construct = o.construct == "none" ? std::nullopt
                                      : std::optional(parse_enum<Construct>(o.construct, parse_construct, "construct"));
  c.top_domain = o.top_domain;
  c.top_construct = o.top_construct;
  c.window = o.window;
  c.weighting = parse_enum<Weighting>(o.weighting, parse_weighting, "weighting");
  c.glove = {o.dim, o.x_max, o.alpha, o.lr, o.epochs, o.seed, o.threads};
  c.metric = parse_enum<Metric>(o.metric, parse_metric, "metric");
  c.linkage = parse_enum<Linkage>(o.linkage, parse_linkage, "linkage");
  c.k = o.k;
  c.height = o.height;
  c.top_terms = o.top_terms;
  try {
    validate_config(c);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return c;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + out_path);
  out << content;
}

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trust-measurement prompt generation and conversational survey engine"};
  app.require_subcommand(1);
  SharedOptions o;
  std::string out;

  auto* ingest = app.add_subcommand("ingest", "Validate a scale corpus and write it back normalized");
  std::string ingest_path;
  ingest->add_option("corpus", ingest_path, "Scale corpus JSON")->required();
  ingest->add_option("--out", out, "Normalized corpus output");

  auto* rank = app.add_subcommand("rank", "Select and rank scales; writes the ranking report");
  add_selection(rank, o);
  rank->add_option("--out", out, "Ranking report (stdout when omitted)");

  auto* embed = app.add_subcommand("embed", "Train or load term embeddings for the selected scales");
  add_selection(embed, o);
  add_embedding(embed, o);
  std::string cooc_out, cost_out;
  embed->add_option("--out", out, "Vectors output (stdout when omitted)");
  embed->add_option("--cooccurrence", cooc_out, "Also write the co-occurrence triplets");
  embed->add_option("--cost-history", cost_out, "Also write the per-epoch cost");

  auto* cluster = app.add_subcommand("cluster", "Agglomerative clustering of term vectors");
  std::string vectors_in, dendrogram_out, clusters_out;
  cluster->add_option("--vectors", vectors_in, "Vectors file")->required();
  add_clustering(cluster, o);
  cluster->add_option("--dendrogram", dendrogram_out, "Dendrogram output");
  cluster->add_option("--out", out, "Flat clustering output (stdout when omitted)");

  auto* summarize = app.add_subcommand("summarize", "Pick a representative term per cluster");
  std::string clusters_in, weights_corpus;
  summarize->add_option("--vectors", vectors_in, "Vectors file")->required();
  summarize->add_option("--clusters", clusters_in, "Flat clustering file")->required();
  summarize->add_option("--top-terms", o.top_terms)->capture_default_str();
  summarize->add_option("--concepts", o.concepts, "Concept display table (stem<TAB>phrase)");
  summarize->add_option("--out", out, "Summary report (stdout when omitted)");

  auto* prompts = app.add_subcommand("prompts", "Run every stage and write the prompt set");
  add_selection(prompts, o);
  add_embedding(prompts, o);
  add_clustering(prompts, o);
  add_formulation(prompts, o);
  prompts->add_option("--out", out, "Prompt set output (stdout when omitted)");

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage and write all reports");
  add_selection(pipeline, o);
  add_embedding(pipeline, o);
  add_clustering(pipeline, o);
  add_formulation(pipeline, o);
  std::string out_dir = "trustconv-out";
  pipeline->add_option("--out-dir", out_dir)->capture_default_str();

  auto* chat = app.add_subcommand("chat", "Terminal conversation against an in-process session");
  std::string prompt_set_path;
  std::size_t max_turns = kDefaultMaxTurns;
  chat->add_option("--prompt-set", prompt_set_path, "Prompt set JSON (bundled default when omitted)");
  chat->add_option("--max-turns", max_turns)->capture_default_str();

  auto* serve = app.add_subcommand("serve", "HTTP session service");
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string data_dir = "trustconv-data";
  std::vector<std::string> extra_sets;
  serve->add_option("--port", port, "0 picks a free port")->capture_default_str();
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--data-dir", data_dir, "Persistence root (TRUSTCONV_DATA_DIR overrides)")->capture_default_str();
  serve->add_option("--prompt-set", extra_sets, "Additional prompt set JSON files, registered by their id");
  serve->add_option("--max-turns", max_turns)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*ingest) {
      ScaleCorpus corpus = load_corpus(ingest_path);
      auto violations = validate_corpus(corpus);
      for (const Violation& v : violations) std::cerr << v.scale_id << "\t" << v.field << "\t" << v.rule << "\n";
      std::size_t items = 0;
      for (const Scale& s : corpus.scales) items += s.items.size();
      std::cerr << corpus.scales.size() << " scales, " << items << " items, " << violations.size()
                << " violations\n";
      if (!out.empty()) emit(out, serialize_corpus(corpus));
      return violations.empty() ? 0 : kExitStage;
    }
    if (*rank) {
      PipelineConfig c = make_config(o);
      ScaleCorpus corpus = c.corpus ? load_corpus(*c.corpus) : bundled_corpus();
      DomainLexicon lexicon = c.domain_lexicon ? load_domain_lexicon(c.domain, *c.domain_lexicon)
                                               : bundled_domain_lexicon(c.domain);
      WordSet stoplist = c.stoplist ? load_word_list(*c.stoplist) : default_stoplist();
      RankingReport report = select_scales(corpus, {c.domain, c.construct, c.top_domain, c.top_construct}, lexicon,
                                           stoplist);
      emit(out, ranking_report_json(report));
      return 0;
    }
    if (*embed) {
      PipelineConfig c = make_config(o);
      ScaleCorpus corpus = c.corpus ? load_corpus(*c.corpus) : bundled_corpus();
      std::vector<Scale> extra = c.extra_scales ? load_corpus(*c.extra_scales).scales : std::vector<Scale>{};
      DomainLexicon lexicon = c.domain_lexicon ? load_domain_lexicon(c.domain, *c.domain_lexicon)
                                               : bundled_domain_lexicon(c.domain);
      WordSet stoplist = c.stoplist ? load_word_list(*c.stoplist) : default_stoplist();
      RankingReport report = select_scales(corpus, {c.domain, c.construct, c.top_domain, c.top_construct}, lexicon,
                                           stoplist);
      PromptDatabase db = build_prompt_database(report.domain_track, report.construct_track, corpus, extra);
      PreprocessedCorpus pre = preprocess_corpus(db, stoplist);
      CooccurrenceMatrix matrix = build_cooccurrence(pre.streams, c.window, c.weighting);
      if (!cooc_out.empty()) {
        std::ostringstream s;
        write_cooccurrence(matrix, s);
        emit(cooc_out, s.str());
      }
      std::vector<double> history;
      EmbeddingTable table;
      if (c.pretrained) {
        EmbeddingTable source = load_vectors(*c.pretrained);
        table = EmbeddingTable(source.dim());
        for (const auto& [stem, _] : pre.bag.counts) {
          auto surface = pre.display_forms.find(stem);
          if (surface != pre.display_forms.end() && source.contains(surface->second)) {
            table.insert_or_assign(stem, source.vector(surface->second));
          } else if (source.contains(stem)) {
            table.insert_or_assign(stem, source.vector(stem));
          }
        }
      } else {
        table = train_glove(matrix, c.glove, &history);
      }
      if (!cost_out.empty()) {
        std::ostringstream s;
        s.precision(17);
        for (std::size_t i = 0; i < history.size(); ++i) s << i << "\t" << history[i] << "\n";
        emit(cost_out, s.str());
      }
      std::ostringstream s;
      write_vectors(table, s);
      emit(out, s.str());
      return 0;
    }
    if (*cluster) {
      Metric metric = parse_enum<Metric>(o.metric, parse_metric, "metric");
      Linkage linkage = parse_enum<Linkage>(o.linkage, parse_linkage, "linkage");
      EmbeddingTable table = load_vectors(vectors_in);
      std::vector<std::string> words = table.words();
      std::sort(words.begin(), words.end());
      Dendrogram tree = agglomerate(distance_matrix(table, words, metric), linkage);
      TreeCut cut = o.height ? TreeCut::at_height(*o.height) : TreeCut::into(std::min(o.k, words.size()));
      FlatClustering flat = cut_tree(tree, cut);
      if (!dendrogram_out.empty()) {
        std::ostringstream s;
        write_dendrogram(tree, s);
        emit(dendrogram_out, s.str());
      }
      std::ostringstream s;
      write_flat_clustering(flat, s);
      emit(out, s.str());
      return 0;
    }
    if (*summarize) {
      EmbeddingTable table = load_vectors(vectors_in);
      std::ifstream in(clusters_in);
      if (!in) throw Error(ErrorCode::Io, "cannot read " + clusters_in);
      FlatClustering flat = read_flat_clustering(in);
      ConceptDisplay concepts = o.concepts.empty() ? bundled_concept_display() : parse_concept_display(read_all(o.concepts));
      auto summaries = summarize_cut(flat, table, concept_terms(concepts), {}, o.top_terms);
      emit(out, summary_report_json(summaries));
      return 0;
    }
    if (*prompts) {
      PipelineResult r = run_pipeline(make_config(o));
      for (const RejectedPrompt& rej : r.prompts.rejected) {
        std::cerr << "rejected " << rej.provenance << ": " << rej.text << "\n";
      }
      emit(out, prompt_set_json(r.prompts.set));
      return 0;
    }
    if (*pipeline) {
      PipelineResult r = run_pipeline(make_config(o), fs::path(out_dir));
      std::cerr << "wrote";
      for (const char* name : kPipelineOutputs) std::cerr << " " << (fs::path(out_dir) / name).string();
      std::cerr << "\n" << r.prompts.set.at_level(PromptLevel::Conceptual).size() << " conceptual prompts, "
                << r.prompts.rejected.size() << " rejected\n";
      return 0;
    }
    if (*chat) {
      auto set = std::make_shared<const PromptSet>(prompt_set_path.empty() ? default_prompt_set()
                                                                           : load_prompt_set(prompt_set_path));
      DialogSession session("terminal", set, bundled_intent_lexicons(), max_turns);
      std::cout << "agent> " << session.transcript().front().text << std::endl;
      std::string line;
      while (!session.closed()) {
        std::cout << "you> " << std::flush;
        if (!std::getline(std::cin, line)) break;
        AdvanceResult r = session.advance(line);
        std::cout << "agent> " << r.reply << "  [" << to_string(r.phase) << "]" << std::endl;
      }
      std::cout << indicators_json(extract_indicators(session)) << std::endl;
      return 0;
    }
    if (*serve) {
      PromptSetRegistry registry = default_registry();
      for (const std::string& path : extra_sets) {
        PromptSet set = load_prompt_set(path);
        std::string id = set.id;
        registry[id] = std::make_shared<const PromptSet>(std::move(set));
      }
      SessionStore store(resolve_data_dir(data_dir), std::move(registry), bundled_intent_lexicons(), max_turns);
      for (const std::string& s : store.recovery().skipped) std::cerr << "skipped session " << s << "\n";
      HttpServer server(store);
      int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on " << host << ":" << bound << " (" << store.recovery().sessions
                << " sessions recovered)" << std::endl;
      server.listen();
      g_server = nullptr;
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.stage() == "config" ? kExitConfig : kExitStage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  }
  return 0;
}
