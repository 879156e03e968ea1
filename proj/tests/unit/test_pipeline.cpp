#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "trustconv/error.hpp"
#include "trustconv/pipeline.hpp"

using namespace trustconv;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  std::random_device rd;
  fs::path p = fs::temp_directory_path() / ("trustconv_" + tag + "_" + std::to_string(rd()));
  fs::create_directories(p);
  return p;
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(TRUSTCONV_CLI) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("default pipeline produces a lint-clean prompt set") {
  PipelineResult r = run_pipeline(PipelineConfig{});
  CHECK(r.prompts.set.at_level(PromptLevel::Conceptual).size() >= 3);
  CHECK(check_prompt_set(r.prompts.set, bundled_valence_lexicon()).empty());
  CHECK(r.cost_history.size() == 51);
  CHECK(r.clustering.k == 6);
  std::set<std::size_t> clusters;
  for (const auto& s : r.summaries) clusters.insert(s.cluster_id);
  for (const Prompt* p : r.prompts.set.at_level(PromptLevel::Conceptual)) {
    REQUIRE(p->provenance.rfind("cluster:", 0) == 0);
    CHECK(clusters.contains(std::stoul(p->provenance.substr(8))));
  }
}

TEST_CASE("pipeline outputs are byte-identical for a fixed seed") {
  fs::path a = temp_dir("pa"), b = temp_dir("pb");
  run_pipeline(PipelineConfig{}, a);
  run_pipeline(PipelineConfig{}, b);
  for (const char* name : kPipelineOutputs) {
    CAPTURE(name);
    CHECK(fs::exists(a / name));
    CHECK(read(a / name) == read(b / name));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("stage errors carry the stage name") {
  fs::path dir = temp_dir("nostage");
  fs::path corpus = dir / "humans.json";
  save_corpus(filter_scales(bundled_corpus(), Domain::Human, std::nullopt), corpus);
  PipelineConfig c;
  c.corpus = corpus;
  try {
    run_pipeline(c);
    FAIL("expected an error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "filter");
    CHECK(std::string(e.what()).find("EmptySelection") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("config validation") {
  PipelineConfig c;
  c.corpus = "/nonexistent/corpus.json";
  CHECK_THROWS_AS(validate_config(c), Error);
  c = {};
  c.linkage = Linkage::Ward;
  CHECK_THROWS_AS(validate_config(c), Error);
  c.metric = Metric::Euclidean;
  CHECK_NOTHROW(validate_config(c));
  c = {};
  c.k.reset();
  CHECK_THROWS_AS(validate_config(c), Error);
  c.height = 0.5;
  CHECK_NOTHROW(validate_config(c));
}

TEST_CASE("pretrained vectors drive the pipeline") {
  fs::path dir = temp_dir("pre");
  PipelineResult trained = run_pipeline(PipelineConfig{});
  {
    // Key some rows by surface form to exercise the surface-then-stem lookup.
    std::ofstream out(dir / "vectors.txt");
    for (const auto& w : trained.embeddings.words()) {
      auto it = trained.preprocessed.display_forms.find(w);
      out << (it != trained.preprocessed.display_forms.end() && w.size() % 2 ? it->second : w);
      for (double x : trained.embeddings.vector(w)) out << ' ' << x;
      out << '\n';
    }
  }
  PipelineConfig c;
  c.pretrained = dir / "vectors.txt";
  PipelineResult r = run_pipeline(c);
  CHECK(r.embeddings.size() == trained.embeddings.size());
  CHECK(r.cost_history.empty());
  fs::remove_all(dir);
}

TEST_CASE("command-line exit codes") {
  fs::path dir = temp_dir("cli");
  CHECK(run_cli("pipeline --out-dir " + (dir / "out").string()) == 0);
  CHECK(fs::exists(dir / "out" / "prompts.json"));
  CHECK(run_cli("rank --out " + (dir / "rank.json").string()) == 0);
  CHECK(run_cli("rank --domain robots") == 2);
  CHECK(run_cli("pipeline --epochs nope") == 2);
  CHECK(run_cli("pipeline --linkage ward") == 2);
  CHECK(run_cli("frobnicate") == 2);

  save_corpus(filter_scales(bundled_corpus(), Domain::Human, std::nullopt), dir / "humans.json");
  CHECK(run_cli("pipeline --corpus " + (dir / "humans.json").string() + " --out-dir " + (dir / "o2").string()) == 1);

  CHECK(run_cli("embed --epochs 5 --dim 8 --out " + (dir / "v.txt").string()) == 0);
  CHECK(run_cli("cluster --vectors " + (dir / "v.txt").string() + " --k 3 --dendrogram " +
                (dir / "d.tsv").string() + " --out " + (dir / "c.tsv").string()) == 0);
  CHECK(run_cli("summarize --vectors " + (dir / "v.txt").string() + " --clusters " + (dir / "c.tsv").string() +
                " --out " + (dir / "s.json").string()) == 0);
  CHECK(run_cli("prompts --out " + (dir / "p.json").string()) == 0);
  CHECK(parse_prompt_set(read(dir / "p.json")) == parse_prompt_set(read(dir / "out" / "prompts.json")));

  fs::path corpus = dir / "c.json";
  save_corpus(bundled_corpus(), corpus);
  CHECK(run_cli("ingest " + corpus.string()) == 0);
  std::ofstream(dir / "empty.json") << "";
  CHECK(run_cli("ingest " + (dir / "empty.json").string()) == 1);

  std::string chat = "printf \"I don't really like it\\nok\\n\" | " + std::string(TRUSTCONV_CLI) + " chat > " +
                     (dir / "chat.txt").string() + " 2>&1";
  CHECK(std::system(chat.c_str()) == 0);
  CHECK(read(dir / "chat.txt").find("Can you tell me your thoughts on system performance?") != std::string::npos);
  fs::remove_all(dir);
}
