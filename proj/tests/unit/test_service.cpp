#include <functional>
#include <doctest.h>

#include <httplib.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>
#include <thread>

#include "trustconv/error.hpp"
#include "trustconv/survey_service.hpp"

using namespace trustconv;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("trustconv_store_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("create sessions") {
  TempDir dir;
  SessionStore store(dir.path);
  auto a = store.create_session();
  auto b = store.create_session("default");
  CHECK(a.session_id.size() == 32);
  CHECK(a.session_id.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(a.session_id != b.session_id);
  CHECK(a.prompt == "Can you describe your recent experience interacting with the system?");
  CHECK(a.phase == DialogPhase::opening());
  CHECK(store.get_transcript(a.session_id).size() == 1);
  CHECK(code_of([&] { store.create_session("nope"); }) == ErrorCode::UnknownPromptSet);
  CHECK(code_of([&] { store.get_transcript("ffff"); }) == ErrorCode::UnknownSession);
  CHECK(code_of([&] { store.get_indicators("ffff"); }) == ErrorCode::UnknownSession);
  CHECK(code_of([&] { store.post_message("ffff", "hi"); }) == ErrorCode::UnknownSession);
}

TEST_CASE("post messages, persistence and idempotency") {
  TempDir dir;
  SessionStore store(dir.path);
  auto d = store.create_session();
  auto r = store.post_message(d.session_id, "I don't really like it");
  CHECK(r.agent_reply == "Can you explain what makes you dislike it?");
  CHECK(r.phase == DialogPhase::opening_followup());
  CHECK_FALSE(r.session_complete);

  auto k1 = store.post_message(d.session_id, "It makes mistakes", std::string("key-1"));
  CHECK(k1.agent_reply == "Can you tell me your thoughts on system performance?");
  CHECK(store.get_transcript(d.session_id).size() == 5);
  std::string before = read(dir.path / "sessions" / (d.session_id + ".jsonl"));
  auto k2 = store.post_message(d.session_id, "It makes mistakes", std::string("key-1"));
  CHECK(k2.agent_reply == k1.agent_reply);
  CHECK(k2.phase == k1.phase);
  CHECK(store.get_transcript(d.session_id).size() == 5);
  CHECK(read(dir.path / "sessions" / (d.session_id + ".jsonl")) == before);
  CHECK(before == store.get_transcript_jsonl(d.session_id));

  auto ind = store.get_indicators(d.session_id);
  CHECK(ind.turn_count == 2);
  CHECK(ind.ending == Ending::Abandoned);
  CHECK_FALSE(ind.complete);

  while (!store.post_message(d.session_id, "ok").session_complete) {
  }
  CHECK(store.get_indicators(d.session_id).ending == Ending::Completed);
  CHECK(code_of([&] { store.post_message(d.session_id, "more"); }) == ErrorCode::SessionClosed);
}

TEST_CASE("reloading the root restores every session") {
  TempDir dir;
  std::vector<std::pair<std::string, DialogPhase>> expected;
  {
    SessionStore store(dir.path);
    for (int i = 0; i < 4; ++i) {
      auto d = store.create_session();
      for (int j = 0; j < i; ++j) store.post_message(d.session_id, j % 2 ? "hmm" : "I like it");
      expected.emplace_back(d.session_id, store.phase(d.session_id));
    }
  }
  SessionStore again(dir.path);
  CHECK(again.recovery().sessions == 4);
  CHECK(again.recovery().skipped.empty());
  for (const auto& [id, phase] : expected) CHECK(again.phase(id) == phase);
}

TEST_CASE("recovery trims a torn tail") {
  TempDir dir;
  std::string id;
  std::string intact;
  {
    SessionStore store(dir.path);
    id = store.create_session().session_id;
    store.post_message(id, "I don't really like it");
    intact = store.get_transcript_jsonl(id);
  }
  fs::path file = dir.path / "sessions" / (id + ".jsonl");
  {
    std::ofstream out(file, std::ios::app | std::ios::binary);
    out << R"({"session_id":")" << id << R"(","index":3,"speaker":"Respondent","text":"half)";
  }
  SessionStore again(dir.path);
  CHECK(again.phase(id) == DialogPhase::opening_followup());
  CHECK(again.recovery().repaired == std::vector<std::string>{id});
  CHECK(read(file) == intact);

  // An answered respondent turn with no agent reply on disk is dropped too.
  {
    std::ofstream out(file, std::ios::app | std::ios::binary);
    Turn t{Speaker::Respondent, "hmm", 1, Intent{IntentLabel::Unclear, 0}, DialogPhase::opening_followup(), "", {}};
    out << turn_record(id, 3, t);
  }
  SessionStore third(dir.path);
  CHECK(third.get_transcript(id).size() == 3);
  CHECK(read(file) == intact);
}

TEST_CASE("concurrent sessions keep their transcripts separate") {
  TempDir dir;
  SessionStore store(dir.path);
  std::vector<std::string> ids;
  for (int i = 0; i < 8; ++i) ids.push_back(store.create_session().session_id);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&, i] {
      for (int j = 0; j < 3; ++j) store.post_message(ids[i], "reply " + std::to_string(i) + " " + std::to_string(j));
    });
  }
  for (auto& t : threads) t.join();
  for (int i = 0; i < 8; ++i) {
    auto turns = store.get_transcript(ids[i]);
    CHECK(turns.size() == 7);
    for (std::size_t k = 0; k < turns.size(); ++k) {
      CHECK(turns[k].speaker == (k % 2 == 0 ? Speaker::Agent : Speaker::Respondent));
      if (k % 2 == 1) CHECK(turns[k].text.rfind("reply " + std::to_string(i) + " ", 0) == 0);
    }
  }
}

TEST_CASE("http endpoints") {
  TempDir dir;
  SessionStore store(dir.path);
  HttpServer server(store);
  int port = server.bind("127.0.0.1", 0);
  std::thread loop([&] { server.listen(); });
  httplib::Client cli("127.0.0.1", port);
  for (int i = 0; i < 100 && !cli.Get("/health"); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(10));

  auto health = cli.Get("/health");
  REQUIRE(health);
  CHECK(health->status == 200);

  auto created = cli.Post("/sessions", "{}", "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  CHECK(created->get_header_value("Access-Control-Allow-Origin") == "*");
  json c = json::parse(created->body);
  std::string id = c["session_id"];
  CHECK(c["prompt"] == "Can you describe your recent experience interacting with the system?");
  CHECK(c["phase"] == "Opening");

  auto msg = cli.Post("/sessions/" + id + "/messages", R"({"text":"I don't really like it"})", "application/json");
  REQUIRE(msg);
  CHECK(msg->status == 200);
  CHECK(msg->body ==
        R"({"agent_reply":"Can you explain what makes you dislike it?","phase":"OpeningFollowUp","session_complete":false})");

  auto transcript = cli.Get("/sessions/" + id + "/transcript");
  REQUIRE(transcript);
  json t = json::parse(transcript->body);
  CHECK(t["turns"].size() == 3);
  CHECK(t["turns"][1]["intent"] == "Negative");

  auto ind = cli.Get("/sessions/" + id + "/indicators");
  REQUIRE(ind);
  CHECK(json::parse(ind->body)["turn_count"] == 1);

  CHECK(cli.Get("/sessions/0000/transcript")->status == 404);
  CHECK(cli.Post("/sessions", R"({"prompt_set_id":"zzz"})", "application/json")->status == 404);
  CHECK(cli.Post("/sessions/" + id + "/messages", "not json", "application/json")->status == 400);
  CHECK(cli.Post("/sessions/" + id + "/messages", R"({"txt":1})", "application/json")->status == 400);

  while (true) {
    auto r = cli.Post("/sessions/" + id + "/messages", R"({"text":"ok"})", "application/json");
    if (json::parse(r->body)["session_complete"] == true) break;
  }
  CHECK(cli.Post("/sessions/" + id + "/messages", R"({"text":"ok"})", "application/json")->status == 409);

  server.stop();
  loop.join();
}

TEST_CASE("data directory override") {
  ::setenv("TRUSTCONV_DATA_DIR", "/tmp/override-root", 1);
  CHECK(resolve_data_dir("fallback") == fs::path("/tmp/override-root"));
  ::unsetenv("TRUSTCONV_DATA_DIR");
  CHECK(resolve_data_dir("fallback") == fs::path("fallback"));
}
