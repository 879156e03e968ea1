#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "trustconv/dialog.hpp"

namespace trustconv {

using PromptSetRegistry = std::map<std::string, std::shared_ptr<const PromptSet>, std::less<>>;

/// Registry holding only the bundled default set under "default".
PromptSetRegistry default_registry();

struct SessionDescriptor {
  std::string session_id;
  std::string prompt;
  DialogPhase phase;
};

struct PostResult {
  std::string agent_reply;
  DialogPhase phase;
  bool session_complete = false;
};

struct RecoveryReport {
  std::size_t sessions = 0;
  std::vector<std::string> repaired;  // transcripts trimmed of a torn or unanswered tail
  std::vector<std::string> skipped;   // "<id>: reason"
};

/// Sessions backed by one append-only JSONL transcript per session under
/// `<root>/sessions`. Every mutation is written and fsynced before the call
/// returns; constructing a store over an existing root replays those files.
class SessionStore {
 public:
  using Clock = std::function<std::int64_t()>;

  SessionStore(std::filesystem::path root, PromptSetRegistry registry = default_registry(),
               IntentLexicons lexicons = bundled_intent_lexicons(), std::size_t max_turns = kDefaultMaxTurns,
               Clock clock = {});

  /// Throws UnknownPromptSet.
  SessionDescriptor create_session(std::string_view prompt_set_id = "default");
  /// A repeated idempotency key returns the reply stored for it without
  /// touching the transcript. Throws UnknownSession or SessionClosed.
  PostResult post_message(std::string_view session_id, std::string_view text,
                          std::optional<std::string> idempotency_key = std::nullopt);
  std::vector<Turn> get_transcript(std::string_view session_id) const;
  std::string get_transcript_jsonl(std::string_view session_id) const;
  TrustIndicators get_indicators(std::string_view session_id) const;
  DialogPhase phase(std::string_view session_id) const;
  std::vector<std::string> session_ids() const;

  const std::filesystem::path& root() const { return root_; }
  const RecoveryReport& recovery() const { return recovery_; }

 private:
  struct Entry {
    std::string prompt_set_id;
    std::mutex mutex;
    std::unique_ptr<DialogSession> session;
  };

  std::shared_ptr<Entry> find(std::string_view session_id) const;
  std::filesystem::path transcript_path(std::string_view session_id) const;
  std::filesystem::path meta_path(std::string_view session_id) const;
  std::string new_session_id();
  void recover();

  std::filesystem::path root_;
  PromptSetRegistry registry_;
  IntentLexicons lexicons_;
  std::size_t max_turns_;
  Clock clock_;
  RecoveryReport recovery_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Entry>, std::less<>> sessions_;
  std::mutex rng_mutex_;
};

/// Persistence root: TRUSTCONV_DATA_DIR when set, else `fallback`.
std::filesystem::path resolve_data_dir(const std::filesystem::path& fallback);

/// JSON-over-HTTP front end for a SessionStore.
class HttpServer {
 public:
  explicit HttpServer(SessionStore& store);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds and returns the port; port 0 picks a free one. Throws Io.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace trustconv
