#include "trustconv/survey_service.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "trustconv/error.hpp"

namespace trustconv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::int64_t wall_clock_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

void write_all(int fd, std::string_view data, const fs::path& path) {
  while (!data.empty()) {
    ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::Io, "write " + path.string() + ": " + std::strerror(errno));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

void append_durably(const fs::path& path, std::string_view data) {
  int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorCode::Io, "open " + path.string() + ": " + std::strerror(errno));
  try {
    write_all(fd, data, path);
    if (::fsync(fd) != 0) throw Error(ErrorCode::Io, "fsync " + path.string() + ": " + std::strerror(errno));
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
}

void sync_directory(const fs::path& dir) {
  int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

void replace_durably(const fs::path& path, std::string_view data) {
  fs::path tmp = path;
  tmp += ".tmp";
  fs::remove(tmp);
  append_durably(tmp, data);
  fs::rename(tmp, path);
  sync_directory(path.parent_path());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string records(const DialogSession& session, std::size_t from) {
  std::string out;
  const auto& turns = session.transcript();
  for (std::size_t i = from; i < turns.size(); ++i) out += turn_record(session.id(), i, turns[i]);
  return out;
}

}  // namespace

PromptSetRegistry default_registry() {
  PromptSetRegistry registry;
  registry.emplace("default", std::make_shared<const PromptSet>(default_prompt_set()));
  return registry;
}

fs::path resolve_data_dir(const fs::path& fallback) {
  const char* env = std::getenv("TRUSTCONV_DATA_DIR");
  if (env != nullptr && *env != '\0') return env;
  return fallback;
}

SessionStore::SessionStore(fs::path root, PromptSetRegistry registry, IntentLexicons lexicons, std::size_t max_turns,
                           Clock clock)
    : root_(std::move(root)),
      registry_(std::move(registry)),
      lexicons_(std::move(lexicons)),
      max_turns_(max_turns),
      clock_(clock ? std::move(clock) : Clock(wall_clock_ms)) {
  std::error_code ec;
  fs::create_directories(root_ / "sessions", ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + (root_ / "sessions").string() + ": " + ec.message());
  recover();
}

fs::path SessionStore::transcript_path(std::string_view session_id) const {
  return root_ / "sessions" / (std::string(session_id) + ".jsonl");
}

fs::path SessionStore::meta_path(std::string_view session_id) const {
  return root_ / "sessions" / (std::string(session_id) + ".meta.json");
}

std::string SessionStore::new_session_id() {
  static const char* hex = "0123456789abcdef";
  std::lock_guard lock(rng_mutex_);
  std::random_device device;
  std::string id;
  for (int word = 0; word < 4; ++word) {
    std::uint32_t bits = device();
    for (int nibble = 0; nibble < 8; ++nibble) {
      id.push_back(hex[bits & 0xF]);
      bits >>= 4;
    }
  }
  return id;
}

SessionDescriptor SessionStore::create_session(std::string_view prompt_set_id) {
  auto it = registry_.find(prompt_set_id);
  if (it == registry_.end()) {
    throw Error(ErrorCode::UnknownPromptSet, "unknown prompt set '" + std::string(prompt_set_id) + "'");
  }
  auto entry = std::make_shared<Entry>();
  entry->prompt_set_id = it->first;
  std::unique_lock map_lock(map_mutex_);
  std::string id;
  do {
    id = new_session_id();
  } while (sessions_.contains(id) || fs::exists(meta_path(id)));
  entry->session = std::make_unique<DialogSession>(id, it->second, lexicons_, max_turns_, clock_());

  json meta = {{"session_id", id}, {"prompt_set_id", entry->prompt_set_id}, {"max_turns", max_turns_}};
  replace_durably(meta_path(id), meta.dump() + "\n");
  append_durably(transcript_path(id), records(*entry->session, 0));
  sessions_.emplace(id, entry);
  return {id, entry->session->transcript().front().text, entry->session->phase()};
}

std::shared_ptr<SessionStore::Entry> SessionStore::find(std::string_view session_id) const {
  std::shared_lock lock(map_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "unknown session '" + std::string(session_id) + "'");
  return it->second;
}

PostResult SessionStore::post_message(std::string_view session_id, std::string_view text,
                                      std::optional<std::string> idempotency_key) {
  auto entry = find(session_id);
  std::lock_guard lock(entry->mutex);
  const auto& turns = entry->session->transcript();
  if (idempotency_key) {
    for (std::size_t i = 1; i + 1 < turns.size(); i += 2) {
      if (turns[i].idempotency_key == idempotency_key) {
        const Turn& reply = turns[i + 1];
        return {reply.text, reply.phase, reply.phase.kind == DialogPhase::Kind::Closed};
      }
    }
  }
  // Advance a copy so a failed write leaves the in-memory session untouched.
  auto next = std::make_unique<DialogSession>(*entry->session);
  std::size_t before = next->transcript().size();
  AdvanceResult result = next->advance(text, clock_(), std::move(idempotency_key));
  append_durably(transcript_path(session_id), records(*next, before));
  entry->session = std::move(next);
  return {result.reply, result.phase, result.complete};
}

std::vector<Turn> SessionStore::get_transcript(std::string_view session_id) const {
  auto entry = find(session_id);
  std::lock_guard lock(entry->mutex);
  return entry->session->transcript();
}

std::string SessionStore::get_transcript_jsonl(std::string_view session_id) const {
  auto entry = find(session_id);
  std::lock_guard lock(entry->mutex);
  return transcript_jsonl(*entry->session);
}

TrustIndicators SessionStore::get_indicators(std::string_view session_id) const {
  auto entry = find(session_id);
  std::lock_guard lock(entry->mutex);
  return extract_indicators(*entry->session);
}

DialogPhase SessionStore::phase(std::string_view session_id) const {
  auto entry = find(session_id);
  std::lock_guard lock(entry->mutex);
  return entry->session->phase();
}

std::vector<std::string> SessionStore::session_ids() const {
  std::shared_lock lock(map_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : sessions_) ids.push_back(id);
  return ids;
}

void SessionStore::recover() {
  std::vector<fs::path> metas;
  for (const auto& dirent : fs::directory_iterator(root_ / "sessions")) {
    std::string name = dirent.path().filename().string();
    if (name.ends_with(".meta.json")) metas.push_back(dirent.path());
  }
  std::sort(metas.begin(), metas.end());

  for (const fs::path& meta_file : metas) {
    std::string name = meta_file.filename().string();
    std::string id = name.substr(0, name.size() - std::string_view(".meta.json").size());
    try {
      json meta = json::parse(read_file(meta_file));
      std::string set_id = meta.at("prompt_set_id").get<std::string>();
      std::size_t max_turns = meta.value("max_turns", max_turns_);
      auto set = registry_.find(set_id);
      if (set == registry_.end()) throw Error(ErrorCode::UnknownPromptSet, "prompt set '" + set_id + "' not loaded");

      std::vector<Turn> turns;
      bool trimmed = false;
      fs::path path = transcript_path(id);
      std::string content = fs::exists(path) ? read_file(path) : std::string();
      std::istringstream lines(content);
      std::string line;
      std::vector<std::string> raw;
      while (std::getline(lines, line)) raw.push_back(line);
      bool last_complete = content.empty() || content.back() == '\n';
      for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i].empty()) continue;
        bool tail = i + 1 == raw.size();
        try {
          if (tail && !last_complete) throw Error(ErrorCode::MalformedRecord, "unterminated line");
          std::size_t index = 0;
          turns.push_back(parse_turn_record(raw[i], nullptr, &index));
          if (index != turns.size() - 1) throw Error(ErrorCode::MalformedRecord, "turn index out of sequence");
        } catch (const Error&) {
          if (!tail) throw;
          trimmed = true;  // torn final write
        }
      }
      if (turns.size() % 2 == 0 && !turns.empty()) {
        turns.pop_back();  // respondent turn whose reply never reached disk
        trimmed = true;
      }

      auto entry = std::make_shared<Entry>();
      entry->prompt_set_id = set_id;
      if (turns.empty()) {
        entry->session = std::make_unique<DialogSession>(id, set->second, lexicons_, max_turns, clock_());
        trimmed = true;
      } else {
        entry->session = std::make_unique<DialogSession>(
            DialogSession::replay(id, set->second, turns, lexicons_, max_turns));
      }
      if (trimmed) {
        replace_durably(path, transcript_jsonl(*entry->session));
        recovery_.repaired.push_back(id);
      }
      sessions_.emplace(id, std::move(entry));
      ++recovery_.sessions;
    } catch (const std::exception& e) {
      recovery_.skipped.push_back(id + ": " + e.what());
    }
  }
}

}  // namespace trustconv
