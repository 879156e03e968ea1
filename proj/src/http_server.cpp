#include <httplib.h>

#include <json.hpp>

#include "trustconv/error.hpp"
#include "trustconv/survey_service.hpp"

namespace trustconv {

using nlohmann::json;

struct HttpServer::Impl {
  SessionStore& store;
  httplib::Server server;
  explicit Impl(SessionStore& s) : store(s) {}
};

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownPromptSet: return 404;
    case ErrorCode::SessionClosed: return 409;
    case ErrorCode::InvalidArgument:
    case ErrorCode::MalformedRecord: return 400;
    default: return 500;
  }
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, {{"error", code}, {"message", message}});
}

template <typename Handler>
void guarded(httplib::Response& res, Handler&& handler) {
  try {
    handler();
  } catch (const Error& e) {
    send_error(res, status_for(e.code()), to_string(e.code()), e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, "BadRequest", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "Internal", e.what());
  }
}

json parse_body(const httplib::Request& req) {
  if (req.body.find_first_not_of(" \t\r\n") == std::string::npos) return json::object();
  json body = json::parse(req.body);
  if (!body.is_object()) throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
  return body;
}

json turn_json(std::size_t index, const Turn& turn) {
  json out = {{"index", index},
              {"speaker", to_string(turn.speaker)},
              {"text", turn.text},
              {"phase", to_string(turn.phase)},
              {"intent", nullptr},
              {"timestamp", turn.timestamp_ms}};
  if (turn.intent) {
    out["intent"] = to_string(turn.intent->label);
    out["intent_score"] = turn.intent->score;
  }
  if (!turn.provenance.empty()) out["provenance"] = turn.provenance;
  return out;
}

}  // namespace

HttpServer::HttpServer(SessionStore& store) : impl_(std::make_unique<Impl>(store)) {
  auto& server = impl_->server;
  SessionStore& s = impl_->store;

  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}});
  });

  server.Post("/sessions", [&s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json body = parse_body(req);
      std::string set_id = body.value("prompt_set_id", std::string("default"));
      SessionDescriptor d = s.create_session(set_id);
      send_json(res, 201, {{"session_id", d.session_id}, {"prompt", d.prompt}, {"phase", to_string(d.phase)}});
    });
  });

  server.Post(R"(/sessions/([0-9A-Za-z]+)/messages)", [&s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json body = parse_body(req);
      if (!body.contains("text") || !body["text"].is_string()) {
        throw Error(ErrorCode::InvalidArgument, "field 'text' must be a string");
      }
      std::optional<std::string> key;
      if (body.contains("idempotency_key") && !body["idempotency_key"].is_null()) {
        key = body["idempotency_key"].get<std::string>();
      }
      PostResult r = s.post_message(req.matches[1].str(), body["text"].get<std::string>(), std::move(key));
      send_json(res, 200,
                {{"agent_reply", r.agent_reply}, {"phase", to_string(r.phase)}, {"session_complete", r.session_complete}});
    });
  });

  server.Get(R"(/sessions/([0-9A-Za-z]+)/transcript)", [&s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::string id = req.matches[1].str();
      std::vector<Turn> turns = s.get_transcript(id);
      json list = json::array();
      for (std::size_t i = 0; i < turns.size(); ++i) list.push_back(turn_json(i, turns[i]));
      send_json(res, 200, {{"session_id", id}, {"turns", std::move(list)}});
    });
  });

  server.Get(R"(/sessions/([0-9A-Za-z]+)/indicators)", [&s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json body = json::parse(indicators_json(s.get_indicators(req.matches[1].str())));
      send_json(res, 200, body);
    });
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace trustconv
