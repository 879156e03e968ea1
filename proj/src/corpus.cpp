#include "trustconv/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "trustconv/bundled.hpp"
#include "trustconv/error.hpp"

namespace trustconv {

using nlohmann::json;

std::string_view to_string(Domain domain) {
  switch (domain) {
    case Domain::Automation: return "automation";
    case Domain::ECommerce: return "e-commerce";
    case Domain::Human: return "human";
  }
  return "?";
}

std::string_view to_string(Construct construct) {
  switch (construct) {
    case Construct::Dispositional: return "dispositional";
    case Construct::HistoryBased: return "history-based";
    case Construct::Situational: return "situational";
  }
  return "?";
}

std::string_view to_string(Valence valence) {
  switch (valence) {
    case Valence::Positive: return "positive";
    case Valence::Negative: return "negative";
    case Valence::Neutral: return "neutral";
  }
  return "?";
}

std::optional<Domain> parse_domain(std::string_view text) {
  if (text == "automation") return Domain::Automation;
  if (text == "e-commerce") return Domain::ECommerce;
  if (text == "human") return Domain::Human;
  return std::nullopt;
}

std::optional<Construct> parse_construct(std::string_view text) {
  if (text == "dispositional") return Construct::Dispositional;
  if (text == "history-based") return Construct::HistoryBased;
  if (text == "situational") return Construct::Situational;
  return std::nullopt;
}

std::optional<Valence> parse_valence(std::string_view text) {
  if (text == "positive") return Valence::Positive;
  if (text == "negative") return Valence::Negative;
  if (text == "neutral") return Valence::Neutral;
  return std::nullopt;
}

const Scale* ScaleCorpus::find(std::string_view scale_id) const {
  for (const Scale& scale : scales) {
    if (scale.scale_id == scale_id) return &scale;
  }
  return nullptr;
}

namespace {

[[noreturn]] void malformed(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::MalformedRecord, where + ": " + what);
}

const json& require(const json& object, const char* key, const std::string& where) {
  auto it = object.find(key);
  if (it == object.end()) malformed(where, std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& object, const char* key, const std::string& where) {
  const json& value = require(object, key, where);
  if (!value.is_string()) malformed(where + "." + key, "expected a string");
  return value.get<std::string>();
}

long long require_integer(const json& object, const char* key, const std::string& where) {
  const json& value = require(object, key, where);
  if (!value.is_number_integer()) malformed(where + "." + key, "expected an integer");
  return value.get<long long>();
}

template <typename Enum>
Enum require_enum(const json& object, const char* key, const std::string& where,
                  std::optional<Enum> (*parse)(std::string_view)) {
  std::string text = require_string(object, key, where);
  auto value = parse(text);
  if (!value) malformed(where + "." + key, "unknown value '" + text + "'");
  return *value;
}

ScaleItem parse_item(const json& node, const std::string& where) {
  if (!node.is_object()) malformed(where, "expected an object");
  ScaleItem item;
  item.item_id = require_string(node, "item_id", where);
  item.text = require_string(node, "text", where);
  if (node.contains("valence")) {
    item.valence = require_enum<Valence>(node, "valence", where, parse_valence);
  }
  return item;
}

Scale parse_scale(const json& node, const std::string& where) {
  if (!node.is_object()) malformed(where, "expected an object");
  Scale scale;
  scale.scale_id = require_string(node, "scale_id", where);
  std::string located = where + "(" + scale.scale_id + ")";
  scale.name = require_string(node, "name", located);
  scale.year = static_cast<int>(require_integer(node, "year", located));
  scale.citations = require_integer(node, "citations", located);
  scale.domain = require_enum<Domain>(node, "domain", located, parse_domain);
  scale.construct = require_enum<Construct>(node, "construct", located, parse_construct);
  const json& items = require(node, "items", located);
  if (!items.is_array()) malformed(located + ".items", "expected an array");
  std::set<std::string> item_ids;
  for (std::size_t i = 0; i < items.size(); ++i) {
    ScaleItem item = parse_item(items[i], located + ".items[" + std::to_string(i) + "]");
    if (!item_ids.insert(item.item_id).second) {
      throw Error(ErrorCode::DuplicateId,
                  "item_id '" + item.item_id + "' repeated in scale '" + scale.scale_id + "'");
    }
    scale.items.push_back(std::move(item));
  }
  return scale;
}

std::size_t line_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

}  // namespace

ScaleCorpus parse_corpus(std::string_view json_text) {
  if (json_text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw Error(ErrorCode::MissingScales, "corpus file is empty");
  }
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    malformed("line " + std::to_string(line_of(json_text, e.byte)), e.what());
  }
  if (!root.is_object()) malformed("document", "expected a top-level object");
  auto scales = root.find("scales");
  if (scales == root.end() || (scales->is_array() && scales->empty())) {
    throw Error(ErrorCode::MissingScales, "corpus has no scales");
  }
  if (!scales->is_array()) malformed("scales", "expected an array");

  ScaleCorpus corpus;
  if (auto note = root.find("source_note"); note != root.end()) {
    if (!note->is_string()) malformed("source_note", "expected a string");
    corpus.source_note = note->get<std::string>();
  }
  std::set<std::string> ids;
  for (std::size_t i = 0; i < scales->size(); ++i) {
    Scale scale = parse_scale((*scales)[i], "scales[" + std::to_string(i) + "]");
    if (!ids.insert(scale.scale_id).second) {
      throw Error(ErrorCode::DuplicateId, "scale_id '" + scale.scale_id + "' appears more than once");
    }
    corpus.scales.push_back(std::move(scale));
  }
  return corpus;
}

ScaleCorpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read corpus " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_corpus(buffer.str());
}

std::string serialize_corpus(const ScaleCorpus& corpus) {
  json scales = json::array();
  for (const Scale& scale : corpus.scales) {
    json items = json::array();
    for (const ScaleItem& item : scale.items) {
      items.push_back({{"item_id", item.item_id}, {"text", item.text}, {"valence", to_string(item.valence)}});
    }
    scales.push_back({{"scale_id", scale.scale_id},
                      {"name", scale.name},
                      {"year", scale.year},
                      {"citations", scale.citations},
                      {"domain", to_string(scale.domain)},
                      {"construct", to_string(scale.construct)},
                      {"items", std::move(items)}});
  }
  json root = {{"scales", std::move(scales)}, {"source_note", corpus.source_note}};
  return root.dump(2) + "\n";
}

void save_corpus(const ScaleCorpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write corpus " + path.string());
  out << serialize_corpus(corpus);
}

std::vector<Violation> validate_corpus(const ScaleCorpus& corpus) {
  std::vector<Violation> report;
  if (corpus.scales.empty()) report.push_back({"", "scales", "non-empty after load"});
  std::set<std::string> ids;
  for (const Scale& scale : corpus.scales) {
    if (scale.scale_id.empty()) report.push_back({scale.scale_id, "scale_id", "scale_id non-empty"});
    if (!ids.insert(scale.scale_id).second) {
      report.push_back({scale.scale_id, "scale_id", "scale_id unique within corpus"});
    }
    if (scale.items.empty()) report.push_back({scale.scale_id, "items", "items non-empty"});
    if (scale.citations < 0) report.push_back({scale.scale_id, "citations", "citations ≥ 0"});
    std::set<std::string> item_ids;
    for (const ScaleItem& item : scale.items) {
      if (item.text.empty()) {
        report.push_back({scale.scale_id, "items." + item.item_id + ".text", "text non-empty"});
      }
      if (!item_ids.insert(item.item_id).second) {
        report.push_back({scale.scale_id, "items." + item.item_id, "item_id unique within scale"});
      }
    }
  }
  return report;
}

ScaleCorpus filter_scales(const ScaleCorpus& corpus, std::optional<Domain> domain,
                          std::optional<Construct> construct) {
  ScaleCorpus out;
  out.source_note = corpus.source_note;
  for (const Scale& scale : corpus.scales) {
    if (domain && scale.domain != *domain) continue;
    if (construct && scale.construct != *construct) continue;
    out.scales.push_back(scale);
  }
  return out;
}

const ScaleCorpus& bundled_corpus() {
  static const ScaleCorpus corpus = parse_corpus(bundled::file("corpus.json"));
  return corpus;
}

}  // namespace trustconv
