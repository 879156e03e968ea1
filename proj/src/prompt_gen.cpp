#include "trustconv/prompt_gen.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "trustconv/bundled.hpp"
#include "trustconv/error.hpp"

namespace trustconv {

using nlohmann::json;

std::string_view to_string(PromptLevel level) {
  switch (level) {
    case PromptLevel::Descriptive: return "descriptive";
    case PromptLevel::Conceptual: return "conceptual";
    case PromptLevel::Declarative: return "declarative";
    case PromptLevel::Interpretive: return "interpretive";
  }
  return "?";
}

std::optional<PromptLevel> parse_prompt_level(std::string_view text) {
  if (text == "descriptive") return PromptLevel::Descriptive;
  if (text == "conceptual") return PromptLevel::Conceptual;
  if (text == "declarative") return PromptLevel::Declarative;
  if (text == "interpretive") return PromptLevel::Interpretive;
  return std::nullopt;
}

std::vector<std::string> placeholders(std::string_view pattern) {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while ((pos = pattern.find('{', pos)) != std::string_view::npos) {
    std::size_t close = pattern.find('}', pos);
    if (close == std::string_view::npos) break;
    std::string name(pattern.substr(pos + 1, close - pos - 1));
    if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
    pos = close + 1;
  }
  return names;
}

PromptTemplate PromptTemplate::make(PromptLevel level, std::string pattern, std::vector<std::string> slots) {
  auto found = placeholders(pattern);
  std::set<std::string> in_pattern(found.begin(), found.end());
  std::set<std::string> declared(slots.begin(), slots.end());
  if (in_pattern != declared) {
    throw Error(ErrorCode::InvalidArgument, "template \"" + pattern + "\" placeholders do not match declared slots");
  }
  if (level == PromptLevel::Declarative && !slots.empty()) {
    throw Error(ErrorCode::InvalidArgument, "declarative template \"" + pattern + "\" must not have slots");
  }
  return {level, std::move(pattern), std::move(slots)};
}

TemplateBank parse_template_bank(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("template bank: ") + e.what());
  }
  const json* list = &root;
  if (root.is_object()) {
    auto it = root.find("templates");
    if (it == root.end()) throw Error(ErrorCode::MalformedRecord, "template bank: missing 'templates'");
    list = &*it;
  }
  if (!list->is_array()) throw Error(ErrorCode::MalformedRecord, "template bank: expected an array of templates");
  TemplateBank bank;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const json& node = (*list)[i];
    std::string where = "templates[" + std::to_string(i) + "]";
    try {
      auto level = parse_prompt_level(node.at("level").get<std::string>());
      if (!level) throw Error(ErrorCode::MalformedRecord, where + ": unknown level");
      bank.templates.push_back(PromptTemplate::make(*level, node.at("pattern").get<std::string>(),
                                                    node.value("slots", std::vector<std::string>{})));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedRecord, where + ": " + e.what());
    }
  }
  return bank;
}

TemplateBank load_template_bank(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read template bank " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_template_bank(buffer.str());
}

const TemplateBank& bundled_template_bank() {
  static const TemplateBank bank = parse_template_bank(bundled::file("templates.json"));
  return bank;
}

std::vector<std::string> lint_nondirective(const Prompt& prompt, const ValenceLexicon& lexicon) {
  std::vector<std::string> violations;
  if (prompt.text.find_first_not_of(" \t\r\n") == std::string::npos) {
    violations.push_back("empty prompt");
    return violations;
  }
  if (!placeholders(prompt.text).empty()) violations.push_back("unsubstituted placeholder");
  if (prompt.level == PromptLevel::Descriptive) return violations;
  for (const Token& token : tokenize(prompt.text)) {
    if (lexicon.positive.contains(token.stem)) {
      violations.push_back("valenced term '" + token.stem + "' (positive)");
    } else if (lexicon.negative.contains(token.stem)) {
      violations.push_back("valenced term '" + token.stem + "' (negative)");
    }
  }
  return violations;
}

namespace {

std::string substitute(const PromptTemplate& tmpl, const SlotValues& slot_values) {
  for (const std::string& slot : tmpl.slots) {
    if (!slot_values.contains(slot)) {
      throw Error(ErrorCode::MissingSlot, "slot '" + slot + "' missing for \"" + tmpl.pattern + "\"");
    }
  }
  for (const auto& [slot, _] : slot_values) {
    if (std::find(tmpl.slots.begin(), tmpl.slots.end(), slot) == tmpl.slots.end()) {
      throw Error(ErrorCode::InvalidArgument, "template \"" + tmpl.pattern + "\" has no slot '" + slot + "'");
    }
  }
  std::string text;
  std::size_t pos = 0;
  while (pos < tmpl.pattern.size()) {
    std::size_t open = tmpl.pattern.find('{', pos);
    std::size_t close = open == std::string::npos ? std::string::npos : tmpl.pattern.find('}', open);
    if (close == std::string::npos) {
      text.append(tmpl.pattern, pos, std::string::npos);
      break;
    }
    text.append(tmpl.pattern, pos, open - pos);
    text.append(slot_values.at(tmpl.pattern.substr(open + 1, close - open - 1)));
    pos = close + 1;
  }
  return text;
}

}  // namespace

Prompt formulate_prompt(const PromptTemplate& tmpl, const SlotValues& slot_values, std::string provenance,
                        const ValenceLexicon& lexicon, Valence valence) {
  Prompt prompt{tmpl.level, substitute(tmpl, slot_values), slot_values, std::move(provenance), valence};
  auto violations = lint_nondirective(prompt, lexicon);
  if (!violations.empty()) {
    std::string joined;
    for (const auto& v : violations) joined += (joined.empty() ? "" : "; ") + v;
    throw Error(ErrorCode::LintViolation, "\"" + prompt.text + "\": " + joined);
  }
  return prompt;
}

std::vector<const Prompt*> PromptSet::at_level(PromptLevel level) const {
  std::vector<const Prompt*> out;
  for (const Prompt& p : prompts) {
    if (p.level == level) out.push_back(&p);
  }
  return out;
}

const Prompt& PromptSet::opening() const {
  auto found = at_level(PromptLevel::Declarative);
  if (found.empty()) throw Error(ErrorCode::InvalidArgument, "prompt set '" + id + "' has no declarative prompt");
  return *found.front();
}

const Prompt* PromptSet::attitude_followup() const {
  for (const Prompt* p : at_level(PromptLevel::Interpretive)) {
    if (p->slot_values.contains("attitude")) return p;
  }
  return nullptr;
}

const Prompt* PromptSet::generic_followup() const {
  for (const Prompt* p : at_level(PromptLevel::Interpretive)) {
    if (p->slot_values.empty()) return p;
  }
  return nullptr;
}

const Prompt& PromptSet::conceptual(std::size_t slot) const {
  auto found = at_level(PromptLevel::Conceptual);
  if (slot >= found.size()) {
    throw Error(ErrorCode::InvalidArgument, "prompt set '" + id + "' has no conceptual slot " + std::to_string(slot));
  }
  return *found[slot];
}

const Prompt& PromptSet::descriptive() const {
  auto found = at_level(PromptLevel::Descriptive);
  if (found.empty()) throw Error(ErrorCode::InvalidArgument, "prompt set '" + id + "' has no descriptive prompt");
  return *found.front();
}

bool PromptSet::contains_text(std::string_view text) const {
  return std::any_of(prompts.begin(), prompts.end(), [&](const Prompt& p) { return p.text == text; });
}

std::vector<std::string> check_prompt_set(const PromptSet& set, const ValenceLexicon& lexicon) {
  std::vector<std::string> problems;
  auto count = [&](PromptLevel level) { return set.at_level(level).size(); };
  if (count(PromptLevel::Declarative) < 1) problems.push_back("no declarative prompt");
  if (count(PromptLevel::Interpretive) < 1) problems.push_back("no interpretive prompt");
  if (count(PromptLevel::Descriptive) < 1) problems.push_back("no descriptive prompt");
  if (count(PromptLevel::Conceptual) != set.concept_slots.size()) {
    problems.push_back("conceptual prompts do not match concept slots one to one");
  }
  int positive = 0;
  int negative = 0;
  for (const Prompt& p : set.prompts) {
    for (const std::string& v : lint_nondirective(p, lexicon)) problems.push_back("\"" + p.text + "\": " + v);
    if (p.level == PromptLevel::Descriptive) {
      if (p.valence == Valence::Positive) ++positive;
      if (p.valence == Valence::Negative) ++negative;
    }
  }
  if (std::abs(positive - negative) > 1) {
    problems.push_back("descriptive prompts unbalanced: " + std::to_string(positive) + " positive vs " +
                       std::to_string(negative) + " negative");
  }
  return problems;
}

ConceptDisplay parse_concept_display(std::string_view tsv) {
  ConceptDisplay out;
  std::istringstream in{std::string(tsv)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(ErrorCode::MalformedRow, "concept table row without a tab: " + line);
    out[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return out;
}

const ConceptDisplay& bundled_concept_display() {
  static const ConceptDisplay display = parse_concept_display(bundled::file("concepts.tsv"));
  return display;
}

std::vector<std::string> concept_terms(const ConceptDisplay& display) {
  std::vector<std::string> terms;
  for (const auto& [stem, _] : display) terms.push_back(stem);
  return terms;
}

std::string interrogative_clause(std::string_view item_text) {
  std::string text(item_text);
  auto last = text.find_last_not_of(" \t\r\n.!?;:");
  text.erase(last == std::string::npos ? 0 : last + 1);
  auto first = text.find_first_not_of(" \t\r\n");
  text.erase(0, first == std::string::npos ? text.size() : first);

  static const std::map<std::string, std::string> swaps = {
      {"i", "you"},          {"me", "you"},       {"my", "your"},       {"mine", "yours"},
      {"myself", "yourself"}, {"i'm", "you're"},  {"i've", "you've"},   {"i'd", "you'd"},
      {"i'll", "you'll"},
  };
  std::istringstream words(text);
  std::string word;
  std::string out;
  bool after_i = false;
  bool first_word = true;
  while (words >> word) {
    std::size_t lead = 0;
    while (lead < word.size() && !std::isalpha(static_cast<unsigned char>(word[lead]))) ++lead;
    std::size_t trail = word.size();
    while (trail > lead && !std::isalpha(static_cast<unsigned char>(word[trail - 1]))) --trail;
    std::string core = word.substr(lead, trail - lead);
    std::string lower = core;
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });

    bool was_i = lower == "i";
    if (auto it = swaps.find(lower); it != swaps.end()) {
      core = it->second;
    } else if (after_i && lower == "am") {
      core = "are";
    } else if (after_i && lower == "was") {
      core = "were";
    } else if (first_word && core.size() > 1 && std::isupper(static_cast<unsigned char>(core[0])) &&
               !std::isupper(static_cast<unsigned char>(core[1]))) {
      core[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(core[0])));
    }
    after_i = was_i;
    first_word = false;
    if (!out.empty()) out.push_back(' ');
    out += word.substr(0, lead) + core + word.substr(trail);
  }
  return out;
}

namespace {

const PromptTemplate& require_template(const TemplateBank& bank, PromptLevel level,
                                       const std::vector<std::string>& slots) {
  for (const PromptTemplate& t : bank.templates) {
    if (t.level == level && t.slots == slots) return t;
  }
  std::string wanted;
  for (const auto& s : slots) wanted += "{" + s + "}";
  throw Error(ErrorCode::InvalidArgument,
              "template bank has no " + std::string(to_string(level)) + " template with slots " + wanted);
}

std::string concept_phrase(const std::string& term, const ConceptDisplay& concept_display,
                           const std::map<std::string, std::string>& surface_forms) {
  if (auto it = concept_display.find(term); it != concept_display.end()) return it->second;
  if (auto it = surface_forms.find(term); it != surface_forms.end()) return it->second;
  return term;
}

}  // namespace

PromptSetBuild build_prompt_set(std::span<const ClusterSummary> summaries, const TemplateBank& bank,
                                std::span<const DatabaseItem> items, const ValenceLexicon& lexicon,
                                const ConceptDisplay& concept_display,
                                const std::map<std::string, std::string>& surface_forms,
                                const PromptSetOptions& options) {
  if (summaries.empty()) throw Error(ErrorCode::InvalidArgument, "no cluster summaries to build prompts from");
  for (PromptLevel level : {PromptLevel::Descriptive, PromptLevel::Conceptual, PromptLevel::Declarative,
                            PromptLevel::Interpretive}) {
    bool covered = std::any_of(bank.templates.begin(), bank.templates.end(),
                               [&](const PromptTemplate& t) { return t.level == level; });
    if (!covered) {
      throw Error(ErrorCode::InvalidArgument, "template bank has no " + std::string(to_string(level)) + " template");
    }
  }

  PromptSetBuild build;
  build.set.id = options.id;
  std::vector<Prompt> descriptive;
  std::vector<Prompt> conceptual;
  std::vector<Prompt> declarative;
  std::vector<Prompt> interpretive;

  auto attempt = [&](const PromptTemplate& tmpl, const SlotValues& values, const std::string& provenance,
                     Valence valence, std::vector<Prompt>& sink) {
    try {
      sink.push_back(formulate_prompt(tmpl, values, provenance, lexicon, valence));
      return true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::LintViolation) throw;
      RejectedPrompt rejected{tmpl.level, "", provenance, {}};
      Prompt probe{tmpl.level, substitute(tmpl, values), values, provenance, valence};
      rejected.text = probe.text;
      rejected.violations = lint_nondirective(probe, lexicon);
      build.rejected.push_back(std::move(rejected));
      return false;
    }
  };

  // Descriptive: walk items in database order keeping |positive - negative| <= 1.
  const PromptTemplate& descriptive_tmpl = require_template(bank, PromptLevel::Descriptive, {"item_clause"});
  int balance = 0;
  for (const DatabaseItem& entry : items) {
    if (descriptive.size() >= options.max_descriptive) break;
    int delta = entry.item.valence == Valence::Positive ? 1 : entry.item.valence == Valence::Negative ? -1 : 0;
    if (std::abs(balance + delta) > 1) continue;
    std::string clause = interrogative_clause(entry.item.text);
    if (clause.empty()) continue;
    if (attempt(descriptive_tmpl, {{"item_clause", clause}}, "item:" + entry.scale_id + "/" + entry.item.item_id,
                entry.item.valence, descriptive)) {
      balance += delta;
    }
  }
  if (descriptive.empty()) throw Error(ErrorCode::InvalidArgument, "no scale item yields a descriptive prompt");

  const PromptTemplate& conceptual_tmpl = require_template(bank, PromptLevel::Conceptual, {"concept"});
  std::set<std::string> phrases;
  for (const ClusterSummary& summary : summaries) {
    std::string phrase = concept_phrase(summary.selected_term, concept_display, surface_forms);
    std::string provenance = "cluster:" + std::to_string(summary.cluster_id);
    if (phrases.contains(phrase)) {
      build.rejected.push_back({PromptLevel::Conceptual, phrase, provenance, {"duplicate concept '" + phrase + "'"}});
      continue;
    }
    if (attempt(conceptual_tmpl, {{"concept", phrase}}, provenance, Valence::Neutral, conceptual)) {
      phrases.insert(phrase);
      build.set.concept_slots.push_back(phrase);
    }
  }

  for (const PromptTemplate& tmpl : bank.templates) {
    if (tmpl.level == PromptLevel::Declarative) {
      attempt(tmpl, {}, "opening", Valence::Neutral, declarative);
    } else if (tmpl.level == PromptLevel::Interpretive) {
      SlotValues values;
      for (const std::string& slot : tmpl.slots) {
        if (slot != "attitude") {
          throw Error(ErrorCode::InvalidArgument, "interpretive slot '" + slot + "' has no value source");
        }
        values[slot] = options.negative_attitude;
      }
      attempt(tmpl, values, "followup", Valence::Neutral, interpretive);
    }
  }
  if (declarative.empty()) throw Error(ErrorCode::InvalidArgument, "no declarative prompt passed the lint");
  if (interpretive.empty()) throw Error(ErrorCode::InvalidArgument, "no interpretive prompt passed the lint");

  for (auto* group : {&descriptive, &conceptual, &declarative, &interpretive}) {
    for (Prompt& p : *group) build.set.prompts.push_back(std::move(p));
  }
  return build;
}

namespace {

json prompt_json(const Prompt& p) {
  return {{"level", to_string(p.level)},
          {"text", p.text},
          {"slot_values", p.slot_values},
          {"provenance", p.provenance},
          {"valence", to_string(p.valence)}};
}

}  // namespace

std::string prompt_set_json(const PromptSet& set) {
  json prompts = json::array();
  for (const Prompt& p : set.prompts) prompts.push_back(prompt_json(p));
  json root = {{"id", set.id}, {"concept_slots", set.concept_slots}, {"prompts", std::move(prompts)}};
  return root.dump(2) + "\n";
}

std::string rejected_prompts_json(std::span<const RejectedPrompt> rejected) {
  json out = json::array();
  for (const RejectedPrompt& r : rejected) {
    out.push_back({{"level", to_string(r.level)},
                   {"text", r.text},
                   {"provenance", r.provenance},
                   {"violations", r.violations}});
  }
  return json{{"rejected", std::move(out)}}.dump(2) + "\n";
}

PromptSet parse_prompt_set(std::string_view json_text) {
  try {
    json root = json::parse(json_text);
    PromptSet set;
    set.id = root.at("id").get<std::string>();
    set.concept_slots = root.value("concept_slots", std::vector<std::string>{});
    for (const json& node : root.at("prompts")) {
      Prompt p;
      auto level = parse_prompt_level(node.at("level").get<std::string>());
      if (!level) throw Error(ErrorCode::MalformedRecord, "prompt set: unknown level");
      p.level = *level;
      p.text = node.at("text").get<std::string>();
      p.slot_values = node.value("slot_values", SlotValues{});
      p.provenance = node.value("provenance", std::string{});
      auto valence = parse_valence(node.value("valence", std::string("neutral")));
      if (!valence) throw Error(ErrorCode::MalformedRecord, "prompt set: unknown valence");
      p.valence = *valence;
      set.prompts.push_back(std::move(p));
    }
    std::stable_sort(set.prompts.begin(), set.prompts.end(),
                     [](const Prompt& a, const Prompt& b) { return a.level < b.level; });
    return set;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("prompt set: ") + e.what());
  }
}

PromptSet load_prompt_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read prompt set " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_prompt_set(buffer.str());
}

const PromptSet& default_prompt_set() {
  static const PromptSet set = [] {
    std::vector<ClusterSummary> summaries;
    for (const char* term : {"perform", "purpos", "process"}) {
      ClusterSummary s;
      s.cluster_id = summaries.size();
      s.members = {term};
      s.selected_term = term;
      summaries.push_back(std::move(s));
    }
    ScaleCorpus automation = filter_scales(bundled_corpus(), Domain::Automation, std::nullopt);
    std::vector<RankedScale> all;
    for (const Scale& scale : automation.scales) all.push_back({scale.scale_id, 0.0, scale.citations, 0});
    PromptDatabase db = build_prompt_database(all, {}, automation);
    return build_prompt_set(summaries, bundled_template_bank(), db.items, bundled_valence_lexicon(),
                            bundled_concept_display())
        .set;
  }();
  return set;
}

}  // namespace trustconv
