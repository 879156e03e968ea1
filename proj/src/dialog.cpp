#include "trustconv/dialog.hpp"

#include <charconv>

#include <json.hpp>

#include "trustconv/error.hpp"

namespace trustconv {

using nlohmann::json;

std::string_view to_string(IntentLabel label) {
  switch (label) {
    case IntentLabel::Positive: return "Positive";
    case IntentLabel::Negative: return "Negative";
    case IntentLabel::Unclear: return "Unclear";
  }
  return "?";
}

std::optional<IntentLabel> parse_intent_label(std::string_view text) {
  if (text == "Positive") return IntentLabel::Positive;
  if (text == "Negative") return IntentLabel::Negative;
  if (text == "Unclear") return IntentLabel::Unclear;
  return std::nullopt;
}

const IntentLexicons& bundled_intent_lexicons() {
  static const IntentLexicons lexicons{bundled_valence_lexicon(), bundled_negation_cues()};
  return lexicons;
}

Intent classify_intent(std::string_view utterance, const IntentLexicons& lexicons) {
  if (lexicons.valence.positive.empty() && lexicons.valence.negative.empty()) {
    throw Error(ErrorCode::InvalidArgument, "valence lexicons are empty");
  }
  constexpr std::size_t kNegationWindow = 3;
  std::vector<Token> tokens = tokenize(utterance);
  int score = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    int sign = 0;
    if (lexicons.valence.positive.contains(tokens[i].stem)) sign = 1;
    else if (lexicons.valence.negative.contains(tokens[i].stem)) sign = -1;
    if (sign == 0) continue;
    for (std::size_t back = 1; back <= kNegationWindow && back <= i; ++back) {
      if (lexicons.negation.contains(tokens[i - back].surface)) {
        sign = -sign;
        break;
      }
    }
    score += sign;
  }
  IntentLabel label = score > 0 ? IntentLabel::Positive : score < 0 ? IntentLabel::Negative : IntentLabel::Unclear;
  return {label, score};
}

std::size_t DialogPhase::ordinal(std::size_t slot_count) const {
  switch (kind) {
    case Kind::Opening: return 0;
    case Kind::OpeningFollowUp: return 1;
    case Kind::Conceptual: return 2 + 2 * slot;
    case Kind::ConceptualFollowUp: return 3 + 2 * slot;
    case Kind::Descriptive: return 2 + 2 * slot_count;
    case Kind::Closed: return 3 + 2 * slot_count;
  }
  return 0;
}

std::string to_string(const DialogPhase& phase) {
  using K = DialogPhase::Kind;
  switch (phase.kind) {
    case K::Opening: return "Opening";
    case K::OpeningFollowUp: return "OpeningFollowUp";
    case K::Conceptual: return "Conceptual(" + std::to_string(phase.slot) + ")";
    case K::ConceptualFollowUp: return "ConceptualFollowUp(" + std::to_string(phase.slot) + ")";
    case K::Descriptive: return "Descriptive";
    case K::Closed: return "Closed";
  }
  return "?";
}

std::optional<DialogPhase> parse_dialog_phase(std::string_view text) {
  if (text == "Opening") return DialogPhase::opening();
  if (text == "OpeningFollowUp") return DialogPhase::opening_followup();
  if (text == "Descriptive") return DialogPhase::descriptive();
  if (text == "Closed") return DialogPhase::closed();
  auto slotted = [&](std::string_view prefix) -> std::optional<std::size_t> {
    if (!text.starts_with(prefix) || !text.ends_with(")")) return std::nullopt;
    std::string_view digits = text.substr(prefix.size(), text.size() - prefix.size() - 1);
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
    return value;
  };
  if (auto i = slotted("Conceptual(")) return DialogPhase::conceptual(*i);
  if (auto i = slotted("ConceptualFollowUp(")) return DialogPhase::conceptual_followup(*i);
  return std::nullopt;
}

std::string_view to_string(Speaker speaker) { return speaker == Speaker::Agent ? "Agent" : "Respondent"; }

std::optional<Speaker> parse_speaker(std::string_view text) {
  if (text == "Agent") return Speaker::Agent;
  if (text == "Respondent") return Speaker::Respondent;
  return std::nullopt;
}

std::string_view to_string(Ending ending) {
  switch (ending) {
    case Ending::Completed: return "Completed";
    case Ending::Abandoned: return "Abandoned";
    case Ending::TurnLimited: return "TurnLimited";
  }
  return "?";
}

DialogSession::DialogSession(std::string session_id, std::shared_ptr<const PromptSet> prompt_set,
                             const IntentLexicons& lexicons, std::size_t max_turns, std::int64_t timestamp_ms)
    : id_(std::move(session_id)), prompt_set_(std::move(prompt_set)), lexicons_(lexicons), max_turns_(max_turns) {
  if (!prompt_set_) throw Error(ErrorCode::InvalidArgument, "session needs a prompt set");
  if (max_turns_ < 3) throw Error(ErrorCode::InvalidArgument, "max_turns must be at least 3");
  const Prompt& opening = prompt_set_->opening();
  prompt_set_->descriptive();
  transcript_.push_back(
      {Speaker::Agent, opening.text, timestamp_ms, std::nullopt, phase_, opening.provenance, std::nullopt});
}

std::size_t DialogSession::followups_used(const DialogPhase& phase) const {
  auto it = followups_.find(to_string(phase));
  return it == followups_.end() ? 0 : it->second;
}

DialogSession::Step DialogSession::after_conceptual(std::size_t slot) const {
  std::size_t slots = prompt_set_->concept_slots.size();
  if (slot < slots) {
    const Prompt& p = prompt_set_->conceptual(slot);
    return {p.text, p.provenance, DialogPhase::conceptual(slot)};
  }
  const Prompt& p = prompt_set_->descriptive();
  return {p.text, p.provenance, DialogPhase::descriptive()};
}

DialogSession::Step DialogSession::next_step(const Intent& intent) const {
  using K = DialogPhase::Kind;
  constexpr std::size_t kFollowupBudget = 1;
  bool budget = followups_used(phase_) < kFollowupBudget;
  switch (phase_.kind) {
    case K::Opening:
      if (budget && intent.label == IntentLabel::Negative) {
        if (const Prompt* p = prompt_set_->attitude_followup()) {
          return {p->text, p->provenance, DialogPhase::opening_followup()};
        }
      }
      if (budget && intent.label != IntentLabel::Positive) {
        if (const Prompt* p = prompt_set_->generic_followup()) {
          return {p->text, p->provenance, DialogPhase::opening_followup()};
        }
      }
      return after_conceptual(0);
    case K::OpeningFollowUp:
      return after_conceptual(0);
    case K::Conceptual:
      if (budget && intent.label == IntentLabel::Unclear) {
        if (const Prompt* p = prompt_set_->generic_followup()) {
          return {p->text, p->provenance, DialogPhase::conceptual_followup(phase_.slot)};
        }
      }
      return after_conceptual(phase_.slot + 1);
    case K::ConceptualFollowUp:
      return after_conceptual(phase_.slot + 1);
    case K::Descriptive:
    case K::Closed:
      break;
  }
  return {std::string(kClosingMessage), "closing", DialogPhase::closed()};
}

AdvanceResult DialogSession::advance(std::string_view respondent_text, std::int64_t timestamp_ms,
                                     std::optional<std::string> idempotency_key) {
  if (closed()) throw Error(ErrorCode::SessionClosed, "session " + id_ + " is closed");
  Intent intent = classify_intent(respondent_text, lexicons_);
  Step step = next_step(intent);
  std::optional<Ending> ending;
  if (step.next.kind == DialogPhase::Kind::Closed) {
    ending = Ending::Completed;
  } else if (transcript_.size() + 4 > max_turns_) {
    // No room for another full exchange after this reply.
    step = {std::string(kClosingMessage), "closing", DialogPhase::closed()};
    ending = Ending::TurnLimited;
  }

  transcript_.push_back({Speaker::Respondent, std::string(respondent_text), timestamp_ms, intent, phase_, "",
                         std::move(idempotency_key)});
  if (step.provenance == "followup") ++followups_[to_string(phase_)];
  phase_ = step.next;
  ending_ = ending;
  transcript_.push_back({Speaker::Agent, step.text, timestamp_ms, std::nullopt, phase_, step.provenance, std::nullopt});
  return {step.text, phase_, closed()};
}

DialogSession DialogSession::replay(std::string session_id, std::shared_ptr<const PromptSet> prompt_set,
                                    std::span<const Turn> turns, const IntentLexicons& lexicons,
                                    std::size_t max_turns) {
  if (turns.empty() || turns.front().speaker != Speaker::Agent) {
    throw Error(ErrorCode::MalformedRecord, "transcript must start with the opening agent turn");
  }
  DialogSession session(std::move(session_id), std::move(prompt_set), lexicons, max_turns, turns.front().timestamp_ms);
  if (session.transcript_.front().text != turns.front().text) {
    throw Error(ErrorCode::MalformedRecord, "opening turn does not match the prompt set");
  }
  if (turns.size() % 2 == 0) throw Error(ErrorCode::MalformedRecord, "transcript ends with an unanswered turn");
  for (std::size_t i = 1; i + 1 < turns.size(); i += 2) {
    const Turn& said = turns[i];
    const Turn& reply = turns[i + 1];
    if (said.speaker != Speaker::Respondent || reply.speaker != Speaker::Agent) {
      throw Error(ErrorCode::MalformedRecord, "turn " + std::to_string(i) + " breaks agent/respondent alternation");
    }
    AdvanceResult result = session.advance(said.text, said.timestamp_ms, said.idempotency_key);
    if (result.reply != reply.text) {
      throw Error(ErrorCode::MalformedRecord, "turn " + std::to_string(i + 1) + " differs from the replayed reply");
    }
    session.transcript_.back().timestamp_ms = reply.timestamp_ms;
  }
  return session;
}

TrustIndicators extract_indicators(const DialogSession& session) {
  TrustIndicators out;
  std::size_t tokens = 0;
  for (const Turn& turn : session.transcript()) {
    if (turn.speaker == Speaker::Respondent) {
      ++out.turn_count;
      tokens += tokenize(turn.text).size();
      IntentLabel label = turn.intent ? turn.intent->label : IntentLabel::Unclear;
      if (!out.valence_sequence.empty()) ++out.valence_transitions[{out.valence_sequence.back(), label}];
      out.valence_sequence.push_back(label);
    } else if (turn.provenance == "followup") {
      ++out.followup_count;
    }
  }
  if (out.turn_count > 0) out.mean_response_tokens = static_cast<double>(tokens) / static_cast<double>(out.turn_count);
  out.complete = session.closed();
  out.ending = session.ending().value_or(Ending::Abandoned);
  return out;
}

std::string indicators_json(const TrustIndicators& indicators) {
  json sequence = json::array();
  for (IntentLabel label : indicators.valence_sequence) sequence.push_back(to_string(label));
  json transitions = json::array();
  for (const auto& [pair, count] : indicators.valence_transitions) {
    transitions.push_back({{"from", to_string(pair.first)}, {"to", to_string(pair.second)}, {"count", count}});
  }
  json root = {{"turn_count", indicators.turn_count},
               {"valence_sequence", std::move(sequence)},
               {"valence_transitions", std::move(transitions)},
               {"mean_response_tokens", indicators.mean_response_tokens},
               {"followup_count", indicators.followup_count},
               {"ending", to_string(indicators.ending)},
               {"complete", indicators.complete}};
  return root.dump();
}

std::string turn_record(const std::string& session_id, std::size_t index, const Turn& turn) {
  json record = {{"session_id", session_id},
                 {"index", index},
                 {"speaker", to_string(turn.speaker)},
                 {"text", turn.text},
                 {"phase", to_string(turn.phase)},
                 {"intent", nullptr},
                 {"timestamp", turn.timestamp_ms}};
  if (turn.intent) {
    record["intent"] = to_string(turn.intent->label);
    record["intent_score"] = turn.intent->score;
  }
  if (!turn.provenance.empty()) record["provenance"] = turn.provenance;
  if (turn.idempotency_key) record["idempotency_key"] = *turn.idempotency_key;
  return record.dump() + "\n";
}

std::string transcript_jsonl(const DialogSession& session) {
  std::string out;
  const auto& turns = session.transcript();
  for (std::size_t i = 0; i < turns.size(); ++i) out += turn_record(session.id(), i, turns[i]);
  return out;
}

Turn parse_turn_record(std::string_view line, std::string* session_id, std::size_t* index) {
  try {
    json record = json::parse(line);
    Turn turn;
    auto speaker = parse_speaker(record.at("speaker").get<std::string>());
    auto phase = parse_dialog_phase(record.at("phase").get<std::string>());
    if (!speaker || !phase) throw Error(ErrorCode::MalformedRecord, "turn record has unknown speaker or phase");
    turn.speaker = *speaker;
    turn.phase = *phase;
    turn.text = record.at("text").get<std::string>();
    turn.timestamp_ms = record.at("timestamp").get<std::int64_t>();
    if (const auto& intent = record.at("intent"); !intent.is_null()) {
      auto label = parse_intent_label(intent.get<std::string>());
      if (!label) throw Error(ErrorCode::MalformedRecord, "turn record has unknown intent");
      turn.intent = Intent{*label, record.value("intent_score", 0)};
    }
    turn.provenance = record.value("provenance", std::string{});
    if (record.contains("idempotency_key")) turn.idempotency_key = record["idempotency_key"].get<std::string>();
    if (session_id) *session_id = record.at("session_id").get<std::string>();
    if (index) *index = record.at("index").get<std::size_t>();
    return turn;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("turn record: ") + e.what());
  }
}

}  // namespace trustconv
