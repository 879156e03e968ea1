#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "trustconv/prompt_gen.hpp"
#include "trustconv/valence.hpp"

namespace trustconv {

enum class IntentLabel { Positive, Negative, Unclear };

std::string_view to_string(IntentLabel label);
std::optional<IntentLabel> parse_intent_label(std::string_view text);

struct Intent {
  IntentLabel label = IntentLabel::Unclear;
  int score = 0;

  bool operator==(const Intent&) const = default;
};

struct IntentLexicons {
  ValenceLexicon valence;
  WordSet negation;  // folded surface forms, e.g. "dont"
};

const IntentLexicons& bundled_intent_lexicons();

/// Each valenced stem counts +1 or -1; a negation cue among the three
/// preceding tokens flips it. Throws InvalidArgument for empty lexicons.
Intent classify_intent(std::string_view utterance, const IntentLexicons& lexicons = bundled_intent_lexicons());

struct DialogPhase {
  enum class Kind { Opening, OpeningFollowUp, Conceptual, ConceptualFollowUp, Descriptive, Closed };
  Kind kind = Kind::Opening;
  std::size_t slot = 0;  // meaningful for Conceptual and ConceptualFollowUp

  static DialogPhase opening() { return {Kind::Opening, 0}; }
  static DialogPhase opening_followup() { return {Kind::OpeningFollowUp, 0}; }
  static DialogPhase conceptual(std::size_t i) { return {Kind::Conceptual, i}; }
  static DialogPhase conceptual_followup(std::size_t i) { return {Kind::ConceptualFollowUp, i}; }
  static DialogPhase descriptive() { return {Kind::Descriptive, 0}; }
  static DialogPhase closed() { return {Kind::Closed, 0}; }

  /// Position along the phase order; strictly increases across transitions.
  std::size_t ordinal(std::size_t slot_count) const;

  bool operator==(const DialogPhase& other) const {
    bool slotted = kind == Kind::Conceptual || kind == Kind::ConceptualFollowUp;
    return kind == other.kind && (!slotted || slot == other.slot);
  }
};

/// "Opening", "Conceptual(2)", ...
std::string to_string(const DialogPhase& phase);
std::optional<DialogPhase> parse_dialog_phase(std::string_view text);

enum class Speaker { Agent, Respondent };
std::string_view to_string(Speaker speaker);
std::optional<Speaker> parse_speaker(std::string_view text);

enum class Ending { Completed, Abandoned, TurnLimited };
std::string_view to_string(Ending ending);

struct Turn {
  Speaker speaker = Speaker::Agent;
  std::string text;
  std::int64_t timestamp_ms = 0;
  std::optional<Intent> intent;  // respondent turns
  DialogPhase phase;             // phase the turn was emitted in
  std::string provenance;        // agent turns: prompt provenance or "closing"
  std::optional<std::string> idempotency_key;

  bool operator==(const Turn&) const = default;
};

inline constexpr std::string_view kClosingMessage =
    "Thank you for sharing your thoughts. That concludes our conversation.";
inline constexpr std::size_t kDefaultMaxTurns = 30;

struct AdvanceResult {
  std::string reply;
  DialogPhase phase;
  bool complete = false;
};

class DialogSession {
 public:
  /// Appends the opening prompt as turn 0. Throws InvalidArgument when
  /// max_turns < 3 or the prompt set lacks an opening or descriptive prompt.
  DialogSession(std::string session_id, std::shared_ptr<const PromptSet> prompt_set,
                const IntentLexicons& lexicons = bundled_intent_lexicons(), std::size_t max_turns = kDefaultMaxTurns,
                std::int64_t timestamp_ms = 0);

  /// Rebuilds a session by feeding the respondent turns of `turns` back
  /// through advance(); throws MalformedRecord when the regenerated agent
  /// turns differ from the recorded ones.
  static DialogSession replay(std::string session_id, std::shared_ptr<const PromptSet> prompt_set,
                              std::span<const Turn> turns, const IntentLexicons& lexicons = bundled_intent_lexicons(),
                              std::size_t max_turns = kDefaultMaxTurns);

  /// Throws SessionClosed once the session is closed.
  AdvanceResult advance(std::string_view respondent_text, std::int64_t timestamp_ms = 0,
                        std::optional<std::string> idempotency_key = std::nullopt);

  const std::string& id() const { return id_; }
  const DialogPhase& phase() const { return phase_; }
  bool closed() const { return phase_.kind == DialogPhase::Kind::Closed; }
  std::optional<Ending> ending() const { return ending_; }
  const std::vector<Turn>& transcript() const { return transcript_; }
  const PromptSet& prompt_set() const { return *prompt_set_; }
  std::size_t max_turns() const { return max_turns_; }
  std::size_t followups_used(const DialogPhase& phase) const;

 private:
  struct Step {
    std::string text;
    std::string provenance;
    DialogPhase next;
  };
  Step next_step(const Intent& intent) const;
  Step after_conceptual(std::size_t slot) const;

  std::string id_;
  std::shared_ptr<const PromptSet> prompt_set_;
  IntentLexicons lexicons_;
  std::size_t max_turns_;
  DialogPhase phase_;
  std::optional<Ending> ending_;
  std::vector<Turn> transcript_;
  std::map<std::string, std::size_t> followups_;
};

struct TrustIndicators {
  std::size_t turn_count = 0;
  std::vector<IntentLabel> valence_sequence;
  std::map<std::pair<IntentLabel, IntentLabel>, std::size_t> valence_transitions;
  double mean_response_tokens = 0.0;
  std::size_t followup_count = 0;
  Ending ending = Ending::Abandoned;
  bool complete = false;  // false while the session is still open
};

TrustIndicators extract_indicators(const DialogSession& session);
std::string indicators_json(const TrustIndicators& indicators);

/// One JSON object per turn, newline terminated.
std::string turn_record(const std::string& session_id, std::size_t index, const Turn& turn);
std::string transcript_jsonl(const DialogSession& session);
/// Inverse of turn_record; throws MalformedRecord.
Turn parse_turn_record(std::string_view line, std::string* session_id = nullptr, std::size_t* index = nullptr);

}  // namespace trustconv
