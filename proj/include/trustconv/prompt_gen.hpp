#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trustconv/corpus.hpp"
#include "trustconv/scale_ranking.hpp"
#include "trustconv/summarization.hpp"
#include "trustconv/valence.hpp"

namespace trustconv {

/// Ordered from most directive to least directive.
enum class PromptLevel { Descriptive, Conceptual, Declarative, Interpretive };

std::string_view to_string(PromptLevel level);
std::optional<PromptLevel> parse_prompt_level(std::string_view text);

using SlotValues = std::map<std::string, std::string>;

struct PromptTemplate {
  PromptLevel level = PromptLevel::Declarative;
  std::string pattern;
  std::vector<std::string> slots;

  /// Checks that placeholders and declared slots agree and that declarative
  /// templates carry no slots. Throws InvalidArgument.
  static PromptTemplate make(PromptLevel level, std::string pattern, std::vector<std::string> slots);
};

/// `{name}` placeholders in order of first appearance.
std::vector<std::string> placeholders(std::string_view pattern);

struct TemplateBank {
  std::vector<PromptTemplate> templates;
};

TemplateBank parse_template_bank(std::string_view json_text);
TemplateBank load_template_bank(const std::filesystem::path& path);
const TemplateBank& bundled_template_bank();

struct Prompt {
  PromptLevel level = PromptLevel::Declarative;
  std::string text;
  SlotValues slot_values;
  std::string provenance;  // "opening", "followup", "cluster:<id>" or "item:<scale>/<item>"
  Valence valence = Valence::Neutral;  // item annotation for descriptive prompts

  bool operator==(const Prompt&) const = default;
};

/// Empty list means the prompt passes. Descriptive prompts are only checked
/// for emptiness and leftover placeholders.
std::vector<std::string> lint_nondirective(const Prompt& prompt, const ValenceLexicon& lexicon);

/// Substitutes every slot. Throws MissingSlot, InvalidArgument for slots the
/// template does not declare, and LintViolation.
Prompt formulate_prompt(const PromptTemplate& tmpl, const SlotValues& slot_values, std::string provenance,
                        const ValenceLexicon& lexicon = bundled_valence_lexicon(), Valence valence = Valence::Neutral);

struct PromptSet {
  std::string id;
  std::vector<Prompt> prompts;  // grouped by level, in level order
  std::vector<std::string> concept_slots;

  std::vector<const Prompt*> at_level(PromptLevel level) const;
  const Prompt& opening() const;
  /// Interpretive prompt mirroring a negative attitude, if present.
  const Prompt* attitude_followup() const;
  /// Interpretive prompt without slots, if present.
  const Prompt* generic_followup() const;
  const Prompt& conceptual(std::size_t slot) const;
  const Prompt& descriptive() const;
  bool contains_text(std::string_view text) const;

  bool operator==(const PromptSet&) const = default;
};

/// Structural and lint invariants; empty when the set is well formed.
std::vector<std::string> check_prompt_set(const PromptSet& set, const ValenceLexicon& lexicon);

struct RejectedPrompt {
  PromptLevel level = PromptLevel::Conceptual;
  std::string text;
  std::string provenance;
  std::vector<std::string> violations;
};

struct PromptSetBuild {
  PromptSet set;
  std::vector<RejectedPrompt> rejected;
};

/// stem -> human-readable concept phrase.
using ConceptDisplay = std::map<std::string, std::string, std::less<>>;

ConceptDisplay parse_concept_display(std::string_view tsv);
const ConceptDisplay& bundled_concept_display();
std::vector<std::string> concept_terms(const ConceptDisplay& display);

struct PromptSetOptions {
  std::string id = "default";
  std::size_t max_descriptive = 6;
  std::string negative_attitude = "dislike";
};

/// One conceptual prompt per distinct selected term, the declarative opening,
/// every interpretive follow-up and a valence-balanced selection of
/// descriptive rewrites of `items`. Prompts failing the lint are dropped and
/// listed in `rejected`. Throws InvalidArgument when the bank lacks a level or
/// no descriptive prompt can be formed.
PromptSetBuild build_prompt_set(std::span<const ClusterSummary> summaries, const TemplateBank& bank,
                                std::span<const DatabaseItem> items, const ValenceLexicon& lexicon,
                                const ConceptDisplay& concept_display,
                                const std::map<std::string, std::string>& surface_forms = {},
                                const PromptSetOptions& options = {});

/// "I am wary of the system." -> "you are wary of the system"
std::string interrogative_clause(std::string_view item_text);

std::string prompt_set_json(const PromptSet& set);
std::string rejected_prompts_json(std::span<const RejectedPrompt> rejected);
PromptSet parse_prompt_set(std::string_view json_text);
PromptSet load_prompt_set(const std::filesystem::path& path);

/// Built from the bundled concept triad (performance, purpose, process) and
/// the bundled automation scales.
const PromptSet& default_prompt_set();

}  // namespace trustconv
