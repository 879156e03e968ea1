#include <doctest.h>

#include "trustconv/error.hpp"
#include "trustconv/prompt_gen.hpp"

using namespace trustconv;

namespace {

const PromptTemplate& find_template(PromptLevel level, std::size_t slots) {
  for (const auto& t : bundled_template_bank().templates) {
    if (t.level == level && t.slots.size() == slots) return t;
  }
  throw std::runtime_error("template missing");
}

ClusterSummary summary(std::size_t id, std::string term) {
  ClusterSummary s;
  s.cluster_id = id;
  s.members = {term};
  s.selected_term = std::move(term);
  return s;
}

std::vector<DatabaseItem> items() {
  return {{"s1", {"i01", "The system's actions will have harmful outcomes", Valence::Negative}},
          {"s1", {"i02", "I am confident in the system", Valence::Positive}},
          {"s1", {"i03", "The system is deceptive", Valence::Negative}},
          {"s1", {"i04", "The system is suspicious", Valence::Negative}},
          {"s2", {"i01", "The system is reliable", Valence::Positive}},
          {"s2", {"i02", "The system follows a process", Valence::Neutral}}};
}

}  // namespace

TEST_CASE("placeholders and template validation") {
  CHECK(placeholders("Can you tell me your thoughts on {concept}?") == std::vector<std::string>{"concept"});
  CHECK(placeholders("no slots").empty());
  CHECK_THROWS_AS(PromptTemplate::make(PromptLevel::Conceptual, "On {concept}?", {}), Error);
  CHECK_THROWS_AS(PromptTemplate::make(PromptLevel::Declarative, "Hi {x}?", {"x"}), Error);
  CHECK_NOTHROW(PromptTemplate::make(PromptLevel::Conceptual, "On {concept}?", {"concept"}));
}

TEST_CASE("bundled template bank") {
  const auto& bank = bundled_template_bank();
  CHECK(find_template(PromptLevel::Declarative, 0).pattern ==
        "Can you describe your recent experience interacting with the system?");
  CHECK(find_template(PromptLevel::Interpretive, 1).pattern == "Can you explain what makes you {attitude} it?");
  CHECK(find_template(PromptLevel::Interpretive, 0).pattern == "Could you say more about that?");
  CHECK(find_template(PromptLevel::Conceptual, 1).pattern == "Can you tell me your thoughts on {concept}?");
  CHECK(bank.templates.size() == 5);
}

TEST_CASE("formulate prompts") {
  Prompt p = formulate_prompt(find_template(PromptLevel::Conceptual, 1), {{"concept", "system performance"}}, "cluster:0");
  CHECK(p.text == "Can you tell me your thoughts on system performance?");
  const auto& opening = find_template(PromptLevel::Declarative, 0);
  CHECK(formulate_prompt(opening, {}, "opening").text == opening.pattern);
  try {
    formulate_prompt(find_template(PromptLevel::Conceptual, 1), {}, "cluster:0");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingSlot);
  }
  try {
    formulate_prompt(find_template(PromptLevel::Conceptual, 1), {{"concept", "suspicious behavior"}}, "cluster:0");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LintViolation);
  }
}

TEST_CASE("nondirectiveness lint") {
  const auto& lex = bundled_valence_lexicon();
  Prompt ok{PromptLevel::Conceptual, "Can you tell me your thoughts on system performance?", {}, "", Valence::Neutral};
  CHECK(lint_nondirective(ok, lex).empty());
  Prompt bad{PromptLevel::Conceptual, "Can you tell me your thoughts on suspicious systems?", {}, "", Valence::Neutral};
  auto v = lint_nondirective(bad, lex);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("suspici") != std::string::npos);
  Prompt empty{PromptLevel::Declarative, "", {}, "", Valence::Neutral};
  CHECK(lint_nondirective(empty, lex) == std::vector<std::string>{"empty prompt"});
  // The interpretive follow-up mirrors the respondent's attitude and must pass.
  Prompt follow{PromptLevel::Interpretive, "Can you explain what makes you dislike it?", {}, "", Valence::Neutral};
  CHECK(lint_nondirective(follow, lex).empty());
}

TEST_CASE("valence lexicons") {
  const auto& lex = bundled_valence_lexicon();
  CHECK(lex.positive.size() >= 30);
  CHECK(lex.negative.size() >= 30);
  for (const auto& s : lex.positive) CHECK_FALSE(lex.negative.contains(s));
  CHECK(lex.negative.contains("suspici"));
  CHECK(lex.positive.contains("reliabl"));
}

TEST_CASE("interrogative rewrite of scale items") {
  CHECK(interrogative_clause("The system's actions will have harmful outcomes") ==
        "the system's actions will have harmful outcomes");
  CHECK(interrogative_clause("I am wary of the system.") == "you are wary of the system");
  CHECK(interrogative_clause("I can trust my car") == "you can trust your car");
  CHECK(interrogative_clause("AI output is clear") == "AI output is clear");
}

TEST_CASE("build_prompt_set") {
  std::vector<ClusterSummary> s = {summary(0, "perform"), summary(1, "purpos"), summary(2, "process")};
  auto its = items();
  auto b = build_prompt_set(s, bundled_template_bank(), its, bundled_valence_lexicon(), bundled_concept_display());
  CHECK(b.set.at_level(PromptLevel::Conceptual).size() == 3);
  CHECK(b.set.concept_slots == std::vector<std::string>{"system performance", "system purpose", "system process"});
  CHECK(b.set.conceptual(0).provenance == "cluster:0");
  CHECK(b.set.contains_text("To what extent do you think the system's actions will have harmful outcomes?"));
  CHECK(b.set.opening().text == "Can you describe your recent experience interacting with the system?");
  REQUIRE(b.set.attitude_followup() != nullptr);
  CHECK(b.set.attitude_followup()->text == "Can you explain what makes you dislike it?");
  CHECK(check_prompt_set(b.set, bundled_valence_lexicon()).empty());
  CHECK(b.rejected.empty());

  auto again = build_prompt_set(s, bundled_template_bank(), its, bundled_valence_lexicon(), bundled_concept_display());
  CHECK(prompt_set_json(again.set) == prompt_set_json(b.set));
}

TEST_CASE("valenced selected terms are rejected and reported") {
  std::vector<ClusterSummary> s = {summary(0, "perform"), summary(4, "suspici")};
  auto its = items();
  std::map<std::string, std::string> surfaces{{"suspici", "suspicious"}};
  auto b = build_prompt_set(s, bundled_template_bank(), its, bundled_valence_lexicon(), bundled_concept_display(),
                            surfaces);
  CHECK(b.set.at_level(PromptLevel::Conceptual).size() == 1);
  REQUIRE(b.rejected.size() == 1);
  CHECK(b.rejected[0].provenance == "cluster:4");
  CHECK(b.rejected[0].text == "Can you tell me your thoughts on suspicious?");
}

TEST_CASE("descriptive prompts stay valence balanced") {
  std::vector<ClusterSummary> s = {summary(0, "perform")};
  std::vector<DatabaseItem> negatives;
  for (int i = 0; i < 6; ++i) negatives.push_back({"s", {"n" + std::to_string(i), "The system is harmful", Valence::Negative}});
  negatives.push_back({"s", {"p0", "The system is reliable", Valence::Positive}});
  auto b = build_prompt_set(s, bundled_template_bank(), negatives, bundled_valence_lexicon(), bundled_concept_display());
  int pos = 0, neg = 0;
  for (const Prompt* p : b.set.at_level(PromptLevel::Descriptive)) {
    if (p->valence == Valence::Positive) ++pos;
    if (p->valence == Valence::Negative) ++neg;
  }
  CHECK(std::abs(pos - neg) <= 1);
  CHECK(pos == 1);
}

TEST_CASE("prompt set json round-trips") {
  const PromptSet& d = default_prompt_set();
  CHECK(parse_prompt_set(prompt_set_json(d)) == d);
  CHECK(d.concept_slots.front() == "system performance");
  CHECK(check_prompt_set(d, bundled_valence_lexicon()).empty());
}
