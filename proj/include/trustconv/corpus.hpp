#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace trustconv {

enum class Domain { Automation, ECommerce, Human };
enum class Construct { Dispositional, HistoryBased, Situational };
enum class Valence { Positive, Negative, Neutral };

// Wire spellings: "automation" | "e-commerce" | "human", etc.
std::string_view to_string(Domain domain);
std::string_view to_string(Construct construct);
std::string_view to_string(Valence valence);
std::optional<Domain> parse_domain(std::string_view text);
std::optional<Construct> parse_construct(std::string_view text);
std::optional<Valence> parse_valence(std::string_view text);

struct ScaleItem {
  std::string item_id;
  std::string text;
  Valence valence = Valence::Neutral;

  bool operator==(const ScaleItem&) const = default;
};

struct Scale {
  std::string scale_id;
  std::string name;
  int year = 0;
  long long citations = 0;
  Domain domain = Domain::Automation;
  Construct construct = Construct::Situational;
  std::vector<ScaleItem> items;

  bool operator==(const Scale&) const = default;
};

/// Immutable after load; safe to share across threads.
struct ScaleCorpus {
  std::vector<Scale> scales;
  std::string source_note;

  const Scale* find(std::string_view scale_id) const;

  bool operator==(const ScaleCorpus&) const = default;
};

struct Violation {
  std::string scale_id;
  std::string field;
  std::string rule;
};

/// Parses the JSON corpus format. Throws MissingScales, DuplicateId or
/// MalformedRecord (message carries the record path or line).
ScaleCorpus parse_corpus(std::string_view json_text);
ScaleCorpus load_corpus(const std::filesystem::path& path);

std::string serialize_corpus(const ScaleCorpus& corpus);
void save_corpus(const ScaleCorpus& corpus, const std::filesystem::path& path);

std::vector<Violation> validate_corpus(const ScaleCorpus& corpus);

ScaleCorpus filter_scales(const ScaleCorpus& corpus, std::optional<Domain> domain,
                          std::optional<Construct> construct);

/// The synthetic mini-corpus shipped with the library.
const ScaleCorpus& bundled_corpus();

}  // namespace trustconv
