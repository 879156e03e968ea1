#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "trustconv/corpus.hpp"
#include "trustconv/textprep.hpp"

namespace trustconv {

/// Stemmed, lowercase terms marking text as belonging to a trust domain.
struct DomainLexicon {
  Domain domain = Domain::Automation;
  WordSet terms;
};

DomainLexicon parse_domain_lexicon(Domain domain, std::string_view text);
DomainLexicon load_domain_lexicon(Domain domain, const std::filesystem::path& path);
const DomainLexicon& bundled_domain_lexicon(Domain domain);

/// ln((k + 0.5) / (n - k + 0.5)) for k domain tokens out of n.
double smoothed_log_odds(std::size_t k, std::size_t n);

/// Log-odds that a preprocessed token of the scale's items is a lexicon term.
/// Throws EmptyScaleText when no token survives preprocessing.
double domain_log_odds(const Scale& scale, const DomainLexicon& lexicon,
                       const WordSet& stoplist = default_stoplist());

struct RankedScale {
  std::string scale_id;
  double score = 0.0;
  long long citations = 0;
  std::size_t rank = 0;

  bool operator==(const RankedScale&) const = default;
};

/// Sorts by (score desc, citations desc, scale_id asc) and keeps the first
/// min(top_n, |scales|) with ranks 1..n. `scores[i]` belongs to `scales[i]`.
std::vector<RankedScale> rank_scales(std::span<const Scale> scales, std::span<const double> scores,
                                     std::size_t top_n);

struct DatabaseItem {
  std::string scale_id;
  ScaleItem item;
};

struct PromptDatabase {
  std::vector<Scale> scales;  // sorted by scale_id
  std::vector<DatabaseItem> items;
  struct Provenance {
    std::vector<std::string> domain_track;
    std::vector<std::string> construct_track;
    std::vector<std::string> manual;
  } provenance;
};

/// Union of both tracks plus `extra`. Throws UnknownScaleId for a ranked id
/// missing from the corpus, DuplicateId for an extra that collides with a
/// member, MalformedRecord for an extra that fails validation.
PromptDatabase build_prompt_database(std::span<const RankedScale> domain_track,
                                     std::span<const RankedScale> construct_track,
                                     const ScaleCorpus& corpus, std::span<const Scale> extra = {});

/// Output of the scale-selection steps, serialisable as the ranking report.
struct RankingReport {
  Domain domain = Domain::Automation;
  std::optional<Construct> construct;
  std::vector<RankedScale> log_odds;         // every domain scale by lexicon log-odds
  std::vector<RankedScale> domain_track;     // re-ranked by citations, top-n
  std::vector<RankedScale> construct_track;  // construct subset by citations, top-m
};

struct SelectionOptions {
  Domain domain = Domain::Automation;
  std::optional<Construct> construct = Construct::Situational;
  std::size_t top_domain = 9;
  std::size_t top_construct = 3;
};

/// Filter by domain, rank by log-odds, then by citations; rank the construct
/// subset by citations. Throws EmptySelection when no scale matches the domain.
RankingReport select_scales(const ScaleCorpus& corpus, const SelectionOptions& options,
                            const DomainLexicon& lexicon, const WordSet& stoplist = default_stoplist());

std::string ranking_report_json(const RankingReport& report);

}  // namespace trustconv
