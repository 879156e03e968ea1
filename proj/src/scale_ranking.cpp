#include "trustconv/scale_ranking.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

#include "trustconv/bundled.hpp"
#include "trustconv/error.hpp"

namespace trustconv {

DomainLexicon parse_domain_lexicon(Domain domain, std::string_view text) {
  DomainLexicon lexicon{domain, parse_word_list(text)};
  if (lexicon.terms.empty()) {
    throw Error(ErrorCode::InvalidArgument, "domain lexicon for " + std::string(to_string(domain)) + " is empty");
  }
  return lexicon;
}

DomainLexicon load_domain_lexicon(Domain domain, const std::filesystem::path& path) {
  DomainLexicon lexicon{domain, load_word_list(path)};
  if (lexicon.terms.empty()) {
    throw Error(ErrorCode::InvalidArgument, "domain lexicon " + path.string() + " is empty");
  }
  return lexicon;
}

const DomainLexicon& bundled_domain_lexicon(Domain domain) {
  static const std::map<Domain, DomainLexicon> lexicons = [] {
    std::map<Domain, DomainLexicon> out;
    for (Domain d : {Domain::Automation, Domain::ECommerce, Domain::Human}) {
      std::string name = "lexicons/" + std::string(to_string(d)) + ".txt";
      out.emplace(d, parse_domain_lexicon(d, bundled::file(name)));
    }
    return out;
  }();
  return lexicons.at(domain);
}

double smoothed_log_odds(std::size_t k, std::size_t n) {
  double kk = static_cast<double>(k);
  double nn = static_cast<double>(n);
  return std::log((kk + 0.5) / (nn - kk + 0.5));
}

double domain_log_odds(const Scale& scale, const DomainLexicon& lexicon, const WordSet& stoplist) {
  if (lexicon.terms.empty()) throw Error(ErrorCode::InvalidArgument, "domain lexicon is empty");
  std::size_t n = 0;
  std::size_t k = 0;
  for (const ScaleItem& item : scale.items) {
    for (const std::string& stem : preprocess_text(item.text, stoplist)) {
      ++n;
      if (lexicon.terms.contains(stem)) ++k;
    }
  }
  if (n == 0) {
    throw Error(ErrorCode::EmptyScaleText, "scale '" + scale.scale_id + "' has no tokens after preprocessing");
  }
  return smoothed_log_odds(k, n);
}

std::vector<RankedScale> rank_scales(std::span<const Scale> scales, std::span<const double> scores,
                                     std::size_t top_n) {
  if (top_n == 0) throw Error(ErrorCode::InvalidArgument, "top_n must be at least 1");
  if (scores.size() != scales.size()) {
    throw Error(ErrorCode::InvalidArgument, "one score per scale is required");
  }
  std::vector<std::size_t> order(scales.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    if (scales[a].citations != scales[b].citations) return scales[a].citations > scales[b].citations;
    return scales[a].scale_id < scales[b].scale_id;
  });
  std::size_t keep = std::min(top_n, order.size());
  std::vector<RankedScale> ranked;
  ranked.reserve(keep);
  for (std::size_t r = 0; r < keep; ++r) {
    const Scale& scale = scales[order[r]];
    ranked.push_back({scale.scale_id, scores[order[r]], scale.citations, r + 1});
  }
  return ranked;
}

PromptDatabase build_prompt_database(std::span<const RankedScale> domain_track,
                                     std::span<const RankedScale> construct_track,
                                     const ScaleCorpus& corpus, std::span<const Scale> extra) {
  PromptDatabase db;
  std::map<std::string, Scale> members;
  auto add_track = [&](std::span<const RankedScale> track, std::vector<std::string>& provenance) {
    for (const RankedScale& ranked : track) {
      const Scale* scale = corpus.find(ranked.scale_id);
      if (scale == nullptr) {
        throw Error(ErrorCode::UnknownScaleId, "ranked scale '" + ranked.scale_id + "' is not in the corpus");
      }
      members.emplace(scale->scale_id, *scale);
      provenance.push_back(scale->scale_id);
    }
  };
  add_track(domain_track, db.provenance.domain_track);
  add_track(construct_track, db.provenance.construct_track);

  if (!extra.empty()) {
    ScaleCorpus extras{{extra.begin(), extra.end()}, ""};
    auto violations = validate_corpus(extras);
    if (!violations.empty()) {
      const Violation& v = violations.front();
      throw Error(ErrorCode::MalformedRecord, "extra scale '" + v.scale_id + "': " + v.field + " violates " + v.rule);
    }
    for (const Scale& scale : extra) {
      if (!members.emplace(scale.scale_id, scale).second) {
        throw Error(ErrorCode::DuplicateId, "extra scale '" + scale.scale_id + "' is already selected");
      }
      db.provenance.manual.push_back(scale.scale_id);
    }
  }

  for (auto& [id, scale] : members) {
    for (const ScaleItem& item : scale.items) db.items.push_back({id, item});
    db.scales.push_back(std::move(scale));
  }
  return db;
}

RankingReport select_scales(const ScaleCorpus& corpus, const SelectionOptions& options,
                            const DomainLexicon& lexicon, const WordSet& stoplist) {
  RankingReport report;
  report.domain = options.domain;
  report.construct = options.construct;

  ScaleCorpus in_domain = filter_scales(corpus, options.domain, std::nullopt);
  if (in_domain.scales.empty()) {
    throw Error(ErrorCode::EmptySelection, "no scales in domain '" + std::string(to_string(options.domain)) + "'");
  }
  std::map<std::string, double> log_odds;
  std::vector<double> scores;
  for (const Scale& scale : in_domain.scales) {
    double score = domain_log_odds(scale, lexicon, stoplist);
    log_odds.emplace(scale.scale_id, score);
    scores.push_back(score);
  }
  report.log_odds = rank_scales(in_domain.scales, scores, in_domain.scales.size());

  // Citation ranks keep the log-odds score in the report for reference.
  auto by_citations = [&](const std::vector<Scale>& scales, std::size_t top_n) {
    std::vector<double> citations;
    for (const Scale& scale : scales) citations.push_back(static_cast<double>(scale.citations));
    auto ranked = rank_scales(scales, citations, top_n);
    for (RankedScale& r : ranked) r.score = log_odds.at(r.scale_id);
    return ranked;
  };

  std::vector<Scale> ordered;
  for (const RankedScale& r : report.log_odds) ordered.push_back(*in_domain.find(r.scale_id));
  report.domain_track = by_citations(ordered, options.top_domain);

  if (options.construct) {
    ScaleCorpus subset = filter_scales(in_domain, std::nullopt, options.construct);
    if (!subset.scales.empty()) report.construct_track = by_citations(subset.scales, options.top_construct);
  }
  return report;
}

namespace {

nlohmann::json track_json(const std::vector<RankedScale>& track) {
  nlohmann::json out = nlohmann::json::array();
  for (const RankedScale& r : track) {
    out.push_back({{"scale_id", r.scale_id}, {"score", r.score}, {"citations", r.citations}, {"rank", r.rank}});
  }
  return out;
}

}  // namespace

std::string ranking_report_json(const RankingReport& report) {
  nlohmann::json root;
  root["domain"] = to_string(report.domain);
  root["construct"] = report.construct ? nlohmann::json(to_string(*report.construct)) : nlohmann::json(nullptr);
  root["log_odds"] = track_json(report.log_odds);
  root["domain_track"] = track_json(report.domain_track);
  root["construct_track"] = track_json(report.construct_track);
  return root.dump(2) + "\n";
}

}  // namespace trustconv
