#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace trustconv {

struct PromptDatabase;

/// Sorted set of lowercase words; used for stoplists, lexicons and negation cues.
using WordSet = std::set<std::string, std::less<>>;

struct Token {
  std::string surface;  // lowercased, contraction-folded form
  std::string stem;
  std::size_t position = 0;
};

struct BagOfWords {
  std::map<std::string, long long> counts;
  long long total = 0;
};

/// Token streams for every item plus the pooled counts. Streams never merge
/// across items so co-occurrence windows stop at item boundaries.
struct PreprocessedCorpus {
  BagOfWords bag;
  std::vector<std::vector<std::string>> streams;
  // Most frequent surface form per stem (ties: lexicographically smallest).
  std::map<std::string, std::string> display_forms;
};

/// Lowercase, fold Latin-1 letters to ASCII and apply the contraction table.
/// Characters with no ASCII fold become spaces.
std::string normalize_text(std::string_view text);

std::vector<Token> tokenize(std::string_view text);

std::vector<Token> remove_stopwords(std::span<const Token> tokens, const WordSet& stoplist);

/// Classic Porter stemmer, following the author's reference implementation.
std::string porter_stem(std::string_view word);

/// Tokenize, drop stopwords and stem. Returns the stems in order.
std::vector<std::string> preprocess_text(std::string_view text, const WordSet& stoplist);

PreprocessedCorpus preprocess_texts(std::span<const std::string> item_texts, const WordSet& stoplist);

/// Throws EmptyAfterPreprocessing when no token survives.
PreprocessedCorpus preprocess_corpus(const PromptDatabase& db, const WordSet& stoplist);

/// One entry per line; blank lines and `#` comments ignored; entries lowercased.
WordSet parse_word_list(std::string_view text);
WordSet load_word_list(const std::filesystem::path& path);

const WordSet& default_stoplist();

}  // namespace trustconv
