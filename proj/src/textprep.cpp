#include "trustconv/textprep.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "trustconv/bundled.hpp"
#include "trustconv/error.hpp"
#include "trustconv/scale_ranking.hpp"

namespace trustconv {

namespace {

// Apostrophe forms folded to a single word before splitting, so negation
// cues survive as one token ("don't" -> "dont").
const std::unordered_map<std::string_view, std::string_view>& contraction_table() {
  static const std::unordered_map<std::string_view, std::string_view> table = {
      {"don't", "dont"},       {"doesn't", "doesnt"},   {"didn't", "didnt"},
      {"isn't", "isnt"},       {"aren't", "arent"},     {"wasn't", "wasnt"},
      {"weren't", "werent"},   {"can't", "cant"},       {"cannot", "cant"},
      {"won't", "wont"},       {"wouldn't", "wouldnt"}, {"shouldn't", "shouldnt"},
      {"couldn't", "couldnt"}, {"haven't", "havent"},   {"hasn't", "hasnt"},
      {"hadn't", "hadnt"},     {"mustn't", "mustnt"},   {"ain't", "aint"},
  };
  return table;
}

// Latin-1 supplement U+00C0..U+00FF folded to ASCII. Empty entries (the
// multiplication and division signs) act as separators.
constexpr std::array<std::string_view, 64> kLatin1Fold = {
    "a", "a", "a", "a", "a", "a", "ae", "c", "e", "e", "e", "e", "i", "i", "i", "i",
    "d", "n", "o", "o", "o", "o", "o", "",  "o", "u", "u", "u", "u", "y", "th", "ss",
    "a", "a", "a", "a", "a", "a", "ae", "c", "e", "e", "e", "e", "i", "i", "i", "i",
    "d", "n", "o", "o", "o", "o", "o", "",  "o", "u", "u", "u", "u", "y", "th", "y",
};

// Decodes one UTF-8 sequence starting at text[i]; advances i. Invalid bytes
// decode to U+FFFD.
char32_t next_code_point(std::string_view text, std::size_t& i) {
  auto byte = [&](std::size_t at) { return static_cast<unsigned char>(text[at]); };
  unsigned char lead = byte(i);
  int extra = 0;
  char32_t cp = 0;
  if (lead < 0x80) {
    ++i;
    return lead;
  } else if ((lead & 0xE0) == 0xC0) {
    extra = 1;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    extra = 2;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    extra = 3;
    cp = lead & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  if (i + static_cast<std::size_t>(extra) >= text.size()) {
    i = text.size();
    return 0xFFFD;
  }
  for (int n = 1; n <= extra; ++n) {
    unsigned char c = byte(i + static_cast<std::size_t>(n));
    if ((c & 0xC0) != 0x80) {
      i += static_cast<std::size_t>(n);
      return 0xFFFD;
    }
    cp = (cp << 6) | (c & 0x3F);
  }
  i += static_cast<std::size_t>(extra) + 1;
  return cp;
}

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

// Lowercase + fold to ASCII letters, apostrophes and spaces.
std::string fold_ascii(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    char32_t cp = next_code_point(text, i);
    if (cp < 0x80) {
      char c = static_cast<char>(cp);
      if (is_ascii_alpha(c)) {
        out.push_back(ascii_lower(c));
      } else if (c == '\'') {
        out.push_back('\'');
      } else {
        out.push_back(' ');
      }
    } else if (cp == 0x2019 || cp == 0x2018 || cp == 0x02BC) {
      out.push_back('\'');
    } else if (cp >= 0xC0 && cp <= 0xFF && !kLatin1Fold[cp - 0xC0].empty()) {
      out.append(kLatin1Fold[cp - 0xC0]);
    } else {
      out.push_back(' ');
    }
  }
  return out;
}

}  // namespace

std::string normalize_text(std::string_view text) {
  std::string folded = fold_ascii(text);
  std::string out;
  out.reserve(folded.size());
  const auto& table = contraction_table();
  std::size_t i = 0;
  while (i < folded.size()) {
    if (folded[i] == ' ') {
      out.push_back(' ');
      ++i;
      continue;
    }
    std::size_t end = folded.find(' ', i);
    if (end == std::string::npos) end = folded.size();
    std::string_view word(folded.data() + i, end - i);
    // Trim quote marks that act as punctuation around the word.
    std::size_t lead = word.find_first_not_of('\'');
    std::size_t trail = word.find_last_not_of('\'');
    if (lead == std::string_view::npos) {
      out.append(word.size(), ' ');
    } else {
      std::string_view core = word.substr(lead, trail - lead + 1);
      out.append(lead, ' ');
      auto it = table.find(core);
      if (it != table.end()) {
        out.append(it->second);
        out.append(core.size() - it->second.size(), ' ');
      } else {
        out.append(core);
      }
      out.append(word.size() - trail - 1, ' ');
    }
    i = end;
  }
  return out;
}

std::vector<Token> tokenize(std::string_view text) {
  std::string normalized = normalize_text(text);
  std::vector<Token> tokens;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    Token token;
    token.stem = porter_stem(current);
    token.surface = std::move(current);
    token.position = tokens.size();
    tokens.push_back(std::move(token));
    current.clear();
  };
  for (char c : normalized) {
    if (is_ascii_alpha(c)) {
      current.push_back(c);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::vector<Token> remove_stopwords(std::span<const Token> tokens, const WordSet& stoplist) {
  std::vector<Token> kept;
  kept.reserve(tokens.size());
  for (const Token& token : tokens) {
    if (!stoplist.contains(token.surface)) kept.push_back(token);
  }
  return kept;
}

std::vector<std::string> preprocess_text(std::string_view text, const WordSet& stoplist) {
  std::vector<std::string> stems;
  for (const Token& token : tokenize(text)) {
    if (!stoplist.contains(token.surface)) stems.push_back(token.stem);
  }
  return stems;
}

PreprocessedCorpus preprocess_texts(std::span<const std::string> item_texts, const WordSet& stoplist) {
  PreprocessedCorpus out;
  std::map<std::string, std::map<std::string, long long>> surfaces;
  out.streams.reserve(item_texts.size());
  for (const std::string& text : item_texts) {
    std::vector<std::string> stream;
    for (const Token& token : tokenize(text)) {
      if (stoplist.contains(token.surface)) continue;
      ++out.bag.counts[token.stem];
      ++out.bag.total;
      ++surfaces[token.stem][token.surface];
      stream.push_back(token.stem);
    }
    out.streams.push_back(std::move(stream));
  }
  if (out.bag.total == 0) {
    throw Error(ErrorCode::EmptyAfterPreprocessing, "no tokens remain after stopword removal");
  }
  for (const auto& [stem, forms] : surfaces) {
    auto best = forms.begin();
    for (auto it = forms.begin(); it != forms.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    out.display_forms.emplace(stem, best->first);
  }
  return out;
}

PreprocessedCorpus preprocess_corpus(const PromptDatabase& db, const WordSet& stoplist) {
  std::vector<std::string> texts;
  texts.reserve(db.items.size());
  for (const DatabaseItem& entry : db.items) texts.push_back(entry.item.text);
  if (texts.empty()) {
    throw Error(ErrorCode::EmptyAfterPreprocessing, "prompt database has no items");
  }
  return preprocess_texts(texts, stoplist);
}

WordSet parse_word_list(std::string_view text) {
  WordSet words;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    std::string word = line.substr(first, last - first + 1);
    std::transform(word.begin(), word.end(), word.begin(), ascii_lower);
    words.insert(std::move(word));
  }
  return words;
}

WordSet load_word_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read word list " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_word_list(buffer.str());
}

const WordSet& default_stoplist() {
  static const WordSet stoplist = parse_word_list(bundled::file("stoplist.txt"));
  return stoplist;
}

}  // namespace trustconv
