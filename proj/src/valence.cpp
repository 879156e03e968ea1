#include "trustconv/valence.hpp"

#include "trustconv/bundled.hpp"

namespace trustconv {

ValenceLexicon load_valence_lexicon(const std::filesystem::path& positive, const std::filesystem::path& negative) {
  return {load_word_list(positive), load_word_list(negative)};
}

const ValenceLexicon& bundled_valence_lexicon() {
  static const ValenceLexicon lexicon{parse_word_list(bundled::file("valence_positive.txt")),
                                      parse_word_list(bundled::file("valence_negative.txt"))};
  return lexicon;
}

const WordSet& bundled_negation_cues() {
  static const WordSet cues = parse_word_list(bundled::file("negation.txt"));
  return cues;
}

}  // namespace trustconv
