#pragma once

#include <filesystem>

#include "trustconv/textprep.hpp"

namespace trustconv {

/// Stemmed positive and negative attitude words. The same lexicon drives the
/// nondirectiveness lint and respondent intent classification.
struct ValenceLexicon {
  WordSet positive;
  WordSet negative;

  bool contains(std::string_view stem) const { return positive.contains(stem) || negative.contains(stem); }
};

ValenceLexicon load_valence_lexicon(const std::filesystem::path& positive, const std::filesystem::path& negative);
const ValenceLexicon& bundled_valence_lexicon();

/// Surface forms (after contraction folding) that flip the following valence.
const WordSet& bundled_negation_cues();

}  // namespace trustconv
