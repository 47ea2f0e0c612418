#pragma once

// Synthetic corpora for tests and the acceptance suite.

#include "stylo/corpus.hpp"
#include "stylo/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace synth {

/// Word list "w000", "w001", ...
std::vector<std::string> lexicon(std::size_t n);

/// Cumulative distribution over a lexicon.
struct WordDist {
    std::vector<double> cdf;

    static WordDist from_weights(const std::vector<double>& w);
    std::size_t draw(stylo::Rng& rng) const;
};

/// Zipf-shaped background plus a block of `signature` words owned by author
/// `index` that together receive `boost` of the probability mass.
WordDist author_dist(std::size_t vocab, std::size_t index, std::size_t n_authors, std::size_t signature, double boost);

std::string text(stylo::Rng& rng, const WordDist& dist, const std::vector<std::string>& words, std::size_t n_words);

struct PlaySpec {
    std::string author;
    std::size_t author_index = 0;
    std::size_t n_plays = 1;
};

/// Plays named "<author>-p<k>"; each holds `samples_per_play` samples of
/// roughly `words` words. Sample ids follow make_sample_id.
std::vector<stylo::SegmentedPlay> plays(const std::vector<PlaySpec>& spec, std::size_t samples_per_play,
                                        std::size_t words, std::size_t vocab, std::size_t signature, double boost,
                                        std::uint64_t seed);

std::vector<stylo::Sample> flatten(const std::vector<stylo::SegmentedPlay>& plays);

/// Author names "A00", "A01", ... with the given play counts.
std::vector<PlaySpec> authors_with_counts(const std::vector<std::size_t>& counts);

/// Play counts of the 23 authors in the reference corpus (sum 235).
const std::vector<std::size_t>& reference_play_counts();

} // namespace synth
