#pragma once

#include "stylo/attribution.hpp"
#include "stylo/corpus.hpp"
#include "stylo/sampling.hpp"
#include "stylo/stats.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace stylo {

// --- accuracy -----------------------------------------------------------

struct Accuracy {
    std::size_t n = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;
    double ci95_halfwidth = 0.0; ///< Wald

    static Accuracy from_counts(std::size_t correct, std::size_t n);
};

struct AccuracyReport {
    std::string partition; ///< "in", "out", "disputed", "timeline" or "test" (in + out)
    Accuracy overall;
    std::map<std::string, Accuracy> by_author; ///< keyed by gold author
    std::map<std::string, Accuracy> by_play;
    std::map<std::string, PlayVote> votes;
    std::size_t plays = 0;
    std::size_t plays_correct = 0; ///< majority-vote winner equals the gold author
    double play_level_accuracy = 0.0;
};

/// One report per partition present in `preds`, followed by a combined
/// "test" report over in + out when either is present. Throws DataError
/// naming the first prediction whose sample_id is not in the split or whose
/// partition disagrees with it.
std::vector<AccuracyReport> accuracy_report(std::span<const PredictionRecord> preds, const SplitIndex& split);

// --- sample length ------------------------------------------------------

struct LengthBin {
    std::size_t lo = 0;
    std::optional<std::size_t> hi; ///< inclusive; empty for the open-ended bin
    std::size_t count = 0;
    std::size_t correct = 0;
    double accuracy = 0.0; ///< 0 for empty bins

    std::string label() const;
};

struct LengthBinReport {
    std::vector<LengthBin> bins;
    double mean_length_correct = 0.0;
    double mean_length_incorrect = 0.0;
    std::size_t n_correct = 0;
    std::size_t n_incorrect = 0;
};

/// Bins [5,14], [15,24], ..., [135,144], [145,150] and >150. Lengths below
/// 5 (possible only in external files) are counted in the first bin.
LengthBinReport length_bin_report(std::span<const PredictionRecord> preds);

// --- confusion and scapegoating -----------------------------------------

inline constexpr std::string_view kUnrecognizedColumn = "(unrecognized)";

struct ConfusionMatrix {
    std::vector<std::string> rows;    ///< gold authors, sorted
    std::vector<std::string> columns; ///< known authors, sorted, then kUnrecognizedColumn
    std::vector<std::vector<std::size_t>> counts;
    std::vector<std::vector<double>> percent; ///< each row sums to 100
};

/// Row-normalized confusion matrix. Columns are the union of gold authors
/// and `known_authors`; any other predicted string lands in the
/// unrecognized column.
ConfusionMatrix confusion_matrix(std::span<const PredictionRecord> preds,
                                 const std::set<std::string>& known_authors = {});

struct ScapegoatReport {
    std::size_t misattributed = 0;
    std::vector<std::pair<std::string, double>> shares; ///< percent, descending, ties by name
    std::size_t k = 2;
    double top_k_share = 0.0;
};

/// Distribution of misattributed predictions over predicted authors.
/// With no misattributions the result has empty shares and top_k_share 0.
ScapegoatReport scapegoat_index(std::span<const PredictionRecord> preds, std::size_t k = 2);

// --- attribution shares -------------------------------------------------

enum class GroupBy { play, author, century };

std::string_view to_string(GroupBy g);
GroupBy parse_group_by(std::string_view s);

struct ShareRow {
    std::size_t n = 0;
    std::vector<std::pair<std::string, double>> shares; ///< percent, descending, ties by name
};

/// Per-group percentages of predicted authors. `author` groups by gold
/// author; `century` needs `play_century` and throws DataError on a play
/// without one.
std::map<std::string, ShareRow> attribution_shares(std::span<const PredictionRecord> preds, GroupBy group_by,
                                                   const std::map<std::string, int>& play_century = {});

// --- uniqueness ---------------------------------------------------------

struct UniquenessReport {
    std::size_t top_m = 100;
    std::set<std::string> excluded_terms;
    std::vector<std::string> words;   ///< the top_m scored words, by rank
    std::vector<std::string> authors; ///< sorted
    std::vector<double> scores;       ///< per author: sum of |z| over words
    std::vector<std::vector<double>> z; ///< author x word
    /// Scored words starting with an upper-case letter (possible named
    /// entities, reported for manual screening; not excluded).
    std::vector<std::string> flagged_capitalized;
    std::vector<std::size_t> vocabulary_size; ///< per author distinct tokens (auxiliary)
};

/// Author uniqueness over common words:
///  1. per author, relative frequency of every word over the author's
///     concatenated text;
///  2. rank words (excluded terms removed) by the mean of those relative
///     frequencies across authors, ties by name, and keep top_m;
///  3. per word, z-score the authors' relative frequencies with the mean
///     and population standard deviation across authors (z = 0 when all
///     authors agree exactly);
///  4. score = sum of |z| over the top_m words.
/// Ranking by author-normalized frequency keeps one prolific author from
/// choosing the word list. Throws DataError with fewer than two authors or
/// fewer than top_m candidate words.
UniquenessReport uniqueness_scores(std::span<const Sample> train, std::size_t top_m,
                                   const std::set<std::string>& excluded_terms);

struct TrialConfig {
    std::size_t n_trials = 1000;
    std::uint64_t seed = 0;
    std::size_t top_m = 100;
    std::set<std::string> excluded_terms;
    double bin_width = 0.05;

    void validate() const;
};

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
};

struct TrialResult {
    std::vector<std::string> authors;            ///< real authors, sorted
    std::vector<std::size_t> play_counts;        ///< per author; synthetic author i keeps play_counts[i]
    std::vector<double> observed_uniqueness;     ///< per real author
    double observed_rho = 0.0;
    bool observed_degenerate = false;
    std::vector<double> rhos;                    ///< one per trial
    std::size_t degenerate_trials = 0;           ///< trials whose rho was undefined (recorded as 0)
    std::vector<HistogramBin> histogram;         ///< over [-1, 1]
    std::vector<double> mean_synthetic_uniqueness; ///< per synthetic author, averaged over trials
};

/// Word counts per play, prepared once for repeated re-assignment of plays
/// to (synthetic) authors.
class UniquenessTrials {
public:
    /// Throws DataError with fewer than three authors.
    explicit UniquenessTrials(std::span<const Sample> train);

    /// play index -> author index for the true labels.
    const std::vector<std::size_t>& observed_assignment() const { return observed_; }

    /// Trial `t`: plays (sorted by id) shuffled with an Rng seeded from
    /// (seed, t); the first play_counts[0] go to synthetic author 0, the
    /// next play_counts[1] to author 1, and so on.
    std::vector<std::size_t> random_assignment(std::uint64_t seed, std::size_t trial) const;

    struct Evaluation {
        std::vector<double> scores;
        double rho = 0.0;
        bool degenerate = false;
    };

    /// Uniqueness per author under an assignment and Spearman's rho between
    /// play counts and those scores (0 and degenerate when either side is
    /// constant).
    Evaluation evaluate(const std::vector<std::size_t>& assignment, std::size_t top_m,
                        const std::set<std::string>& excluded) const;

    TrialResult run(const TrialConfig& cfg) const;

    const std::vector<std::string>& authors() const { return authors_; }
    const std::vector<std::string>& plays() const { return plays_; }
    const std::vector<std::size_t>& play_counts() const { return play_counts_; }

private:
    std::vector<std::string> words_;
    std::vector<std::string> authors_;
    std::vector<std::string> plays_;
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> play_word_counts_; ///< per play: (word, count)
    std::vector<std::size_t> observed_;
    std::vector<std::size_t> play_counts_;
};

/// Binned histogram of values in [-1, 1]; 1.0 falls in the last bin.
std::vector<HistogramBin> correlation_histogram(std::span<const double> values, double bin_width);

/// Uniqueness from per-author word count rows (dense over `words`).
/// Shared by uniqueness_scores and the trials.
UniquenessReport uniqueness_from_counts(const std::vector<std::string>& words,
                                        const std::vector<std::string>& authors,
                                        const std::vector<std::vector<double>>& counts, std::size_t top_m,
                                        const std::set<std::string>& excluded);

// --- timeline -----------------------------------------------------------

struct TimelineCentury {
    int century = 0;
    std::size_t n_samples = 0;
    std::size_t n_source_authors = 0;
    std::size_t n_plays = 0;
    /// target -> mean over source authors of the fraction of that author's
    /// samples predicted as the target
    std::map<std::string, double> average_share;
    /// target -> fraction of the century's plays whose majority vote is the target
    std::map<std::string, double> play_vote_share;
};

struct TimelineReport {
    std::vector<std::string> targets;
    std::vector<TimelineCentury> centuries; ///< ascending
};

/// Source author = gold_author. With no targets given, every predicted
/// author is a target. Throws DataError for a play without a century.
TimelineReport timeline_report(std::span<const PredictionRecord> preds, const std::map<std::string, int>& play_century,
                               std::vector<std::string> target_authors = {});

} // namespace stylo
