#pragma once

#include "stylo/corpus.hpp"
#include "stylo/features.hpp"
#include "stylo/sampling.hpp"
#include "stylo/vector.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stylo {

/// Authors ranked by score, best first. Equal scores are ordered by author
/// name; `tie` is set when the top two scores are exactly equal and
/// `degenerate` when the input carried no signal (zero-norm vector or all
/// scores equal because the model is empty).
struct Ranking {
    std::vector<std::pair<std::string, double>> scores;
    bool tie = false;
    bool degenerate = false;

    const std::string& best() const { return scores.front().first; }
};

/// Sorts (author, score) pairs into a Ranking with the lexicographic tie rule.
Ranking make_ranking(std::vector<std::pair<std::string, double>> scores);

// --- cosine delta -------------------------------------------------------

struct AuthorProfile {
    std::string author;
    std::vector<double> centroid; ///< mean training z-vector
};

/// One centroid per author (sorted by author). Throws DataError unless the
/// transform is a z-score transform with dimensions matching the samples.
std::vector<AuthorProfile> fit_cosine_delta(std::span<const Sample> train, const FeatureTransform& zscore);

/// Ranks authors by cosine similarity between `sample_z` and each centroid.
/// A zero-norm sample scores 0 against everyone and is flagged degenerate.
Ranking attribute_cosine_delta(std::span<const double> sample_z, std::span<const AuthorProfile> profiles);

// --- linear models ------------------------------------------------------

enum class LinearKind { logistic, svm };

std::string_view to_string(LinearKind k);
LinearKind parse_linear_kind(std::string_view s);

struct LinearHyper {
    double learning_rate = 0.1;
    double l2_strength = 1e-4;
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Linear classifier over `classes` (sorted author names).
///
/// logistic: multinomial softmax cross-entropy;
/// svm:      one-vs-rest hinge loss max(0, 1 - t_c * s_c) with t_c = +-1.
/// Both minimize mean loss + (l2 / 2) * ||W||^2 (biases unpenalized).
struct LinearModel {
    LinearKind kind = LinearKind::logistic;
    std::vector<std::string> classes;
    std::size_t n_features = 0;
    std::vector<double> weights; ///< row-major, classes x n_features
    std::vector<double> bias;
    LinearHyper hyper;
    std::vector<double> loss_trajectory; ///< full objective after each epoch

    std::span<const double> row(std::size_t c) const
    {
        return {weights.data() + c * n_features, n_features};
    }
    std::vector<double> scores(const SparseVector& x) const;
};

/// Per-example derivative of the loss with respect to the class scores.
/// Returns the loss; fills `dscores` (size = number of classes).
double score_gradient(LinearKind kind, std::span<const double> scores, std::size_t label,
                      std::span<double> dscores);

/// Full objective and its (sub)gradient on a batch.
struct Objective {
    double loss = 0.0;
    std::vector<double> grad_weights;
    std::vector<double> grad_bias;
};

Objective linear_objective(LinearKind kind, const LinearModel& model, std::span<const SparseVector> rows,
                           std::span<const std::size_t> labels, double l2_strength);

/// Mini-batch SGD from zero weights. Each epoch visits the examples in an
/// order given by an Rng seeded from (hyper.seed, epoch); each step uses the
/// gradient at the current weights: W <- (1 - lr * l2) W - lr * mean batch
/// gradient. batch_size >= rows gives full-batch gradient descent.
/// Throws DataError on fewer than two classes, size mismatch or non-finite
/// features.
LinearModel train_linear(LinearKind kind, std::span<const SparseVector> rows, std::span<const std::string> labels,
                         const LinearHyper& hyper);

Ranking predict_linear(const LinearModel& model, const SparseVector& x);
Ranking predict_linear(const LinearModel& model, std::span<const double> x);

// --- prediction records -------------------------------------------------

/// One model guess; the exchange format between attributors and analytics.
struct PredictionRecord {
    std::string sample_id;
    std::string play_id;
    std::string gold_author;
    std::string predicted_author;
    Partition partition = Partition::test_in; ///< test_in, test_out, disputed or timeline
    std::size_t word_count = 0;
    std::string model_tag;

    bool correct() const { return gold_author == predicted_author; }
};

enum class BaselineKind { random, most_frequent_author };

std::string_view to_string(BaselineKind k);
BaselineKind parse_baseline_kind(std::string_view s);

/// Predicts every test_in, test_out, disputed and timeline sample of the
/// split. Candidate authors are those with training samples. `random`
/// draws uniformly from them with an Rng seeded from `seed`;
/// `most_frequent_author` always names the author with the most plays
/// contributing training samples (ties by name).
std::vector<PredictionRecord> baseline_predict(BaselineKind kind, const DatasetSplit& split,
                                               const SampleIndex& samples, std::uint64_t seed);

struct PlayVote {
    std::string winner;
    double share = 0.0;
    std::size_t votes = 0;
    std::size_t total = 0;
    bool tie = false;
};

/// Modal predicted author per play; ties go to the lexicographically first
/// author and are flagged.
std::map<std::string, PlayVote> majority_vote(std::span<const PredictionRecord> preds);

/// Concatenates the samples of one play (in the given order) into a single
/// long document with id `<play_id>::merged::<partition>`. Throws DataError
/// on an empty list or mixed play ids.
Sample merge_play_text(std::span<const Sample> samples, Partition partition);

std::string merged_sample_id(std::string_view play_id, Partition partition);

} // namespace stylo
