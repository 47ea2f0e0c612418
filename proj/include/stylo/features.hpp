#pragma once

#include "stylo/corpus.hpp"
#include "stylo/vector.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stylo {

inline constexpr std::size_t kUnlimitedVocabulary = std::numeric_limits<std::size_t>::max();

/// Ranked n-gram vocabulary. Terms are ordered by descending training
/// frequency, ties broken by byte-wise lexicographic order.
class Vocabulary {
public:
    Vocabulary() = default;
    Vocabulary(std::vector<std::string> terms, std::vector<int> ngram_sizes, std::size_t size_limit);

    const std::vector<std::string>& terms() const { return terms_; }
    const std::vector<int>& ngram_sizes() const { return ngram_sizes_; }
    std::size_t size_limit() const { return size_limit_; }
    std::size_t size() const { return terms_.size(); }

    std::optional<std::size_t> find(std::string_view term) const;

    /// n-gram order of each term (number of space-separated words).
    int order_of(std::size_t term_index) const { return orders_[term_index]; }

private:
    std::vector<std::string> terms_;
    std::vector<int> ngram_sizes_{1};
    std::size_t size_limit_ = 5000;
    std::vector<int> orders_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Top `size_limit` n-grams over the training samples. Pass
/// kUnlimitedVocabulary to keep every term. Throws ConfigError when
/// size_limit < 1 or an n-gram size is < 1, DataError on an empty set.
Vocabulary build_vocabulary(std::span<const Sample> train, std::size_t size_limit,
                            std::vector<int> ngram_sizes = {1});

/// In-vocabulary counts for one text plus the number of n-grams of each
/// order the text contains (the denominators of relative frequencies).
struct TermCounts {
    SparseVector counts;
    std::vector<std::size_t> totals_by_order; ///< index = n-gram order
};

TermCounts count_terms(const Vocabulary& vocab, std::string_view text);

enum class FeatureKind { counts, tfidf, zscore };

std::string_view to_string(FeatureKind k);
FeatureKind parse_feature_kind(std::string_view s);

/// Fitted feature statistics.
///  - counts: raw in-vocabulary counts, no statistics;
///  - tfidf:  count * idf with idf = ln((1 + N) / (1 + df)) + 1, then the
///            document vector is scaled to unit L2 norm;
///  - zscore: (f - mu) / sigma over relative frequencies
///            f = count / (number of n-grams of the term's order in the text),
///            with population sigma. Terms whose training values are all
///            equal get sigma = 0, are listed in constant_terms and always
///            map to z = 0. A text without tokens maps to the zero vector.
struct FeatureTransform {
    FeatureKind kind = FeatureKind::counts;
    Vocabulary vocabulary;
    std::vector<double> idf;
    std::vector<double> mu;
    std::vector<double> sigma;
    std::vector<std::size_t> constant_terms;
    std::size_t n_train = 0;

    std::size_t dim() const { return vocabulary.size(); }
};

FeatureTransform fit_feature_transform(FeatureKind kind, std::span<const Sample> train, Vocabulary vocabulary);

std::vector<double> apply_feature_transform(const FeatureTransform& xf, std::string_view text);
inline std::vector<double> apply_feature_transform(const FeatureTransform& xf, const Sample& sample)
{
    return apply_feature_transform(xf, sample.text);
}

/// Sparse form of the same values; for zscore the result is dense-valued.
SparseVector apply_sparse(const FeatureTransform& xf, std::string_view text);

/// Relative frequencies over vocabulary order (the input of the z-score).
SparseVector relative_frequencies(const Vocabulary& vocab, std::string_view text);

} // namespace stylo
