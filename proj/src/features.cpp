#include "stylo/features.hpp"

#include "stylo/error.hpp"
#include "stylo/text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

namespace stylo {

namespace {

int ngram_order(std::string_view term)
{
    return 1 + static_cast<int>(std::count(term.begin(), term.end(), ' '));
}

std::vector<int> normalized_sizes(std::vector<int> sizes)
{
    if (sizes.empty()) throw ConfigError("ngram_sizes must not be empty");
    for (const int n : sizes)
        if (n < 1) throw ConfigError(fmt::format("ngram size {} must be >= 1", n));
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    return sizes;
}

template <typename F>
void for_each_ngram(const std::vector<std::string_view>& tokens, const std::vector<int>& sizes, F&& f)
{
    for (const int n : sizes) {
        const auto un = static_cast<std::size_t>(n);
        if (tokens.size() < un) continue;
        for (std::size_t i = 0; i + un <= tokens.size(); ++i) f(n, join_ngram(tokens, i, un));
    }
}

} // namespace

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<int> ngram_sizes, std::size_t size_limit)
    : terms_(std::move(terms)), ngram_sizes_(normalized_sizes(std::move(ngram_sizes))), size_limit_(size_limit)
{
    if (terms_.size() > size_limit_) throw DataError("vocabulary larger than its size limit");
    orders_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (!index_.emplace(terms_[i], i).second) throw DataError(fmt::format("duplicate term '{}'", terms_[i]));
        orders_.push_back(ngram_order(terms_[i]));
    }
}

std::optional<std::size_t> Vocabulary::find(std::string_view term) const
{
    const auto it = index_.find(std::string(term));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

Vocabulary build_vocabulary(std::span<const Sample> train, std::size_t size_limit, std::vector<int> ngram_sizes)
{
    if (size_limit < 1) throw ConfigError("vocabulary size_limit must be >= 1");
    ngram_sizes = normalized_sizes(std::move(ngram_sizes));
    if (train.empty()) throw DataError("build_vocabulary: empty training set");

    std::unordered_map<std::string, std::size_t> freq;
    for (const auto& s : train) {
        const auto tokens = split_words(s.text);
        for_each_ngram(tokens, ngram_sizes, [&](int, std::string term) { ++freq[std::move(term)]; });
    }

    std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
    const auto by_rank = [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    };
    if (size_limit < ranked.size()) {
        std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(size_limit), ranked.end(),
                          by_rank);
        ranked.resize(size_limit);
    } else {
        std::sort(ranked.begin(), ranked.end(), by_rank);
    }

    std::vector<std::string> terms;
    terms.reserve(ranked.size());
    for (auto& [t, c] : ranked) terms.push_back(std::move(t));
    return Vocabulary(std::move(terms), std::move(ngram_sizes), size_limit);
}

TermCounts count_terms(const Vocabulary& vocab, std::string_view text)
{
    TermCounts tc;
    const auto& sizes = vocab.ngram_sizes();
    tc.totals_by_order.assign(static_cast<std::size_t>(sizes.back()) + 1, 0);
    const auto tokens = split_words(text);

    std::vector<std::pair<std::uint32_t, double>> hits;
    for_each_ngram(tokens, sizes, [&](int n, const std::string& term) {
        ++tc.totals_by_order[static_cast<std::size_t>(n)];
        if (const auto idx = vocab.find(term)) hits.emplace_back(static_cast<std::uint32_t>(*idx), 1.0);
    });
    std::sort(hits.begin(), hits.end());

    tc.counts.dim = vocab.size();
    for (const auto& [idx, c] : hits) {
        if (!tc.counts.index.empty() && tc.counts.index.back() == idx) {
            tc.counts.value.back() += c;
        } else {
            tc.counts.index.push_back(idx);
            tc.counts.value.push_back(c);
        }
    }
    return tc;
}

SparseVector relative_frequencies(const Vocabulary& vocab, std::string_view text)
{
    auto tc = count_terms(vocab, text);
    for (std::size_t k = 0; k < tc.counts.nnz(); ++k) {
        const auto order = static_cast<std::size_t>(vocab.order_of(tc.counts.index[k]));
        tc.counts.value[k] /= static_cast<double>(tc.totals_by_order[order]);
    }
    return std::move(tc.counts);
}

std::string_view to_string(FeatureKind k)
{
    switch (k) {
    case FeatureKind::counts: return "counts";
    case FeatureKind::tfidf: return "tfidf";
    case FeatureKind::zscore: return "zscore";
    }
    return "counts";
}

FeatureKind parse_feature_kind(std::string_view s)
{
    if (s == "counts") return FeatureKind::counts;
    if (s == "tfidf") return FeatureKind::tfidf;
    if (s == "zscore") return FeatureKind::zscore;
    throw ConfigError(fmt::format("unknown feature kind '{}'", s));
}

FeatureTransform fit_feature_transform(FeatureKind kind, std::span<const Sample> train, Vocabulary vocabulary)
{
    if (train.empty()) throw DataError("fit_feature_transform: empty training set");

    FeatureTransform xf;
    xf.kind = kind;
    xf.vocabulary = std::move(vocabulary);
    xf.n_train = train.size();
    const auto dim = xf.vocabulary.size();
    const auto n = static_cast<double>(train.size());

    if (kind == FeatureKind::tfidf) {
        std::vector<std::size_t> df(dim, 0);
        for (const auto& s : train)
            for (const auto idx : count_terms(xf.vocabulary, s.text).counts.index) ++df[idx];
        xf.idf.resize(dim);
        for (std::size_t t = 0; t < dim; ++t)
            xf.idf[t] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[t]))) + 1.0;
    } else if (kind == FeatureKind::zscore) {
        std::vector<SparseVector> freqs;
        freqs.reserve(train.size());
        for (const auto& s : train) freqs.push_back(relative_frequencies(xf.vocabulary, s.text));

        std::vector<double> sum(dim, 0.0);
        std::vector<std::size_t> nnz(dim, 0);
        std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
        std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
        for (const auto& f : freqs) {
            for (std::size_t k = 0; k < f.nnz(); ++k) {
                const auto t = f.index[k];
                sum[t] += f.value[k];
                ++nnz[t];
                lo[t] = std::min(lo[t], f.value[k]);
                hi[t] = std::max(hi[t], f.value[k]);
            }
        }
        xf.mu.resize(dim);
        for (std::size_t t = 0; t < dim; ++t) {
            if (nnz[t] < train.size()) {
                lo[t] = std::min(lo[t], 0.0);
                hi[t] = std::max(hi[t], 0.0);
            }
            xf.mu[t] = lo[t] == hi[t] ? lo[t] : sum[t] / n;
        }

        std::vector<double> ss(dim, 0.0);
        for (const auto& f : freqs) {
            for (std::size_t k = 0; k < f.nnz(); ++k) {
                const double d = f.value[k] - xf.mu[f.index[k]];
                ss[f.index[k]] += d * d;
            }
        }
        xf.sigma.resize(dim);
        for (std::size_t t = 0; t < dim; ++t) {
            if (lo[t] == hi[t]) {
                xf.sigma[t] = 0.0;
                xf.constant_terms.push_back(t);
                continue;
            }
            // samples where the term is absent contribute (0 - mu)^2 each
            const double absent = static_cast<double>(train.size() - nnz[t]);
            xf.sigma[t] = std::sqrt((ss[t] + absent * xf.mu[t] * xf.mu[t]) / n);
        }
    }
    return xf;
}

SparseVector apply_sparse(const FeatureTransform& xf, std::string_view text)
{
    switch (xf.kind) {
    case FeatureKind::counts: return count_terms(xf.vocabulary, text).counts;
    case FeatureKind::tfidf: {
        auto v = count_terms(xf.vocabulary, text).counts;
        double sq = 0.0;
        for (std::size_t k = 0; k < v.nnz(); ++k) {
            v.value[k] *= xf.idf[v.index[k]];
            sq += v.value[k] * v.value[k];
        }
        if (sq > 0.0) {
            const double inv = 1.0 / std::sqrt(sq);
            for (auto& x : v.value) x *= inv;
        }
        return v;
    }
    case FeatureKind::zscore: return SparseVector::from_dense(apply_feature_transform(xf, text));
    }
    return {};
}

std::vector<double> apply_feature_transform(const FeatureTransform& xf, std::string_view text)
{
    if (xf.kind != FeatureKind::zscore) return apply_sparse(xf, text).to_dense();

    std::vector<double> z(xf.dim(), 0.0);
    // relative frequencies are undefined for a text without tokens
    if (count_words(text) == 0) return z;
    const auto f = relative_frequencies(xf.vocabulary, text).to_dense();
    for (std::size_t t = 0; t < f.size(); ++t)
        if (xf.sigma[t] > 0.0) z[t] = (f[t] - xf.mu[t]) / xf.sigma[t];
    return z;
}

} // namespace stylo
