#include "stylo/analytics.hpp"

#include "stylo/error.hpp"
#include "stylo/rng.hpp"
#include "stylo/text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace stylo {

UniquenessReport uniqueness_from_counts(const std::vector<std::string>& words, const std::vector<std::string>& authors,
                                        const std::vector<std::vector<double>>& counts, std::size_t top_m,
                                        const std::set<std::string>& excluded)
{
    const auto n_authors = authors.size();
    if (n_authors < 2) throw DataError(fmt::format("uniqueness needs at least 2 authors, got {}", n_authors));
    if (counts.size() != n_authors) throw DataError("uniqueness: count rows do not match authors");
    if (top_m == 0) throw ConfigError("uniqueness: top_m must be positive");

    UniquenessReport r;
    r.top_m = top_m;
    r.excluded_terms = excluded;
    r.authors = authors;

    std::vector<std::vector<double>> rel(n_authors, std::vector<double>(words.size(), 0.0));
    r.vocabulary_size.assign(n_authors, 0);
    for (std::size_t a = 0; a < n_authors; ++a) {
        if (counts[a].size() != words.size()) throw DataError("uniqueness: count row has the wrong width");
        const double total = std::accumulate(counts[a].begin(), counts[a].end(), 0.0);
        if (total <= 0.0) throw DataError(fmt::format("uniqueness: author '{}' has no tokens", authors[a]));
        for (std::size_t w = 0; w < words.size(); ++w) {
            rel[a][w] = counts[a][w] / total;
            if (counts[a][w] > 0.0) ++r.vocabulary_size[a];
        }
    }

    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t w = 0; w < words.size(); ++w) {
        if (excluded.contains(words[w])) continue;
        double sum = 0.0;
        for (std::size_t a = 0; a < n_authors; ++a) sum += rel[a][w];
        ranked.emplace_back(sum / static_cast<double>(n_authors), w);
    }
    if (ranked.size() < top_m)
        throw DataError(fmt::format("uniqueness: {} candidate words, fewer than top_m = {}", ranked.size(), top_m));
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(top_m), ranked.end(),
                      [&](const auto& x, const auto& y) {
                          if (x.first != y.first) return x.first > y.first;
                          return words[x.second] < words[y.second];
                      });
    ranked.resize(top_m);

    r.scores.assign(n_authors, 0.0);
    r.z.assign(n_authors, std::vector<double>(top_m, 0.0));
    for (std::size_t k = 0; k < top_m; ++k) {
        const auto w = ranked[k].second;
        r.words.push_back(words[w]);
        const auto& word = words[w];
        if (!word.empty() && word.front() >= 'A' && word.front() <= 'Z') r.flagged_capitalized.push_back(word);

        bool all_equal = true;
        double mu = 0.0;
        for (std::size_t a = 0; a < n_authors; ++a) {
            mu += rel[a][w];
            all_equal = all_equal && rel[a][w] == rel[0][w];
        }
        if (all_equal) continue;
        mu /= static_cast<double>(n_authors);
        double var = 0.0;
        for (std::size_t a = 0; a < n_authors; ++a) var += (rel[a][w] - mu) * (rel[a][w] - mu);
        const double sigma = std::sqrt(var / static_cast<double>(n_authors));
        for (std::size_t a = 0; a < n_authors; ++a) {
            const double z = (rel[a][w] - mu) / sigma;
            r.z[a][k] = z;
            r.scores[a] += std::abs(z);
        }
    }
    return r;
}

UniquenessReport uniqueness_scores(std::span<const Sample> train, std::size_t top_m,
                                   const std::set<std::string>& excluded_terms)
{
    std::map<std::string, std::map<std::string, double>> by_author;
    std::set<std::string> vocab;
    for (const auto& s : train) {
        if (s.author.empty()) throw DataError(fmt::format("sample '{}' has no author", s.sample_id));
        auto& row = by_author[s.author];
        for (const auto tok : split_words(s.text)) {
            auto [it, fresh] = vocab.emplace(tok);
            row[*it] += 1.0;
        }
    }
    std::vector<std::string> words(vocab.begin(), vocab.end());
    std::unordered_map<std::string_view, std::size_t> index;
    for (std::size_t i = 0; i < words.size(); ++i) index.emplace(words[i], i);

    std::vector<std::string> authors;
    std::vector<std::vector<double>> counts;
    for (const auto& [author, row] : by_author) {
        authors.push_back(author);
        auto& dense = counts.emplace_back(words.size(), 0.0);
        for (const auto& [w, c] : row) dense[index.at(w)] = c;
    }
    return uniqueness_from_counts(words, authors, counts, top_m, excluded_terms);
}

void TrialConfig::validate() const
{
    if (n_trials < 1) throw ConfigError("trials: n_trials must be at least 1");
    if (top_m < 1) throw ConfigError("trials: top_m must be at least 1");
    if (!(bin_width > 0.0) || bin_width > 2.0) throw ConfigError("trials: bin_width must be in (0, 2]");
}

UniquenessTrials::UniquenessTrials(std::span<const Sample> train)
{
    std::set<std::string> vocab, authors;
    std::map<std::string, std::string> author_of_play;
    for (const auto& s : train) {
        if (s.author.empty()) throw DataError(fmt::format("sample '{}' has no author", s.sample_id));
        const auto [it, fresh] = author_of_play.emplace(s.play_id, s.author);
        if (!fresh && it->second != s.author)
            throw DataError(fmt::format("play '{}' has samples from two authors", s.play_id));
        authors.insert(s.author);
        for (const auto tok : split_words(s.text)) vocab.emplace(tok);
    }
    if (authors.size() < 3)
        throw DataError(fmt::format("trials need at least 3 authors, got {}", authors.size()));

    words_.assign(vocab.begin(), vocab.end());
    authors_.assign(authors.begin(), authors.end());
    std::unordered_map<std::string_view, std::uint32_t> word_index;
    for (std::size_t i = 0; i < words_.size(); ++i) word_index.emplace(words_[i], static_cast<std::uint32_t>(i));
    std::map<std::string, std::size_t> author_index;
    for (std::size_t i = 0; i < authors_.size(); ++i) author_index.emplace(authors_[i], i);

    play_counts_.assign(authors_.size(), 0);
    std::map<std::string, std::size_t> play_index;
    for (const auto& [play, author] : author_of_play) {
        play_index.emplace(play, plays_.size());
        plays_.push_back(play);
        const auto a = author_index.at(author);
        observed_.push_back(a);
        ++play_counts_[a];
    }

    std::vector<std::map<std::uint32_t, std::uint32_t>> tmp(plays_.size());
    for (const auto& s : train) {
        auto& row = tmp[play_index.at(s.play_id)];
        for (const auto tok : split_words(s.text)) ++row[word_index.at(tok)];
    }
    play_word_counts_.reserve(tmp.size());
    for (const auto& row : tmp) play_word_counts_.emplace_back(row.begin(), row.end());
}

std::vector<std::size_t> UniquenessTrials::random_assignment(std::uint64_t seed, std::size_t trial) const
{
    std::vector<std::size_t> order(plays_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(seed, trial));
    rng.shuffle(std::span(order));

    std::vector<std::size_t> assignment(plays_.size());
    std::size_t pos = 0;
    for (std::size_t a = 0; a < play_counts_.size(); ++a)
        for (std::size_t i = 0; i < play_counts_[a]; ++i) assignment[order[pos++]] = a;
    return assignment;
}

UniquenessTrials::Evaluation UniquenessTrials::evaluate(const std::vector<std::size_t>& assignment, std::size_t top_m,
                                                        const std::set<std::string>& excluded) const
{
    if (assignment.size() != plays_.size()) throw DataError("trials: assignment does not cover every play");
    std::vector<std::vector<double>> counts(authors_.size(), std::vector<double>(words_.size(), 0.0));
    std::vector<double> plays_per_author(authors_.size(), 0.0);
    for (std::size_t p = 0; p < plays_.size(); ++p) {
        const auto a = assignment[p];
        if (a >= authors_.size()) throw DataError("trials: assignment names an unknown author");
        plays_per_author[a] += 1.0;
        for (const auto& [w, c] : play_word_counts_[p]) counts[a][w] += c;
    }

    Evaluation ev;
    ev.scores = uniqueness_from_counts(words_, authors_, counts, top_m, excluded).scores;
    const auto constant = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
    };
    if (constant(plays_per_author) || constant(ev.scores)) {
        ev.degenerate = true;
        return ev;
    }
    ev.rho = correlation(plays_per_author, ev.scores, CorrelationKind::spearman).value;
    return ev;
}

TrialResult UniquenessTrials::run(const TrialConfig& cfg) const
{
    cfg.validate();
    TrialResult res;
    res.authors = authors_;
    res.play_counts = play_counts_;

    const auto observed = evaluate(observed_, cfg.top_m, cfg.excluded_terms);
    res.observed_uniqueness = observed.scores;
    res.observed_rho = observed.rho;
    res.observed_degenerate = observed.degenerate;

    res.mean_synthetic_uniqueness.assign(authors_.size(), 0.0);
    res.rhos.reserve(cfg.n_trials);
    for (std::size_t t = 0; t < cfg.n_trials; ++t) {
        const auto ev = evaluate(random_assignment(cfg.seed, t), cfg.top_m, cfg.excluded_terms);
        res.rhos.push_back(ev.rho);
        if (ev.degenerate) ++res.degenerate_trials;
        for (std::size_t a = 0; a < authors_.size(); ++a) res.mean_synthetic_uniqueness[a] += ev.scores[a];
    }
    for (auto& m : res.mean_synthetic_uniqueness) m /= static_cast<double>(cfg.n_trials);
    res.histogram = correlation_histogram(res.rhos, cfg.bin_width);
    return res;
}

std::vector<HistogramBin> correlation_histogram(std::span<const double> values, double bin_width)
{
    if (!(bin_width > 0.0)) throw ConfigError("histogram: bin_width must be positive");
    const auto n_bins = static_cast<std::size_t>(std::ceil(2.0 / bin_width - 1e-9));
    std::vector<HistogramBin> bins(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i) {
        bins[i].lo = -1.0 + static_cast<double>(i) * bin_width;
        bins[i].hi = std::min(1.0, -1.0 + static_cast<double>(i + 1) * bin_width);
    }
    for (const double v : values) {
        if (!std::isfinite(v) || v < -1.0 || v > 1.0) throw DataError(fmt::format("histogram: value {} outside [-1, 1]", v));
        auto i = static_cast<std::size_t>(std::floor((v + 1.0) / bin_width));
        if (i >= n_bins) i = n_bins - 1;
        ++bins[i].count;
    }
    return bins;
}

} // namespace stylo
