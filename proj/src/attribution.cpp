#include "stylo/attribution.hpp"

#include "stylo/error.hpp"
#include "stylo/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace stylo {

Ranking make_ranking(std::vector<std::pair<std::string, double>> scores)
{
    std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    Ranking r;
    r.tie = scores.size() > 1 && scores[0].second == scores[1].second;
    r.scores = std::move(scores);
    return r;
}

// --- cosine delta -------------------------------------------------------

std::vector<AuthorProfile> fit_cosine_delta(std::span<const Sample> train, const FeatureTransform& zscore)
{
    if (zscore.kind != FeatureKind::zscore) throw DataError("cosine delta needs a zscore transform");
    if (train.empty()) throw DataError("fit_cosine_delta: empty training set");

    std::map<std::string, std::pair<std::vector<double>, std::size_t>> acc;
    for (const auto& s : train) {
        auto& [sum, n] = acc[s.author];
        if (sum.empty()) sum.assign(zscore.dim(), 0.0);
        const auto z = apply_feature_transform(zscore, s);
        for (std::size_t t = 0; t < z.size(); ++t) sum[t] += z[t];
        ++n;
    }

    std::vector<AuthorProfile> profiles;
    for (auto& [author, entry] : acc) {
        auto& [sum, n] = entry;
        for (auto& v : sum) v /= static_cast<double>(n);
        profiles.push_back({author, std::move(sum)});
    }
    return profiles;
}

Ranking attribute_cosine_delta(std::span<const double> sample_z, std::span<const AuthorProfile> profiles)
{
    if (profiles.empty()) throw DataError("attribute_cosine_delta: no author profiles");
    std::vector<std::pair<std::string, double>> scores;
    scores.reserve(profiles.size());
    for (const auto& p : profiles) {
        if (p.centroid.size() != sample_z.size())
            throw DataError(fmt::format("cosine delta: sample dimension {} != profile dimension {}",
                                        sample_z.size(), p.centroid.size()));
        scores.emplace_back(p.author, cosine_similarity(sample_z, p.centroid));
    }
    auto r = make_ranking(std::move(scores));
    r.degenerate = norm(sample_z) == 0.0;
    return r;
}

// --- linear models ------------------------------------------------------

std::string_view to_string(LinearKind k)
{
    return k == LinearKind::logistic ? "logistic" : "svm";
}

LinearKind parse_linear_kind(std::string_view s)
{
    if (s == "logistic") return LinearKind::logistic;
    if (s == "svm") return LinearKind::svm;
    throw ConfigError(fmt::format("unknown linear model kind '{}'", s));
}

void LinearHyper::validate() const
{
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be > 0");
    if (!(l2_strength >= 0.0) || !std::isfinite(l2_strength)) throw ConfigError("l2_strength must be >= 0");
    if (learning_rate * l2_strength >= 1.0) throw ConfigError("learning_rate * l2_strength must be < 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

std::vector<double> LinearModel::scores(const SparseVector& x) const
{
    if (x.dim != n_features)
        throw DataError(fmt::format("linear model: input dimension {} != {}", x.dim, n_features));
    std::vector<double> s(bias);
    for (std::size_t c = 0; c < classes.size(); ++c) {
        const double* w = weights.data() + c * n_features;
        double acc = 0.0;
        for (std::size_t k = 0; k < x.nnz(); ++k) acc += w[x.index[k]] * x.value[k];
        s[c] += acc;
    }
    return s;
}

double score_gradient(LinearKind kind, std::span<const double> scores, std::size_t label, std::span<double> dscores)
{
    const auto n = scores.size();
    if (kind == LinearKind::logistic) {
        const double m = *std::max_element(scores.begin(), scores.end());
        double z = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            dscores[c] = std::exp(scores[c] - m);
            z += dscores[c];
        }
        for (std::size_t c = 0; c < n; ++c) dscores[c] /= z;
        dscores[label] -= 1.0;
        return std::log(z) - (scores[label] - m);
    }
    double loss = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        const double t = c == label ? 1.0 : -1.0;
        const double margin = 1.0 - t * scores[c];
        if (margin > 0.0) {
            loss += margin;
            dscores[c] = -t;
        } else {
            dscores[c] = 0.0;
        }
    }
    return loss;
}

namespace {

// Weights are stored as scale * raw so the L2 shrink is O(1) per step.
struct ScaledWeights {
    std::size_t classes;
    std::size_t features;
    std::vector<double> raw;
    double scale = 1.0;

    void scores(const SparseVector& x, std::span<const double> bias, std::span<double> out) const
    {
        for (std::size_t c = 0; c < classes; ++c) {
            const double* w = raw.data() + c * features;
            double acc = 0.0;
            for (std::size_t k = 0; k < x.nnz(); ++k) acc += w[x.index[k]] * x.value[k];
            out[c] = scale * acc + bias[c];
        }
    }

    void shrink(double factor)
    {
        scale *= factor;
        if (scale < 1e-9) {
            for (auto& w : raw) w *= scale;
            scale = 1.0;
        }
    }

    std::vector<double> materialize() const
    {
        std::vector<double> w(raw);
        for (auto& v : w) v *= scale;
        return w;
    }
};

double full_loss(LinearKind kind, const ScaledWeights& w, std::span<const double> bias,
                 std::span<const SparseVector> rows, std::span<const std::size_t> labels, double l2)
{
    std::vector<double> s(w.classes), d(w.classes);
    double loss = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        w.scores(rows[i], bias, s);
        loss += score_gradient(kind, s, labels[i], d);
    }
    loss /= static_cast<double>(rows.size());
    double sq = 0.0;
    for (const double v : w.raw) sq += v * v;
    return loss + 0.5 * l2 * w.scale * w.scale * sq;
}

void check_rows(std::span<const SparseVector> rows)
{
    const auto dim = rows.front().dim;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].dim != dim) throw DataError(fmt::format("row {} has dimension {} != {}", i, rows[i].dim, dim));
        for (const double v : rows[i].value)
            if (!std::isfinite(v)) throw DataError(fmt::format("row {} has a non-finite feature value", i));
    }
}

} // namespace

Objective linear_objective(LinearKind kind, const LinearModel& model, std::span<const SparseVector> rows,
                           std::span<const std::size_t> labels, double l2_strength)
{
    if (rows.size() != labels.size() || rows.empty()) throw DataError("linear_objective: bad batch");
    const auto nc = model.classes.size();
    const auto nf = model.n_features;
    Objective obj;
    obj.grad_weights.assign(nc * nf, 0.0);
    obj.grad_bias.assign(nc, 0.0);

    std::vector<double> d(nc);
    const double inv_n = 1.0 / static_cast<double>(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto s = model.scores(rows[i]);
        obj.loss += score_gradient(kind, s, labels[i], d) * inv_n;
        for (std::size_t c = 0; c < nc; ++c) {
            if (d[c] == 0.0) continue;
            obj.grad_bias[c] += d[c] * inv_n;
            double* g = obj.grad_weights.data() + c * nf;
            for (std::size_t k = 0; k < rows[i].nnz(); ++k) g[rows[i].index[k]] += d[c] * rows[i].value[k] * inv_n;
        }
    }
    double sq = 0.0;
    for (std::size_t j = 0; j < model.weights.size(); ++j) {
        sq += model.weights[j] * model.weights[j];
        obj.grad_weights[j] += l2_strength * model.weights[j];
    }
    obj.loss += 0.5 * l2_strength * sq;
    return obj;
}

LinearModel train_linear(LinearKind kind, std::span<const SparseVector> rows, std::span<const std::string> labels,
                         const LinearHyper& hyper)
{
    hyper.validate();
    if (rows.empty() || rows.size() != labels.size())
        throw DataError(fmt::format("train_linear: {} rows but {} labels", rows.size(), labels.size()));
    check_rows(rows);

    LinearModel model;
    model.kind = kind;
    model.hyper = hyper;
    model.n_features = rows.front().dim;
    model.classes = std::vector<std::string>(labels.begin(), labels.end());
    std::sort(model.classes.begin(), model.classes.end());
    model.classes.erase(std::unique(model.classes.begin(), model.classes.end()), model.classes.end());
    if (model.classes.size() < 2) throw DataError("train_linear: need at least two distinct classes");

    std::vector<std::size_t> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i)
        y[i] = static_cast<std::size_t>(
            std::lower_bound(model.classes.begin(), model.classes.end(), labels[i]) - model.classes.begin());

    const auto nc = model.classes.size();
    const auto nf = model.n_features;
    ScaledWeights w{nc, nf, std::vector<double>(nc * nf, 0.0)};
    model.bias.assign(nc, 0.0);

    std::vector<std::size_t> order(rows.size());
    std::vector<double> s(nc);
    std::vector<double> dbatch;
    const double decay = 1.0 - hyper.learning_rate * hyper.l2_strength;

    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(mix_seed(hyper.seed, epoch));
        rng.shuffle(std::span(order));

        for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
            const auto end = std::min(order.size(), start + hyper.batch_size);
            const auto bsize = end - start;
            dbatch.assign(bsize * nc, 0.0);
            // gradients at the current weights
            for (std::size_t b = 0; b < bsize; ++b) {
                const auto i = order[start + b];
                w.scores(rows[i], model.bias, s);
                score_gradient(kind, s, y[i], std::span(dbatch.data() + b * nc, nc));
            }
            w.shrink(decay);
            const double step = hyper.learning_rate / static_cast<double>(bsize);
            for (std::size_t b = 0; b < bsize; ++b) {
                const auto& x = rows[order[start + b]];
                for (std::size_t c = 0; c < nc; ++c) {
                    const double dc = dbatch[b * nc + c];
                    if (dc == 0.0) continue;
                    model.bias[c] -= step * dc;
                    double* wc = w.raw.data() + c * nf;
                    const double coef = step * dc / w.scale;
                    for (std::size_t k = 0; k < x.nnz(); ++k) wc[x.index[k]] -= coef * x.value[k];
                }
            }
        }
        model.loss_trajectory.push_back(full_loss(kind, w, model.bias, rows, y, hyper.l2_strength));
    }
    model.weights = w.materialize();
    return model;
}

Ranking predict_linear(const LinearModel& model, const SparseVector& x)
{
    const auto s = model.scores(x);
    std::vector<std::pair<std::string, double>> scores;
    scores.reserve(s.size());
    for (std::size_t c = 0; c < s.size(); ++c) scores.emplace_back(model.classes[c], s[c]);
    return make_ranking(std::move(scores));
}

Ranking predict_linear(const LinearModel& model, std::span<const double> x)
{
    return predict_linear(model, SparseVector::from_dense(x));
}

// --- baselines and aggregation ------------------------------------------

std::string_view to_string(BaselineKind k)
{
    return k == BaselineKind::random ? "random" : "most_frequent_author";
}

BaselineKind parse_baseline_kind(std::string_view s)
{
    if (s == "random") return BaselineKind::random;
    if (s == "most_frequent_author" || s == "most_frequent") return BaselineKind::most_frequent_author;
    throw ConfigError(fmt::format("unknown baseline '{}'", s));
}

std::vector<PredictionRecord> baseline_predict(BaselineKind kind, const DatasetSplit& split,
                                               const SampleIndex& samples, std::uint64_t seed)
{
    std::map<std::string, std::set<std::string>> plays_by_author;
    for (const auto& id : split.train) {
        const auto& s = samples.at(id);
        plays_by_author[s.author].insert(s.play_id);
    }
    if (plays_by_author.empty()) throw DataError("baseline_predict: split has no training samples");

    std::vector<std::string> authors;
    std::string most_frequent;
    std::size_t best = 0;
    for (const auto& [author, plays] : plays_by_author) {
        authors.push_back(author);
        if (plays.size() > best) {
            best = plays.size();
            most_frequent = author;
        }
    }

    const std::string tag(to_string(kind));
    Rng rng(derive_seed(seed, "baseline/" + tag));
    std::vector<PredictionRecord> out;
    for (const auto part : {Partition::test_in, Partition::test_out, Partition::disputed, Partition::timeline}) {
        for (const auto& id : split.ids(part)) {
            const auto& s = samples.at(id);
            PredictionRecord r;
            r.sample_id = s.sample_id;
            r.play_id = s.play_id;
            r.gold_author = s.author;
            r.predicted_author =
                kind == BaselineKind::random ? authors[rng.uniform(authors.size())] : most_frequent;
            r.partition = part;
            r.word_count = s.word_count;
            r.model_tag = tag;
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::map<std::string, PlayVote> majority_vote(std::span<const PredictionRecord> preds)
{
    std::map<std::string, std::map<std::string, std::size_t>> counts;
    for (const auto& p : preds) ++counts[p.play_id][p.predicted_author];

    std::map<std::string, PlayVote> out;
    for (const auto& [play, by_author] : counts) {
        PlayVote v;
        for (const auto& [author, n] : by_author) {
            v.total += n;
            if (n > v.votes) {
                v.votes = n;
                v.winner = author;
                v.tie = false;
            } else if (n == v.votes) {
                v.tie = true;
            }
        }
        v.share = static_cast<double>(v.votes) / static_cast<double>(v.total);
        out.emplace(play, std::move(v));
    }
    return out;
}

std::string merged_sample_id(std::string_view play_id, Partition partition)
{
    return fmt::format("{}::merged::{}", play_id, prediction_label(partition));
}

Sample merge_play_text(std::span<const Sample> samples, Partition partition)
{
    if (samples.empty()) throw DataError("merge_play_text: no samples");
    Sample merged;
    merged.play_id = samples.front().play_id;
    merged.author = samples.front().author;
    merged.sample_id = merged_sample_id(merged.play_id, partition);
    for (const auto& s : samples) {
        if (s.play_id != merged.play_id)
            throw DataError(fmt::format("merge_play_text: sample '{}' is not from play '{}'", s.sample_id,
                                        merged.play_id));
        if (!merged.text.empty()) merged.text.push_back(' ');
        merged.text += s.text;
        merged.word_count += s.word_count;
    }
    return merged;
}

} // namespace stylo
