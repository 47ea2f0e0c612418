#include "stylo/analytics.hpp"

#include "stylo/error.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace stylo {

Accuracy Accuracy::from_counts(std::size_t correct, std::size_t n)
{
    Accuracy a;
    a.n = n;
    a.correct = correct;
    a.accuracy = n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n);
    a.ci95_halfwidth = wald_halfwidth(a.accuracy, n);
    return a;
}

namespace {

struct Tally {
    std::size_t correct = 0;
    std::size_t n = 0;

    void add(bool ok)
    {
        ++n;
        correct += ok ? 1 : 0;
    }
    Accuracy finish() const { return Accuracy::from_counts(correct, n); }
};

AccuracyReport build_report(std::string name, const std::vector<const PredictionRecord*>& preds)
{
    AccuracyReport r;
    r.partition = std::move(name);
    Tally all;
    std::map<std::string, Tally> by_author, by_play;
    std::map<std::string, std::string> gold_of_play;
    std::vector<PredictionRecord> copy;
    copy.reserve(preds.size());
    for (const auto* p : preds) {
        const bool ok = p->correct();
        all.add(ok);
        by_author[p->gold_author].add(ok);
        by_play[p->play_id].add(ok);
        gold_of_play.emplace(p->play_id, p->gold_author);
        copy.push_back(*p);
    }
    r.overall = all.finish();
    for (const auto& [k, t] : by_author) r.by_author.emplace(k, t.finish());
    for (const auto& [k, t] : by_play) r.by_play.emplace(k, t.finish());
    r.votes = majority_vote(copy);
    r.plays = r.votes.size();
    for (const auto& [play, v] : r.votes)
        if (v.winner == gold_of_play.at(play)) ++r.plays_correct;
    r.play_level_accuracy = r.plays == 0 ? 0.0 : static_cast<double>(r.plays_correct) / static_cast<double>(r.plays);
    return r;
}

std::vector<std::pair<std::string, double>> percent_shares(const std::map<std::string, std::size_t>& counts,
                                                           std::size_t total)
{
    std::vector<std::pair<std::string, double>> out;
    for (const auto& [name, c] : counts)
        out.emplace_back(name, 100.0 * static_cast<double>(c) / static_cast<double>(total));
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

} // namespace

std::vector<AccuracyReport> accuracy_report(std::span<const PredictionRecord> preds, const SplitIndex& split)
{
    std::map<Partition, std::vector<const PredictionRecord*>> by_part;
    for (const auto& p : preds) {
        const auto part = split.find(p.sample_id);
        if (!part) throw DataError(fmt::format("prediction for unknown sample_id '{}'", p.sample_id));
        if (*part != p.partition)
            throw DataError(fmt::format("sample '{}' is in partition '{}' but the prediction says '{}'", p.sample_id,
                                       to_string(*part), to_string(p.partition)));
        by_part[p.partition].push_back(&p);
    }

    std::vector<AccuracyReport> out;
    std::vector<const PredictionRecord*> test;
    for (const auto& [part, list] : by_part) {
        out.push_back(build_report(std::string(prediction_label(part)), list));
        if (part == Partition::test_in || part == Partition::test_out) test.insert(test.end(), list.begin(), list.end());
    }
    if (!test.empty()) out.push_back(build_report("test", test));
    return out;
}

std::string LengthBin::label() const
{
    return hi ? fmt::format("{}-{}", lo, *hi) : fmt::format(">{}", lo - 1);
}

LengthBinReport length_bin_report(std::span<const PredictionRecord> preds)
{
    LengthBinReport r;
    for (std::size_t lo = 5; lo < 145; lo += 10) r.bins.push_back({lo, lo + 9});
    r.bins.push_back({145, 150});
    r.bins.push_back({151, std::nullopt});

    double sum_ok = 0.0, sum_bad = 0.0;
    for (const auto& p : preds) {
        const auto w = p.word_count;
        std::size_t b = 0;
        if (w > 150) b = r.bins.size() - 1;
        else if (w >= 145) b = r.bins.size() - 2;
        else if (w >= 5) b = (w - 5) / 10;
        ++r.bins[b].count;
        if (p.correct()) {
            ++r.bins[b].correct;
            ++r.n_correct;
            sum_ok += static_cast<double>(w);
        } else {
            ++r.n_incorrect;
            sum_bad += static_cast<double>(w);
        }
    }
    for (auto& bin : r.bins)
        bin.accuracy = bin.count == 0 ? 0.0 : static_cast<double>(bin.correct) / static_cast<double>(bin.count);
    r.mean_length_correct = r.n_correct == 0 ? 0.0 : sum_ok / static_cast<double>(r.n_correct);
    r.mean_length_incorrect = r.n_incorrect == 0 ? 0.0 : sum_bad / static_cast<double>(r.n_incorrect);
    return r;
}

ConfusionMatrix confusion_matrix(std::span<const PredictionRecord> preds, const std::set<std::string>& known_authors)
{
    std::set<std::string> rows, cols(known_authors);
    for (const auto& p : preds) {
        rows.insert(p.gold_author);
        cols.insert(p.gold_author);
    }
    ConfusionMatrix m;
    m.rows.assign(rows.begin(), rows.end());
    m.columns.assign(cols.begin(), cols.end());
    m.columns.emplace_back(kUnrecognizedColumn);

    const auto col_of = [&](const std::string& name) {
        const auto it = cols.find(name);
        return it == cols.end() ? m.columns.size() - 1 : static_cast<std::size_t>(std::distance(cols.begin(), it));
    };
    m.counts.assign(m.rows.size(), std::vector<std::size_t>(m.columns.size(), 0));
    for (const auto& p : preds) {
        const auto r = static_cast<std::size_t>(std::distance(rows.begin(), rows.find(p.gold_author)));
        ++m.counts[r][col_of(p.predicted_author)];
    }
    m.percent.resize(m.rows.size());
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        std::size_t total = 0;
        for (const auto c : m.counts[r]) total += c;
        m.percent[r].resize(m.columns.size());
        for (std::size_t c = 0; c < m.columns.size(); ++c)
            m.percent[r][c] = 100.0 * static_cast<double>(m.counts[r][c]) / static_cast<double>(total);
    }
    return m;
}

ScapegoatReport scapegoat_index(std::span<const PredictionRecord> preds, std::size_t k)
{
    ScapegoatReport r;
    r.k = k;
    std::map<std::string, std::size_t> counts;
    for (const auto& p : preds) {
        if (p.correct()) continue;
        ++counts[p.predicted_author];
        ++r.misattributed;
    }
    if (r.misattributed == 0) return r;
    r.shares = percent_shares(counts, r.misattributed);
    for (std::size_t i = 0; i < k && i < r.shares.size(); ++i) r.top_k_share += r.shares[i].second;
    return r;
}

std::string_view to_string(GroupBy g)
{
    switch (g) {
    case GroupBy::play: return "play";
    case GroupBy::author: return "author";
    case GroupBy::century: return "century";
    }
    return "play";
}

GroupBy parse_group_by(std::string_view s)
{
    if (s == "play") return GroupBy::play;
    if (s == "author") return GroupBy::author;
    if (s == "century") return GroupBy::century;
    throw ConfigError(fmt::format("unknown grouping '{}'", s));
}

std::map<std::string, ShareRow> attribution_shares(std::span<const PredictionRecord> preds, GroupBy group_by,
                                                   const std::map<std::string, int>& play_century)
{
    std::map<std::string, std::map<std::string, std::size_t>> counts;
    for (const auto& p : preds) {
        std::string key;
        switch (group_by) {
        case GroupBy::play: key = p.play_id; break;
        case GroupBy::author: key = p.gold_author; break;
        case GroupBy::century: {
            const auto it = play_century.find(p.play_id);
            if (it == play_century.end())
                throw DataError(fmt::format("play '{}' has no century", p.play_id));
            key = std::to_string(it->second);
            break;
        }
        }
        ++counts[key][p.predicted_author];
    }
    std::map<std::string, ShareRow> out;
    for (const auto& [group, by_author] : counts) {
        ShareRow row;
        for (const auto& [a, c] : by_author) row.n += c;
        row.shares = percent_shares(by_author, row.n);
        out.emplace(group, std::move(row));
    }
    return out;
}

TimelineReport timeline_report(std::span<const PredictionRecord> preds, const std::map<std::string, int>& play_century,
                               std::vector<std::string> target_authors)
{
    TimelineReport report;
    if (target_authors.empty()) {
        std::set<std::string> all;
        for (const auto& p : preds) all.insert(p.predicted_author);
        target_authors.assign(all.begin(), all.end());
    }
    report.targets = target_authors;

    struct Bucket {
        // source author -> (predicted author -> count)
        std::map<std::string, std::map<std::string, std::size_t>> by_source;
        std::vector<PredictionRecord> preds;
    };
    std::map<int, Bucket> buckets;
    for (const auto& p : preds) {
        const auto it = play_century.find(p.play_id);
        if (it == play_century.end()) throw DataError(fmt::format("play '{}' has no century", p.play_id));
        auto& b = buckets[it->second];
        ++b.by_source[p.gold_author][p.predicted_author];
        b.preds.push_back(p);
    }

    for (const auto& [century, b] : buckets) {
        TimelineCentury c;
        c.century = century;
        c.n_samples = b.preds.size();
        c.n_source_authors = b.by_source.size();
        for (const auto& t : target_authors) {
            double sum = 0.0;
            for (const auto& [source, counts] : b.by_source) {
                std::size_t total = 0;
                for (const auto& [a, n] : counts) total += n;
                const auto it = counts.find(t);
                const auto hit = it == counts.end() ? 0 : it->second;
                sum += static_cast<double>(hit) / static_cast<double>(total);
            }
            c.average_share[t] = sum / static_cast<double>(b.by_source.size());
        }
        const auto votes = majority_vote(b.preds);
        c.n_plays = votes.size();
        for (const auto& t : target_authors) {
            std::size_t won = 0;
            for (const auto& [play, v] : votes) won += v.winner == t ? 1 : 0;
            c.play_vote_share[t] = static_cast<double>(won) / static_cast<double>(c.n_plays);
        }
        report.centuries.push_back(std::move(c));
    }
    return report;
}

} // namespace stylo
