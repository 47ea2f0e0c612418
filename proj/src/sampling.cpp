#include "stylo/sampling.hpp"

#include "stylo/error.hpp"
#include "stylo/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

namespace stylo {

void SplitConfig::validate() const
{
    if (train_per_play < 1 || val_per_play < 1 || test_in_per_play < 1 || test_out_per_play < 1 ||
        disputed_per_play < 1 || timeline_per_play < 1)
        throw ConfigError("split: all per-play counts must be >= 1");
}

std::string_view to_string(Partition p)
{
    switch (p) {
    case Partition::train: return "train";
    case Partition::val: return "val";
    case Partition::test_in: return "test_in";
    case Partition::test_out: return "test_out";
    case Partition::disputed: return "disputed";
    case Partition::timeline: return "timeline";
    }
    return "train";
}

Partition parse_partition(std::string_view s)
{
    for (const auto p : kAllPartitions)
        if (to_string(p) == s) return p;
    throw DataError(fmt::format("unknown partition '{}'", s));
}

std::string_view prediction_label(Partition p)
{
    switch (p) {
    case Partition::test_in: return "in";
    case Partition::test_out: return "out";
    case Partition::disputed: return "disputed";
    case Partition::timeline: return "timeline";
    default: throw DataError(fmt::format("partition '{}' has no prediction label", to_string(p)));
    }
}

Partition parse_prediction_label(std::string_view s)
{
    if (s == "in") return Partition::test_in;
    if (s == "out") return Partition::test_out;
    if (s == "disputed") return Partition::disputed;
    if (s == "timeline") return Partition::timeline;
    throw DataError(fmt::format("unknown prediction partition '{}'", s));
}

const std::vector<std::string>& DatasetSplit::ids(Partition p) const
{
    switch (p) {
    case Partition::train: return train;
    case Partition::val: return val;
    case Partition::test_in: return test_in;
    case Partition::test_out: return test_out;
    case Partition::disputed: return disputed;
    case Partition::timeline: return timeline;
    }
    return train;
}

std::vector<std::string>& DatasetSplit::ids(Partition p)
{
    return const_cast<std::vector<std::string>&>(std::as_const(*this).ids(p));
}

namespace {

std::vector<std::string> sorted_ids(const SegmentedPlay& play)
{
    std::vector<std::string> ids;
    ids.reserve(play.samples.size());
    for (const auto& s : play.samples) ids.push_back(s.sample_id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

// Draws `count` ids from a play with the play's own stream; returns them in
// draw order.
std::vector<std::string> draw(const SegmentedPlay& play, std::size_t count, std::uint64_t seed,
                              std::string_view stream, std::string_view what)
{
    if (play.samples.size() < count)
        throw DataError(fmt::format("play '{}' has {} samples but {} requires {}", play.play.play_id,
                                    play.samples.size(), what, count));
    auto ids = sorted_ids(play);
    Rng rng(derive_seed(seed, fmt::format("{}/{}", stream, play.play.play_id)));
    rng.partial_shuffle(std::span(ids), count);
    ids.resize(count);
    return ids;
}

std::vector<const SegmentedPlay*> sorted_plays(std::span<const SegmentedPlay> plays)
{
    std::vector<const SegmentedPlay*> out;
    for (const auto& p : plays) out.push_back(&p);
    std::sort(out.begin(), out.end(),
              [](const auto* a, const auto* b) { return a->play.play_id < b->play.play_id; });
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i - 1]->play.play_id == out[i]->play.play_id)
            throw DataError(fmt::format("duplicate play_id '{}'", out[i]->play.play_id));
    return out;
}

std::vector<std::string> draw_per_play(std::span<const SegmentedPlay> plays, std::size_t count,
                                       std::uint64_t seed, std::string_view stream)
{
    std::vector<std::string> out;
    for (const auto* p : sorted_plays(plays)) {
        auto ids = draw(*p, count, seed, stream, stream);
        out.insert(out.end(), ids.begin(), ids.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

DatasetSplit build_splits(std::span<const SegmentedPlay> primary, const SplitConfig& cfg)
{
    cfg.validate();
    const auto plays = sorted_plays(primary);

    std::map<std::string, std::vector<const SegmentedPlay*>> by_author;
    for (const auto* p : plays) by_author[p->play.author].push_back(p);

    DatasetSplit split;
    split.seed = cfg.seed;
    for (const auto& [author, author_plays] : by_author) {
        Rng rng(derive_seed(cfg.seed, "holdout/" + author));
        split.holdout[author] = author_plays[rng.uniform(author_plays.size())]->play.play_id;
    }

    const auto in_total = cfg.train_per_play + cfg.val_per_play + cfg.test_in_per_play;
    for (const auto* p : plays) {
        if (split.holdout.at(p->play.author) == p->play.play_id) {
            auto ids = draw(*p, cfg.test_out_per_play, cfg.seed, "test_out", "test_out");
            split.test_out.insert(split.test_out.end(), ids.begin(), ids.end());
            continue;
        }
        const auto ids = draw(*p, in_total, cfg.seed, "included", "train+val+test_in");
        auto it = ids.begin();
        split.train.insert(split.train.end(), it, it + cfg.train_per_play);
        it += cfg.train_per_play;
        split.val.insert(split.val.end(), it, it + cfg.val_per_play);
        it += cfg.val_per_play;
        split.test_in.insert(split.test_in.end(), it, it + cfg.test_in_per_play);
    }
    for (auto* list : {&split.train, &split.val, &split.test_in, &split.test_out})
        std::sort(list->begin(), list->end());
    return split;
}

std::vector<std::string> build_disputed_set(std::span<const SegmentedPlay> disputed, const SplitConfig& cfg)
{
    cfg.validate();
    return draw_per_play(disputed, cfg.disputed_per_play, cfg.seed, "disputed");
}

std::vector<std::string> build_timeline_set(std::span<const SegmentedPlay> comparison, const SplitConfig& cfg)
{
    cfg.validate();
    return draw_per_play(comparison, cfg.timeline_per_play, cfg.seed, "timeline");
}

std::vector<std::string> check_split(const DatasetSplit& split, std::span<const SegmentedPlay> primary)
{
    std::vector<std::string> problems;
    std::map<std::string, const SegmentedPlay*> play_by_id;
    std::map<std::string, std::string> play_of_sample;
    std::set<std::string> authors;
    for (const auto& p : primary) {
        play_by_id[p.play.play_id] = &p;
        authors.insert(p.play.author);
        for (const auto& s : p.samples) play_of_sample[s.sample_id] = p.play.play_id;
    }

    for (const auto& a : authors) {
        const auto it = split.holdout.find(a);
        if (it == split.holdout.end()) {
            problems.push_back(fmt::format("author '{}' has no holdout play", a));
        } else if (!play_by_id.count(it->second) || play_by_id[it->second]->play.author != a) {
            problems.push_back(fmt::format("holdout '{}' for author '{}' is not one of their plays", it->second, a));
        }
    }
    if (split.holdout.size() != authors.size()) problems.push_back("holdout map has extra authors");

    std::set<std::string> holdout_plays;
    for (const auto& [a, pid] : split.holdout) holdout_plays.insert(pid);

    std::set<std::string> seen;
    for (const auto part : kAllPartitions) {
        for (const auto& id : split.ids(part)) {
            if (!seen.insert(id).second) problems.push_back(fmt::format("sample '{}' appears twice", id));
            if (part == Partition::disputed || part == Partition::timeline) continue;
            const auto it = play_of_sample.find(id);
            if (it == play_of_sample.end()) {
                problems.push_back(fmt::format("sample '{}' is not in the primary corpus", id));
                continue;
            }
            const bool from_holdout = holdout_plays.count(it->second) > 0;
            if (part == Partition::test_out && !from_holdout)
                problems.push_back(fmt::format("test_out sample '{}' is from an included play", id));
            if (part != Partition::test_out && from_holdout)
                problems.push_back(fmt::format("{} sample '{}' is from a holdout play", to_string(part), id));
        }
    }
    return problems;
}

SplitIndex::SplitIndex(const DatasetSplit& split)
{
    for (const auto part : kAllPartitions)
        for (const auto& id : split.ids(part)) map_.emplace(id, part);
}

std::optional<Partition> SplitIndex::find(std::string_view sample_id) const
{
    const auto it = map_.find(std::string(sample_id));
    if (it == map_.end()) return std::nullopt;
    return it->second;
}

void SplitIndex::add(std::string sample_id, Partition p)
{
    map_.emplace(std::move(sample_id), p);
}

} // namespace stylo
