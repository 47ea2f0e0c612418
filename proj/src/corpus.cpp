#include "stylo/corpus.hpp"

#include "stylo/error.hpp"
#include "stylo/text.hpp"

#include <fmt/format.h>
#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace stylo {

namespace fs = std::filesystem;

Utterance make_utterance(std::optional<std::string> speaker, std::string_view raw_text)
{
    Utterance u;
    u.speaker = std::move(speaker);
    u.text = normalize_text(raw_text);
    u.word_count = count_words(u.text);
    return u;
}

std::string_view to_string(AuthorshipStatus s)
{
    switch (s) {
    case AuthorshipStatus::single: return "single";
    case AuthorshipStatus::disputed: return "disputed";
    case AuthorshipStatus::coauthored: return "coauthored";
    case AuthorshipStatus::comparison: return "comparison";
    }
    return "single";
}

AuthorshipStatus parse_authorship_status(std::string_view s)
{
    if (s == "single") return AuthorshipStatus::single;
    if (s == "disputed") return AuthorshipStatus::disputed;
    if (s == "coauthored" || s == "co-authored") return AuthorshipStatus::coauthored;
    if (s == "comparison") return AuthorshipStatus::comparison;
    throw DataError(fmt::format("unknown authorship_status '{}'", s));
}

void SegmenterConfig::validate() const
{
    if (min_words == 0 || min_words > max_words)
        throw ConfigError(fmt::format("segmenter: need 0 < min_words ({}) <= max_words ({})", min_words, max_words));
}

void FilterConfig::validate() const
{
    if (min_utterances_per_play < 1 || min_plays_per_author < 1)
        throw ConfigError("filter: thresholds must be >= 1");
}

std::string make_sample_id(std::string_view play_id, std::size_t utterance_index, std::size_t chunk_index)
{
    return fmt::format("{}:u{:06d}:c{:03d}", play_id, utterance_index, chunk_index);
}

std::vector<Sample> segment_and_chunk(const PlayRecord& play, const SegmenterConfig& cfg)
{
    cfg.validate();
    std::vector<Sample> samples;
    for (std::size_t ui = 0; ui < play.utterances.size(); ++ui) {
        const auto words = split_words(play.utterances[ui].text);
        for (std::size_t start = 0, chunk = 0; start < words.size(); start += cfg.max_words, ++chunk) {
            const auto n = std::min(cfg.max_words, words.size() - start);
            if (n < cfg.min_words) continue;
            Sample s;
            s.sample_id = make_sample_id(play.play_id, ui, chunk);
            s.play_id = play.play_id;
            s.author = play.author;
            s.text = join_ngram(words, start, n);
            s.word_count = n;
            samples.push_back(std::move(s));
        }
    }
    return samples;
}

SegmentedPlay segment_play(PlayRecord play, const SegmenterConfig& cfg)
{
    SegmentedPlay out;
    out.samples = segment_and_chunk(play, cfg);
    out.play = std::move(play);
    return out;
}

FilterResult filter_corpus(std::vector<SegmentedPlay> plays,
                           const std::map<std::string, AuthorshipStatus>& authorship,
                           const FilterConfig& cfg)
{
    cfg.validate();
    std::set<std::string> seen;
    for (const auto& p : plays) {
        if (!seen.insert(p.play.play_id).second)
            throw DataError(fmt::format("duplicate play_id '{}'", p.play.play_id));
        if (p.play.author.empty())
            throw DataError(fmt::format("play '{}' has an empty author", p.play.play_id));
        const auto it = authorship.find(p.play.play_id);
        if (it == authorship.end())
            throw DataError(fmt::format("no authorship entry for play '{}'", p.play.play_id));
        if (it->second == AuthorshipStatus::comparison)
            throw DataError(fmt::format("comparison play '{}' passed to filter_corpus", p.play.play_id));
    }

    FilterResult result;
    std::vector<SegmentedPlay> candidates;

    // 1. route disputed / co-authored plays
    for (auto& p : plays) {
        const auto status = authorship.at(p.play.play_id);
        if (cfg.single_author_only && status != AuthorshipStatus::single)
            result.disputed.push_back(std::move(p));
        else
            candidates.push_back(std::move(p));
    }

    // 2. per-play sample threshold
    std::vector<SegmentedPlay> passing;
    for (auto& p : candidates) {
        if (p.samples.size() < cfg.min_utterances_per_play)
            result.rejected.push_back({p.play.play_id, std::string(kReasonBelowMinUtterances)});
        else
            passing.push_back(std::move(p));
    }

    // 3. per-author play threshold, counted after step 2
    std::map<std::string, std::size_t> plays_per_author;
    for (const auto& p : passing) ++plays_per_author[p.play.author];
    for (auto& p : passing) {
        if (plays_per_author[p.play.author] < cfg.min_plays_per_author)
            result.rejected.push_back({p.play.play_id, std::string(kReasonAuthorBelowMinPlays)});
        else
            result.primary.push_back(std::move(p));
    }
    return result;
}

// --- ingestion ----------------------------------------------------------

std::vector<Utterance> parse_plain_text(std::string_view raw)
{
    std::vector<Utterance> out;
    std::string block;
    auto flush = [&] {
        auto u = make_utterance(std::nullopt, block);
        if (u.word_count > 0) out.push_back(std::move(u));
        block.clear();
    };

    std::size_t pos = 0;
    while (pos <= raw.size()) {
        const auto eol = raw.find('\n', pos);
        auto line = raw.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        const bool blank = line.find_first_not_of(" \t\r\f\v") == std::string_view::npos;
        if (blank) {
            if (!block.empty()) flush();
        } else {
            block.append(line);
            block.push_back('\n');
        }
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    if (!block.empty()) flush();
    return out;
}

namespace {

// Strips tags (replacing each by a space) and decodes entities.
std::string xml_text(std::string_view s)
{
    std::string out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '<') {
            const auto close = s.find('>', i);
            if (close == std::string_view::npos) break;
            out.push_back(' ');
            i = close + 1;
        } else if (s[i] == '&') {
            const auto semi = s.find(';', i);
            if (semi == std::string_view::npos || semi - i > 10) {
                out.push_back('&');
                ++i;
                continue;
            }
            const auto name = s.substr(i + 1, semi - i - 1);
            if (name == "amp") out.push_back('&');
            else if (name == "lt") out.push_back('<');
            else if (name == "gt") out.push_back('>');
            else if (name == "quot") out.push_back('"');
            else if (name == "apos") out.push_back('\'');
            else if (name.size() > 1 && name[0] == '#') {
                std::uint32_t cp = 0;
                const bool hex = name[1] == 'x' || name[1] == 'X';
                const auto digits = name.substr(hex ? 2 : 1);
                const auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
                if (ec == std::errc{} && p == digits.data() + digits.size()) append_utf8(cp, out);
            }
            i = semi + 1;
        } else {
            out.push_back(s[i++]);
        }
    }
    return out;
}

// Finds the next element start `<name` followed by whitespace, '>' or '/'.
std::size_t find_open_tag(std::string_view s, std::string_view name, std::size_t from)
{
    for (auto pos = s.find('<', from); pos != std::string_view::npos; pos = s.find('<', pos + 1)) {
        if (s.compare(pos + 1, name.size(), name) != 0) continue;
        const auto after = pos + 1 + name.size();
        if (after < s.size() && (s[after] == '>' || s[after] == '/' || std::isspace(static_cast<unsigned char>(s[after]))))
            return pos;
    }
    return std::string_view::npos;
}

} // namespace

std::vector<Utterance> parse_speech_xml(std::string_view raw)
{
    std::vector<Utterance> out;
    std::size_t pos = 0;
    for (;;) {
        const auto open = find_open_tag(raw, "sp", pos);
        if (open == std::string_view::npos) break;
        const auto open_end = raw.find('>', open);
        if (open_end == std::string_view::npos) break;
        if (raw[open_end - 1] == '/') { // <sp/>
            pos = open_end + 1;
            continue;
        }
        const auto close = raw.find("</sp>", open_end);
        if (close == std::string_view::npos) throw DataError("unterminated <sp> element");
        auto body = raw.substr(open_end + 1, close - open_end - 1);
        pos = close + 5;

        std::optional<std::string> speaker;
        std::string text_part(body);
        if (const auto sp = find_open_tag(body, "speaker", 0); sp != std::string_view::npos) {
            const auto sp_end = body.find('>', sp);
            const auto sp_close = body.find("</speaker>", sp_end);
            if (sp_end != std::string_view::npos && sp_close != std::string_view::npos) {
                auto name = normalize_text(xml_text(body.substr(sp_end + 1, sp_close - sp_end - 1)));
                if (!name.empty()) speaker = std::move(name);
                text_part = std::string(body.substr(0, sp)) + " " + std::string(body.substr(sp_close + 10));
            }
        }
        auto u = make_utterance(std::move(speaker), xml_text(text_part));
        if (u.word_count > 0) out.push_back(std::move(u));
    }
    return out;
}

std::vector<ManifestEntry> load_manifest(const fs::path& manifest_path)
{
    std::ifstream in(manifest_path);
    if (!in) throw DataError(fmt::format("cannot open manifest '{}'", manifest_path.string()));
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(fmt::format("manifest '{}': {}", manifest_path.string(), e.what()));
    }
    const auto& list = doc.is_array() ? doc : doc.at("plays");
    const auto base = manifest_path.parent_path();

    std::vector<ManifestEntry> entries;
    std::set<std::string> ids;
    for (const auto& j : list) {
        ManifestEntry e;
        try {
            e.play_id = j.at("play_id").get<std::string>();
            e.title = j.value("title", "");
            e.author = j.at("author").get<std::string>();
            e.source = j.value("source", "");
            if (j.contains("century") && !j["century"].is_null()) e.century = j["century"].get<int>();
            e.path = j.at("path").get<std::string>();
            e.status = parse_authorship_status(j.value("authorship_status", "single"));
            const auto fmt_name = j.value("format", e.path.extension() == ".xml" ? "xml" : "plain");
            if (fmt_name == "xml") e.format = TextFormat::xml;
            else if (fmt_name == "plain") e.format = TextFormat::plain;
            else throw DataError(fmt::format("unknown format '{}'", fmt_name));
        } catch (const nlohmann::json::exception& ex) {
            throw DataError(fmt::format("manifest entry {}: {}", j.dump(), ex.what()));
        }
        if (e.author.empty()) throw DataError(fmt::format("manifest: play '{}' has empty author", e.play_id));
        if (!ids.insert(e.play_id).second) throw DataError(fmt::format("manifest: duplicate play_id '{}'", e.play_id));
        if (e.path.is_relative()) e.path = base / e.path;
        entries.push_back(std::move(e));
    }
    return entries;
}

PlayRecord load_play(const ManifestEntry& entry)
{
    std::ifstream in(entry.path, std::ios::binary);
    if (!in) throw DataError(fmt::format("play '{}': cannot open '{}'", entry.play_id, entry.path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();

    PlayRecord play;
    play.play_id = entry.play_id;
    play.title = entry.title;
    play.author = entry.author;
    play.source = entry.source;
    play.century = entry.century;
    play.raw_text = buf.str();
    play.utterances = entry.format == TextFormat::xml ? parse_speech_xml(play.raw_text)
                                                      : parse_plain_text(play.raw_text);
    return play;
}

SampleIndex::SampleIndex(std::span<const Sample> samples)
{
    for (const auto& s : samples) add(s);
}

SampleIndex::SampleIndex(std::span<const SegmentedPlay> plays)
{
    for (const auto& p : plays)
        for (const auto& s : p.samples) add(s);
}

void SampleIndex::add(const Sample& s)
{
    if (!by_id_.emplace(s.sample_id, s).second)
        throw DataError(fmt::format("duplicate sample_id '{}'", s.sample_id));
}

const Sample* SampleIndex::find(std::string_view id) const
{
    const auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &it->second;
}

const Sample& SampleIndex::at(std::string_view id) const
{
    if (const auto* s = find(id)) return *s;
    throw DataError(fmt::format("unknown sample_id '{}'", id));
}

} // namespace stylo
