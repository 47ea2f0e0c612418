#include "stylo/corpus.hpp"

#include "stylo/error.hpp"
#include "stylo/rng.hpp"
#include "stylo/text.hpp"

#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

using namespace stylo;

namespace {

std::string words(std::size_t n)
{
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += (i ? " w" : "w") + std::to_string(i);
    return s;
}

PlayRecord play_with(std::initializer_list<std::size_t> lengths, std::string id = "p")
{
    PlayRecord p;
    p.play_id = std::move(id);
    p.author = "Author";
    for (const auto n : lengths) p.utterances.push_back(make_utterance(std::nullopt, words(n)));
    return p;
}

SegmentedPlay segmented(std::string id, std::string author, std::size_t n_samples)
{
    SegmentedPlay sp;
    sp.play.play_id = std::move(id);
    sp.play.author = std::move(author);
    for (std::size_t i = 0; i < n_samples; ++i)
        sp.samples.push_back({make_sample_id(sp.play.play_id, i, 0), sp.play.play_id, sp.play.author, "a b c d e", 5});
    return sp;
}

} // namespace

TEST_CASE("segment_and_chunk examples")
{
    const SegmenterConfig cfg;
    auto s = segment_and_chunk(play_with({900}), cfg);
    REQUIRE(s.size() == 2);
    CHECK(s[0].word_count == 450);
    CHECK(s[1].word_count == 450);
    CHECK(s[0].sample_id == "p:u000000:c000");
    CHECK(s[1].sample_id == "p:u000000:c001");
    CHECK(count_words(s[1].text) == 450);
    CHECK(s[1].text.starts_with("w450 "));

    s = segment_and_chunk(play_with({451}), cfg);
    REQUIRE(s.size() == 1);
    CHECK(s[0].word_count == 450);

    CHECK(segment_and_chunk(play_with({4}), cfg).empty());
    CHECK(segment_and_chunk(play_with({}), cfg).empty());

    s = segment_and_chunk(play_with({3, 5, 12}), cfg);
    REQUIRE(s.size() == 2);
    CHECK(s[0].sample_id == "p:u000001:c000");
    CHECK(s[1].sample_id == "p:u000002:c000");
}

TEST_CASE("segmentation bounds and length conservation over random utterances")
{
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        SegmenterConfig cfg;
        cfg.max_words = 1 + rng.uniform(60);
        cfg.min_words = 1 + rng.uniform(cfg.max_words);
        PlayRecord p;
        p.play_id = "t";
        p.author = "A";
        std::size_t total = 0;
        const auto n_utt = rng.uniform(8);
        for (std::uint64_t u = 0; u < n_utt; ++u) {
            const auto n = rng.uniform(200);
            total += n;
            p.utterances.push_back(make_utterance(std::nullopt, words(n)));
        }
        const auto samples = segment_and_chunk(p, cfg);
        std::size_t kept = 0;
        for (const auto& s : samples) {
            CHECK(s.word_count >= cfg.min_words);
            CHECK(s.word_count <= cfg.max_words);
            CHECK(s.word_count == count_words(s.text));
            kept += s.word_count;
        }
        // discarded = the short chunks: every utterance's tail (or whole) below min_words
        std::size_t discarded = 0;
        for (const auto& u : p.utterances) {
            std::size_t rest = u.word_count;
            while (rest > 0) {
                const auto chunk = std::min(rest, cfg.max_words);
                if (chunk < cfg.min_words) discarded += chunk;
                rest -= chunk;
            }
        }
        CHECK(kept + discarded == total);
        std::set<std::string> ids;
        for (const auto& s : samples) ids.insert(s.sample_id);
        CHECK(ids.size() == samples.size());
        CHECK(std::is_sorted(samples.begin(), samples.end(),
                             [](const Sample& a, const Sample& b) { return a.sample_id < b.sample_id; }));
    }
}

TEST_CASE("config validation")
{
    SegmenterConfig s;
    s.min_words = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.min_words = 10;
    s.max_words = 5;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    FilterConfig f;
    f.min_plays_per_author = 0;
    CHECK_THROWS_AS(f.validate(), ConfigError);
}

TEST_CASE("filter_corpus thresholds and routing")
{
    std::vector<SegmentedPlay> plays{segmented("a1", "A", 300), segmented("a2", "A", 300), segmented("a3", "A", 300),
                                     segmented("b1", "B", 300), segmented("b2", "B", 300), segmented("b3", "B", 299),
                                     segmented("d1", "A", 300)};
    std::map<std::string, AuthorshipStatus> status;
    for (const auto& p : plays) status[p.play.play_id] = AuthorshipStatus::single;
    status["d1"] = AuthorshipStatus::coauthored;

    const auto r = filter_corpus(plays, status, FilterConfig{});
    std::set<std::string> primary, disputed;
    std::map<std::string, std::string> rejected;
    for (const auto& p : r.primary) primary.insert(p.play.play_id);
    for (const auto& p : r.disputed) disputed.insert(p.play.play_id);
    for (const auto& x : r.rejected) rejected[x.play_id] = x.reason;

    CHECK(primary == std::set<std::string>{"a1", "a2", "a3"});
    CHECK(disputed == std::set<std::string>{"d1"});
    CHECK(rejected.at("b3") == kReasonBelowMinUtterances);
    CHECK(rejected.at("b1") == kReasonAuthorBelowMinPlays);
    CHECK(rejected.at("b2") == kReasonAuthorBelowMinPlays);

    status.erase("a1");
    CHECK_THROWS_AS(filter_corpus(plays, status, FilterConfig{}), DataError);
}

TEST_CASE("filter_corpus partitions its input")
{
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<SegmentedPlay> plays;
        std::map<std::string, AuthorshipStatus> status;
        const auto n = 1 + rng.uniform(15);
        for (std::uint64_t i = 0; i < n; ++i) {
            const auto id = "p" + std::to_string(i);
            plays.push_back(segmented(id, std::string(1, static_cast<char>('A' + rng.uniform(4))), rng.uniform(8)));
            status[id] = rng.uniform(5) == 0 ? AuthorshipStatus::disputed : AuthorshipStatus::single;
        }
        FilterConfig cfg;
        cfg.min_utterances_per_play = 1 + rng.uniform(6);
        cfg.min_plays_per_author = 1 + rng.uniform(3);
        cfg.single_author_only = rng.uniform(2) == 0;
        const auto r = filter_corpus(plays, status, cfg);
        std::multiset<std::string> seen;
        for (const auto& p : r.primary) {
            seen.insert(p.play.play_id);
            CHECK(p.samples.size() >= cfg.min_utterances_per_play);
        }
        for (const auto& p : r.disputed) seen.insert(p.play.play_id);
        for (const auto& x : r.rejected) seen.insert(x.play_id);
        CHECK(seen.size() == plays.size());
        for (const auto& p : plays) CHECK(seen.count(p.play.play_id) == 1);
        std::map<std::string, std::size_t> per_author;
        for (const auto& p : r.primary) ++per_author[p.play.author];
        for (const auto& [a, k] : per_author) CHECK(k >= cfg.min_plays_per_author);
        if (!cfg.single_author_only) CHECK(r.disputed.empty());
    }
}

TEST_CASE("authorship status names")
{
    CHECK(parse_authorship_status("co-authored") == AuthorshipStatus::coauthored);
    CHECK(parse_authorship_status("disputed") == AuthorshipStatus::disputed);
    CHECK(to_string(AuthorshipStatus::comparison) == "comparison");
    CHECK_THROWS(parse_authorship_status("maybe"));
}

TEST_CASE("plain text and XML ingestion")
{
    const auto plain = parse_plain_text("First line\nstill first.\n\n  \nSecond\r\n\r\nthird one here\n");
    REQUIRE(plain.size() == 3);
    CHECK(plain[0].text == "First line still first.");
    CHECK(plain[0].word_count == 4);
    CHECK_FALSE(plain[0].speaker);

    const auto xml = parse_speech_xml(R"(<play><sp who="x"><speaker>HAMLET</speaker><l>To be, or</l>
<l>not to be &amp; more&#8217;s</l></sp><stage>Exit</stage><sp><p>Alone</p></sp><sp/></play>)");
    REQUIRE(xml.size() == 2);
    CHECK(xml[0].speaker == std::optional<std::string>("HAMLET"));
    CHECK(xml[0].text == "To be, or not to be & more's");
    CHECK(xml[1].text == "Alone");
    CHECK_FALSE(xml[1].speaker);
    CHECK_THROWS_AS(parse_speech_xml("<sp>open"), DataError);
}

TEST_CASE("manifest loading")
{
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "stylo_manifest_test";
    fs::create_directories(dir);
    std::ofstream(dir / "a.txt") << "one two three four five\n\nsix seven eight nine ten\n";
    std::ofstream(dir / "manifest.json") << R"({"plays": [
        {"play_id": "a", "title": "A", "author": "X", "path": "a.txt", "century": 1600},
        {"play_id": "b", "author": "Y", "path": "b.xml", "authorship_status": "comparison"}]})";
    const auto m = load_manifest(dir / "manifest.json");
    REQUIRE(m.size() == 2);
    CHECK(m[0].path == dir / "a.txt");
    CHECK(m[0].century == 1600);
    CHECK(m[0].status == AuthorshipStatus::single);
    CHECK(m[1].format == TextFormat::xml);
    CHECK(m[1].status == AuthorshipStatus::comparison);
    const auto p = load_play(m[0]);
    CHECK(p.utterances.size() == 2);
    CHECK_THROWS_AS(load_play(m[1]), DataError);

    std::ofstream(dir / "dup.json") << R"([{"play_id": "a", "author": "X", "path": "a.txt"},
        {"play_id": "a", "author": "X", "path": "a.txt"}])";
    CHECK_THROWS_AS(load_manifest(dir / "dup.json"), DataError);
    fs::remove_all(dir);
}

TEST_CASE("sample index")
{
    std::vector<Sample> s{{"x", "p", "A", "t", 1}};
    const SampleIndex idx(s);
    CHECK(idx.find("x") != nullptr);
    CHECK(idx.find("y") == nullptr);
    CHECK_THROWS_AS(idx.at("y"), DataError);
}
