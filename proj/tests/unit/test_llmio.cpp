#include "stylo/llmio.hpp"

#include "stylo/error.hpp"
#include "stylo/rng.hpp"
#include "synth.hpp"

#include "doctest.h"
#include "json.hpp"

#include <fstream>

using namespace stylo;

namespace {

const std::string kWebster = "All the damnable degrees Of drinkings have you, you staggered through one Citizen. "
                             "Is Lord of two fair Manors, called you master Only for Caviar.";

const std::set<std::string, std::less<>> kKnown{"Ben Jonson", "John Webster", "Thomas Middleton"};

} // namespace

TEST_CASE("masked span pair")
{
    const Sample s{"x", "p", "John Webster", kWebster, 26};
    const auto p = make_pair(s, PairStyle::masked_span);
    CHECK(p.input == "AUTHOR: <extra_id_0> | " + kWebster);
    CHECK(p.output == "AUTHOR: John Webster | " + kWebster);
    CHECK(p.sample_id == "x");

    const auto parsed = parse_prediction(p.output, PairStyle::masked_span, kKnown);
    CHECK(parsed.author == std::optional<std::string>("John Webster"));
    CHECK(predicted_name(parsed) == "John Webster");
}

TEST_CASE("suffix pair")
{
    const Sample s{"x", "p", "Ben Jonson", "some words here", 3};
    const auto p = make_pair(s, PairStyle::suffix);
    CHECK(p.input == "some words here | AUTHOR: <extra_id_0>");
    CHECK(p.output == "some words here | AUTHOR: Ben Jonson");
}

TEST_CASE("pairs need an author")
{
    const Sample s{"x", "p", "", "text", 1};
    CHECK_THROWS_AS(make_pair(s, PairStyle::masked_span), DataError);
}

TEST_CASE("unrecognized generations keep the raw string")
{
    auto p = parse_prediction("", PairStyle::masked_span, kKnown);
    CHECK_FALSE(p.recognized());
    CHECK(predicted_name(p) == "");
    p = parse_prediction("AUTHOR: John Webster, playwright | x", PairStyle::masked_span, kKnown);
    CHECK(p.author == std::optional<std::string>("John Webster"));
    p = parse_prediction("AUTHOR: Nobody | x", PairStyle::masked_span, kKnown);
    CHECK_FALSE(p.recognized());
    CHECK(predicted_name(p) == "AUTHOR: Nobody | x");
}

TEST_CASE("round trip over synthetic samples")
{
    const auto plays = synth::plays(synth::authors_with_counts({1, 1, 1, 1}), 20, 12, 40, 3, 0.2, 2);
    std::set<std::string, std::less<>> known;
    for (const auto& p : plays) known.insert(p.play.author);
    for (const auto style : {PairStyle::masked_span, PairStyle::suffix})
        for (const auto& s : synth::flatten(plays))
            CHECK(parse_prediction(make_pair(s, style).output, style, known).author == std::optional(s.author));

    // multi-word and punctuated names survive too
    const std::set<std::string, std::less<>> names{"John Fletcher", "Anon."};
    for (const auto& name : names)
        for (const auto style : {PairStyle::masked_span, PairStyle::suffix}) {
            const Sample s{"x", "p", name, "a b | c AUTHOR: d", 5};
            CHECK(parse_prediction(make_pair(s, style).output, style, names).author == std::optional(name));
        }
}

TEST_CASE("parse_prediction never throws on random bytes")
{
    Rng rng(12);
    const std::string alphabet = "AUTHOR: |<>extra_id_0/s\n\tJohn Webster,.\xc3\xa9\xff";
    for (int i = 0; i < 3000; ++i) {
        std::string g;
        const auto n = rng.uniform(40);
        for (std::uint64_t k = 0; k < n; ++k) g.push_back(alphabet[rng.uniform(alphabet.size())]);
        for (const auto style : {PairStyle::masked_span, PairStyle::suffix}) {
            ParsedPrediction p;
            CHECK_NOTHROW(p = parse_prediction(g, style, kKnown));
            CHECK(p.raw == g);
            if (p.author) CHECK(kKnown.count(*p.author) == 1);
        }
    }
}

TEST_CASE("shared parse vectors")
{
    std::ifstream in(std::string(STYLO_SOURCE_DIR) + "/data/parse_vectors.jsonl");
    REQUIRE(in);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        std::set<std::string, std::less<>> known;
        for (const auto& a : j.at("known_authors")) known.insert(a.get<std::string>());
        const auto got = parse_prediction(j.at("generated").get<std::string>(),
                                          parse_pair_style(j.at("style").get<std::string>()), known);
        INFO(j.at("name").get<std::string>());
        if (j.at("expected").is_null())
            CHECK_FALSE(got.recognized());
        else
            CHECK(got.author == std::optional(j.at("expected").get<std::string>()));
        ++n;
    }
    CHECK(n >= 20);
}

TEST_CASE("pair style names")
{
    CHECK(parse_pair_style("masked_span") == PairStyle::masked_span);
    CHECK(parse_pair_style(to_string(PairStyle::suffix)) == PairStyle::suffix);
    CHECK_THROWS(parse_pair_style("prefix"));
}
