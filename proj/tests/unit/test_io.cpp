#include "stylo/io.hpp"

#include "stylo/error.hpp"
#include "stylo/rng.hpp"
#include "synth.hpp"

#include "doctest.h"

#include <filesystem>

using namespace stylo;

TEST_CASE("csv quoting and parsing")
{
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    const std::vector<std::string> row{"x", "a,b", "line\nbreak", ""};
    CHECK(csv_row(row) == "x,\"a,b\",\"line\nbreak\",\n");

    const auto rows = parse_csv("h1,h2\r\n\"a,\"\"b\"\"\",c\r\n\"multi\nline\",\n");
    REQUIRE(rows.size() == 3);
    CHECK(rows[1] == std::vector<std::string>{"a,\"b\"", "c"});
    CHECK(rows[2] == std::vector<std::string>{"multi\nline", ""});

    CHECK_THROWS_AS(parse_csv("a,\"open\n"), DataError);
    CHECK_THROWS_AS(parse_csv("a,\"x\"y\n"), DataError);
}

TEST_CASE("csv round trip on random fields")
{
    Rng rng(31);
    const std::string alphabet = "ab, \"\n\r\t'x";
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::vector<std::string>> table;
        std::string text;
        const auto n_rows = 1 + rng.uniform(5), n_cols = 1 + rng.uniform(4);
        for (std::uint64_t r = 0; r < n_rows; ++r) {
            std::vector<std::string> row;
            for (std::uint64_t c = 0; c < n_cols; ++c) {
                std::string f;
                const auto len = rng.uniform(6);
                for (std::uint64_t k = 0; k < len; ++k) f.push_back(alphabet[rng.uniform(alphabet.size())]);
                row.push_back(f);
            }
            // a lone empty field is an empty line, which the reader skips
            if (n_cols == 1 && row[0].empty()) row[0] = "e";
            text += csv_row(row);
            table.push_back(std::move(row));
        }
        CHECK(parse_csv(text) == table);
    }
}

TEST_CASE("prediction csv round trip and strictness")
{
    std::vector<PredictionRecord> preds{
        {"p:u000001:c000", "p", "John Webster", "AUTHOR: Someone, \"odd\" | x", Partition::test_in, 12, "t5"},
        {"q:u000002:c000", "q", "Ben Jonson", "Ben Jonson", Partition::timeline, 450, "t5"},
        {"q:u000003:c000", "q", "Ben Jonson", "", Partition::disputed, 5, "t5"},
    };
    const auto text = predictions_to_csv(preds);
    CHECK(text.starts_with(std::string(kPredictionHeader) + "\n"));
    const auto back = predictions_from_csv(text);
    REQUIRE(back.size() == preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        CHECK(back[i].sample_id == preds[i].sample_id);
        CHECK(back[i].predicted_author == preds[i].predicted_author);
        CHECK(back[i].partition == preds[i].partition);
        CHECK(back[i].word_count == preds[i].word_count);
        CHECK(back[i].model_tag == preds[i].model_tag);
    }
    CHECK(predictions_to_csv(back) == text);

    const std::string header(kPredictionHeader);
    CHECK_THROWS_AS(predictions_from_csv("sample_id,play_id\n"), DataError);
    CHECK_THROWS_AS(predictions_from_csv(header + "\na,b,c,d,in,7\n"), DataError);
    CHECK_THROWS_AS(predictions_from_csv(header + "\na,b,c,d,train,7,m\n"), DataError);
    try {
        predictions_from_csv(header + "\na,b,c,d,in,7,m\na,b,c,d,out,seven,m\n");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
    CHECK(predictions_from_csv(header + "\r\na,b,c,d,in,7,m\r\n").size() == 1);
}

TEST_CASE("json round trips")
{
    const auto plays = synth::plays(synth::authors_with_counts({2, 2}), 12, 15, 40, 3, 0.3, 8);
    const auto samples = synth::flatten(plays);
    CHECK(sample_from_json(to_json(samples[3])).text == samples[3].text);

    SplitConfig c;
    c.train_per_play = 4;
    c.val_per_play = 1;
    c.test_in_per_play = 2;
    c.test_out_per_play = 5;
    const auto split = build_splits(plays, c);
    const auto split2 = split_from_json(to_json(split));
    CHECK(split2.holdout == split.holdout);
    for (const auto p : kAllPartitions) CHECK(split2.ids(p) == split.ids(p));
    CHECK(to_json(split2).dump() == to_json(split).dump());

    const SampleIndex index(plays);
    const auto csv = split_to_csv(split, index);
    CHECK(parse_csv(csv).size() == 1 + 2 * (4 + 1 + 2) + 2 * 5);

    const auto vocab = build_vocabulary(samples, kUnlimitedVocabulary, {1, 2});
    CHECK(vocabulary_from_json(to_json(vocab)).terms() == vocab.terms());
    CHECK(vocabulary_from_json(to_json(vocab)).size_limit() == kUnlimitedVocabulary);

    for (const auto kind : {FeatureKind::counts, FeatureKind::tfidf, FeatureKind::zscore}) {
        const auto xf = fit_feature_transform(kind, samples, build_vocabulary(samples, 25));
        const auto back = transform_from_json(Json::parse(to_json(xf).dump()));
        for (const auto& s : samples) CHECK(apply_feature_transform(back, s) == apply_feature_transform(xf, s));
    }

    const auto zs = fit_feature_transform(FeatureKind::zscore, samples, build_vocabulary(samples, 25));
    const auto profiles = fit_cosine_delta(samples, zs);
    const auto profiles2 = profiles_from_json(Json::parse(to_json(profiles).dump()));
    REQUIRE(profiles2.size() == profiles.size());
    CHECK(profiles2[1].centroid == profiles[1].centroid);

    std::vector<SparseVector> rows;
    std::vector<std::string> labels;
    for (const auto& s : samples) {
        rows.push_back(apply_sparse(zs, s.text));
        labels.push_back(s.author);
    }
    LinearHyper h;
    h.epochs = 3;
    const auto m = train_linear(LinearKind::svm, rows, labels, h);
    const auto m2 = linear_model_from_json(Json::parse(to_json(m).dump()));
    CHECK(m2.weights == m.weights);
    CHECK(m2.bias == m.bias);
    CHECK(m2.classes == m.classes);
    CHECK(m2.kind == LinearKind::svm);

    CHECK_THROWS_AS(hyper_from_json(Json{{"learning_rate", 0.1}, {"momentum", 0.9}}), ConfigError);
    CHECK(hyper_from_json(Json{{"epochs", 7}}).epochs == 7);
}

TEST_CASE("atomic writes and double formatting")
{
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "stylo_io_test";
    fs::create_directories(dir);
    write_file_atomic(dir / "a.txt", "hello");
    write_file_atomic(dir / "a.txt", "again");
    CHECK(read_file(dir / "a.txt") == "again");
    CHECK_FALSE(fs::exists(dir / "a.txt.tmp"));
    CHECK_THROWS_AS(read_file(dir / "missing"), Error);
    fs::remove_all(dir);

    CHECK(format_double(0.5) == "0.5");
    CHECK(std::stod(format_double(0.1 + 0.2)) == 0.1 + 0.2);
}
