#include "stylo/pipeline.hpp"

#include "stylo/error.hpp"
#include "stylo/io.hpp"

#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <sstream>

using namespace stylo;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = fs::path(STYLO_SOURCE_DIR) / "tests" / "fixtures";

const char* const kGolden[] = {"split.csv",
                               "pairs.jsonl",
                               "predictions.cosine_delta.csv",
                               "predictions.cosine_delta_long.csv",
                               "predictions.svm_counts.csv",
                               "report.cosine_delta.accuracy.csv",
                               "report.cosine_delta.confusion.csv",
                               "report.cosine_delta.length.csv",
                               "report.cosine_delta.scapegoat.csv",
                               "uniqueness.csv",
                               "trials.histogram.csv",
                               "timeline.cosine_delta.csv"};

struct Workdir {
    fs::path path;
    explicit Workdir(const std::string& name) : path(fs::temp_directory_path() / ("stylo_" + name))
    {
        fs::remove_all(path);
    }
    ~Workdir() { fs::remove_all(path); }
};

RunConfig fixture_config(const fs::path& workdir)
{
    auto cfg = load_run_config(kFixtures / "config.json");
    cfg.workdir = workdir;
    return cfg;
}

std::string run(std::string_view stage, const RunConfig& cfg, StageOptions opts = {})
{
    std::ostringstream out;
    run_stage(stage, cfg, opts, out);
    return out.str();
}

void run_all(const RunConfig& cfg)
{
    for (const auto stage : kStages) run(stage, cfg);
}

} // namespace

TEST_CASE("fixture pipeline end to end")
{
    Workdir w("pipeline_full");
    const auto cfg = fixture_config(w.path);
    run_all(cfg);
    for (const auto* name : kGolden) CHECK(fs::exists(w.path / name));

    const auto report = Json::parse(read_file(w.path / "report.cosine_delta.json"));
    CHECK(report.at("meta").at("stage") == "evaluate");
    CHECK(report.at("meta").at("config_hash") == cfg.hash());

    // every predictions file is readable back and covers the evaluation partitions
    const auto split = split_from_json(Json::parse(read_file(w.path / "split.json")));
    const auto preds = predictions_from_csv(read_file(w.path / "predictions.cosine_delta.csv"));
    CHECK(preds.size() == split.test_in.size() + split.test_out.size() + split.disputed.size() + split.timeline.size());

    if (std::getenv("STYLO_UPDATE_GOLDEN")) {
        fs::create_directories(kFixtures / "golden");
        for (const auto* name : kGolden) fs::copy_file(w.path / name, kFixtures / "golden" / name,
                                                       fs::copy_options::overwrite_existing);
    }
    for (const auto* name : kGolden) {
        INFO(name);
        CHECK(read_file(w.path / name) == read_file(kFixtures / "golden" / name));
    }
}

TEST_CASE("split is byte-identical across runs and manifest orders")
{
    Workdir a("pipeline_split_a"), b("pipeline_split_b");
    auto cfg_a = fixture_config(a.path);
    run(kStages[0], cfg_a);
    run(kStages[1], cfg_a);
    const auto first = read_file(a.path / "split.json");
    run(kStages[1], cfg_a);
    CHECK(read_file(a.path / "split.json") == first);

    // same corpus, manifest entries reversed
    auto manifest = Json::parse(read_file(kFixtures / "manifest.json"));
    auto& plays = manifest.at("plays");
    std::reverse(plays.begin(), plays.end());
    for (auto& p : plays) p["path"] = (kFixtures / p.at("path").get<std::string>()).string();
    fs::create_directories(b.path);
    write_file_atomic(b.path / "reversed.json", manifest.dump(2));
    auto cfg_b = fixture_config(b.path / "work");
    cfg_b.manifest = b.path / "reversed.json";
    run(kStages[0], cfg_b);
    run(kStages[1], cfg_b);
    const auto split_a = Json::parse(first), split_b = Json::parse(read_file(b.path / "work" / "split.json"));
    for (const auto* key : {"holdout", "train", "val", "test_in", "test_out", "disputed", "timeline"})
        CHECK(split_a.at(key) == split_b.at(key));
    CHECK(read_file(a.path / "split.csv") == read_file(b.path / "work" / "split.csv"));
}

TEST_CASE("stages can be re-run independently")
{
    Workdir w("pipeline_restart");
    const auto cfg = fixture_config(w.path);
    run_all(cfg);
    const auto report = read_file(w.path / "report.svm_tfidf.json");
    const auto trials = read_file(w.path / "trials.json");
    fs::remove(w.path / "predictions.svm_tfidf.csv");
    run("attribute", cfg);
    run("evaluate", cfg);
    run("trials", cfg);
    CHECK(read_file(w.path / "report.svm_tfidf.json") == report);
    CHECK(read_file(w.path / "trials.json") == trials);
}

TEST_CASE("missing prerequisites name the stage to run")
{
    Workdir w("pipeline_missing");
    const auto cfg = fixture_config(w.path);
    try {
        run("train", cfg);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("run 'stylo ingest' first") != std::string::npos);
    }
    CHECK_THROWS_AS(run("bogus", cfg), Error);
}

TEST_CASE("external predictions are validated and evaluated")
{
    Workdir w("pipeline_external");
    const auto cfg = fixture_config(w.path);
    for (const auto stage : {"ingest", "split", "train", "attribute"}) run(stage, cfg);

    auto preds = predictions_from_csv(read_file(w.path / "predictions.cosine_delta.csv"));
    for (auto& p : preds) {
        p.model_tag = "t5_small";
        if (p.sample_id.ends_with("0")) p.predicted_author = "AUTHOR: garbage";
    }
    const auto ext = w.path / "external.csv";
    write_file_atomic(ext, predictions_to_csv(preds));

    StageOptions opts;
    opts.predictions = ext;
    run("attribute", cfg, opts);
    CHECK(fs::exists(w.path / "predictions.t5_small.csv"));
    StageOptions only;
    only.tag = "t5_small";
    const auto text = run("evaluate", cfg, only);
    CHECK(text.find("t5_small") != std::string::npos);
    const auto report = Json::parse(read_file(w.path / "report.t5_small.json"));
    CHECK(report.at("confusion").at("columns").back() == std::string(kUnrecognizedColumn));

    auto bad = preds;
    bad[3].sample_id = "nowhere:u000001:c000";
    write_file_atomic(ext, predictions_to_csv(bad));
    try {
        run("evaluate", cfg, opts);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("nowhere:u000001:c000") != std::string::npos);
    }
}

TEST_CASE("config parsing")
{
    const auto cfg = load_run_config(kFixtures / "config.json");
    CHECK(cfg.manifest == kFixtures / "manifest.json");
    CHECK(cfg.seed == 7);
    CHECK(cfg.split.train_per_play == 12);
    CHECK(cfg.linear.epochs == 80);

    auto moved = cfg;
    moved.workdir = "/elsewhere";
    CHECK(moved.hash() == cfg.hash());
    moved.seed = 8;
    CHECK(moved.hash() != cfg.hash());

    CHECK_THROWS_AS(parse_run_config(Json{{"sed", 1}}, "."), ConfigError);
    CHECK_THROWS_AS(parse_run_config(Json{{"split", {{"train", 1}}}}, "."), ConfigError);
    CHECK_THROWS_AS(parse_run_config(Json{{"linear", {{"seed", 1}}}}, "."), ConfigError);
    CHECK_THROWS_AS(parse_run_config(Json{{"models", {"naive_bayes"}}}, "."), ConfigError);
    CHECK_THROWS_AS(parse_run_config(Json{{"reports", {{"histogram_bin_width", 0.0}}}}, "."), ConfigError);
}
