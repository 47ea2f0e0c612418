#include "stylo/pipeline.hpp"

#include "stylo/error.hpp"
#include "stylo/rng.hpp"
#include "stylo/stats.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <functional>
#include <ostream>

namespace stylo {

namespace fs = std::filesystem;

// --- config -------------------------------------------------------------

namespace {

using Setter = std::function<void(const Json&)>;

void apply_section(const Json& j, std::string_view section, const std::map<std::string, Setter>& setters)
{
    if (!j.is_object()) throw ConfigError(fmt::format("config: '{}' must be an object", section));
    for (const auto& [key, value] : j.items()) {
        const auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError(fmt::format("config: unknown key '{}{}'", section, key));
        try {
            it->second(value);
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(fmt::format("config: '{}{}' has the wrong type", section, key));
        }
    }
}

bool valid_tag(std::string_view tag)
{
    return !tag.empty() && std::all_of(tag.begin(), tag.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
               c == '.';
    });
}

} // namespace

void RunConfig::validate() const
{
    segmenter.validate();
    filter.validate();
    split.validate();
    if (mfw < 1) throw ConfigError("config: features.mfw must be >= 1");
    if (linear_vocabulary < 1) throw ConfigError("config: features.linear_vocabulary must be >= 1");
    if (ngram_sizes.empty()) throw ConfigError("config: features.ngram_sizes is empty");
    for (const int n : ngram_sizes)
        if (n < 1) throw ConfigError("config: n-gram sizes must be >= 1");
    std::set<std::string> seen;
    for (const auto& m : models) {
        if (std::find(std::begin(kModelTags), std::end(kModelTags), m) == std::end(kModelTags))
            throw ConfigError(fmt::format("config: unknown model '{}'", m));
        if (!seen.insert(m).second) throw ConfigError(fmt::format("config: model '{}' listed twice", m));
    }
    for (const auto& b : baselines) parse_baseline_kind(b);
    linear.validate();
    if (scapegoat_k < 1) throw ConfigError("config: reports.scapegoat_k must be >= 1");
    if (top_m < 1) throw ConfigError("config: reports.top_m must be >= 1");
    TrialConfig tc;
    tc.n_trials = n_trials;
    tc.top_m = top_m;
    tc.bin_width = histogram_bin_width;
    tc.validate();
}

Json RunConfig::to_json() const
{
    Json j;
    j["manifest"] = manifest.generic_string();
    j["workdir"] = workdir.generic_string();
    j["seed"] = seed;
    j["segmenter"] = Json{{"max_words", segmenter.max_words}, {"min_words", segmenter.min_words}};
    j["filter"] = Json{{"min_utterances_per_play", filter.min_utterances_per_play},
                       {"min_plays_per_author", filter.min_plays_per_author},
                       {"single_author_only", filter.single_author_only}};
    j["split"] = Json{{"train_per_play", split.train_per_play},
                      {"val_per_play", split.val_per_play},
                      {"test_in_per_play", split.test_in_per_play},
                      {"test_out_per_play", split.test_out_per_play},
                      {"disputed_per_play", split.disputed_per_play},
                      {"timeline_per_play", split.timeline_per_play}};
    Json features{{"mfw", mfw}};
    features["linear_vocabulary"] = linear_vocabulary == kUnlimitedVocabulary ? Json(nullptr) : Json(linear_vocabulary);
    features["ngram_sizes"] = ngram_sizes;
    j["features"] = features;
    j["models"] = models;
    j["baselines"] = baselines;
    j["long_text"] = long_text;
    j["linear"] = Json{{"learning_rate", linear.learning_rate},
                       {"l2_strength", linear.l2_strength},
                       {"epochs", linear.epochs},
                       {"batch_size", linear.batch_size}};
    j["pairs"] = Json{{"style", to_string(pair_style)}};
    j["reports"] = Json{{"scapegoat_k", scapegoat_k},
                        {"top_m", top_m},
                        {"excluded_terms", excluded_terms},
                        {"n_trials", n_trials},
                        {"histogram_bin_width", histogram_bin_width},
                        {"timeline_targets", timeline_targets}};
    return j;
}

std::string RunConfig::hash() const
{
    auto j = to_json();
    j.erase("workdir");
    return fmt::format("{:016x}", fnv1a64(j.dump()));
}

RunConfig parse_run_config(const Json& j, const fs::path& base_dir)
{
    RunConfig c;
    const auto path_of = [&](const Json& v) {
        fs::path p = v.get<std::string>();
        return p.is_relative() ? base_dir / p : p;
    };
    apply_section(
        j, "",
        {{"manifest", [&](const Json& v) { c.manifest = path_of(v); }},
         {"workdir", [&](const Json& v) { c.workdir = path_of(v); }},
         {"seed", [&](const Json& v) { c.seed = v.get<std::uint64_t>(); }},
         {"segmenter",
          [&](const Json& v) {
              apply_section(v, "segmenter.",
                            {{"max_words", [&](const Json& x) { c.segmenter.max_words = x.get<std::size_t>(); }},
                             {"min_words", [&](const Json& x) { c.segmenter.min_words = x.get<std::size_t>(); }}});
          }},
         {"filter",
          [&](const Json& v) {
              apply_section(
                  v, "filter.",
                  {{"min_utterances_per_play",
                    [&](const Json& x) { c.filter.min_utterances_per_play = x.get<std::size_t>(); }},
                   {"min_plays_per_author", [&](const Json& x) { c.filter.min_plays_per_author = x.get<std::size_t>(); }},
                   {"single_author_only", [&](const Json& x) { c.filter.single_author_only = x.get<bool>(); }}});
          }},
         {"split",
          [&](const Json& v) {
              apply_section(
                  v, "split.",
                  {{"train_per_play", [&](const Json& x) { c.split.train_per_play = x.get<std::size_t>(); }},
                   {"val_per_play", [&](const Json& x) { c.split.val_per_play = x.get<std::size_t>(); }},
                   {"test_in_per_play", [&](const Json& x) { c.split.test_in_per_play = x.get<std::size_t>(); }},
                   {"test_out_per_play", [&](const Json& x) { c.split.test_out_per_play = x.get<std::size_t>(); }},
                   {"disputed_per_play", [&](const Json& x) { c.split.disputed_per_play = x.get<std::size_t>(); }},
                   {"timeline_per_play", [&](const Json& x) { c.split.timeline_per_play = x.get<std::size_t>(); }}});
          }},
         {"features",
          [&](const Json& v) {
              apply_section(v, "features.",
                            {{"mfw", [&](const Json& x) { c.mfw = x.get<std::size_t>(); }},
                             {"linear_vocabulary",
                              [&](const Json& x) {
                                  c.linear_vocabulary = x.is_null() ? kUnlimitedVocabulary : x.get<std::size_t>();
                              }},
                             {"ngram_sizes", [&](const Json& x) { c.ngram_sizes = x.get<std::vector<int>>(); }}});
          }},
         {"models", [&](const Json& v) { c.models = v.get<std::vector<std::string>>(); }},
         {"baselines", [&](const Json& v) { c.baselines = v.get<std::vector<std::string>>(); }},
         {"long_text", [&](const Json& v) { c.long_text = v.get<bool>(); }},
         {"linear",
          [&](const Json& v) {
              if (v.contains("seed")) throw ConfigError("config: linear.seed is derived from the global seed");
              c.linear = hyper_from_json(v, c.linear);
          }},
         {"pairs",
          [&](const Json& v) {
              apply_section(v, "pairs.",
                            {{"style", [&](const Json& x) { c.pair_style = parse_pair_style(x.get<std::string>()); }}});
          }},
         {"reports", [&](const Json& v) {
              apply_section(
                  v, "reports.",
                  {{"scapegoat_k", [&](const Json& x) { c.scapegoat_k = x.get<std::size_t>(); }},
                   {"top_m", [&](const Json& x) { c.top_m = x.get<std::size_t>(); }},
                   {"excluded_terms", [&](const Json& x) { c.excluded_terms = x.get<std::set<std::string>>(); }},
                   {"n_trials", [&](const Json& x) { c.n_trials = x.get<std::size_t>(); }},
                   {"histogram_bin_width", [&](const Json& x) { c.histogram_bin_width = x.get<double>(); }},
                   {"timeline_targets",
                    [&](const Json& x) { c.timeline_targets = x.get<std::vector<std::string>>(); }}});
          }}});
    c.validate();
    return c;
}

RunConfig load_run_config(const fs::path& path)
{
    Json j;
    try {
        j = Json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(fmt::format("config '{}': {}", path.string(), e.what()));
    }
    return parse_run_config(j, path.parent_path());
}

OutputFormat parse_output_format(std::string_view s)
{
    if (s == "text") return OutputFormat::text;
    if (s == "json") return OutputFormat::json;
    if (s == "csv") return OutputFormat::csv;
    throw ConfigError(fmt::format("unknown output format '{}'", s));
}

// --- artifacts ----------------------------------------------------------

namespace {

Json meta(const RunConfig& cfg, std::string_view stage)
{
    return Json{{"stage", stage}, {"config_hash", cfg.hash()}, {"seed", cfg.seed}};
}

void write_json_artifact(const fs::path& path, const RunConfig& cfg, std::string_view stage, const Json& body)
{
    Json j;
    j["meta"] = meta(cfg, stage);
    for (const auto& [k, v] : body.items()) j[k] = v;
    write_file_atomic(path, j.dump(1) + "\n");
}

void write_with_sidecar(const fs::path& path, const RunConfig& cfg, std::string_view stage, std::string_view content,
                        std::size_t rows)
{
    auto m = meta(cfg, stage);
    m["file"] = path.filename().string();
    m["rows"] = rows;
    fs::path side = path;
    side += ".meta.json";
    write_file_atomic(path, content);
    write_file_atomic(side, m.dump(1) + "\n");
}

fs::path require(const RunConfig& cfg, std::string_view file, std::string_view producer)
{
    const auto p = cfg.workdir / file;
    if (!fs::exists(p))
        throw DataError(fmt::format("missing {} (run 'stylo {}' first)", p.generic_string(), producer));
    return p;
}

Json load_json(const fs::path& p)
{
    try {
        return Json::parse(read_file(p));
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(fmt::format("'{}' is not valid JSON: {}", p.generic_string(), e.what()));
    }
}

std::string pct(double fraction)
{
    return fmt::format("{:.1f}%", 100.0 * fraction);
}

std::vector<Sample> samples_of(const SampleIndex& index, const std::vector<std::string>& ids)
{
    std::vector<Sample> out;
    out.reserve(ids.size());
    for (const auto& id : ids) out.push_back(index.at(id));
    return out;
}

} // namespace

std::vector<SegmentedPlay> CorpusData::group(std::string_view name) const
{
    std::map<std::string, SegmentedPlay> by_id;
    for (const auto& p : plays) {
        if (p.group != name) continue;
        SegmentedPlay sp;
        sp.play.play_id = p.play_id;
        sp.play.title = p.title;
        sp.play.author = p.author;
        sp.play.source = p.source;
        sp.play.century = p.century;
        by_id.emplace(p.play_id, std::move(sp));
    }
    for (const auto& s : samples) {
        const auto it = by_id.find(s.play_id);
        if (it != by_id.end()) it->second.samples.push_back(s);
    }
    std::vector<SegmentedPlay> out;
    for (auto& [id, sp] : by_id) out.push_back(std::move(sp));
    return out;
}

std::map<std::string, int> CorpusData::centuries() const
{
    std::map<std::string, int> out;
    for (const auto& p : plays)
        if (p.century) out.emplace(p.play_id, *p.century);
    return out;
}

CorpusData load_corpus(const fs::path& workdir)
{
    const auto path = workdir / "corpus.json";
    if (!fs::exists(path)) throw DataError(fmt::format("missing {} (run 'stylo ingest' first)", path.generic_string()));
    const auto j = load_json(path);
    CorpusData c;
    try {
        for (const auto& e : j.at("plays")) {
            CorpusData::Play p;
            p.play_id = e.at("play_id").get<std::string>();
            p.title = e.at("title").get<std::string>();
            p.author = e.at("author").get<std::string>();
            p.source = e.at("source").get<std::string>();
            if (!e.at("century").is_null()) p.century = e.at("century").get<int>();
            p.status = parse_authorship_status(e.at("authorship_status").get<std::string>());
            p.group = e.at("group").get<std::string>();
            p.reason = e.at("reason").get<std::string>();
            p.utterances = e.at("utterances").get<std::size_t>();
            p.samples = e.at("samples").get<std::size_t>();
            c.plays.push_back(std::move(p));
        }
        for (const auto& e : j.at("samples")) c.samples.push_back(sample_from_json(e));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(fmt::format("'{}' is malformed: {}", path.generic_string(), e.what()));
    }
    return c;
}

DatasetSplit load_split(const fs::path& workdir)
{
    const auto path = workdir / "split.json";
    if (!fs::exists(path)) throw DataError(fmt::format("missing {} (run 'stylo split' first)", path.generic_string()));
    return split_from_json(load_json(path));
}

// --- stages -------------------------------------------------------------

namespace {

struct Context {
    const RunConfig& cfg;
    const StageOptions& opts;
    std::ostream& out;
};

void emit(const Context& ctx, const std::string& text, const Json& json, const std::string& csv)
{
    switch (ctx.opts.format) {
    case OutputFormat::text: ctx.out << text; break;
    case OutputFormat::json: ctx.out << json.dump(2) << "\n"; break;
    case OutputFormat::csv: ctx.out << csv; break;
    }
}

void stage_ingest(const Context& ctx)
{
    const auto& cfg = ctx.cfg;
    if (cfg.manifest.empty()) throw ConfigError("config has no manifest path");
    if (!fs::exists(cfg.manifest))
        throw DataError(fmt::format("manifest '{}' does not exist", cfg.manifest.generic_string()));
    cfg.segmenter.validate();
    cfg.filter.validate();

    const auto entries = load_manifest(cfg.manifest);
    std::vector<SegmentedPlay> filterable, comparison;
    std::map<std::string, AuthorshipStatus> authorship;
    std::map<std::string, const ManifestEntry*> entry_of;
    std::map<std::string, std::size_t> utterances;
    for (const auto& e : entries) {
        auto sp = segment_play(load_play(e), cfg.segmenter);
        entry_of[e.play_id] = &e;
        utterances[e.play_id] = sp.play.utterances.size();
        if (e.status == AuthorshipStatus::comparison) {
            comparison.push_back(std::move(sp));
        } else {
            authorship[e.play_id] = e.status;
            filterable.push_back(std::move(sp));
        }
    }
    auto filtered = filter_corpus(std::move(filterable), authorship, cfg.filter);

    Json plays = Json::array();
    std::vector<Sample> samples;
    std::map<std::string, Json> rows;
    const auto add = [&](const SegmentedPlay& sp, std::string_view group, std::string_view reason) {
        const auto& e = *entry_of.at(sp.play.play_id);
        Json p{{"play_id", e.play_id},
               {"title", e.title},
               {"author", e.author},
               {"source", e.source},
               {"century", e.century ? Json(*e.century) : Json(nullptr)},
               {"authorship_status", to_string(e.status)},
               {"group", group},
               {"reason", reason},
               {"utterances", utterances.at(e.play_id)},
               {"samples", group == "rejected" ? 0 : sp.samples.size()}};
        rows[e.play_id] = p;
        if (group != "rejected") samples.insert(samples.end(), sp.samples.begin(), sp.samples.end());
    };
    for (const auto& sp : filtered.primary) add(sp, "primary", "");
    for (const auto& sp : filtered.disputed) add(sp, "disputed", "");
    for (const auto& sp : comparison) add(sp, "comparison", "");

    // rejected plays carry no samples; rebuild their rows from the manifest
    std::map<std::string, std::string> rejected;
    for (const auto& r : filtered.rejected) rejected[r.play_id] = r.reason;
    for (const auto& [id, reason] : rejected) {
        const auto& e = *entry_of.at(id);
        rows[id] = Json{{"play_id", e.play_id},
                        {"title", e.title},
                        {"author", e.author},
                        {"source", e.source},
                        {"century", e.century ? Json(*e.century) : Json(nullptr)},
                        {"authorship_status", to_string(e.status)},
                        {"group", "rejected"},
                        {"reason", reason},
                        {"utterances", utterances.at(id)},
                        {"samples", 0}};
    }
    for (auto& [id, row] : rows) plays.push_back(std::move(row));
    std::sort(samples.begin(), samples.end(),
              [](const Sample& a, const Sample& b) { return a.sample_id < b.sample_id; });

    Json sample_json = Json::array();
    std::string csv = "sample_id,play_id,author,word_count,text\n";
    for (const auto& s : samples) {
        sample_json.push_back(to_json(s));
        const std::string f[] = {s.sample_id, s.play_id, s.author, std::to_string(s.word_count), s.text};
        csv += csv_row(f);
    }
    write_json_artifact(cfg.workdir / "corpus.json", cfg, "ingest",
                        Json{{"plays", plays}, {"samples", sample_json}});
    write_with_sidecar(cfg.workdir / "samples.csv", cfg, "ingest", csv, samples.size());

    Json summary{{"plays", entries.size()},
                 {"primary", filtered.primary.size()},
                 {"disputed", filtered.disputed.size()},
                 {"comparison", comparison.size()},
                 {"rejected", rejected},
                 {"samples", samples.size()}};
    std::string text = fmt::format("ingest: {} plays -> {} primary, {} disputed, {} comparison, {} rejected; {} samples\n",
                                   entries.size(), filtered.primary.size(), filtered.disputed.size(),
                                   comparison.size(), rejected.size(), samples.size());
    for (const auto& [id, reason] : rejected) text += fmt::format("  rejected {} ({})\n", id, reason);
    std::string csv_out = "play_id,reason\n";
    for (const auto& [id, reason] : rejected) csv_out += csv_row(std::vector<std::string>{id, reason});
    emit(ctx, text, summary, csv_out);
}

SplitConfig seeded_split(const RunConfig& cfg)
{
    auto sc = cfg.split;
    sc.seed = cfg.seed;
    return sc;
}

void stage_split(const Context& ctx)
{
    const auto& cfg = ctx.cfg;
    const auto corpus = load_corpus(cfg.workdir);
    const auto primary = corpus.group("primary");
    if (primary.empty()) throw DataError("no primary plays survived ingest filtering");
    const auto sc = seeded_split(cfg);

    auto split = build_splits(primary, sc);
    split.disputed = build_disputed_set(corpus.group("disputed"), sc);
    split.timeline = build_timeline_set(corpus.group("comparison"), sc);
    if (const auto problems = check_split(split, primary); !problems.empty())
        throw Error(fmt::format("split invariants violated: {}", problems.front()));

    const SampleIndex index(corpus.samples);
    write_json_artifact(cfg.workdir / "split.json", cfg, "split", to_json(split));
    std::size_t rows = 0;
    for (const auto p : kAllPartitions) rows += split.ids(p).size();
    const auto csv = split_to_csv(split, index);
    write_with_sidecar(cfg.workdir / "split.csv", cfg, "split", csv, rows);

    Json counts = Json::object();
    std::string text = "split:";
    for (const auto p : kAllPartitions) {
        counts[std::string(to_string(p))] = split.ids(p).size();
        text += fmt::format(" {}={}", to_string(p), split.ids(p).size());
    }
    text += "\n";
    for (const auto& [author, play] : split.holdout) text += fmt::format("  holdout {}: {}\n", author, play);
    emit(ctx, text, Json{{"counts", counts}, {"holdout", to_json(split)["holdout"]}}, csv);
}

constexpr std::pair<Partition, std::string_view> kPairFiles[] = {
    {Partition::train, "pairs.jsonl"},         {Partition::val, "pairs.val.jsonl"},
    {Partition::test_in, "pairs.in.jsonl"},    {Partition::test_out, "pairs.out.jsonl"},
    {Partition::disputed, "pairs.disputed.jsonl"}, {Partition::timeline, "pairs.timeline.jsonl"}};

void stage_pairs(const Context& ctx)
{
    const auto& cfg = ctx.cfg;
    const auto corpus = load_corpus(cfg.workdir);
    const auto split = load_split(cfg.workdir);
    const SampleIndex index(corpus.samples);

    Json files = Json::object();
    std::string text = fmt::format("pairs ({}):", to_string(cfg.pair_style));
    for (const auto& [part, name] : kPairFiles) {
        std::string body;
        for (const auto& id : split.ids(part)) body += to_json(make_pair(index.at(id), cfg.pair_style)).dump() + "\n";
        write_file_atomic(cfg.workdir / name, body);
        files[std::string(name)] = split.ids(part).size();
        text += fmt::format(" {}={}", name, split.ids(part).size());
    }
    auto m = meta(cfg, "pairs");
    m["style"] = to_string(cfg.pair_style);
    m["files"] = files;
    write_file_atomic(cfg.workdir / "pairs.meta.json", m.dump(1) + "\n");
    text += "\n";
    std::string csv = "file,rows\n";
    for (const auto& [f, n] : files.items()) csv += csv_row(std::vector<std::string>{f, std::to_string(n.get<std::size_t>())});
    emit(ctx, text, Json{{"style", to_string(cfg.pair_style)}, {"files", files}}, csv);
}

struct LinearSpec {
    LinearKind kind;
    FeatureKind features;
};

LinearSpec linear_spec(std::string_view tag)
{
    const auto us = tag.find('_');
    return {parse_linear_kind(tag.substr(0, us)), parse_feature_kind(tag.substr(us + 1))};
}

void stage_train(const Context& ctx)
{
    const auto& cfg = ctx.cfg;
    const auto corpus = load_corpus(cfg.workdir);
    const auto split = load_split(cfg.workdir);
    const SampleIndex index(corpus.samples);
    const auto train = samples_of(index, split.train);
    if (train.empty()) throw DataError("split has no training samples");

    Json summary = Json::object();
    std::string text;
    std::string csv = "model,vocabulary,final_loss\n";
    for (const auto& tag : cfg.models) {
        Json body;
        body["model"] = tag;
        if (tag == "cosine_delta") {
            const auto xf = fit_feature_transform(FeatureKind::zscore, train,
                                                  build_vocabulary(train, cfg.mfw, cfg.ngram_sizes));
            const auto profiles = fit_cosine_delta(train, xf);
            body["transform"] = to_json(xf);
            body["profiles"] = to_json(profiles);
            summary[tag] = Json{{"vocabulary", xf.dim()}, {"authors", profiles.size()}};
            text += fmt::format("train {}: {} terms, {} author profiles\n", tag, xf.dim(), profiles.size());
            csv += csv_row(std::vector<std::string>{tag, std::to_string(xf.dim()), ""});
        } else {
            const auto spec = linear_spec(tag);
            const auto xf = fit_feature_transform(spec.features, train,
                                                  build_vocabulary(train, cfg.linear_vocabulary, cfg.ngram_sizes));
            std::vector<SparseVector> rows;
            std::vector<std::string> labels;
            rows.reserve(train.size());
            for (const auto& s : train) {
                rows.push_back(apply_sparse(xf, s.text));
                labels.push_back(s.author);
            }
            auto hyper = cfg.linear;
            hyper.seed = derive_seed(cfg.seed, "train/" + tag);
            const auto model = train_linear(spec.kind, rows, labels, hyper);
            body["transform"] = to_json(xf);
            body["linear"] = to_json(model);
            const double final_loss = model.loss_trajectory.empty() ? 0.0 : model.loss_trajectory.back();
            summary[tag] = Json{{"vocabulary", xf.dim()}, {"final_loss", final_loss}};
            text += fmt::format("train {}: {} terms, {} epochs, final objective {:.6g}\n", tag, xf.dim(),
                                model.loss_trajectory.size(), final_loss);
            csv += csv_row(std::vector<std::string>{tag, std::to_string(xf.dim()), format_double(final_loss)});
        }
        write_json_artifact(cfg.workdir / fmt::format("model.{}.json", tag), cfg, "train", body);
    }
    emit(ctx, text, summary, csv);
}

constexpr Partition kPredictionPartitions[] = {Partition::test_in, Partition::test_out, Partition::disputed,
                                               Partition::timeline};

/// Scores texts with one trained model artifact.
class TrainedModel {
public:
    explicit TrainedModel(const Json& j)
    {
        tag_ = j.at("model").get<std::string>();
        xf_ = transform_from_json(j.at("transform"));
        if (tag_ == "cosine_delta") profiles_ = profiles_from_json(j.at("profiles"));
        else linear_ = linear_model_from_json(j.at("linear"));
    }

    const std::string& tag() const { return tag_; }

    std::string predict(std::string_view text) const
    {
        if (tag_ == "cosine_delta") return attribute_cosine_delta(apply_feature_transform(xf_, text), profiles_).best();
        return predict_linear(linear_, apply_sparse(xf_, text)).best();
    }

private:
    std::string tag_;
    FeatureTransform xf_;
    std::vector<AuthorProfile> profiles_;
    LinearModel linear_;
};

PredictionRecord record_for(const Sample& s, Partition part, std::string predicted, const std::string& tag)
{
    PredictionRecord r;
    r.sample_id = s.sample_id;
    r.play_id = s.play_id;
    r.gold_author = s.author;
    r.predicted_author = std::move(predicted);
    r.partition = part;
    r.word_count = s.word_count;
    r.model_tag = tag;
    return r;
}

/// One merged long document per (play, prediction partition).
std::vector<std::pair<Sample, Partition>> merged_documents(const DatasetSplit& split, const SampleIndex& index)
{
    std::vector<std::pair<Sample, Partition>> out;
    for (const auto part : kPredictionPartitions) {
        std::map<std::string, std::vector<Sample>> by_play;
        for (const auto& id : split.ids(part)) {
            const auto& s = index.at(id);
            by_play[s.play_id].push_back(s);
        }
        for (const auto& [play, samples] : by_play) out.emplace_back(merge_play_text(samples, part), part);
    }
    return out;
}

void validate_predictions(std::span<const PredictionRecord> preds, const SplitIndex& split, const SampleIndex& index)
{
    for (const auto& p : preds) {
        const auto part = split.find(p.sample_id);
        if (!part) throw DataError(fmt::format("prediction for unknown sample_id '{}'", p.sample_id));
        if (*part != p.partition)
            throw DataError(fmt::format("sample '{}' is in partition '{}' but the prediction says '{}'", p.sample_id,
                                        to_string(*part), prediction_label(p.partition)));
        if (const auto* s = index.find(p.sample_id)) {
            if (s->play_id != p.play_id || s->author != p.gold_author)
                throw DataError(fmt::format("prediction for '{}' disagrees with the corpus on play or gold author",
                                            p.sample_id));
        }
    }
}

SplitIndex full_split_index(const DatasetSplit& split, const SampleIndex& index)
{
    SplitIndex si(split);
    for (const auto part : kPredictionPartitions) {
        std::set<std::string> plays;
        for (const auto& id : split.ids(part)) plays.insert(index.at(id).play_id);
        for (const auto& play : plays) si.add(merged_sample_id(play, part), part);
    }
    return si;
}

std::string external_tag(const Context& ctx, std::span<const PredictionRecord> preds)
{
    if (ctx.opts.tag) return *ctx.opts.tag;
    std::set<std::string> tags;
    for (const auto& p : preds) tags.insert(p.model_tag);
    if (tags.size() == 1 && valid_tag(*tags.begin())) return *tags.begin();
    return ctx.opts.predictions->stem().string();
}

void stage_attribute(const Context& ctx)
{
    const auto& cfg = ctx.cfg;
    const auto corpus = load_corpus(cfg.workdir);
    const auto split = load_split(cfg.workdir);
    const SampleIndex index(corpus.samples);

    std::map<std::string, std::vector<PredictionRecord>> outputs;
    if (ctx.opts.predictions) {
        auto preds = predictions_from_csv(read_file(*ctx.opts.predictions));
        validate_predictions(preds, full_split_index(split, index), index);
        outputs.emplace(external_tag(ctx, preds), std::move(preds));
    } else {
        for (const auto& tag : cfg.models) {
            const TrainedModel model(load_json(require(cfg, fmt::format("model.{}.json", tag), "train")));
            auto& preds = outputs[tag];
            for (const auto part : kPredictionPartitions)
                for (const auto& id : split.ids(part)) {
                    const auto& s = index.at(id);
                    preds.push_back(record_for(s, part, model.predict(s.text), tag));
                }
            if (cfg.long_text && tag == "cosine_delta") {
                const std::string long_tag = tag + "_long";
                auto& merged = outputs[long_tag];
                for (const auto& [doc, part] : merged_documents(split, index))
                    merged.push_back(record_for(doc, part, model.predict(doc.text), long_tag));
            }
        }
        for (const auto& b : cfg.baselines) {
            const auto kind = parse_baseline_kind(b);
            outputs[std::string(to_string(kind))] = baseline_predict(kind, split, index, cfg.seed);
        }
    }

    Json summary = Json::object();
    std::string text, csv = "tag,rows,file\n";
    for (const auto& [tag, preds] : outputs) {
        if (!valid_tag(tag)) throw ConfigError(fmt::format("invalid predictions tag '{}'", tag));
        const auto name = fmt::format("predictions.{}.csv", tag);
        write_with_sidecar(cfg.workdir / name, cfg, "attribute", predictions_to_csv(preds), preds.size());
        summary[tag] = Json{{"rows", preds.size()}, {"file", name}};
        text += fmt::format("attribute {}: {} predictions -> {}\n", tag, preds.size(), name);
        csv += csv_row(std::vector<std::string>{tag, std::to_string(preds.size()), name});
    }
    emit(ctx, text, summary, csv);
}

std::vector<std::pair<std::string, fs::path>> prediction_files(const Context& ctx)
{
    std::vector<std::pair<std::string, fs::path>> out;
    if (ctx.opts.predictions) {
        const auto& p = *ctx.opts.predictions;
        if (!fs::exists(p)) throw DataError(fmt::format("predictions file '{}' does not exist", p.generic_string()));
        out.emplace_back(ctx.opts.tag.value_or(p.stem().string()), p);
        return out;
    }
    if (ctx.opts.tag) {
        out.emplace_back(*ctx.opts.tag, require(ctx.cfg, fmt::format("predictions.{}.csv", *ctx.opts.tag), "attribute"));
        return out;
    }
    if (fs::is_directory(ctx.cfg.workdir))
        for (const auto& e : fs::directory_iterator(ctx.cfg.workdir)) {
            const auto name = e.path().filename().string();
            if (name.starts_with("predictions.") && name.ends_with(".csv") && name.size() > 16)
                out.emplace_back(name.substr(12, name.size() - 16), e.path());
        }
    if (out.empty())
        throw DataError(fmt::format("no predictions.*.csv in {} (run 'stylo attribute' first)",
                                    ctx.cfg.workdir.generic_string()));
    std::sort(out.begin(), out.end());
    return out;
}

std::map<std::string, std::size_t> plays_per_author(const CorpusData& corpus)
{
    std::map<std::string, std::size_t> out;
    for (const auto& p : corpus.plays)
        if (p.group == "primary") ++out[p.author];
    return out;
}

void stage_evaluate(const Context& ctx)
{
    const auto& cfg = ctx.cfg;
    const auto corpus = load_corpus(cfg.workdir);
    const auto split = load_split(cfg.workdir);
    const SampleIndex index(corpus.samples);
    const auto split_index = full_split_index(split, index);
    const auto play_counts = plays_per_author(corpus);

    std::set<std::string> known;
    for (const auto& id : split.train) known.insert(index.at(id).author);

    Json all = Json::object();
    std::string text;
    std::string csv = "tag,partition,n,correct,accuracy,ci95_halfwidth,plays,plays_correct,play_level_accuracy\n";
    for (const auto& [tag, path] : prediction_files(ctx)) {
        if (!valid_tag(tag)) throw ConfigError(fmt::format("invalid predictions tag '{}'", tag));
        const auto preds = predictions_from_csv(read_file(path));
        validate_predictions(preds, split_index, index);
        const auto reports = accuracy_report(preds, split_index);

        std::vector<PredictionRecord> test, disputed;
        for (const auto& p : preds) {
            if (p.partition == Partition::test_in || p.partition == Partition::test_out) test.push_back(p);
            if (p.partition == Partition::disputed) disputed.push_back(p);
        }

        Json report;
        report["predictions"] = path.filename().string();
        Json acc = Json::array();
        for (const auto& r : reports) acc.push_back(to_json(r));
        report["accuracy"] = acc;
        report["length_bins"] = to_json(length_bin_report(test));
        const auto scapegoat = scapegoat_index(test, cfg.scapegoat_k);
        report["scapegoat"] = to_json(scapegoat);
        if (!test.empty()) report["confusion"] = to_json(confusion_matrix(test, known));

        // plays in the dataset vs share of misattributions received
        std::vector<double> x, y;
        for (const auto& [author, n] : play_counts) {
            double share = 0.0;
            for (const auto& [a, s] : scapegoat.shares)
                if (a == author) share = s;
            x.push_back(static_cast<double>(n));
            y.push_back(share);
        }
        try {
            report["plays_vs_misattribution"] = to_json(correlation(x, y, CorrelationKind::pearson));
        } catch (const DataError& e) {
            report["plays_vs_misattribution"] = Json{{"kind", "pearson_r"}, {"value", nullptr}, {"reason", e.what()}};
        }
        Json shares = Json::object();
        for (const auto& [play, row] : attribution_shares(disputed, GroupBy::play)) shares[play] = to_json(row);
        report["disputed_shares"] = shares;
        write_json_artifact(cfg.workdir / fmt::format("report.{}.json", tag), cfg, "evaluate", report);

        // plotting tables
        std::string by_play = "partition,play_id,n,correct,accuracy,vote_winner,vote_share,tie\n";
        std::string acc_csv = "partition,n,correct,accuracy,ci95_halfwidth,plays,plays_correct,play_level_accuracy\n";
        text += fmt::format("== {} ({} predictions)\n", tag, preds.size());
        text += fmt::format("  {:<9} {:>7} {:>8} {:>8} {:>7} {:>9}\n", "partition", "n", "accuracy", "ci95", "plays",
                            "play_acc");
        for (const auto& r : reports) {
            const std::vector<std::string> row{r.partition,
                                               std::to_string(r.overall.n),
                                               std::to_string(r.overall.correct),
                                               format_double(r.overall.accuracy),
                                               format_double(r.overall.ci95_halfwidth),
                                               std::to_string(r.plays),
                                               std::to_string(r.plays_correct),
                                               format_double(r.play_level_accuracy)};
            acc_csv += csv_row(row);
            auto tagged = row;
            tagged.insert(tagged.begin(), tag);
            csv += csv_row(tagged);
            text += fmt::format("  {:<9} {:>7} {:>8} {:>8} {:>7} {:>9}\n", r.partition, r.overall.n,
                                pct(r.overall.accuracy), fmt::format("±{:.1f}", 100.0 * r.overall.ci95_halfwidth),
                                r.plays, pct(r.play_level_accuracy));
            if (r.partition == "test") continue;
            for (const auto& [play, a] : r.by_play) {
                const auto& v = r.votes.at(play);
                by_play += csv_row(std::vector<std::string>{r.partition, play, std::to_string(a.n),
                                                            std::to_string(a.correct), format_double(a.accuracy),
                                                            v.winner, format_double(v.share), v.tie ? "1" : "0"});
            }
        }
        const auto base = cfg.workdir / fmt::format("report.{}", tag);
        write_with_sidecar(fs::path(base.string() + ".accuracy.csv"), cfg, "evaluate", acc_csv, reports.size());
        write_with_sidecar(fs::path(base.string() + ".by_play.csv"), cfg, "evaluate", by_play,
                           static_cast<std::size_t>(std::count(by_play.begin(), by_play.end(), '\n') - 1));

        const auto lengths = length_bin_report(test);
        std::string len_csv = "bin,count,correct,accuracy\n";
        for (const auto& b : lengths.bins)
            len_csv += csv_row(std::vector<std::string>{b.label(), std::to_string(b.count), std::to_string(b.correct),
                                                        format_double(b.accuracy)});
        write_with_sidecar(fs::path(base.string() + ".length.csv"), cfg, "evaluate", len_csv, lengths.bins.size());

        std::string sg_csv = "predicted_author,percent\n";
        for (const auto& [a, s] : scapegoat.shares) sg_csv += csv_row(std::vector<std::string>{a, format_double(s)});
        write_with_sidecar(fs::path(base.string() + ".scapegoat.csv"), cfg, "evaluate", sg_csv, scapegoat.shares.size());

        if (!test.empty()) {
            const auto m = confusion_matrix(test, known);
            std::vector<std::string> header{"gold_author"};
            header.insert(header.end(), m.columns.begin(), m.columns.end());
            std::string cm_csv = csv_row(header);
            for (std::size_t r = 0; r < m.rows.size(); ++r) {
                std::vector<std::string> row{m.rows[r]};
                for (const double v : m.percent[r]) row.push_back(format_double(v));
                cm_csv += csv_row(row);
            }
            write_with_sidecar(fs::path(base.string() + ".confusion.csv"), cfg, "evaluate", cm_csv, m.rows.size());
        }

        if (scapegoat.misattributed > 0) {
            text += fmt::format("  misattributed {}; top-{} share {:.1f}%:", scapegoat.misattributed, scapegoat.k,
                                scapegoat.top_k_share);
            for (std::size_t i = 0; i < scapegoat.shares.size() && i < scapegoat.k; ++i)
                text += fmt::format(" {} {:.1f}%", scapegoat.shares[i].first, scapegoat.shares[i].second);
            text += "\n";
        }
        if (lengths.n_correct + lengths.n_incorrect > 0)
            text += fmt::format("  mean words: correct {:.1f}, incorrect {:.1f}\n", lengths.mean_length_correct,
                                lengths.mean_length_incorrect);
        const auto& corr = report["plays_vs_misattribution"];
        if (!corr["value"].is_null())
            text += fmt::format("  plays vs misattribution share: r = {:.3f}, p = {:.3g}\n", corr["value"].get<double>(),
                                corr["p_value"].get<double>());
        for (const auto& [play, row] : shares.items()) {
            text += fmt::format("  disputed {}:", play);
            for (std::size_t i = 0; i < row["shares"].size() && i < 3; ++i)
                text += fmt::format(" {} {:.1f}%", row["shares"][i]["author"].get<std::string>(),
                                    row["shares"][i]["percent"].get<double>());
            text += "\n";
        }
        all[tag] = report;
    }
    emit(ctx, text, all, csv);
}

std::vector<Sample> train_samples(const RunConfig& cfg, CorpusData& corpus)
{
    corpus = load_corpus(cfg.workdir);
    const auto split = load_split(cfg.workdir);
    const SampleIndex index(corpus.samples);
    auto train = samples_of(index, split.train);
    if (train.empty()) throw DataError("split has no training samples");
    return train;
}

void stage_uniqueness(const Context& ctx)
{
    const auto& cfg = ctx.cfg;
    CorpusData corpus;
    const auto train = train_samples(cfg, corpus);
    const auto report = uniqueness_scores(train, cfg.top_m, cfg.excluded_terms);
    const auto counts = plays_per_author(corpus);

    std::vector<double> x, y;
    for (std::size_t a = 0; a < report.authors.size(); ++a) {
        x.push_back(static_cast<double>(counts.at(report.authors[a])));
        y.push_back(report.scores[a]);
    }
    Json body = to_json(report);
    Json corr = Json::object();
    for (const auto kind : {CorrelationKind::pearson, CorrelationKind::spearman}) {
        try {
            corr[std::string(to_string(kind))] = to_json(correlation(x, y, kind));
        } catch (const DataError& e) {
            corr[std::string(to_string(kind))] = Json{{"value", nullptr}, {"reason", e.what()}};
        }
    }
    body["plays_vs_uniqueness"] = corr;
    write_json_artifact(cfg.workdir / "uniqueness.json", cfg, "uniqueness", body);

    std::string csv = "author,plays,score,vocabulary_size\n";
    std::vector<std::size_t> order(report.authors.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return report.scores[a] > report.scores[b]; });
    std::string text = fmt::format("uniqueness over top {} words:\n", report.top_m);
    for (const auto a : order) {
        csv += csv_row(std::vector<std::string>{report.authors[a], std::to_string(counts.at(report.authors[a])),
                                                format_double(report.scores[a]),
                                                std::to_string(report.vocabulary_size[a])});
        text += fmt::format("  {:<28} {:>8.2f}  ({} plays)\n", report.authors[a], report.scores[a],
                            counts.at(report.authors[a]));
    }
    write_with_sidecar(cfg.workdir / "uniqueness.csv", cfg, "uniqueness", csv, report.authors.size());

    std::vector<std::string> header{"word"};
    header.insert(header.end(), report.authors.begin(), report.authors.end());
    std::string zcsv = csv_row(header);
    for (std::size_t w = 0; w < report.words.size(); ++w) {
        std::vector<std::string> row{report.words[w]};
        for (std::size_t a = 0; a < report.authors.size(); ++a) row.push_back(format_double(report.z[a][w]));
        zcsv += csv_row(row);
    }
    write_with_sidecar(cfg.workdir / "uniqueness.z.csv", cfg, "uniqueness", zcsv, report.words.size());

    if (!corr["pearson_r"]["value"].is_null())
        text += fmt::format("  plays vs uniqueness: r = {:.3f}\n", corr["pearson_r"]["value"].get<double>());
    if (!report.flagged_capitalized.empty()) {
        text += "  capitalized words (check for names):";
        for (const auto& w : report.flagged_capitalized) text += " " + w;
        text += "\n";
    }
    emit(ctx, text, body, csv);
}

void stage_trials(const Context& ctx)
{
    const auto& cfg = ctx.cfg;
    CorpusData corpus;
    const auto train = train_samples(cfg, corpus);
    TrialConfig tc;
    tc.n_trials = cfg.n_trials;
    tc.seed = derive_seed(cfg.seed, "trials");
    tc.top_m = cfg.top_m;
    tc.excluded_terms = cfg.excluded_terms;
    tc.bin_width = cfg.histogram_bin_width;
    const UniquenessTrials trials(train);
    const auto res = trials.run(tc);

    write_json_artifact(cfg.workdir / "trials.json", cfg, "trials", to_json(res));
    std::string hist = "lo,hi,count\n";
    for (const auto& b : res.histogram)
        hist += csv_row(std::vector<std::string>{format_double(b.lo), format_double(b.hi), std::to_string(b.count)});
    write_with_sidecar(cfg.workdir / "trials.histogram.csv", cfg, "trials", hist, res.histogram.size());
    std::string authors = "rank,plays,author,observed_uniqueness,mean_synthetic_uniqueness\n";
    for (std::size_t a = 0; a < res.authors.size(); ++a)
        authors += csv_row(std::vector<std::string>{std::to_string(a), std::to_string(res.play_counts[a]),
                                                    res.authors[a], format_double(res.observed_uniqueness[a]),
                                                    format_double(res.mean_synthetic_uniqueness[a])});
    write_with_sidecar(cfg.workdir / "trials.authors.csv", cfg, "trials", authors, res.authors.size());

    double mean = 0.0;
    std::size_t above = 0;
    for (const double r : res.rhos) {
        mean += r;
        above += r >= res.observed_rho ? 1 : 0;
    }
    mean /= static_cast<double>(res.rhos.size());
    std::string text = fmt::format("trials: {} trials over {} authors / {} training plays\n", res.rhos.size(),
                                   res.authors.size(), trials.plays().size());
    text += fmt::format("  observed rho {:.4f}{}; mean synthetic rho {:.4f}; {} trials >= observed; {} degenerate\n",
                        res.observed_rho, res.observed_degenerate ? " (degenerate)" : "", mean, above,
                        res.degenerate_trials);
    Json summary{{"n_trials", res.rhos.size()},
                 {"observed_rho", res.observed_rho},
                 {"mean_rho", mean},
                 {"trials_at_or_above_observed", above},
                 {"degenerate_trials", res.degenerate_trials}};
    emit(ctx, text, summary, hist);
}

void stage_timeline(const Context& ctx)
{
    const auto& cfg = ctx.cfg;
    const auto corpus = load_corpus(cfg.workdir);
    const std::string tag = ctx.opts.tag.value_or("cosine_delta");
    const auto path = ctx.opts.predictions ? *ctx.opts.predictions
                                           : require(cfg, fmt::format("predictions.{}.csv", tag), "attribute");
    std::vector<PredictionRecord> preds;
    for (auto& p : predictions_from_csv(read_file(path)))
        if (p.partition == Partition::timeline) preds.push_back(std::move(p));
    if (preds.empty())
        throw DataError(fmt::format("'{}' has no timeline predictions (no comparison plays in the manifest?)",
                                    path.generic_string()));
    const auto report = timeline_report(preds, corpus.centuries(), cfg.timeline_targets);

    const auto out_tag = ctx.opts.predictions ? ctx.opts.tag.value_or(path.stem().string()) : tag;
    write_json_artifact(cfg.workdir / fmt::format("timeline.{}.json", out_tag), cfg, "timeline", to_json(report));
    std::string csv = "century,target,average_share,play_vote_share\n";
    std::string text = fmt::format("timeline ({}):\n", out_tag);
    for (const auto& c : report.centuries) {
        text += fmt::format("  century {} ({} samples, {} source authors, {} plays)\n", c.century, c.n_samples,
                            c.n_source_authors, c.n_plays);
        for (const auto& t : report.targets) {
            csv += csv_row(std::vector<std::string>{std::to_string(c.century), t, format_double(c.average_share.at(t)),
                                                    format_double(c.play_vote_share.at(t))});
            if (c.average_share.at(t) > 0.0 || c.play_vote_share.at(t) > 0.0)
                text += fmt::format("    {:<28} {:>6} of samples, {:>6} of plays\n", t, pct(c.average_share.at(t)),
                                    pct(c.play_vote_share.at(t)));
        }
    }
    write_with_sidecar(cfg.workdir / fmt::format("timeline.{}.csv", out_tag), cfg, "timeline", csv,
                       report.centuries.size() * report.targets.size());
    emit(ctx, text, to_json(report), csv);
}

} // namespace

void run_stage(std::string_view stage, const RunConfig& cfg, const StageOptions& opts, std::ostream& out)
{
    cfg.validate();
    if (opts.tag && !valid_tag(*opts.tag)) throw ConfigError(fmt::format("invalid tag '{}'", *opts.tag));
    const Context ctx{cfg, opts, out};
    if (stage == "ingest") stage_ingest(ctx);
    else if (stage == "split") stage_split(ctx);
    else if (stage == "pairs") stage_pairs(ctx);
    else if (stage == "train") stage_train(ctx);
    else if (stage == "attribute") stage_attribute(ctx);
    else if (stage == "evaluate") stage_evaluate(ctx);
    else if (stage == "uniqueness") stage_uniqueness(ctx);
    else if (stage == "trials") stage_trials(ctx);
    else if (stage == "timeline") stage_timeline(ctx);
    else throw ConfigError(fmt::format("unknown subcommand '{}'", stage));
}

} // namespace stylo
