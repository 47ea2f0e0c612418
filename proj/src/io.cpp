#include "stylo/io.hpp"

#include "stylo/error.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace stylo {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void write_file_atomic(const fs::path& path, std::string_view content)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError(fmt::format("cannot write '{}'", tmp.string()));
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            out.close();
            std::error_code ec;
            fs::remove(tmp, ec);
            throw DataError(fmt::format("write to '{}' failed", tmp.string()));
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw DataError(fmt::format("cannot rename into '{}'", path.string()));
    }
}

// --- CSV ----------------------------------------------------------------

std::string csv_field(std::string_view s)
{
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string csv_row(std::span<const std::string> fields)
{
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out += csv_field(fields[i]);
    }
    out.push_back('\n');
    return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text)
{
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    std::size_t line = 1;
    std::size_t i = 0;
    bool field_started = false;

    const auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    const auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
    };

    while (i < text.size()) {
        const char c = text[i];
        if (c == '"' && !field_started && field.empty()) {
            const auto start_line = line;
            ++i;
            while (true) {
                if (i >= text.size()) throw DataError(fmt::format("CSV line {}: unterminated quoted field", start_line));
                if (text[i] == '"') {
                    if (i + 1 < text.size() && text[i + 1] == '"') {
                        field.push_back('"');
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                if (text[i] == '\n') ++line;
                field.push_back(text[i++]);
            }
            field_started = true;
            if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r')
                throw DataError(fmt::format("CSV line {}: unexpected character after closing quote", line));
            continue;
        }
        if (c == ',') {
            end_field();
            ++i;
        } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
            end_row();
            i += 2;
            ++line;
        } else if (c == '\n') {
            end_row();
            ++i;
            ++line;
        } else {
            if (field_started) throw DataError(fmt::format("CSV line {}: unexpected character after closing quote", line));
            field.push_back(c);
            ++i;
        }
    }
    if (field_started || !field.empty() || !row.empty()) end_row();
    return rows;
}

// --- predictions --------------------------------------------------------

std::string predictions_to_csv(std::span<const PredictionRecord> preds)
{
    std::string out(kPredictionHeader);
    out.push_back('\n');
    for (const auto& p : preds) {
        const std::string fields[] = {p.sample_id,
                                      p.play_id,
                                      p.gold_author,
                                      p.predicted_author,
                                      std::string(prediction_label(p.partition)),
                                      std::to_string(p.word_count),
                                      p.model_tag};
        out += csv_row(fields);
    }
    return out;
}

std::vector<PredictionRecord> predictions_from_csv(std::string_view text)
{
    const auto rows = parse_csv(text);
    if (rows.empty()) throw DataError("predictions CSV is empty");
    std::string header;
    for (std::size_t i = 0; i < rows[0].size(); ++i) header += (i ? "," : "") + rows[0][i];
    if (header != kPredictionHeader)
        throw DataError(fmt::format("predictions CSV header is '{}', expected '{}'", header, kPredictionHeader));

    std::vector<PredictionRecord> out;
    out.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r];
        const auto where = fmt::format("predictions CSV row {}", r + 1);
        if (f.size() != 7) throw DataError(fmt::format("{}: expected 7 fields, got {}", where, f.size()));
        PredictionRecord p;
        p.sample_id = f[0];
        p.play_id = f[1];
        p.gold_author = f[2];
        p.predicted_author = f[3];
        if (p.sample_id.empty()) throw DataError(fmt::format("{}: empty sample_id", where));
        try {
            p.partition = parse_prediction_label(f[4]);
        } catch (const Error&) {
            throw DataError(fmt::format("{}: unknown partition '{}'", where, f[4]));
        }
        const auto& wc = f[5];
        const auto [ptr, ec] = std::from_chars(wc.data(), wc.data() + wc.size(), p.word_count);
        if (ec != std::errc() || ptr != wc.data() + wc.size() || wc.empty())
            throw DataError(fmt::format("{}: word_count '{}' is not a non-negative integer", where, wc));
        p.model_tag = f[6];
        out.push_back(std::move(p));
    }
    return out;
}

// --- JSON helpers -------------------------------------------------------

namespace {

template <typename T>
T get(const Json& j, const char* key)
{
    if (!j.contains(key)) throw DataError(fmt::format("JSON field '{}' is missing", key));
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(fmt::format("JSON field '{}': {}", key, e.what()));
    }
}

Json string_list(const std::vector<std::string>& v)
{
    Json a = Json::array();
    for (const auto& s : v) a.push_back(s);
    return a;
}

Json pairs_json(const std::vector<std::pair<std::string, double>>& v)
{
    Json a = Json::array();
    for (const auto& [name, share] : v) a.push_back(Json{{"author", name}, {"percent", share}});
    return a;
}

} // namespace

std::string format_double(double v)
{
    return fmt::format("{}", v);
}

Json to_json(const Sample& s)
{
    return Json{{"sample_id", s.sample_id},
                {"play_id", s.play_id},
                {"author", s.author},
                {"word_count", s.word_count},
                {"text", s.text}};
}

Sample sample_from_json(const Json& j)
{
    Sample s;
    s.sample_id = get<std::string>(j, "sample_id");
    s.play_id = get<std::string>(j, "play_id");
    s.author = get<std::string>(j, "author");
    s.word_count = get<std::size_t>(j, "word_count");
    s.text = get<std::string>(j, "text");
    return s;
}

Json to_json(const DatasetSplit& s)
{
    Json j;
    j["seed"] = s.seed;
    Json h = Json::object();
    for (const auto& [author, play] : s.holdout) h[author] = play;
    j["holdout"] = h;
    for (const auto p : kAllPartitions) j[std::string(to_string(p))] = string_list(s.ids(p));
    return j;
}

DatasetSplit split_from_json(const Json& j)
{
    DatasetSplit s;
    s.seed = get<std::uint64_t>(j, "seed");
    const auto holdout = get<Json>(j, "holdout");
    for (const auto& [author, play] : holdout.items()) s.holdout[author] = play.get<std::string>();
    for (const auto p : kAllPartitions) {
        const std::string key(to_string(p));
        s.ids(p) = get<std::vector<std::string>>(j, key.c_str());
    }
    return s;
}

std::string split_to_csv(const DatasetSplit& s, const SampleIndex& samples)
{
    std::string out = "sample_id,play_id,author,partition\n";
    for (const auto p : kAllPartitions)
        for (const auto& id : s.ids(p)) {
            const auto& sample = samples.at(id);
            const std::string fields[] = {id, sample.play_id, sample.author, std::string(to_string(p))};
            out += csv_row(fields);
        }
    return out;
}

Json to_json(const Vocabulary& v)
{
    Json j;
    j["ngram_sizes"] = v.ngram_sizes();
    if (v.size_limit() == kUnlimitedVocabulary) j["size_limit"] = nullptr;
    else j["size_limit"] = v.size_limit();
    j["terms"] = string_list(v.terms());
    return j;
}

Vocabulary vocabulary_from_json(const Json& j)
{
    const auto& limit = get<Json>(j, "size_limit");
    return Vocabulary(get<std::vector<std::string>>(j, "terms"), get<std::vector<int>>(j, "ngram_sizes"),
                      limit.is_null() ? kUnlimitedVocabulary : limit.get<std::size_t>());
}

Json to_json(const FeatureTransform& xf)
{
    Json j;
    j["kind"] = to_string(xf.kind);
    j["n_train"] = xf.n_train;
    j["vocabulary"] = to_json(xf.vocabulary);
    j["idf"] = xf.idf;
    j["mu"] = xf.mu;
    j["sigma"] = xf.sigma;
    j["constant_terms"] = xf.constant_terms;
    return j;
}

FeatureTransform transform_from_json(const Json& j)
{
    FeatureTransform xf;
    xf.kind = parse_feature_kind(get<std::string>(j, "kind"));
    xf.n_train = get<std::size_t>(j, "n_train");
    xf.vocabulary = vocabulary_from_json(get<Json>(j, "vocabulary"));
    xf.idf = get<std::vector<double>>(j, "idf");
    xf.mu = get<std::vector<double>>(j, "mu");
    xf.sigma = get<std::vector<double>>(j, "sigma");
    xf.constant_terms = get<std::vector<std::size_t>>(j, "constant_terms");
    const auto d = xf.dim();
    if ((xf.kind == FeatureKind::tfidf && xf.idf.size() != d) ||
        (xf.kind == FeatureKind::zscore && (xf.mu.size() != d || xf.sigma.size() != d)))
        throw DataError("feature transform statistics do not match the vocabulary size");
    return xf;
}

Json to_json(const LinearHyper& h)
{
    return Json{{"learning_rate", h.learning_rate},
                {"l2_strength", h.l2_strength},
                {"epochs", h.epochs},
                {"batch_size", h.batch_size},
                {"seed", h.seed}};
}

LinearHyper hyper_from_json(const Json& j, LinearHyper h)
{
    if (!j.is_object()) throw ConfigError("linear hyperparameters must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "learning_rate") h.learning_rate = value.get<double>();
        else if (key == "l2_strength") h.l2_strength = value.get<double>();
        else if (key == "epochs") h.epochs = value.get<std::size_t>();
        else if (key == "batch_size") h.batch_size = value.get<std::size_t>();
        else if (key == "seed") h.seed = value.get<std::uint64_t>();
        else throw ConfigError(fmt::format("unknown hyperparameter '{}'", key));
    }
    return h;
}

Json to_json(const LinearModel& m)
{
    Json j;
    j["kind"] = to_string(m.kind);
    j["classes"] = string_list(m.classes);
    j["n_features"] = m.n_features;
    j["hyper"] = to_json(m.hyper);
    j["bias"] = m.bias;
    j["weights"] = m.weights;
    j["loss_trajectory"] = m.loss_trajectory;
    return j;
}

LinearModel linear_model_from_json(const Json& j)
{
    LinearModel m;
    m.kind = parse_linear_kind(get<std::string>(j, "kind"));
    m.classes = get<std::vector<std::string>>(j, "classes");
    m.n_features = get<std::size_t>(j, "n_features");
    m.hyper = hyper_from_json(get<Json>(j, "hyper"));
    m.bias = get<std::vector<double>>(j, "bias");
    m.weights = get<std::vector<double>>(j, "weights");
    m.loss_trajectory = get<std::vector<double>>(j, "loss_trajectory");
    if (m.bias.size() != m.classes.size() || m.weights.size() != m.classes.size() * m.n_features)
        throw DataError("linear model weights do not match classes x n_features");
    return m;
}

Json to_json(std::span<const AuthorProfile> profiles)
{
    Json a = Json::array();
    for (const auto& p : profiles) a.push_back(Json{{"author", p.author}, {"centroid", p.centroid}});
    return a;
}

std::vector<AuthorProfile> profiles_from_json(const Json& j)
{
    std::vector<AuthorProfile> out;
    for (const auto& e : j) out.push_back({get<std::string>(e, "author"), get<std::vector<double>>(e, "centroid")});
    return out;
}

Json to_json(const PairRecord& p)
{
    return Json{{"sample_id", p.sample_id}, {"input", p.input}, {"output", p.output}, {"style", to_string(p.style)}};
}

Json to_json(const Accuracy& a)
{
    return Json{{"n", a.n}, {"correct", a.correct}, {"accuracy", a.accuracy}, {"ci95_halfwidth", a.ci95_halfwidth}};
}

Json to_json(const AccuracyReport& r)
{
    Json j;
    j["partition"] = r.partition;
    j["overall"] = to_json(r.overall);
    j["play_level"] = Json{{"plays", r.plays}, {"correct", r.plays_correct}, {"accuracy", r.play_level_accuracy}};
    Json by_author = Json::object();
    for (const auto& [k, a] : r.by_author) by_author[k] = to_json(a);
    j["by_author"] = by_author;
    Json by_play = Json::object();
    for (const auto& [k, a] : r.by_play) {
        auto e = to_json(a);
        const auto& v = r.votes.at(k);
        e["vote"] = Json{{"winner", v.winner}, {"share", v.share}, {"votes", v.votes}, {"tie", v.tie}};
        by_play[k] = e;
    }
    j["by_play"] = by_play;
    return j;
}

Json to_json(const LengthBinReport& r)
{
    Json bins = Json::array();
    for (const auto& b : r.bins)
        bins.push_back(Json{{"bin", b.label()}, {"count", b.count}, {"correct", b.correct}, {"accuracy", b.accuracy}});
    return Json{{"bins", bins},
                {"mean_length_correct", r.mean_length_correct},
                {"mean_length_incorrect", r.mean_length_incorrect},
                {"n_correct", r.n_correct},
                {"n_incorrect", r.n_incorrect}};
}

Json to_json(const ConfusionMatrix& m)
{
    return Json{{"rows", string_list(m.rows)},
                {"columns", string_list(m.columns)},
                {"counts", m.counts},
                {"percent", m.percent}};
}

Json to_json(const ScapegoatReport& r)
{
    return Json{{"misattributed", r.misattributed}, {"k", r.k}, {"top_k_share", r.top_k_share},
                {"shares", pairs_json(r.shares)}};
}

Json to_json(const ShareRow& r)
{
    return Json{{"n", r.n}, {"shares", pairs_json(r.shares)}};
}

Json to_json(const StatResult& r)
{
    Json j{{"kind", to_string(r.kind)}, {"value", r.value}};
    j["p_value"] = r.p_value ? Json(*r.p_value) : Json(nullptr);
    return j;
}

Json to_json(const UniquenessReport& r)
{
    Json j;
    j["top_m"] = r.top_m;
    j["excluded_terms"] = r.excluded_terms;
    j["words"] = string_list(r.words);
    j["flagged_capitalized"] = string_list(r.flagged_capitalized);
    Json authors = Json::array();
    for (std::size_t a = 0; a < r.authors.size(); ++a)
        authors.push_back(Json{{"author", r.authors[a]},
                               {"score", r.scores[a]},
                               {"vocabulary_size", r.vocabulary_size[a]},
                               {"z", r.z[a]}});
    j["authors"] = authors;
    return j;
}

Json to_json(const TrialResult& r)
{
    Json j;
    j["n_trials"] = r.rhos.size();
    j["observed_rho"] = r.observed_rho;
    j["observed_degenerate"] = r.observed_degenerate;
    j["degenerate_trials"] = r.degenerate_trials;
    Json authors = Json::array();
    for (std::size_t a = 0; a < r.authors.size(); ++a)
        authors.push_back(Json{{"author", r.authors[a]},
                               {"plays", r.play_counts[a]},
                               {"observed_uniqueness", r.observed_uniqueness[a]},
                               {"mean_synthetic_uniqueness", r.mean_synthetic_uniqueness[a]}});
    j["authors"] = authors;
    Json hist = Json::array();
    for (const auto& b : r.histogram) hist.push_back(Json{{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}});
    j["histogram"] = hist;
    j["rhos"] = r.rhos;
    return j;
}

Json to_json(const TimelineReport& r)
{
    Json cs = Json::array();
    for (const auto& c : r.centuries) {
        Json avg = Json::object(), votes = Json::object();
        for (const auto& t : r.targets) {
            avg[t] = c.average_share.at(t);
            votes[t] = c.play_vote_share.at(t);
        }
        cs.push_back(Json{{"century", c.century},
                          {"n_samples", c.n_samples},
                          {"n_source_authors", c.n_source_authors},
                          {"n_plays", c.n_plays},
                          {"average_share", avg},
                          {"play_vote_share", votes}});
    }
    return Json{{"targets", string_list(r.targets)}, {"centuries", cs}};
}

} // namespace stylo
