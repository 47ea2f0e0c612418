#pragma once

#include "stylo/analytics.hpp"
#include "stylo/attribution.hpp"
#include "stylo/corpus.hpp"
#include "stylo/features.hpp"
#include "stylo/llmio.hpp"
#include "stylo/sampling.hpp"

#include "json.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stylo {

using Json = nlohmann::ordered_json;

// --- files --------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so a
/// failed write never leaves a partial artifact.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// --- CSV (RFC 4180) -----------------------------------------------------

/// Quotes a field when it contains a comma, quote, CR or LF.
std::string csv_field(std::string_view s);
/// Fields joined by commas, terminated by "\n".
std::string csv_row(std::span<const std::string> fields);

/// Parses CSV text into rows. Accepts LF or CRLF line ends and quoted
/// fields spanning lines. Throws DataError with the line number on an
/// unterminated quote or stray characters after a closing quote.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

// --- predictions --------------------------------------------------------

inline constexpr std::string_view kPredictionHeader =
    "sample_id,play_id,gold_author,predicted_author,partition,word_count,model_tag";

std::string predictions_to_csv(std::span<const PredictionRecord> preds);

/// Strict reader: the header must match kPredictionHeader exactly and every
/// row must have seven fields, a known partition label and an integer
/// word_count. Errors name the line.
std::vector<PredictionRecord> predictions_from_csv(std::string_view text);

// --- JSON ---------------------------------------------------------------

Json to_json(const Sample& s);
Sample sample_from_json(const Json& j);

Json to_json(const DatasetSplit& s);
DatasetSplit split_from_json(const Json& j);
/// sample_id,play_id,author,partition; rows in partition order, ids sorted.
std::string split_to_csv(const DatasetSplit& s, const SampleIndex& samples);

Json to_json(const Vocabulary& v);
Vocabulary vocabulary_from_json(const Json& j);
Json to_json(const FeatureTransform& xf);
FeatureTransform transform_from_json(const Json& j);

Json to_json(const LinearHyper& h);
LinearHyper hyper_from_json(const Json& j, LinearHyper defaults = {});
Json to_json(const LinearModel& m);
LinearModel linear_model_from_json(const Json& j);

Json to_json(std::span<const AuthorProfile> profiles);
std::vector<AuthorProfile> profiles_from_json(const Json& j);

Json to_json(const PairRecord& p);

Json to_json(const Accuracy& a);
Json to_json(const AccuracyReport& r);
Json to_json(const LengthBinReport& r);
Json to_json(const ConfusionMatrix& m);
Json to_json(const ScapegoatReport& r);
Json to_json(const ShareRow& r);
Json to_json(const StatResult& r);
Json to_json(const UniquenessReport& r);
Json to_json(const TrialResult& r);
Json to_json(const TimelineReport& r);

/// Fixed-precision rendering used in JSON reports and CSVs: shortest
/// round-trip representation.
std::string format_double(double v);

} // namespace stylo
