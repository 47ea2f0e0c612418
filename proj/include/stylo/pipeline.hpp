#pragma once

#include "stylo/analytics.hpp"
#include "stylo/attribution.hpp"
#include "stylo/corpus.hpp"
#include "stylo/features.hpp"
#include "stylo/io.hpp"
#include "stylo/llmio.hpp"
#include "stylo/sampling.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace stylo {

/// Model tags understood by `train` and `attribute`.
inline constexpr std::string_view kModelTags[] = {"cosine_delta", "logistic_tfidf", "logistic_counts", "svm_tfidf",
                                                  "svm_counts"};

struct RunConfig {
    std::filesystem::path manifest;
    std::filesystem::path workdir = "work";
    std::uint64_t seed = 0;

    SegmenterConfig segmenter;
    FilterConfig filter;
    SplitConfig split;

    std::size_t mfw = 5000;                                 ///< cosine delta vocabulary
    std::size_t linear_vocabulary = kUnlimitedVocabulary;   ///< null in JSON
    std::vector<int> ngram_sizes{1};

    std::vector<std::string> models{"cosine_delta", "logistic_tfidf", "logistic_counts", "svm_tfidf", "svm_counts"};
    std::vector<std::string> baselines{"random", "most_frequent_author"};
    bool long_text = true;
    LinearHyper linear;

    PairStyle pair_style = PairStyle::masked_span;

    std::size_t scapegoat_k = 2;
    std::size_t top_m = 100;
    std::set<std::string> excluded_terms;
    std::size_t n_trials = 1000;
    double histogram_bin_width = 0.05;
    std::vector<std::string> timeline_targets;

    /// Throws ConfigError on an invalid or inconsistent setting.
    void validate() const;

    /// Canonical JSON with every setting, defaults included. Paths are
    /// written as given.
    Json to_json() const;

    /// Hex FNV-1a of the canonical JSON without `workdir`.
    std::string hash() const;
};

/// Strict parse: unknown keys are a ConfigError. Relative paths resolve
/// against `base_dir`.
RunConfig parse_run_config(const Json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

enum class OutputFormat { text, json, csv };
OutputFormat parse_output_format(std::string_view s);

struct StageOptions {
    OutputFormat format = OutputFormat::text;
    std::optional<std::filesystem::path> predictions; ///< external predictions CSV
    std::optional<std::string> tag;                   ///< restricts evaluate/timeline to one predictions file
};

/// In-memory view of the ingest artifact.
struct CorpusData {
    struct Play {
        std::string play_id;
        std::string title;
        std::string author;
        std::string source;
        std::optional<int> century;
        AuthorshipStatus status = AuthorshipStatus::single;
        std::string group; ///< primary, disputed, comparison or rejected
        std::string reason;
        std::size_t utterances = 0;
        std::size_t samples = 0;
    };
    std::vector<Play> plays;
    std::vector<Sample> samples; ///< samples of every non-rejected play

    std::vector<SegmentedPlay> group(std::string_view name) const;
    std::map<std::string, int> centuries() const;
};

CorpusData load_corpus(const std::filesystem::path& workdir);
DatasetSplit load_split(const std::filesystem::path& workdir);

/// Runs one subcommand; writes artifacts into cfg.workdir and a summary to
/// `out`. Throws Error (or a subclass) on failure; nothing partial is left.
void run_stage(std::string_view stage, const RunConfig& cfg, const StageOptions& opts, std::ostream& out);

inline constexpr std::string_view kStages[] = {"ingest",   "split",      "pairs",  "train",   "attribute",
                                               "evaluate", "uniqueness", "trials", "timeline"};

} // namespace stylo
