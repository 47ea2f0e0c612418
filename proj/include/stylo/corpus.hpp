#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace stylo {

/// One speaker turn. `text` is normalized and contains no line breaks.
struct Utterance {
    std::optional<std::string> speaker;
    std::string text;
    std::size_t word_count = 0;
};

/// Builds an utterance from raw text, normalizing it and counting words.
Utterance make_utterance(std::optional<std::string> speaker, std::string_view raw_text);

enum class AuthorshipStatus {
    single,
    disputed,
    coauthored,
    comparison, ///< later-period play used only for timeline analysis
};

std::string_view to_string(AuthorshipStatus s);
AuthorshipStatus parse_authorship_status(std::string_view s);

struct PlayRecord {
    std::string play_id;
    std::string title;
    std::string author;
    std::string source;
    std::optional<int> century;
    std::string raw_text;
    std::vector<Utterance> utterances;
};

/// One attributable unit: an utterance or a max_words-sized chunk of one.
struct Sample {
    std::string sample_id;
    std::string play_id;
    std::string author;
    std::string text;
    std::size_t word_count = 0;
};

struct SegmenterConfig {
    std::size_t max_words = 450;
    std::size_t min_words = 5;

    void validate() const;
};

struct FilterConfig {
    std::size_t min_utterances_per_play = 300;
    std::size_t min_plays_per_author = 3;
    /// When false, disputed and co-authored plays stay in the primary flow
    /// under their labeled author.
    bool single_author_only = true;

    void validate() const;
};

/// Deterministic sample id: `<play_id>:u<utterance, 6 digits>:c<chunk, 3 digits>`.
/// Zero padding keeps lexicographic order equal to document order.
std::string make_sample_id(std::string_view play_id, std::size_t utterance_index, std::size_t chunk_index);

/// Splits every utterance longer than max_words directly after each
/// max_words-th word, then discards chunks shorter than min_words.
std::vector<Sample> segment_and_chunk(const PlayRecord& play, const SegmenterConfig& cfg);

struct SegmentedPlay {
    PlayRecord play;
    std::vector<Sample> samples;
};

SegmentedPlay segment_play(PlayRecord play, const SegmenterConfig& cfg);

struct Rejection {
    std::string play_id;
    std::string reason;
};

inline constexpr std::string_view kReasonBelowMinUtterances = "below-min-utterances";
inline constexpr std::string_view kReasonAuthorBelowMinPlays = "author-below-min-plays";

struct FilterResult {
    std::vector<SegmentedPlay> primary;
    std::vector<SegmentedPlay> disputed;
    std::vector<Rejection> rejected;
};

/// Partitions plays in a fixed order:
///  1. disputed or co-authored plays go to `disputed` (when single_author_only);
///  2. plays with fewer than min_utterances_per_play samples are rejected;
///  3. authors left with fewer than min_plays_per_author plays lose them all.
/// Comparison plays are not expected here; they are rejected as a DataError.
/// Throws DataError when a play has no authorship entry.
FilterResult filter_corpus(std::vector<SegmentedPlay> plays,
                           const std::map<std::string, AuthorshipStatus>& authorship,
                           const FilterConfig& cfg);

// --- ingestion ----------------------------------------------------------

enum class TextFormat { plain, xml };

/// Plain text: blank-line separated blocks are utterances, no speakers.
std::vector<Utterance> parse_plain_text(std::string_view raw);

/// Minimal XML: each <sp> element is an utterance; an optional <speaker>
/// child supplies the speaker; other tags are stripped and the five
/// predefined entities plus numeric references are decoded.
std::vector<Utterance> parse_speech_xml(std::string_view raw);

struct ManifestEntry {
    std::string play_id;
    std::string title;
    std::string author;
    std::string source;
    std::optional<int> century;
    std::filesystem::path path;
    AuthorshipStatus status = AuthorshipStatus::single;
    TextFormat format = TextFormat::plain;
};

/// Reads the corpus manifest (a JSON document with a `plays` array, or a
/// bare array). Relative play paths resolve against the manifest directory.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& manifest_path);

PlayRecord load_play(const ManifestEntry& entry);

/// Sample lookup by id.
class SampleIndex {
public:
    SampleIndex() = default;
    explicit SampleIndex(std::span<const Sample> samples);
    explicit SampleIndex(std::span<const SegmentedPlay> plays);

    void add(const Sample& s);
    const Sample* find(std::string_view id) const;
    const Sample& at(std::string_view id) const;
    std::size_t size() const { return by_id_.size(); }

private:
    std::unordered_map<std::string, Sample> by_id_;
};

} // namespace stylo
