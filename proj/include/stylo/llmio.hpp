#pragma once

#include "stylo/corpus.hpp"

#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace stylo {

/// Fine-tuning pair templates (byte-exact):
///
///   masked_span  input:  "AUTHOR: <extra_id_0> | " + text
///                output: "AUTHOR: " + author + " | " + text
///   suffix       input:  text + " | AUTHOR: <extra_id_0>"
///                output: text + " | AUTHOR: " + author
enum class PairStyle { masked_span, suffix };

std::string_view to_string(PairStyle s);
PairStyle parse_pair_style(std::string_view s);

inline constexpr std::string_view kAuthorTag = "AUTHOR:";
inline constexpr std::string_view kMaskToken = "<extra_id_0>";
inline constexpr std::string_view kFieldSeparator = " | ";

struct PairRecord {
    std::string sample_id;
    std::string input;
    std::string output;
    PairStyle style = PairStyle::masked_span;
};

/// Throws DataError when the sample has no author.
PairRecord make_pair(const Sample& sample, PairStyle style);

struct ParsedPrediction {
    std::optional<std::string> author; ///< set when a known author was recognized
    std::string raw;                   ///< the generated string, verbatim

    bool recognized() const { return author.has_value(); }
};

/// Recovers an author name from a generated string. Never throws.
///
/// The author field is the text after the first "AUTHOR:" up to the next
/// "|" (masked_span) or after the last "AUTHOR:" up to the next "|" or line
/// break (suffix). Without an "AUTHOR:" tag the whole string is used with
/// T5 sentinel tokens (<extra_id_N>, <pad>, </s>) removed. The trimmed field
/// is returned when it is a known author; otherwise its first two
/// whitespace tokens, each stripped of leading and trailing ASCII
/// punctuation and joined by one space, are tried. Anything else is
/// unrecognized.
ParsedPrediction parse_prediction(std::string_view generated, PairStyle style,
                                  const std::set<std::string, std::less<>>& known_authors);

/// The name recorded in a PredictionRecord: the recognized author, or the
/// raw generation verbatim.
std::string predicted_name(const ParsedPrediction& p);

} // namespace stylo
