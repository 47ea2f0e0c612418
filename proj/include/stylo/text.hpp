#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace stylo {

/// Codepoint -> ASCII replacement map used by normalize_text.
///
/// The default table is compiled from data/typographic_replacements.tsv;
/// the file format is one `HEX<TAB>REPLACEMENT<TAB>NOTE` row per codepoint,
/// `#` comments, `\s` for a single space and an empty field for deletion.
class ReplacementTable {
public:
    ReplacementTable() = default;

    static ReplacementTable parse(std::string_view tsv);
    static const ReplacementTable& builtin();

    const std::string* find(char32_t cp) const;
    std::size_t size() const { return map_.size(); }
    int version() const { return version_; }

private:
    std::map<char32_t, std::string> map_;
    int version_ = 0;
};

/// True for codepoints kept verbatim by normalization even though they are
/// not ASCII: Latin-1 letters, Latin Extended-A/B, Latin Extended Additional
/// and combining diacritical marks.
bool is_accented_latin(char32_t cp);

/// Normalizes raw play text. Line breaks become spaces, typographic
/// characters are mapped through the replacement table, other non-ASCII
/// characters that are not accented Latin letters are dropped, ASCII control
/// characters are dropped, whitespace runs collapse to a single space and the
/// result is trimmed. Invalid UTF-8 bytes are dropped. Idempotent.
std::string normalize_text(std::string_view raw);
std::string normalize_text(std::string_view raw, const ReplacementTable& table);

/// Appends the UTF-8 encoding of `cp`; codepoints above U+10FFFF are ignored.
void append_utf8(char32_t cp, std::string& out);

/// Whitespace tokenization; punctuation stays attached to words.
std::vector<std::string_view> split_words(std::string_view text);
std::size_t count_words(std::string_view text);

/// Joins the n-gram starting at `first` with single spaces.
std::string join_ngram(const std::vector<std::string_view>& tokens, std::size_t first, std::size_t n);

} // namespace stylo
