#include "stylo/text.hpp"

#include "stylo/error.hpp"

#include <charconv>
#include <optional>

namespace stylo {

// Defined in the generated replacement_table_data.cpp.
extern const char* const kBuiltinReplacementTable;

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool is_space(unsigned char c)
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Decodes one UTF-8 sequence starting at s[i]; advances i. Returns nullopt
// (and skips one byte) on malformed input.
std::optional<char32_t> decode_utf8(std::string_view s, std::size_t& i)
{
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    std::size_t len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return std::nullopt;
    }
    if (i + len > s.size()) {
        ++i;
        return std::nullopt;
    }
    for (std::size_t k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) {
            ++i;
            return std::nullopt;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    // Reject overlong encodings and surrogates.
    static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        ++i;
        return std::nullopt;
    }
    i += len;
    return cp;
}

} // namespace

ReplacementTable ReplacementTable::parse(std::string_view tsv)
{
    ReplacementTable table;
    std::size_t line_no = 0;
    while (!tsv.empty()) {
        const auto eol = tsv.find('\n');
        std::string_view line = tsv.substr(0, eol);
        tsv = eol == std::string_view::npos ? std::string_view{} : tsv.substr(eol + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (line.front() == '#') {
            constexpr std::string_view tag = "# version:";
            if (line.starts_with(tag)) {
                const auto v = trim(line.substr(tag.size()));
                std::from_chars(v.data(), v.data() + v.size(), table.version_);
            }
            continue;
        }
        const auto tab1 = line.find('\t');
        if (tab1 == std::string_view::npos)
            throw DataError("replacement table line " + std::to_string(line_no) + ": missing tab");
        const auto hex = line.substr(0, tab1);
        auto rest = line.substr(tab1 + 1);
        const auto rep = rest.substr(0, rest.find('\t'));

        std::uint32_t cp = 0;
        const auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), cp, 16);
        if (ec != std::errc{} || ptr != hex.data() + hex.size())
            throw DataError("replacement table line " + std::to_string(line_no) + ": bad codepoint");

        std::string value;
        for (std::size_t k = 0; k < rep.size(); ++k) {
            if (rep[k] == '\\' && k + 1 < rep.size() && rep[k + 1] == 's') {
                value.push_back(' ');
                ++k;
            } else {
                if (static_cast<unsigned char>(rep[k]) >= 0x80)
                    throw DataError("replacement table line " + std::to_string(line_no) +
                                    ": replacement must be ASCII");
                value.push_back(rep[k]);
            }
        }
        table.map_[static_cast<char32_t>(cp)] = std::move(value);
    }
    return table;
}

const ReplacementTable& ReplacementTable::builtin()
{
    static const ReplacementTable table = parse(kBuiltinReplacementTable);
    return table;
}

const std::string* ReplacementTable::find(char32_t cp) const
{
    const auto it = map_.find(cp);
    return it == map_.end() ? nullptr : &it->second;
}

void append_utf8(char32_t cp, std::string& out)
{
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp <= 0x10FFFF) {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_accented_latin(char32_t cp)
{
    if (cp >= 0x00C0 && cp <= 0x00FF) return cp != 0x00D7 && cp != 0x00F7;
    if (cp >= 0x0100 && cp <= 0x024F) return true;
    if (cp >= 0x0300 && cp <= 0x036F) return true;
    if (cp >= 0x1E00 && cp <= 0x1EFF) return true;
    return false;
}

std::string normalize_text(std::string_view raw)
{
    return normalize_text(raw, ReplacementTable::builtin());
}

std::string normalize_text(std::string_view raw, const ReplacementTable& table)
{
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;

    auto emit_ascii = [&](unsigned char c) {
        if (is_space(c)) {
            pending_space = true;
            return;
        }
        if (c < 0x20 || c == 0x7F) return;
        if (pending_space && !out.empty()) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(c));
    };

    std::size_t i = 0;
    while (i < raw.size()) {
        const auto cp = decode_utf8(raw, i);
        if (!cp) continue;
        if (*cp < 0x80) {
            emit_ascii(static_cast<unsigned char>(*cp));
            continue;
        }
        if (const auto* rep = table.find(*cp)) {
            for (const char c : *rep) emit_ascii(static_cast<unsigned char>(c));
            continue;
        }
        if (is_accented_latin(*cp)) {
            if (pending_space && !out.empty()) out.push_back(' ');
            pending_space = false;
            append_utf8(*cp, out);
        }
    }
    return out;
}

std::vector<std::string_view> split_words(std::string_view text)
{
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
        const auto start = i;
        while (i < text.size() && !is_space(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) words.push_back(text.substr(start, i - start));
    }
    return words;
}

std::size_t count_words(std::string_view text)
{
    std::size_t n = 0;
    bool in_word = false;
    for (const char c : text) {
        const bool space = is_space(static_cast<unsigned char>(c));
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

std::string join_ngram(const std::vector<std::string_view>& tokens, std::size_t first, std::size_t n)
{
    std::string out(tokens[first]);
    for (std::size_t k = 1; k < n; ++k) {
        out.push_back(' ');
        out.append(tokens[first + k]);
    }
    return out;
}

} // namespace stylo
