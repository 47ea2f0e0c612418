#include "stylo/llmio.hpp"

#include "stylo/error.hpp"
#include "stylo/text.hpp"

#include <fmt/format.h>

#include <cctype>

namespace stylo {

std::string_view to_string(PairStyle s)
{
    return s == PairStyle::masked_span ? "masked_span" : "suffix";
}

PairStyle parse_pair_style(std::string_view s)
{
    if (s == "masked_span") return PairStyle::masked_span;
    if (s == "suffix") return PairStyle::suffix;
    throw ConfigError(fmt::format("unknown pair style '{}'", s));
}

PairRecord make_pair(const Sample& sample, PairStyle style)
{
    if (sample.author.empty())
        throw DataError(fmt::format("make_pair: sample '{}' has no author", sample.sample_id));

    PairRecord p;
    p.sample_id = sample.sample_id;
    p.style = style;
    const std::string tag(kAuthorTag);
    const std::string sep(kFieldSeparator);
    if (style == PairStyle::masked_span) {
        p.input = tag + " " + std::string(kMaskToken) + sep + sample.text;
        p.output = tag + " " + sample.author + sep + sample.text;
    } else {
        p.input = sample.text + sep + tag + " " + std::string(kMaskToken);
        p.output = sample.text + sep + tag + " " + sample.author;
    }
    return p;
}

namespace {

bool is_ws(char c)
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && is_ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_ws(s.back())) s.remove_suffix(1);
    return s;
}

bool is_punct(char c)
{
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

std::string strip_sentinels(std::string_view s)
{
    std::string out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '<') {
            const auto close = s.find('>', i);
            if (close != std::string_view::npos) {
                const auto tok = s.substr(i, close - i + 1);
                if (tok.starts_with("<extra_id_") || tok == "<pad>" || tok == "</s>") {
                    out.push_back(' ');
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(s[i++]);
    }
    return out;
}

std::string author_field(std::string_view generated, PairStyle style)
{
    const auto pos = style == PairStyle::masked_span ? generated.find(kAuthorTag) : generated.rfind(kAuthorTag);
    if (pos == std::string_view::npos) return strip_sentinels(generated);
    auto rest = generated.substr(pos + kAuthorTag.size());
    auto end = rest.find('|');
    if (style == PairStyle::suffix) end = std::min(end, rest.find_first_of("\r\n"));
    return std::string(rest.substr(0, end));
}

std::string first_two_words(std::string_view field)
{
    std::string out;
    int taken = 0;
    for (const auto word : split_words(field)) {
        if (taken == 2) break;
        auto w = word;
        while (!w.empty() && is_punct(w.front())) w.remove_prefix(1);
        while (!w.empty() && is_punct(w.back())) w.remove_suffix(1);
        if (!out.empty()) out.push_back(' ');
        out.append(w);
        ++taken;
    }
    return std::string(trim(out));
}

} // namespace

ParsedPrediction parse_prediction(std::string_view generated, PairStyle style,
                                  const std::set<std::string, std::less<>>& known_authors)
{
    ParsedPrediction result;
    result.raw = std::string(generated);
    const auto field = author_field(generated, style);
    const auto exact = trim(field);
    if (!exact.empty() && known_authors.count(exact)) {
        result.author = std::string(exact);
        return result;
    }
    const auto fallback = first_two_words(field);
    if (!fallback.empty() && known_authors.count(fallback)) result.author = fallback;
    return result;
}

std::string predicted_name(const ParsedPrediction& p)
{
    return p.author ? *p.author : p.raw;
}

} // namespace stylo
