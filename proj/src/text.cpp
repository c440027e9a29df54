#include "taira/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>

namespace taira::text {

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, std::string_view sep) {
    std::vector<std::string> out;
    if (sep.empty()) {
        out.emplace_back(s);
        return out;
    }
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            return out;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + sep.size();
    }
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

bool contains_ci(std::string_view haystack, std::string_view needle) {
    return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
    return s.size() >= prefix.size() && to_lower(s.substr(0, prefix.size())) == to_lower(prefix);
}

std::vector<std::string> words(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

std::string first_words(std::string_view s, std::size_t n) {
    auto w = words(s);
    if (w.size() > n) w.resize(n);
    return join(w, " ");
}

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

constexpr std::array<std::string_view, 64> kStopwords = {
    "a",     "an",    "and",   "are",  "as",    "at",    "be",    "but",   "by",
    "can",   "could", "do",    "does", "for",   "from",  "have",  "i",     "i'm",
    "if",    "in",    "into",  "is",   "it",    "its",   "me",    "my",    "of",
    "on",    "or",    "our",   "please", "so",  "some",  "such",  "that",  "the",
    "their", "them",  "then",  "there", "these", "they", "this",  "to",    "up",
    "us",    "was",   "we",    "were", "what",  "when",  "where", "which", "while",
    "who",   "will",  "with",  "would", "you",  "your",  "am",    "any",   "also",
    "about"};

}  // namespace

std::string stem(std::string_view token) {
    std::string t(token);
    if (t.size() <= 3) return t;
    if (ends_with(t, "ies") && !ends_with(t, "eies") && !ends_with(t, "aies")) {
        t.resize(t.size() - 3);
        t += 'y';
        return t;
    }
    if (ends_with(t, "es") && !ends_with(t, "aes") && !ends_with(t, "ees") && !ends_with(t, "oes")) {
        t.pop_back();  // "es" -> "e"
        for (std::string_view tail : {"sse", "she", "che", "xe", "zze"}) {
            if (ends_with(t, tail)) {
                t.pop_back();
                break;
            }
        }
        return t;
    }
    if (ends_with(t, "s") && !ends_with(t, "us") && !ends_with(t, "ss")) t.pop_back();
    return t;
}

bool is_stopword(std::string_view token) {
    return std::find(kStopwords.begin(), kStopwords.end(), token) != kStopwords.end();
}

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (cur.size() >= 2 && !is_stopword(cur)) out.push_back(stem(cur));
        cur.clear();
    };
    for (char ch : s) {
        auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            cur += static_cast<char>(std::tolower(c));
        } else {
            flush();
        }
    }
    flush();
    return out;
}

std::unordered_set<std::string> token_set(std::string_view s) {
    auto toks = tokenize(s);
    return {toks.begin(), toks.end()};
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::int64_t approx_tokens(std::string_view s) {
    return static_cast<std::int64_t>((s.size() + 3) / 4);
}

}  // namespace taira::text
