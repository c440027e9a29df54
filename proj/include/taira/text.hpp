#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

// Lexical helpers shared by retrieval, executors and the offline responder.
namespace taira::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Splits on an exact separator; empty pieces are kept.
std::vector<std::string> split(std::string_view s, std::string_view sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool contains_ci(std::string_view haystack, std::string_view needle);
bool starts_with_ci(std::string_view s, std::string_view prefix);

// Whitespace-delimited words, punctuation kept attached.
std::vector<std::string> words(std::string_view s);
std::string first_words(std::string_view s, std::size_t n);

// Plural-folding stemmer (S-stemmer variant): blouses -> blouse, dresses -> dress.
std::string stem(std::string_view token);

bool is_stopword(std::string_view token);

// Lowercased alphanumeric tokens of length >= 2, stopwords dropped, stemmed.
std::vector<std::string> tokenize(std::string_view s);
std::unordered_set<std::string> token_set(std::string_view s);

std::uint64_t fnv1a(std::string_view s);

// ceil(chars / 4): the ledger's token estimate when a backend reports no usage.
std::int64_t approx_tokens(std::string_view s);

}  // namespace taira::text
