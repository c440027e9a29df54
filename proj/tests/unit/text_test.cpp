#include "taira/text.hpp"

#include <doctest.h>

using namespace taira;

TEST_CASE("stemmer folds plurals") {
    CHECK(text::stem("blouses") == "blouse");
    CHECK(text::stem("dresses") == "dress");
    CHECK(text::stem("berries") == "berry");
    CHECK(text::stem("dress") == "dress");
    CHECK(text::stem("status") == "status");
}

TEST_CASE("tokenize lowercases, drops stopwords and short tokens") {
    auto t = text::tokenize("The Semi-Formal Blouses, for a party!");
    CHECK(t == std::vector<std::string>{"semi", "formal", "blouse", "party"});
}

TEST_CASE("split keeps empty pieces and join inverts it") {
    auto parts = text::split("a||b|", "|");
    CHECK(parts == std::vector<std::string>{"a", "", "b", ""});
    CHECK(text::join(parts, "|") == "a||b|");
}

TEST_CASE("case-insensitive helpers") {
    CHECK(text::contains_ci("Women's BLOUSE", "blouse"));
    CHECK_FALSE(text::contains_ci("skirt", "blouse"));
    CHECK(text::starts_with_ci("Recommend jeans", "recommend"));
    CHECK(text::first_words("one two  three four", 2) == "one two");
}

TEST_CASE("fnv1a reference values") {
    CHECK(text::fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(text::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("token estimate rounds up") {
    CHECK(text::approx_tokens("") == 0);
    CHECK(text::approx_tokens("abcd") == 1);
    CHECK(text::approx_tokens("abcde") == 2);
}
