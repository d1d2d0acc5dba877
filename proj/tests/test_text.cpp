#include <doctest.h>

#include "exprag/text.hpp"

using namespace exprag;

TEST_CASE("tokenize lowercases and records offsets") {
    const std::string text = "Type 2 Diabetes, stable.";
    const auto tokens = tokenize(text);
    REQUIRE(tokens.size() == 4);
    CHECK(tokens[0].text == "type");
    CHECK(tokens[1].text == "2");
    CHECK(tokens[2].text == "diabetes");
    CHECK(tokens[3].text == "stable");
    CHECK(text.substr(tokens[2].span.begin, tokens[2].span.size()) == "Diabetes");
}

TEST_CASE("split_sentences on terminators and bullet newlines") {
    const auto spans = split_sentences("First one. Second one! Third?");
    REQUIRE(spans.size() == 3);

    const std::string bullets = "Take it daily\n- avoid lifting\n- call the clinic";
    const auto bspans = split_sentences(bullets);
    CHECK(bspans.size() == 3);

    CHECK(split_sentences("").empty());
    CHECK(split_sentences("...").empty());
}

TEST_CASE("normalize_text strips markers, punctuation, case and whitespace") {
    CHECK(normalize_text("1. Hypertension,") == "hypertension");
    CHECK(normalize_text("Type 2  Diabetes") == "type 2 diabetes");
    CHECK(normalize_text("- Gout ") == "gout");
    CHECK(normalize_text("*  CHRONIC   pain") == "chronic pain");
    CHECK(normalize_text("") == "");

    SUBCASE("idempotent") {
        for (const char* s : {"1. Hypertension,", "Type 2  Diabetes", "2) something 5 mg",
                              "weird -- input !!", "10. 5 items left"}) {
            const std::string once = normalize_text(s);
            CHECK(normalize_text(once) == once);
        }
    }
}

TEST_CASE("split_list_items prefers bullets, falls back to sentences") {
    const auto items = split_list_items("1. Hypertension\n2. Type 2 diabetes\n");
    REQUIRE(items.size() == 2);
    CHECK(items[0] == "Hypertension");
    CHECK(items[1] == "Type 2 diabetes");

    const auto sentences = split_list_items("Rest at home. Call if fever develops.");
    REQUIRE(sentences.size() == 2);
    CHECK(sentences[0] == "Rest at home.");

    CHECK(split_list_items("").empty());
}

TEST_CASE("split_delimited handles quotes and escapes") {
    const auto cells = split_delimited("a,\"b,c\",\"d\"\"e\"", ',');
    REQUIRE(cells.size() == 3);
    CHECK(cells[0] == "a");
    CHECK(cells[1] == "b,c");
    CHECK(cells[2] == "d\"e");

    CHECK(split_delimited("", ',').size() == 1);
    CHECK(split_delimited("x|y", '|').size() == 2);
}
