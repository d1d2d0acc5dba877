#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace exprag {

/// Half-open character range into some source text.
struct Span {
    size_t begin = 0;
    size_t end = 0;
    size_t size() const { return end - begin; }
};

struct Token {
    std::string text; // lowercased
    Span span;        // position in the original text
};

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

/// Lowercase alphanumeric word tokens with source offsets. Shared by the
/// tf-idf vectorizer, BM25 scoring and chunking so their vocabularies agree.
std::vector<Token> tokenize(std::string_view text);

/// Token strings only, for callers that do not need offsets.
std::vector<std::string> tokenize_words(std::string_view text);

/// Sentence spans: terminator (.!?) followed by whitespace, plus newline
/// bullets. Spans cover the whole text in order.
std::vector<Span> split_sentences(std::string_view text);

/// Canonical option/gold-item form: leading list markers removed, lowercased,
/// punctuation collapsed to spaces, whitespace collapsed. Idempotent.
std::string normalize_text(std::string_view s);

/// Strips one leading list marker ("1.", "2)", "-", "*") if present.
std::string_view strip_list_marker(std::string_view line);

/// List items from a block of text: lines with bullet markers when present,
/// otherwise sentences.
std::vector<std::string> split_list_items(std::string_view text);

/// One delimiter-separated row; handles double-quoted fields with "" escapes.
std::vector<std::string> split_delimited(std::string_view line, char delim);

} // namespace exprag
