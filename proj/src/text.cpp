#include "exprag/text.hpp"

#include <cctype>

namespace exprag {

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0; }

char lower(unsigned char c) { return static_cast<char>(std::tolower(c)); }

} // namespace

std::string to_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (unsigned char c : s) out.push_back(lower(c));
    return out;
}

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        if (!is_word_char(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        size_t b = i;
        std::string word;
        while (i < n && is_word_char(static_cast<unsigned char>(text[i]))) {
            word.push_back(lower(static_cast<unsigned char>(text[i])));
            ++i;
        }
        out.push_back(Token{std::move(word), Span{b, i}});
    }
    return out;
}

std::vector<std::string> tokenize_words(std::string_view text) {
    std::vector<std::string> out;
    for (auto& t : tokenize(text)) out.push_back(std::move(t.text));
    return out;
}

std::vector<Span> split_sentences(std::string_view text) {
    std::vector<Span> out;
    const size_t n = text.size();
    size_t start = 0;
    size_t i = 0;
    auto flush = [&](size_t end) {
        if (end > start) {
            // skip spans that contain no word characters
            bool has_word = false;
            for (size_t j = start; j < end && !has_word; ++j)
                has_word = is_word_char(static_cast<unsigned char>(text[j]));
            if (has_word) out.push_back(Span{start, end});
        }
        start = end;
    };
    while (i < n) {
        char c = text[i];
        if (c == '.' || c == '!' || c == '?') {
            size_t j = i + 1;
            while (j < n && (text[j] == '.' || text[j] == '!' || text[j] == '?')) ++j;
            if (j >= n || std::isspace(static_cast<unsigned char>(text[j]))) {
                flush(j);
                i = j;
                continue;
            }
        } else if (c == '\n') {
            // newline followed by a bullet marker ends the current sentence
            size_t j = i + 1;
            while (j < n && (text[j] == ' ' || text[j] == '\t')) ++j;
            bool bullet = false;
            if (j < n) {
                if (text[j] == '-' || text[j] == '*') {
                    bullet = true;
                } else if (std::isdigit(static_cast<unsigned char>(text[j]))) {
                    size_t d = j;
                    while (d < n && std::isdigit(static_cast<unsigned char>(text[d]))) ++d;
                    bullet = d < n && (text[d] == '.' || text[d] == ')');
                }
            }
            if (bullet) {
                flush(i + 1);
                i = j;
                continue;
            }
        }
        ++i;
    }
    flush(n);
    return out;
}

std::string_view strip_list_marker(std::string_view line) {
    size_t i = 0;
    const size_t n = line.size();
    while (i < n && (line[i] == ' ' || line[i] == '\t')) ++i;
    size_t marker_end = i;
    if (i < n && (line[i] == '-' || line[i] == '*')) {
        marker_end = i + 1;
    } else if (i < n && std::isdigit(static_cast<unsigned char>(line[i]))) {
        size_t d = i;
        while (d < n && std::isdigit(static_cast<unsigned char>(line[d]))) ++d;
        if (d < n && (line[d] == '.' || line[d] == ')'))
            marker_end = d + 1;
        else
            return line.substr(i);
    } else {
        return line.substr(i);
    }
    while (marker_end < n && (line[marker_end] == ' ' || line[marker_end] == '\t')) ++marker_end;
    return line.substr(marker_end);
}

std::string normalize_text(std::string_view s) {
    std::string_view body = strip_list_marker(s);
    std::string out;
    out.reserve(body.size());
    bool pending_space = false;
    for (unsigned char c : body) {
        if (is_word_char(c)) {
            if (pending_space && !out.empty()) out.push_back(' ');
            pending_space = false;
            out.push_back(lower(c));
        } else {
            pending_space = true;
        }
    }
    return out;
}

std::vector<std::string> split_list_items(std::string_view text) {
    // find bullet lines first
    std::vector<std::string> items;
    size_t pos = 0;
    bool any_bullet = false;
    while (pos <= text.size()) {
        size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        std::string_view stripped = strip_list_marker(line);
        if (trim(stripped) != trim(line) && !trim(stripped).empty()) {
            any_bullet = true;
            items.push_back(trim(stripped));
        }
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    if (any_bullet) return items;
    items.clear();
    for (const Span& sp : split_sentences(text)) {
        std::string s = trim(text.substr(sp.begin, sp.size()));
        if (!s.empty()) items.push_back(std::move(s));
    }
    return items;
}

std::vector<std::string> split_delimited(std::string_view line, char delim) {
    std::vector<std::string> cells;
    std::string cell;
    bool in_quotes = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '"') {
            if (in_quotes && i + 1 < line.size() && line[i + 1] == '"') {
                cell.push_back('"');
                ++i;
            } else {
                in_quotes = !in_quotes;
            }
        } else if (c == delim && !in_quotes) {
            cells.push_back(cell);
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    cells.push_back(cell);
    return cells;
}

} // namespace exprag
