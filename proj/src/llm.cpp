#include "exprag/llm.hpp"

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "exprag/errors.hpp"
#include "exprag/text.hpp"

using json = nlohmann::json;

namespace exprag {

namespace errc_local {
inline constexpr const char* rate_limited = "rate-limited";
}

PromptTemplate PromptTemplate::defaults() {
    PromptTemplate t;
    t.id = "clinician-v1";
    t.system =
        "You are an experienced attending clinician reviewing a patient at the point of "
        "discharge. Decide carefully and answer strictly with the letter or letters of the "
        "chosen options, separated by commas.";
    t.body =
        "{context}Patient background:\n{background}\n\nQuestion: {question}\n\nOptions:\n"
        "{options}\nAnswer with the option letter(s) only.";
    t.context_section = "Experience from similar past cases:\n{context}\n\n";
    return t;
}

PromptTemplate PromptTemplate::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::missing_input, "cannot read prompt template " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw Error(errc::config_invalid, "prompt template is not a JSON object: " + path);
    PromptTemplate t;
    t.id = j.value("id", "custom");
    t.system = j.value("system", "");
    t.body = j.value("body", "");
    t.context_section = j.value("context_section", "{context}\n\n");
    if (t.body.empty())
        throw Error(errc::config_invalid, "prompt template body is empty: " + path);
    return t;
}

void PromptTemplate::save_json_file(const std::string& path) const {
    json j = {{"id", id},
              {"system", system},
              {"body", body},
              {"context_section", context_section}};
    std::ofstream out(path);
    if (!out) throw Error(errc::io, "cannot write prompt template " + path);
    out << j.dump(2) << '\n';
}

std::string render_options(const QAItem& item) {
    std::string out;
    for (const QAOption& o : item.options) {
        out.push_back(o.letter);
        out += ") ";
        out += o.text;
        out.push_back('\n');
    }
    return out;
}

namespace {

// Structural substitution: placeholders are {word} tokens; substituted values
// are never re-scanned.
std::string substitute(const std::string& tmpl,
                       const std::map<std::string, const std::string*>& fields) {
    std::string out;
    size_t pos = 0;
    while (pos < tmpl.size()) {
        const size_t open = tmpl.find('{', pos);
        if (open == std::string::npos) {
            out.append(tmpl, pos, std::string::npos);
            break;
        }
        const size_t close = tmpl.find('}', open);
        if (close == std::string::npos) {
            out.append(tmpl, pos, std::string::npos);
            break;
        }
        out.append(tmpl, pos, open - pos);
        const std::string name = tmpl.substr(open + 1, close - open - 1);
        auto it = fields.find(name);
        if (it == fields.end())
            throw Error(errc::unfilled_placeholder, "placeholder {" + name + "} is not filled");
        out += *it->second;
        pos = close + 1;
    }
    return out;
}

} // namespace

std::vector<ChatMessage> render_prompt(const QAItem& item, const std::string& context,
                                       const PromptTemplate& tmpl) {
    const std::string options = render_options(item);
    std::string context_block;
    if (!context.empty()) {
        context_block = substitute(tmpl.context_section, {{"context", &context}});
    }
    const std::string user = substitute(tmpl.body, {{"question", &item.question_text},
                                                    {"background", &item.background},
                                                    {"options", &options},
                                                    {"context", &context_block}});
    std::vector<ChatMessage> messages;
    if (!tmpl.system.empty()) messages.push_back({"system", tmpl.system});
    messages.push_back({"user", user});
    return messages;
}

ChatExchange complete_with_retries(ChatProvider& provider, const ChatRequest& request,
                                   const RetryPolicy& policy) {
    const auto start = std::chrono::steady_clock::now();
    ChatExchange exchange;
    size_t attempt = 0;
    for (;;) {
        ++attempt;
        try {
            ChatResult result = provider.complete(request);
            exchange.response_text = std::move(result.text);
            exchange.attempts = attempt;
            break;
        } catch (const Error& e) {
            const bool transient =
                e.code() == errc::transport || e.code() == errc_local::rate_limited;
            if (!transient || attempt >= policy.max_attempts) {
                throw;
            }
            if (policy.base_delay_ms > 0) {
                const int delay = policy.base_delay_ms << (attempt - 1);
                std::this_thread::sleep_for(std::chrono::milliseconds(delay));
            }
        }
    }
    exchange.latency_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - start)
                              .count();
    return exchange;
}

HttpChatProvider::HttpChatProvider(HttpChatConfig config) : config_(std::move(config)) {}

ChatResult HttpChatProvider::complete(const ChatRequest& request) {
    httplib::Client client(config_.base_url);
    client.set_read_timeout(config_.timeout_seconds, 0);
    httplib::Headers headers;
    if (const char* cred = std::getenv(config_.credential_env.c_str()))
        headers.emplace("Authorization", std::string("Bearer ") + cred);

    json messages = json::array();
    for (const ChatMessage& m : request.messages)
        messages.push_back({{"role", m.role}, {"content", m.content}});
    json body = {{"model", request.model.empty() ? config_.model : request.model},
                 {"messages", messages},
                 {"temperature", request.temperature},
                 {"max_tokens", request.max_tokens}};

    auto res = client.Post(config_.path, headers, body.dump(), "application/json");
    if (!res)
        throw Error(errc::transport, "chat endpoint unreachable: " + config_.base_url);
    if (res->status == 401 || res->status == 403)
        throw Error(errc::auth_rejected, "chat endpoint rejected the credential");
    if (res->status == 429)
        throw Error(errc_local::rate_limited, "chat endpoint rate limited the request");
    if (res->status != 200) {
        const std::string lowered = to_lower(res->body);
        if (lowered.find("context_length") != std::string::npos ||
            lowered.find("context length") != std::string::npos ||
            lowered.find("maximum context") != std::string::npos)
            throw Error(errc::context_too_long, "prompt exceeds the model context window");
        throw Error(errc::transport, "chat endpoint returned status " +
                                         std::to_string(res->status) + ": " +
                                         res->body.substr(0, 200));
    }
    json j = json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("choices") || j["choices"].empty())
        throw Error(errc::transport, "malformed chat response");
    ChatResult result;
    result.text = j["choices"][0].value("message", json::object()).value("content", "");
    if (j.contains("usage")) {
        result.prompt_tokens = j["usage"].value("prompt_tokens", 0);
        result.completion_tokens = j["usage"].value("completion_tokens", 0);
    }
    return result;
}

EchoGoldProvider::EchoGoldProvider(const std::vector<QAItem>& dataset) {
    for (const QAItem& item : dataset) gold_.emplace(item.question_id, item.gold_letters);
}

ChatResult EchoGoldProvider::complete(const ChatRequest& request) {
    auto it = gold_.find(request.tag);
    if (it == gold_.end())
        throw Error(errc::transport, "echo-gold mock has no item tagged " + request.tag);
    return {format_letters(it->second), 0, 0};
}

ChatResult FixedLetterProvider::complete(const ChatRequest&) {
    return {std::string(1, letter_), 0, 0};
}

ContextAwareProvider::ContextAwareProvider(const std::vector<QAItem>& dataset) {
    for (const QAItem& item : dataset) {
        Entry e;
        e.gold = item.gold_letters;
        for (const QAOption& o : item.options)
            if (o.source == OptionSource::Gold) e.gold_texts.push_back(normalize_text(o.text));
        for (const QAOption& o : item.options)
            if (!item.gold_letters.count(o.letter)) {
                e.wrong_letter = o.letter;
                break;
            }
        entries_.emplace(item.question_id, std::move(e));
    }
}

ChatResult ContextAwareProvider::complete(const ChatRequest& request) {
    auto it = entries_.find(request.tag);
    if (it == entries_.end())
        throw Error(errc::transport, "context-aware mock has no item tagged " + request.tag);
    const Entry& e = it->second;
    const std::string haystack = normalize_text(request.context_text);
    bool found = false;
    for (const std::string& g : e.gold_texts)
        if (!g.empty() && haystack.find(g) != std::string::npos) {
            found = true;
            break;
        }
    if (found) return {format_letters(e.gold), 0, 0};
    return {std::string(1, e.wrong_letter), 0, 0};
}

std::unique_ptr<ChatProvider> make_mock_provider(const std::string& spec,
                                                 const std::vector<QAItem>& dataset) {
    if (spec == "echo-gold") return std::make_unique<EchoGoldProvider>(dataset);
    if (spec == "context-aware") return std::make_unique<ContextAwareProvider>(dataset);
    if (spec.rfind("fixed:", 0) == 0 && spec.size() == 7)
        return std::make_unique<FixedLetterProvider>(spec[6]);
    throw Error(errc::config_invalid, "unknown mock provider: " + spec);
}

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

struct LetterToken {
    char letter; // uppercased
    size_t pos;
    bool uppercase;
    bool in_run; // part of a comma/and separated letter list
    bool terminated; // followed by punctuation or end of text
};

// Standalone single-letter words with context flags.
std::vector<LetterToken> letter_tokens(const std::string& text) {
    std::vector<LetterToken> out;
    const size_t n = text.size();
    size_t i = 0;
    while (i < n) {
        if (!is_alnum(text[i])) {
            ++i;
            continue;
        }
        size_t b = i;
        while (i < n && is_alnum(text[i])) ++i;
        if (i - b == 1 && std::isalpha(static_cast<unsigned char>(text[b]))) {
            // word fragments are not answer letters: contractions ("I'd",
            // "let's") and dotted abbreviations ("e.g.", "B.C")
            const bool after_fragment_mark = b > 0 && (text[b - 1] == '\'' || text[b - 1] == '.');
            const bool before_contraction =
                i + 1 < n && text[i] == '\'' && std::isalpha(static_cast<unsigned char>(text[i + 1]));
            const bool before_abbreviation =
                i + 1 < n && text[i] == '.' && is_alnum(text[i + 1]);
            if (after_fragment_mark || before_contraction || before_abbreviation) continue;
            LetterToken t;
            t.letter = static_cast<char>(std::toupper(static_cast<unsigned char>(text[b])));
            t.pos = b;
            t.uppercase = std::isupper(static_cast<unsigned char>(text[b])) != 0;
            t.in_run = false;
            // a lone letter counts when punctuation or the end of the text
            // follows; "I cannot ..." stays a word, "B." is an answer
            t.terminated = i >= n || std::ispunct(static_cast<unsigned char>(text[i])) != 0 ||
                           text[i] == '\n' || text[i] == '\r' || text[i] == '\t';
            out.push_back(t);
        }
    }
    return out;
}

// Marks letters that participate in a list: consecutive letter tokens whose
// gap contains only separators (comma, slash, ampersand, "and", "or").
void mark_runs(const std::string& text, std::vector<LetterToken>& tokens) {
    auto separator_gap = [&](size_t from, size_t to) {
        std::string gap = to_lower(text.substr(from, to - from));
        size_t i = 0;
        while (i < gap.size()) {
            if (gap.compare(i, 3, "and") == 0) {
                i += 3;
                continue;
            }
            if (gap.compare(i, 2, "or") == 0) {
                i += 2;
                continue;
            }
            char c = gap[i];
            if (c == ' ' || c == ',' || c == '/' || c == '&' || c == ';' || c == '\n' ||
                c == '\r' || c == '\t') {
                ++i;
                continue;
            }
            return false;
        }
        return true;
    };
    for (size_t i = 0; i + 1 < tokens.size(); ++i) {
        if (separator_gap(tokens[i].pos + 1, tokens[i + 1].pos)) {
            tokens[i].in_run = true;
            tokens[i + 1].in_run = true;
        }
    }
}

std::vector<char> collect_letters(const std::string& text, bool allow_lowercase) {
    std::vector<LetterToken> tokens = letter_tokens(text);
    mark_runs(text, tokens);
    std::vector<char> letters;
    for (const LetterToken& t : tokens) {
        if (!allow_lowercase && !t.uppercase) continue;
        if (t.in_run || t.terminated) letters.push_back(t.letter);
    }
    return letters;
}

constexpr std::array<const char*, 5> kAnchors = {"answer", "option", "choice", "select",
                                                 "correct"};

} // namespace

ParsedAnswer parse_answer(const std::string& text, AnswerMode mode, size_t n_options) {
    if (n_options < 2) throw Error(errc::bad_param, "n_options must be >= 2");

    std::vector<char> letters;
    const std::string lowered = to_lower(text);
    size_t anchor_pos = std::string::npos;
    for (const char* anchor : kAnchors)
        anchor_pos = std::min(anchor_pos, lowered.find(anchor));
    if (anchor_pos != std::string::npos)
        letters = collect_letters(text.substr(anchor_pos), true);
    if (letters.empty()) letters = collect_letters(text, false);
    if (letters.empty()) return ParsedAnswer::invalid("no answer");

    const char max_letter = static_cast<char>('A' + n_options - 1);
    for (char c : letters)
        if (c < 'A' || c > max_letter) return ParsedAnswer::invalid("out of range");

    if (mode == AnswerMode::SingleSelect) return ParsedAnswer::of({letters.front()});
    return ParsedAnswer::of(std::set<char>(letters.begin(), letters.end()));
}

std::string format_letters(const std::set<char>& letters) {
    std::string out;
    for (char c : letters) {
        if (!out.empty()) out += ", ";
        out.push_back(c);
    }
    return out;
}

uint64_t prompt_hash(const std::vector<ChatMessage>& messages) {
    uint64_t h = 1469598103934665603ULL;
    auto mix = [&](const std::string& s) {
        for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
        h = (h ^ 0x1f) * 1099511628211ULL;
    };
    for (const ChatMessage& m : messages) {
        mix(m.role);
        mix(m.content);
    }
    return h;
}

void write_transcript_line(std::ostream& out, const std::string& question_id,
                           uint64_t prompt_hash_value, const std::string& response,
                           size_t attempts, double latency_ms) {
    json j = {{"question_id", question_id},
              {"prompt_hash", prompt_hash_value},
              {"response", response},
              {"attempts", attempts},
              {"latency_ms", latency_ms}};
    out << j.dump() << '\n';
}

} // namespace exprag
