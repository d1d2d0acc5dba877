#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "exprag/qa.hpp"

namespace exprag {

struct ChatMessage {
    std::string role;
    std::string content;
};

/// Versioned prompt text with {question} {background} {options} {context}
/// placeholders. Prompt wording is configuration, not code.
struct PromptTemplate {
    std::string id = "clinician-v1";
    std::string system;
    std::string body;
    std::string context_section; // substituted for {context} when context is non-empty

    static PromptTemplate defaults();
    static PromptTemplate from_json_file(const std::string& path);
    void save_json_file(const std::string& path) const;
};

/// Deterministic rendering; an empty context produces the Direct-Ask variant
/// with no context section at all. Throws unfilled-placeholder when the
/// template references an unknown placeholder.
std::vector<ChatMessage> render_prompt(const QAItem& item, const std::string& context,
                                       const PromptTemplate& tmpl = PromptTemplate::defaults());

/// "A) text" lines in item order.
std::string render_options(const QAItem& item);

struct ChatRequest {
    std::string model = "default";
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    size_t max_tokens = 512;
    // Harness metadata carried alongside the request: the question id and the
    // retrieval context. HTTP transports ignore both; scripted mock providers
    // key their behaviour on them.
    std::string tag;
    std::string context_text;
};

struct ChatResult {
    std::string text;
    size_t prompt_tokens = 0;
    size_t completion_tokens = 0;
};

/// One completion attempt. Implementations throw Error with codes transport,
/// rate-limited, auth-rejected or context-too-long.
class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual ChatResult complete(const ChatRequest& request) = 0;
    virtual std::string name() const = 0;
};

struct RetryPolicy {
    size_t max_attempts = 3;
    int base_delay_ms = 200; // doubles per retry; 0 in tests

    bool operator==(const RetryPolicy&) const = default;
};

struct ChatExchange {
    std::string response_text;
    size_t attempts = 0;
    double latency_ms = 0.0;
};

/// Retries transient failures (transport, rate-limited) with exponential
/// backoff; auth-rejected and context-too-long surface immediately.
ChatExchange complete_with_retries(ChatProvider& provider, const ChatRequest& request,
                                   const RetryPolicy& policy = {});

struct HttpChatConfig {
    std::string base_url = "http://localhost:8080";
    std::string path = "/v1/chat/completions";
    std::string model = "gpt-4o-mini";
    std::string credential_env = "EXPRAG_API_KEY";
    int timeout_seconds = 120;

    bool operator==(const HttpChatConfig&) const = default;
};

/// Chat-completions transport for any compatible endpoint.
class HttpChatProvider : public ChatProvider {
public:
    explicit HttpChatProvider(HttpChatConfig config);
    ChatResult complete(const ChatRequest& request) override;
    std::string name() const override { return "http:" + config_.model; }

private:
    HttpChatConfig config_;
};

/// Upper-bound harness mock: always answers the item's gold letters.
class EchoGoldProvider : public ChatProvider {
public:
    explicit EchoGoldProvider(const std::vector<QAItem>& dataset);
    ChatResult complete(const ChatRequest& request) override;
    std::string name() const override { return "mock:echo-gold"; }

private:
    std::map<std::string, std::set<char>> gold_;
};

class FixedLetterProvider : public ChatProvider {
public:
    explicit FixedLetterProvider(char letter) : letter_(letter) {}
    ChatResult complete(const ChatRequest& request) override;
    std::string name() const override { return std::string("mock:fixed:") + letter_; }

private:
    char letter_;
};

/// Answers gold iff any gold option's normalized text appears in the supplied
/// context; otherwise picks the first non-gold letter.
class ContextAwareProvider : public ChatProvider {
public:
    explicit ContextAwareProvider(const std::vector<QAItem>& dataset);
    ChatResult complete(const ChatRequest& request) override;
    std::string name() const override { return "mock:context-aware"; }

private:
    struct Entry {
        std::set<char> gold;
        std::vector<std::string> gold_texts; // normalized
        char wrong_letter = 'A';
    };
    std::map<std::string, Entry> entries_;
};

/// "mock:echo-gold", "mock:fixed:<L>", "mock:context-aware".
std::unique_ptr<ChatProvider> make_mock_provider(const std::string& spec,
                                                 const std::vector<QAItem>& dataset);

struct ParsedAnswer {
    bool valid = false;
    std::set<char> letters;
    std::string reason; // set when invalid

    static ParsedAnswer invalid(std::string why) { return {false, {}, std::move(why)}; }
    static ParsedAnswer of(std::set<char> ls) { return {true, std::move(ls), {}}; }
};

/// Tolerant option-letter extraction: anchored answers ("Answer: B"), letter
/// lists ("A, C and D"), bracketed lists, lone letters. SingleSelect keeps
/// the first letter, MultiSelect the deduplicated set. Any letter beyond
/// n_options invalidates the answer.
ParsedAnswer parse_answer(const std::string& text, AnswerMode mode, size_t n_options);

/// "A, C" rendering that parse_answer round-trips.
std::string format_letters(const std::set<char>& letters);

uint64_t prompt_hash(const std::vector<ChatMessage>& messages);

void write_transcript_line(std::ostream& out, const std::string& question_id,
                           uint64_t prompt_hash, const std::string& response, size_t attempts,
                           double latency_ms);

} // namespace exprag
