#include "exprag/config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "exprag/errors.hpp"

using json = nlohmann::json;

namespace exprag {

namespace {

template <typename T>
void read_into(const json& j, const char* key, T& out) {
    auto it = j.find(key);
    if (it != j.end()) out = it->get<T>();
}

} // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw Error(errc::config_invalid, "config is not a JSON object");

    RunConfig c;
    const json paths = j.value("paths", json::object());
    read_into(paths, "cohort", c.cohort_path);
    read_into(paths, "index", c.index_path);
    read_into(paths, "dataset", c.dataset_path);
    read_into(paths, "reports_dir", c.reports_dir);

    const json ranker = j.value("ranker", json::object());
    read_into(ranker, "kind", c.ranker);
    read_into(ranker, "k", c.k);
    read_into(ranker, "exclude_same_subject", c.exclude_same_subject);
    if (ranker.contains("weights")) {
        const json& w = ranker["weights"];
        read_into(w, "diag", c.weights.diag);
        read_into(w, "med", c.weights.med);
        read_into(w, "proc", c.weights.proc);
    }

    const json retriever = j.value("retriever", json::object());
    read_into(retriever, "method", c.retriever);
    read_into(retriever, "top_n", c.retrieve.top_n);
    read_into(retriever, "chunk_size", c.retrieve.chunk_size);
    read_into(retriever, "chunk_overlap", c.retrieve.chunk_overlap);
    read_into(retriever, "window", c.retrieve.window);
    read_into(retriever, "leaf_tokens", c.retrieve.leaf_tokens);
    read_into(retriever, "fanout", c.retrieve.fanout);
    read_into(retriever, "merge_threshold", c.retrieve.merge_threshold);
    read_into(retriever, "k1", c.retrieve.k1);
    read_into(retriever, "b", c.retrieve.b);
    read_into(retriever, "context_budget", c.context_budget);

    const json provider = j.value("provider", json::object());
    read_into(provider, "kind", c.provider);
    read_into(provider, "base_url", c.chat.base_url);
    read_into(provider, "path", c.chat.path);
    read_into(provider, "model", c.chat.model);
    read_into(provider, "credential_env", c.chat.credential_env);
    read_into(provider, "timeout_seconds", c.chat.timeout_seconds);
    read_into(provider, "max_attempts", c.retry.max_attempts);
    read_into(provider, "base_delay_ms", c.retry.base_delay_ms);
    read_into(provider, "max_parallel", c.max_parallel);
    read_into(provider, "temperature", c.temperature);
    read_into(provider, "max_tokens", c.max_tokens);
    read_into(provider, "prompt_template", c.prompt_template_path);

    const json embedding = j.value("embedding", json::object());
    read_into(embedding, "base_url", c.embedding.base_url);
    read_into(embedding, "path", c.embedding.path);
    read_into(embedding, "model", c.embedding.model);
    read_into(embedding, "credential_env", c.embedding.credential_env);
    read_into(embedding, "batch_size", c.embedding.batch_size);
    read_into(embedding, "max_parallel", c.embedding.max_parallel);
    read_into(embedding, "truncate_chars", c.embedding.truncate_chars);
    read_into(embedding, "timeout_seconds", c.embedding.timeout_seconds);

    read_into(j, "seed", c.seed);
    return c;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::missing_input, "cannot read config " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return from_json_text(text);
    } catch (const Error& e) {
        throw Error(e.code(), std::string(e.what()) + " (" + path + ")");
    }
}

std::string RunConfig::to_json_text() const {
    json j = {
        {"paths",
         {{"cohort", cohort_path},
          {"index", index_path},
          {"dataset", dataset_path},
          {"reports_dir", reports_dir}}},
        {"ranker",
         {{"kind", ranker},
          {"k", k},
          {"exclude_same_subject", exclude_same_subject},
          {"weights", {{"diag", weights.diag}, {"med", weights.med}, {"proc", weights.proc}}}}},
        {"retriever",
         {{"method", retriever},
          {"top_n", retrieve.top_n},
          {"chunk_size", retrieve.chunk_size},
          {"chunk_overlap", retrieve.chunk_overlap},
          {"window", retrieve.window},
          {"leaf_tokens", retrieve.leaf_tokens},
          {"fanout", retrieve.fanout},
          {"merge_threshold", retrieve.merge_threshold},
          {"k1", retrieve.k1},
          {"b", retrieve.b},
          {"context_budget", context_budget}}},
        {"provider",
         {{"kind", provider},
          {"base_url", chat.base_url},
          {"path", chat.path},
          {"model", chat.model},
          {"credential_env", chat.credential_env},
          {"timeout_seconds", chat.timeout_seconds},
          {"max_attempts", retry.max_attempts},
          {"base_delay_ms", retry.base_delay_ms},
          {"max_parallel", max_parallel},
          {"temperature", temperature},
          {"max_tokens", max_tokens},
          {"prompt_template", prompt_template_path}}},
        {"embedding",
         {{"base_url", embedding.base_url},
          {"path", embedding.path},
          {"model", embedding.model},
          {"credential_env", embedding.credential_env},
          {"batch_size", embedding.batch_size},
          {"max_parallel", embedding.max_parallel},
          {"truncate_chars", embedding.truncate_chars},
          {"timeout_seconds", embedding.timeout_seconds}}},
        {"seed", seed}};
    return j.dump(2);
}

} // namespace exprag
