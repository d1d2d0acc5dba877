#pragma once

#include <cstdint>
#include <string>

#include "exprag/eval.hpp"
#include "exprag/llm.hpp"
#include "exprag/ranker.hpp"
#include "exprag/retrieve.hpp"
#include "exprag/text_rank.hpp"

namespace exprag {

/// Everything a pipeline run needs; flag values override config-file values.
/// Serializing and re-parsing a config yields an equal value.
struct RunConfig {
    // artifact paths
    std::string cohort_path = "cohort.jsonl";
    std::string index_path;
    std::string dataset_path = "dataset.jsonl";
    std::string reports_dir = "reports";

    // ranking
    std::string ranker = "ehr"; // ehr | text-lexical | text-remote
    size_t k = 15;
    SimilarityWeights weights;
    bool exclude_same_subject = true;

    // retrieval
    std::string retriever = "hier-merge";
    RetrieveParams retrieve;
    size_t context_budget = 6000;

    // provider
    std::string provider = "mock:echo-gold";
    HttpChatConfig chat;
    RemoteEmbeddingConfig embedding;
    RetryPolicy retry{3, 200};
    size_t max_parallel = 4;
    double temperature = 0.0;
    size_t max_tokens = 512;
    std::string prompt_template_path; // empty = built-in clinician template

    uint64_t seed = 0;

    static RunConfig from_json_file(const std::string& path);
    static RunConfig from_json_text(const std::string& text);
    std::string to_json_text() const;

    bool operator==(const RunConfig& other) const = default;
};

} // namespace exprag
