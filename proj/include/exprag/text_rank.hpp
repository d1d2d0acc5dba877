#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "exprag/cohort.hpp"

namespace exprag {

/// Sparse weight vector over a fixed-dimension space, with a cached norm.
struct DocVector {
    size_t dim = 0;
    std::vector<std::pair<uint32_t, double>> entries; // sorted by index
    double norm = 0.0;

    static DocVector from_dense(const std::vector<double>& values);
    double recompute_norm() const;
};

/// u·v / (‖u‖‖v‖); 0 when either norm is 0. Throws dimension-mismatch.
double cosine(const DocVector& u, const DocVector& v);

struct TfidfModel {
    std::vector<std::string> vocabulary; // deterministic (sorted) order
    std::vector<double> idf;             // ln((1+N)/(1+df)) + 1
    std::unordered_map<std::string, uint32_t> term_index;

    DocVector transform(const std::string& text) const;
};

/// Fits the model and returns one vector per corpus document, in order.
std::pair<TfidfModel, std::vector<DocVector>> tfidf_vectorize(
    const std::vector<std::string>& corpus);

/// Batch text embedding. Same text must embed to the same vector for a given
/// provider instance.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::vector<DocVector> embed(const std::vector<std::string>& texts) = 0;
    /// Stable identity string; embedding caches are keyed by it.
    virtual std::string id() const = 0;
};

/// Offline, deterministic tf-idf provider fitted over a fixed corpus.
class LexicalTfidfProvider : public EmbeddingProvider {
public:
    explicit LexicalTfidfProvider(const std::vector<std::string>& corpus);
    std::vector<DocVector> embed(const std::vector<std::string>& texts) override;
    std::string id() const override { return id_; }

private:
    TfidfModel model_;
    std::string id_;
};

struct RemoteEmbeddingConfig {
    std::string base_url = "http://localhost:8080";
    std::string path = "/v1/embeddings";
    std::string model = "bge-small-en-v1.5";
    std::string credential_env = "EXPRAG_API_KEY";
    size_t batch_size = 16;
    size_t max_parallel = 4;     // bounded in-flight requests
    size_t truncate_chars = 8000; // inputs clipped before sending
    int timeout_seconds = 60;

    bool operator==(const RemoteEmbeddingConfig&) const = default;
};

/// HTTP embedding endpoint: request {model, input:[...]}, response one vector
/// per input in order. Errors surface as provider-failure with context.
class RemoteEmbeddingProvider : public EmbeddingProvider {
public:
    explicit RemoteEmbeddingProvider(RemoteEmbeddingConfig config);
    std::vector<DocVector> embed(const std::vector<std::string>& texts) override;
    std::string id() const override;

private:
    RemoteEmbeddingConfig config_;
};

struct TextRankParams {
    size_t k = 15;
    bool exclude_same_subject = true;
};

struct TextRankedAdmission {
    std::string admission_key;
    double score = 0.0;
};

/// Per-cohort note embeddings, computed once per provider identity.
class NoteEmbeddingCache {
public:
    /// Embeds the notes of all admissions (key order) on first use.
    const std::vector<DocVector>& vectors(const Cohort& cohort, EmbeddingProvider& provider);
    const std::vector<std::string>& keys() const { return keys_; }

private:
    std::string provider_id_;
    std::vector<std::string> keys_;
    std::vector<DocVector> vectors_;
};

/// Whole-note ranking by cosine similarity against the embedded query text.
/// The query admission (and optionally its subject) is excluded when
/// query_key is supplied.
std::vector<TextRankedAdmission> rank_top_k_text(const Cohort& cohort,
                                                 const std::string& query_text,
                                                 const TextRankParams& params,
                                                 EmbeddingProvider& provider,
                                                 const std::string& query_key = {},
                                                 NoteEmbeddingCache* cache = nullptr);

} // namespace exprag
