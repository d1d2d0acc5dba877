#include "exprag/text_rank.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <map>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "exprag/errors.hpp"
#include "exprag/text.hpp"

using json = nlohmann::json;

namespace exprag {

DocVector DocVector::from_dense(const std::vector<double>& values) {
    DocVector v;
    v.dim = values.size();
    double sq = 0.0;
    for (uint32_t i = 0; i < values.size(); ++i) {
        if (values[i] != 0.0) v.entries.emplace_back(i, values[i]);
        sq += values[i] * values[i];
    }
    v.norm = std::sqrt(sq);
    return v;
}

double DocVector::recompute_norm() const {
    double sq = 0.0;
    for (const auto& [i, w] : entries) sq += w * w;
    return std::sqrt(sq);
}

double cosine(const DocVector& u, const DocVector& v) {
    if (u.dim != v.dim)
        throw Error(errc::dimension_mismatch,
                    "cosine over vectors of dimension " + std::to_string(u.dim) + " and " +
                        std::to_string(v.dim));
    if (u.norm == 0.0 || v.norm == 0.0) return 0.0;
    double dot = 0.0;
    size_t i = 0, j = 0;
    while (i < u.entries.size() && j < v.entries.size()) {
        if (u.entries[i].first == v.entries[j].first) {
            dot += u.entries[i].second * v.entries[j].second;
            ++i;
            ++j;
        } else if (u.entries[i].first < v.entries[j].first) {
            ++i;
        } else {
            ++j;
        }
    }
    return dot / (u.norm * v.norm);
}

DocVector TfidfModel::transform(const std::string& text) const {
    std::map<uint32_t, double> counts;
    for (const std::string& w : tokenize_words(text)) {
        auto it = term_index.find(w);
        if (it != term_index.end()) counts[it->second] += 1.0;
    }
    DocVector v;
    v.dim = vocabulary.size();
    v.entries.reserve(counts.size());
    double sq = 0.0;
    for (const auto& [idx, tf] : counts) {
        const double w = tf * idf[idx];
        v.entries.emplace_back(idx, w);
        sq += w * w;
    }
    v.norm = std::sqrt(sq);
    return v;
}

std::pair<TfidfModel, std::vector<DocVector>> tfidf_vectorize(
    const std::vector<std::string>& corpus) {
    if (corpus.empty()) throw Error(errc::empty_input, "tfidf over an empty corpus");

    std::map<std::string, size_t> df; // sorted -> deterministic vocabulary
    std::vector<std::vector<std::string>> docs;
    docs.reserve(corpus.size());
    for (const std::string& text : corpus) {
        auto words = tokenize_words(text);
        std::vector<std::string> uniq = words;
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        for (const std::string& w : uniq) df[w]++;
        docs.push_back(std::move(words));
    }

    TfidfModel model;
    model.vocabulary.reserve(df.size());
    model.idf.reserve(df.size());
    const double n = static_cast<double>(corpus.size());
    for (const auto& [term, freq] : df) {
        model.term_index.emplace(term, static_cast<uint32_t>(model.vocabulary.size()));
        model.vocabulary.push_back(term);
        model.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(freq))) + 1.0);
    }

    std::vector<DocVector> vectors;
    vectors.reserve(corpus.size());
    for (const std::string& text : corpus) vectors.push_back(model.transform(text));
    return {std::move(model), std::move(vectors)};
}

LexicalTfidfProvider::LexicalTfidfProvider(const std::vector<std::string>& corpus) {
    model_ = tfidf_vectorize(corpus).first;
    // identity depends on the fitted vocabulary so different corpora never
    // share a cache slot
    uint64_t h = 1469598103934665603ULL;
    for (const std::string& t : model_.vocabulary)
        for (char c : t) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
    id_ = "lexical-tfidf/" + std::to_string(model_.vocabulary.size()) + "/" + std::to_string(h);
}

std::vector<DocVector> LexicalTfidfProvider::embed(const std::vector<std::string>& texts) {
    std::vector<DocVector> out;
    out.reserve(texts.size());
    for (const std::string& t : texts) out.push_back(model_.transform(t));
    return out;
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(RemoteEmbeddingConfig config)
    : config_(std::move(config)) {}

std::string RemoteEmbeddingProvider::id() const {
    return "remote/" + config_.base_url + config_.path + "/" + config_.model;
}

std::vector<DocVector> RemoteEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    const size_t batch = std::max<size_t>(1, config_.batch_size);
    const size_t n_batches = (texts.size() + batch - 1) / batch;

    auto run_batch = [this](std::vector<std::string> inputs) -> std::vector<DocVector> {
        httplib::Client client(config_.base_url);
        client.set_read_timeout(config_.timeout_seconds, 0);
        httplib::Headers headers;
        if (const char* cred = std::getenv(config_.credential_env.c_str()))
            headers.emplace("Authorization", std::string("Bearer ") + cred);
        json body = {{"model", config_.model}, {"input", inputs}};
        auto res = client.Post(config_.path, headers, body.dump(), "application/json");
        if (!res)
            throw Error(errc::provider_failure,
                        "embedding endpoint unreachable: " + config_.base_url);
        if (res->status != 200)
            throw Error(errc::provider_failure, "embedding endpoint returned status " +
                                                    std::to_string(res->status) + ": " +
                                                    res->body.substr(0, 200));
        json j = json::parse(res->body, nullptr, false);
        if (j.is_discarded() || !j.contains("data") || !j["data"].is_array() ||
            j["data"].size() != inputs.size())
            throw Error(errc::provider_failure, "malformed embedding response");
        std::vector<DocVector> out(inputs.size());
        for (const json& item : j["data"]) {
            const size_t idx = item.value("index", static_cast<size_t>(0));
            if (idx >= out.size() || !item.contains("embedding"))
                throw Error(errc::provider_failure, "malformed embedding response item");
            out[idx] = DocVector::from_dense(item["embedding"].get<std::vector<double>>());
        }
        return out;
    };

    std::vector<DocVector> result(texts.size());
    size_t next = 0;
    while (next < n_batches) {
        // bounded in-flight window; outputs land at their input offsets
        const size_t window = std::min(std::max<size_t>(1, config_.max_parallel),
                                       n_batches - next);
        std::vector<std::future<std::vector<DocVector>>> inflight;
        std::vector<size_t> offsets;
        for (size_t b = 0; b < window; ++b) {
            const size_t begin = (next + b) * batch;
            const size_t end = std::min(texts.size(), begin + batch);
            std::vector<std::string> inputs;
            inputs.reserve(end - begin);
            for (size_t i = begin; i < end; ++i)
                inputs.push_back(texts[i].size() > config_.truncate_chars
                                     ? texts[i].substr(0, config_.truncate_chars)
                                     : texts[i]);
            offsets.push_back(begin);
            inflight.push_back(
                std::async(std::launch::async, run_batch, std::move(inputs)));
        }
        for (size_t b = 0; b < window; ++b) {
            std::vector<DocVector> vecs = inflight[b].get();
            for (size_t i = 0; i < vecs.size(); ++i) result[offsets[b] + i] = std::move(vecs[i]);
        }
        next += window;
    }
    return result;
}

const std::vector<DocVector>& NoteEmbeddingCache::vectors(const Cohort& cohort,
                                                          EmbeddingProvider& provider) {
    std::vector<std::string> keys;
    keys.reserve(cohort.size());
    for (const auto& [key, adm] : cohort.admissions) keys.push_back(key);
    if (provider_id_ == provider.id() && keys == keys_) return vectors_;

    std::vector<std::string> notes;
    notes.reserve(keys.size());
    for (const std::string& k : keys) notes.push_back(cohort.admissions.at(k).note);
    vectors_ = provider.embed(notes);
    keys_ = std::move(keys);
    provider_id_ = provider.id();
    return vectors_;
}

std::vector<TextRankedAdmission> rank_top_k_text(const Cohort& cohort,
                                                 const std::string& query_text,
                                                 const TextRankParams& params,
                                                 EmbeddingProvider& provider,
                                                 const std::string& query_key,
                                                 NoteEmbeddingCache* cache) {
    if (params.k < 1) throw Error(errc::bad_param, "k must be >= 1");

    NoteEmbeddingCache local;
    NoteEmbeddingCache& store = cache ? *cache : local;
    const std::vector<DocVector>& note_vecs = store.vectors(cohort, provider);
    const std::vector<std::string>& keys = store.keys();

    const DocVector query_vec = provider.embed({query_text}).at(0);

    std::string query_subject;
    if (!query_key.empty() && cohort.contains(query_key))
        query_subject = cohort.at(query_key).subject_key;

    std::vector<TextRankedAdmission> scored;
    scored.reserve(keys.size());
    for (size_t i = 0; i < keys.size(); ++i) {
        if (!query_key.empty()) {
            if (keys[i] == query_key) continue;
            if (params.exclude_same_subject && !query_subject.empty() &&
                cohort.at(keys[i]).subject_key == query_subject)
                continue;
        }
        scored.push_back({keys[i], cosine(query_vec, note_vecs[i])});
    }

    auto before = [](const TextRankedAdmission& a, const TextRankedAdmission& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.admission_key < b.admission_key;
    };
    if (scored.size() > params.k) {
        std::partial_sort(scored.begin(), scored.begin() + params.k, scored.end(), before);
        scored.resize(params.k);
    } else {
        std::sort(scored.begin(), scored.end(), before);
    }
    return scored;
}

} // namespace exprag
