#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "exprag/text.hpp"

namespace exprag {

/// A passage cut from one source note. text always equals the note substring
/// at char_span.
struct Chunk {
    std::string source_key;
    Span char_span;
    std::string text;
    std::optional<size_t> parent; // hierarchical mode: index of the parent hit
};

struct CorpusStats {
    size_t doc_count = 0;
    double avg_doc_len = 0.0; // in tokens
    std::unordered_map<std::string, size_t> df;

    static CorpusStats build(const std::vector<std::string>& docs);
};

enum class RetrieveMethod { Bm25, SentenceWindow, HierMerge };

const char* retrieve_method_name(RetrieveMethod m);
std::optional<RetrieveMethod> retrieve_method_from_name(std::string_view name);

struct RetrievalHit {
    Chunk chunk;
    double score = 0.0;
    RetrieveMethod method = RetrieveMethod::Bm25;
};

/// One ranked report handed down from a report ranker.
struct Report {
    std::string admission_key;
    std::string text;
};

struct RetrieveParams {
    size_t top_n = 5;
    // plain BM25 chunking
    size_t chunk_size = 256;
    size_t chunk_overlap = 32;
    // sentence window
    size_t window = 1;
    // hierarchical merge
    size_t leaf_tokens = 128;
    size_t fanout = 4;
    double merge_threshold = 0.5;
    // BM25 constants
    double k1 = 1.2;
    double b = 0.75;

    bool operator==(const RetrieveParams&) const = default;
};

/// Token windows of `size` advancing by `size - overlap`; the last chunk may
/// be short. Spans cover the whole text. Throws bad-param unless
/// size > overlap >= 0.
std::vector<Chunk> chunk_fixed(const std::string& text, const std::string& source_key,
                               size_t size = 256, size_t overlap = 32);

/// Okapi BM25 with idf(t) = ln(1 + (N - df + 0.5)/(df + 0.5)). Query terms
/// are deduplicated; 0 when no query term occurs in the chunk.
double bm25_score(const std::vector<std::string>& query_terms, const std::string& chunk_text,
                  const CorpusStats& stats, double k1 = 1.2, double b = 0.75);

std::vector<RetrievalHit> retrieve_bm25(const std::vector<Report>& reports,
                                        const std::string& query, const RetrieveParams& params);

/// Sentences scored by BM25; each hit expands to `window` neighbouring
/// sentences on each side within its own note.
std::vector<RetrievalHit> retrieve_sentence_window(const std::vector<Report>& reports,
                                                   const std::string& query,
                                                   const RetrieveParams& params);

/// Leaf chunks grouped `fanout` at a time under parents; when the fraction of
/// a parent's children inside the provisional top results reaches
/// merge_threshold, the parent (scored as its best child) replaces them.
std::vector<RetrievalHit> retrieve_hier_merge(const std::vector<Report>& reports,
                                              const std::string& query,
                                              const RetrieveParams& params);

/// Method dispatch. Throws unknown-method.
std::vector<RetrievalHit> retrieve(const std::vector<Report>& reports, const std::string& query,
                                   RetrieveMethod method, const RetrieveParams& params);

/// Joins hit texts with blank lines. When char_budget > 0, whole lowest-scored
/// hits are dropped until the context fits; hits are never cut mid-chunk. The
/// surviving hits keep their input order.
std::string assemble_context(const std::vector<RetrievalHit>& hits, size_t char_budget = 6000);

/// Line-delimited export (question_id, rank, source_key, span, score, method).
void write_hits(std::ostream& out, const std::string& question_id,
                const std::vector<RetrievalHit>& hits);

} // namespace exprag
