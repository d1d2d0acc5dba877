#include "exprag/retrieve.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "exprag/errors.hpp"

using json = nlohmann::json;

namespace exprag {

const char* retrieve_method_name(RetrieveMethod m) {
    switch (m) {
    case RetrieveMethod::Bm25: return "bm25";
    case RetrieveMethod::SentenceWindow: return "sentence-window";
    case RetrieveMethod::HierMerge: return "hier-merge";
    }
    return "bm25";
}

std::optional<RetrieveMethod> retrieve_method_from_name(std::string_view name) {
    if (name == "bm25") return RetrieveMethod::Bm25;
    if (name == "sentence-window") return RetrieveMethod::SentenceWindow;
    if (name == "hier-merge" || name == "auto-merge") return RetrieveMethod::HierMerge;
    return std::nullopt;
}

CorpusStats CorpusStats::build(const std::vector<std::string>& docs) {
    CorpusStats stats;
    stats.doc_count = docs.size();
    size_t total_tokens = 0;
    for (const std::string& doc : docs) {
        auto words = tokenize_words(doc);
        total_tokens += words.size();
        std::sort(words.begin(), words.end());
        words.erase(std::unique(words.begin(), words.end()), words.end());
        for (const std::string& w : words) stats.df[w]++;
    }
    stats.avg_doc_len =
        docs.empty() ? 0.0 : static_cast<double>(total_tokens) / static_cast<double>(docs.size());
    return stats;
}

std::vector<Chunk> chunk_fixed(const std::string& text, const std::string& source_key,
                               size_t size, size_t overlap) {
    if (size == 0 || size <= overlap)
        throw Error(errc::bad_param, "chunk size must exceed overlap");
    const std::vector<Token> tokens = tokenize(text);
    std::vector<Chunk> chunks;
    if (tokens.empty()) {
        if (!text.empty())
            chunks.push_back({source_key, Span{0, text.size()}, text, std::nullopt});
        return chunks;
    }
    const size_t stride = size - overlap;
    for (size_t start = 0; start < tokens.size(); start += stride) {
        const size_t end = std::min(start + size, tokens.size());
        Span span;
        span.begin = start == 0 ? 0 : tokens[start].span.begin;
        span.end = end == tokens.size() ? text.size() : tokens[end].span.begin;
        chunks.push_back(
            {source_key, span, text.substr(span.begin, span.size()), std::nullopt});
    }
    return chunks;
}

double bm25_score(const std::vector<std::string>& query_terms, const std::string& chunk_text,
                  const CorpusStats& stats, double k1, double b) {
    const std::vector<std::string> words = tokenize_words(chunk_text);
    std::unordered_map<std::string, size_t> tf;
    for (const std::string& w : words) tf[w]++;

    const double len = static_cast<double>(words.size());
    const double avg = stats.avg_doc_len > 0.0 ? stats.avg_doc_len : 1.0;
    const double n = static_cast<double>(stats.doc_count);

    std::set<std::string> terms(query_terms.begin(), query_terms.end());
    double score = 0.0;
    for (const std::string& t : terms) {
        auto it = tf.find(t);
        if (it == tf.end()) continue;
        const double freq = static_cast<double>(it->second);
        auto dfit = stats.df.find(t);
        const double df = dfit == stats.df.end() ? 0.0 : static_cast<double>(dfit->second);
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        score += idf * freq * (k1 + 1.0) / (freq + k1 * (1.0 - b + b * len / avg));
    }
    return score;
}

namespace {

bool hit_before(const RetrievalHit& a, const RetrievalHit& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.chunk.source_key != b.chunk.source_key) return a.chunk.source_key < b.chunk.source_key;
    return a.chunk.char_span.begin < b.chunk.char_span.begin;
}

// Chunks sharing no term with the query are not retrieval results.
void sort_and_truncate(std::vector<RetrievalHit>& hits, size_t top_n) {
    hits.erase(std::remove_if(hits.begin(), hits.end(),
                              [](const RetrievalHit& h) { return h.score <= 0.0; }),
               hits.end());
    std::sort(hits.begin(), hits.end(), hit_before);
    if (hits.size() > top_n) hits.resize(top_n);
}

} // namespace

std::vector<RetrievalHit> retrieve_bm25(const std::vector<Report>& reports,
                                        const std::string& query, const RetrieveParams& params) {
    std::vector<Chunk> chunks;
    for (const Report& r : reports)
        for (Chunk& c : chunk_fixed(r.text, r.admission_key, params.chunk_size,
                                    params.chunk_overlap))
            chunks.push_back(std::move(c));

    std::vector<std::string> docs;
    docs.reserve(chunks.size());
    for (const Chunk& c : chunks) docs.push_back(c.text);
    const CorpusStats stats = CorpusStats::build(docs);

    const std::vector<std::string> terms = tokenize_words(query);
    std::vector<RetrievalHit> hits;
    hits.reserve(chunks.size());
    for (Chunk& c : chunks) {
        const double s = bm25_score(terms, c.text, stats, params.k1, params.b);
        hits.push_back({std::move(c), s, RetrieveMethod::Bm25});
    }
    sort_and_truncate(hits, params.top_n);
    return hits;
}

std::vector<RetrievalHit> retrieve_sentence_window(const std::vector<Report>& reports,
                                                   const std::string& query,
                                                   const RetrieveParams& params) {
    struct Sentence {
        size_t report = 0;
        size_t index = 0; // within the report
        Span span;
    };
    std::vector<Sentence> sentences;
    std::vector<std::vector<Span>> spans_per_report(reports.size());
    std::vector<std::string> docs;
    for (size_t r = 0; r < reports.size(); ++r) {
        spans_per_report[r] = split_sentences(reports[r].text);
        for (size_t i = 0; i < spans_per_report[r].size(); ++i) {
            const Span sp = spans_per_report[r][i];
            sentences.push_back({r, i, sp});
            docs.push_back(reports[r].text.substr(sp.begin, sp.size()));
        }
    }
    const CorpusStats stats = CorpusStats::build(docs);
    const std::vector<std::string> terms = tokenize_words(query);

    std::vector<RetrievalHit> hits;
    hits.reserve(sentences.size());
    for (size_t s = 0; s < sentences.size(); ++s) {
        const double score = bm25_score(terms, docs[s], stats, params.k1, params.b);
        const Sentence& sent = sentences[s];
        const auto& spans = spans_per_report[sent.report];
        const size_t lo = sent.index >= params.window ? sent.index - params.window : 0;
        const size_t hi = std::min(spans.size() - 1, sent.index + params.window);
        Span window_span{spans[lo].begin, spans[hi].end};
        Chunk c{reports[sent.report].admission_key, window_span,
                reports[sent.report].text.substr(window_span.begin, window_span.size()),
                std::nullopt};
        hits.push_back({std::move(c), score, RetrieveMethod::SentenceWindow});
    }
    sort_and_truncate(hits, params.top_n);
    return hits;
}

std::vector<RetrievalHit> retrieve_hier_merge(const std::vector<Report>& reports,
                                              const std::string& query,
                                              const RetrieveParams& params) {
    if (params.fanout < 2) throw Error(errc::bad_param, "fanout must be >= 2");
    if (!(params.merge_threshold > 0.0 && params.merge_threshold <= 1.0))
        throw Error(errc::bad_param, "merge_threshold must be in (0, 1]");

    struct Leaf {
        Chunk chunk;
        size_t report = 0;
        size_t group = 0; // parent ordinal within the report
    };
    std::vector<Leaf> leaves;
    for (size_t r = 0; r < reports.size(); ++r) {
        auto chunks = chunk_fixed(reports[r].text, reports[r].admission_key, params.leaf_tokens, 0);
        for (size_t i = 0; i < chunks.size(); ++i)
            leaves.push_back({std::move(chunks[i]), r, i / params.fanout});
    }

    std::vector<std::string> docs;
    docs.reserve(leaves.size());
    for (const Leaf& l : leaves) docs.push_back(l.chunk.text);
    const CorpusStats stats = CorpusStats::build(docs);
    const std::vector<std::string> terms = tokenize_words(query);

    std::vector<double> scores(leaves.size());
    std::vector<size_t> order;
    for (size_t i = 0; i < leaves.size(); ++i) {
        scores[i] = bm25_score(terms, leaves[i].chunk.text, stats, params.k1, params.b);
        if (scores[i] > 0.0) order.push_back(i);
    }
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        if (leaves[a].chunk.source_key != leaves[b].chunk.source_key)
            return leaves[a].chunk.source_key < leaves[b].chunk.source_key;
        return leaves[a].chunk.char_span.begin < leaves[b].chunk.char_span.begin;
    });

    // provisional top leaves
    const size_t provisional = std::min(params.top_n, order.size());
    std::vector<size_t> top(order.begin(), order.begin() + provisional);

    // tally children per (report, group), both in the top set and overall
    std::map<std::pair<size_t, size_t>, std::vector<size_t>> in_top;
    std::map<std::pair<size_t, size_t>, size_t> group_size;
    for (size_t i = 0; i < leaves.size(); ++i)
        group_size[{leaves[i].report, leaves[i].group}]++;
    for (size_t i : top) in_top[{leaves[i].report, leaves[i].group}].push_back(i);

    std::vector<RetrievalHit> hits;
    std::vector<char> consumed(leaves.size(), 0);
    for (const auto& [group_key, members] : in_top) {
        const double fraction = static_cast<double>(members.size()) /
                                static_cast<double>(group_size.at(group_key));
        if (fraction + 1e-12 < params.merge_threshold) continue;
        // merge: one parent spanning all of the group's leaves
        Span parent_span{std::string::npos, 0};
        double best = 0.0;
        for (size_t i = 0; i < leaves.size(); ++i) {
            if (leaves[i].report != group_key.first || leaves[i].group != group_key.second)
                continue;
            parent_span.begin = std::min(parent_span.begin, leaves[i].chunk.char_span.begin);
            parent_span.end = std::max(parent_span.end, leaves[i].chunk.char_span.end);
            best = std::max(best, scores[i]);
            consumed[i] = 1;
        }
        const Report& rep = reports[group_key.first];
        Chunk parent{rep.admission_key, parent_span,
                     rep.text.substr(parent_span.begin, parent_span.size()), std::nullopt};
        hits.push_back({std::move(parent), best, RetrieveMethod::HierMerge});
    }
    for (size_t i : top) {
        if (consumed[i]) continue;
        hits.push_back({leaves[i].chunk, scores[i], RetrieveMethod::HierMerge});
    }
    sort_and_truncate(hits, params.top_n);
    return hits;
}

std::vector<RetrievalHit> retrieve(const std::vector<Report>& reports, const std::string& query,
                                   RetrieveMethod method, const RetrieveParams& params) {
    if (reports.empty()) return {};
    switch (method) {
    case RetrieveMethod::Bm25: return retrieve_bm25(reports, query, params);
    case RetrieveMethod::SentenceWindow: return retrieve_sentence_window(reports, query, params);
    case RetrieveMethod::HierMerge: return retrieve_hier_merge(reports, query, params);
    }
    throw Error(errc::unknown_method, "unknown retrieval method");
}

std::string assemble_context(const std::vector<RetrievalHit>& hits, size_t char_budget) {
    std::vector<char> keep(hits.size(), 1);
    if (char_budget > 0) {
        size_t total = 0;
        for (const RetrievalHit& h : hits) total += h.chunk.text.size() + 2;
        // drop lowest-scored whole hits until the context fits
        std::vector<size_t> by_score(hits.size());
        for (size_t i = 0; i < hits.size(); ++i) by_score[i] = i;
        std::sort(by_score.begin(), by_score.end(), [&](size_t a, size_t b) {
            if (hits[a].score != hits[b].score) return hits[a].score < hits[b].score;
            return a > b;
        });
        for (size_t drop : by_score) {
            if (total <= char_budget) break;
            keep[drop] = 0;
            total -= hits[drop].chunk.text.size() + 2;
        }
    }
    std::string out;
    for (size_t i = 0; i < hits.size(); ++i) {
        if (!keep[i]) continue;
        if (!out.empty()) out += "\n\n";
        out += hits[i].chunk.text;
    }
    return out;
}

void write_hits(std::ostream& out, const std::string& question_id,
                const std::vector<RetrievalHit>& hits) {
    for (size_t i = 0; i < hits.size(); ++i) {
        const RetrievalHit& h = hits[i];
        json j = {{"question_id", question_id},
                  {"rank", i + 1},
                  {"source_key", h.chunk.source_key},
                  {"span", {h.chunk.char_span.begin, h.chunk.char_span.end}},
                  {"score", h.score},
                  {"method", retrieve_method_name(h.method)}};
        out << j.dump() << '\n';
    }
}

} // namespace exprag
