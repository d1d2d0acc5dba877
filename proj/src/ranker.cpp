#include "exprag/ranker.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "exprag/errors.hpp"

using json = nlohmann::json;

namespace exprag {

SimilarityWeights SimilarityWeights::task_focused(CodeKind kind) {
    SimilarityWeights w{0.0, 0.0, 0.0};
    switch (kind) {
    case CodeKind::Diagnosis: w.diag = 1.0; break;
    case CodeKind::Medication: w.med = 1.0; break;
    case CodeKind::Procedure: w.proc = 1.0; break;
    }
    return w;
}

SimilarityWeights SimilarityWeights::complementary(CodeKind kind) {
    SimilarityWeights w{1.0, 1.0, 1.0};
    switch (kind) {
    case CodeKind::Diagnosis: w.diag = 0.0; break;
    case CodeKind::Medication: w.med = 0.0; break;
    case CodeKind::Procedure: w.proc = 0.0; break;
    }
    return w;
}

void SimilarityWeights::validate() const {
    if (diag < 0 || med < 0 || proc < 0)
        throw Error(errc::bad_param, "similarity weights must be non-negative");
    if (diag == 0 && med == 0 && proc == 0)
        throw Error(errc::bad_param, "at least one similarity weight must be positive");
}

namespace {

// Intersection of sorted unique vectors.
size_t intersection_size(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    size_t i = 0, j = 0, n = 0;
    while (i < a.size() && j < b.size()) {
        const int c = a[i].compare(b[j]);
        if (c == 0) {
            ++n;
            ++i;
            ++j;
        } else if (c < 0) {
            ++i;
        } else {
            ++j;
        }
    }
    return n;
}

// Single scoring path shared by the index and the brute-force oracle so both
// produce bit-identical doubles.
double jaccard_from_counts(size_t inter, size_t size_a, size_t size_b) {
    const size_t uni = size_a + size_b - inter;
    if (uni == 0) return 0.0; // J(∅,∅) = 0 by decision
    return static_cast<double>(inter) / static_cast<double>(uni);
}

SimilarityScore score_from_counts(size_t inter_d, size_t qd, size_t cd, size_t inter_m, size_t qm,
                                  size_t cm, size_t inter_p, size_t qp, size_t cp,
                                  const SimilarityWeights& w) {
    SimilarityScore s;
    s.tau_diag = jaccard_from_counts(inter_d, qd, cd);
    s.tau_med = jaccard_from_counts(inter_m, qm, cm);
    s.tau_proc = jaccard_from_counts(inter_p, qp, cp);
    s.tau = w.diag * s.tau_diag + w.med * s.tau_med + w.proc * s.tau_proc;
    return s;
}

bool ranks_before(const RankedAdmission& a, const RankedAdmission& b) {
    if (a.score.tau != b.score.tau) return a.score.tau > b.score.tau;
    return a.admission_key < b.admission_key;
}

} // namespace

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    return jaccard_from_counts(intersection_size(a, b), a.size(), b.size());
}

double modality_similarity(const AdmissionRecord& p, const AdmissionRecord& q, CodeKind kind) {
    return jaccard(p.codes(kind), q.codes(kind));
}

double combined_similarity(const SimilarityScore& parts, const SimilarityWeights& w) {
    return w.diag * parts.tau_diag + w.med * parts.tau_med + w.proc * parts.tau_proc;
}

SimilarityScore score_pair(const AdmissionRecord& p, const AdmissionRecord& q,
                           const SimilarityWeights& w) {
    return score_from_counts(
        intersection_size(p.diag_codes, q.diag_codes), p.diag_codes.size(), q.diag_codes.size(),
        intersection_size(p.med_codes, q.med_codes), p.med_codes.size(), q.med_codes.size(),
        intersection_size(p.proc_codes, q.proc_codes), p.proc_codes.size(), q.proc_codes.size(),
        w);
}

CodeIndex CodeIndex::build(const Cohort& cohort) {
    CodeIndex idx;
    idx.keys_.reserve(cohort.size());
    for (const auto& [key, adm] : cohort.admissions) idx.keys_.push_back(key);
    // std::map iteration is already ascending; dense ids follow key order

    std::unordered_map<std::string, uint32_t> subject_id;
    idx.subject_ids_.resize(idx.keys_.size());
    for (auto& sizes : idx.set_sizes_) sizes.assign(idx.keys_.size(), 0);

    for (uint32_t id = 0; id < idx.keys_.size(); ++id) {
        const AdmissionRecord& adm = cohort.admissions.at(idx.keys_[id]);
        idx.id_of_.emplace(idx.keys_[id], id);
        auto [it, inserted] =
            subject_id.emplace(adm.subject_key, static_cast<uint32_t>(idx.subjects_.size()));
        if (inserted) idx.subjects_.push_back(adm.subject_key);
        idx.subject_ids_[id] = it->second;
        for (CodeKind kind : kCodeKinds) {
            const size_t ki = static_cast<size_t>(kind);
            const auto& codes = adm.codes(kind);
            idx.set_sizes_[ki][id] = static_cast<uint32_t>(codes.size());
            for (const std::string& code : codes) idx.postings_[ki][code].push_back(id);
        }
    }
    // ids were appended in ascending order, so postings are already sorted
    return idx;
}

size_t CodeIndex::posting_count(CodeKind kind, const std::string& code) const {
    const auto& table = postings_[static_cast<size_t>(kind)];
    auto it = table.find(code);
    return it == table.end() ? 0 : it->second.size();
}

uint32_t CodeIndex::set_size(CodeKind kind, const std::string& admission_key) const {
    auto it = id_of_.find(admission_key);
    if (it == id_of_.end())
        throw Error(errc::unknown_admission, "admission not indexed: " + admission_key);
    return set_sizes_[static_cast<size_t>(kind)][it->second];
}

std::vector<RankedAdmission> CodeIndex::rank_top_k(const AdmissionRecord& query,
                                                   const RankParams& params) const {
    if (params.k < 1) throw Error(errc::bad_param, "k must be >= 1");
    params.weights.validate();
    auto qit = id_of_.find(query.admission_key);
    if (qit == id_of_.end())
        throw Error(errc::unknown_admission,
                    "query admission not indexed: " + query.admission_key);
    const uint32_t query_id = qit->second;
    const uint32_t query_subject = subject_ids_[query_id];

    const size_t n = keys_.size();
    std::array<std::vector<uint32_t>, 3> counts;
    for (auto& c : counts) c.assign(n, 0);
    std::vector<uint32_t> touched;
    std::vector<uint8_t> seen(n, 0);

    for (CodeKind kind : kCodeKinds) {
        const size_t ki = static_cast<size_t>(kind);
        const auto& table = postings_[ki];
        for (const std::string& code : query.codes(kind)) {
            auto it = table.find(code);
            if (it == table.end()) continue;
            for (uint32_t id : it->second) {
                counts[ki][id]++;
                if (!seen[id]) {
                    seen[id] = 1;
                    touched.push_back(id);
                }
            }
        }
    }

    const size_t qd = query.diag_codes.size();
    const size_t qm = query.med_codes.size();
    const size_t qp = query.proc_codes.size();

    std::vector<RankedAdmission> candidates;
    candidates.reserve(touched.size());
    for (uint32_t id : touched) {
        if (id == query_id) continue;
        if (params.exclude_same_subject && subject_ids_[id] == query_subject) continue;
        SimilarityScore s = score_from_counts(
            counts[0][id], qd, set_sizes_[0][id], counts[1][id], qm, set_sizes_[1][id],
            counts[2][id], qp, set_sizes_[2][id], params.weights);
        if (s.tau > 0.0) candidates.push_back({keys_[id], s});
    }

    if (candidates.size() > params.k) {
        std::partial_sort(candidates.begin(), candidates.begin() + params.k, candidates.end(),
                          ranks_before);
        candidates.resize(params.k);
    } else {
        std::sort(candidates.begin(), candidates.end(), ranks_before);
    }
    return candidates;
}

std::vector<RankedAdmission> rank_top_k(const CodeIndex& index, const Cohort& cohort,
                                        const std::string& query_key, const RankParams& params) {
    return index.rank_top_k(cohort.at(query_key), params);
}

std::vector<RankedAdmission> brute_force_rank(const Cohort& cohort, const std::string& query_key,
                                              const RankParams& params) {
    if (params.k < 1) throw Error(errc::bad_param, "k must be >= 1");
    params.weights.validate();
    const AdmissionRecord& query = cohort.at(query_key);

    std::vector<RankedAdmission> candidates;
    for (const auto& [key, adm] : cohort.admissions) {
        if (key == query_key) continue;
        if (params.exclude_same_subject && adm.subject_key == query.subject_key) continue;
        SimilarityScore s = score_pair(query, adm, params.weights);
        if (s.tau > 0.0) candidates.push_back({key, s});
    }
    if (candidates.size() > params.k) {
        std::partial_sort(candidates.begin(), candidates.begin() + params.k, candidates.end(),
                          ranks_before);
        candidates.resize(params.k);
    } else {
        std::sort(candidates.begin(), candidates.end(), ranks_before);
    }
    return candidates;
}

namespace {

constexpr char kIndexMagic[8] = {'E', 'X', 'P', 'R', 'A', 'G', 'I', 'X'};
constexpr uint32_t kIndexVersion = 1;

void put_u32(std::ostream& out, uint32_t v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    out.write(buf, 4);
}

void put_u64(std::ostream& out, uint64_t v) {
    char buf[8];
    std::memcpy(buf, &v, 8);
    out.write(buf, 8);
}

void put_str(std::ostream& out, const std::string& s) {
    put_u32(out, static_cast<uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

uint32_t get_u32(std::istream& in) {
    char buf[4];
    in.read(buf, 4);
    if (!in) throw Error(errc::io, "truncated index file");
    uint32_t v;
    std::memcpy(&v, buf, 4);
    return v;
}

uint64_t get_u64(std::istream& in) {
    char buf[8];
    in.read(buf, 8);
    if (!in) throw Error(errc::io, "truncated index file");
    uint64_t v;
    std::memcpy(&v, buf, 8);
    return v;
}

std::string get_str(std::istream& in) {
    uint32_t len = get_u32(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    if (!in) throw Error(errc::io, "truncated index file");
    return s;
}

} // namespace

void CodeIndex::save(std::ostream& out) const {
    out.write(kIndexMagic, sizeof(kIndexMagic));
    put_u32(out, kIndexVersion);
    put_u64(out, keys_.size());
    for (const std::string& k : keys_) put_str(out, k);
    put_u64(out, subjects_.size());
    for (const std::string& s : subjects_) put_str(out, s);
    for (uint32_t sid : subject_ids_) put_u32(out, sid);
    for (const auto& sizes : set_sizes_)
        for (uint32_t v : sizes) put_u32(out, v);
    for (const auto& table : postings_) {
        std::vector<const std::string*> codes;
        codes.reserve(table.size());
        for (const auto& [code, posting] : table) codes.push_back(&code);
        std::sort(codes.begin(), codes.end(),
                  [](const std::string* a, const std::string* b) { return *a < *b; });
        put_u64(out, codes.size());
        for (const std::string* code : codes) {
            const auto& posting = table.at(*code);
            put_str(out, *code);
            put_u64(out, posting.size());
            for (uint32_t id : posting) put_u32(out, id);
        }
    }
}

CodeIndex CodeIndex::load(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kIndexMagic, sizeof(magic)) != 0)
        throw Error(errc::io, "not a code index file");
    if (get_u32(in) != kIndexVersion) throw Error(errc::io, "unsupported index version");

    CodeIndex idx;
    const uint64_t n = get_u64(in);
    idx.keys_.reserve(n);
    for (uint64_t i = 0; i < n; ++i) idx.keys_.push_back(get_str(in));
    const uint64_t ns = get_u64(in);
    idx.subjects_.reserve(ns);
    for (uint64_t i = 0; i < ns; ++i) idx.subjects_.push_back(get_str(in));
    idx.subject_ids_.resize(n);
    for (uint64_t i = 0; i < n; ++i) idx.subject_ids_[i] = get_u32(in);
    for (auto& sizes : idx.set_sizes_) {
        sizes.resize(n);
        for (uint64_t i = 0; i < n; ++i) sizes[i] = get_u32(in);
    }
    for (auto& table : idx.postings_) {
        const uint64_t ncodes = get_u64(in);
        for (uint64_t c = 0; c < ncodes; ++c) {
            std::string code = get_str(in);
            const uint64_t len = get_u64(in);
            std::vector<uint32_t> posting(len);
            for (uint64_t i = 0; i < len; ++i) posting[i] = get_u32(in);
            table.emplace(std::move(code), std::move(posting));
        }
    }
    for (uint32_t i = 0; i < idx.keys_.size(); ++i) idx.id_of_.emplace(idx.keys_[i], i);
    return idx;
}

void CodeIndex::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(errc::io, "cannot write " + path);
    save(out);
}

CodeIndex CodeIndex::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(errc::missing_input, "cannot read " + path);
    return load(in);
}

void write_ranking(std::ostream& out, const std::string& query_key,
                   const std::vector<RankedAdmission>& ranking) {
    for (size_t i = 0; i < ranking.size(); ++i) {
        const RankedAdmission& r = ranking[i];
        json j = {{"query_key", query_key},
                  {"rank", i + 1},
                  {"candidate_key", r.admission_key},
                  {"tau", r.score.tau},
                  {"tau_diag", r.score.tau_diag},
                  {"tau_med", r.score.tau_med},
                  {"tau_proc", r.score.tau_proc}};
        out << j.dump() << '\n';
    }
}

} // namespace exprag
