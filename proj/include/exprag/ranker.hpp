#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "exprag/cohort.hpp"

namespace exprag {

/// Balancing coefficients for the three modality similarities. Used raw, not
/// renormalized; rankings are invariant under positive scaling.
struct SimilarityWeights {
    double diag = 1.0 / 3.0;
    double med = 1.0 / 3.0;
    double proc = 1.0 / 3.0;

    static SimilarityWeights uniform() { return {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}; }
    /// Weight 1 on the task-relevant modality, 0 elsewhere.
    static SimilarityWeights task_focused(CodeKind kind);
    /// Weight 1 on the two less relevant modalities, 0 on the task-relevant one.
    static SimilarityWeights complementary(CodeKind kind);

    void validate() const; // throws bad-param unless all >= 0 and one > 0

    bool operator==(const SimilarityWeights&) const = default;
};

struct SimilarityScore {
    double tau_diag = 0.0;
    double tau_med = 0.0;
    double tau_proc = 0.0;
    double tau = 0.0;
};

/// |a∩b| / |a∪b| over sorted unique vectors; 0 when both sets are empty.
double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b);

double modality_similarity(const AdmissionRecord& p, const AdmissionRecord& q, CodeKind kind);

double combined_similarity(const SimilarityScore& parts, const SimilarityWeights& w);

SimilarityScore score_pair(const AdmissionRecord& p, const AdmissionRecord& q,
                           const SimilarityWeights& w);

struct RankParams {
    size_t k = 15;
    SimilarityWeights weights;
    bool exclude_same_subject = true;
};

struct RankedAdmission {
    std::string admission_key;
    SimilarityScore score;
};

/// Inverted index from (kind, code) to the admissions carrying that code.
/// Immutable once built; safe for concurrent queries.
class CodeIndex {
public:
    static CodeIndex build(const Cohort& cohort);

    /// Accelerated top-k: posting-list intersection counting, scored exactly
    /// as the pairwise definition. Candidates with zero combined similarity
    /// are omitted. Ties broken by ascending admission key.
    std::vector<RankedAdmission> rank_top_k(const AdmissionRecord& query,
                                            const RankParams& params) const;

    size_t admission_count() const { return keys_.size(); }
    size_t posting_count(CodeKind kind, const std::string& code) const;
    uint32_t set_size(CodeKind kind, const std::string& admission_key) const;

    void save(std::ostream& out) const;
    static CodeIndex load(std::istream& in);
    void save_file(const std::string& path) const;
    static CodeIndex load_file(const std::string& path);

private:
    friend struct CodeIndexTestAccess;

    std::vector<std::string> keys_;     // dense id -> admission key, ascending
    std::vector<uint32_t> subject_ids_; // dense id -> dense subject id
    std::vector<std::string> subjects_; // dense subject id -> subject key
    std::array<std::vector<uint32_t>, 3> set_sizes_;
    std::array<std::unordered_map<std::string, std::vector<uint32_t>>, 3> postings_;
    std::unordered_map<std::string, uint32_t> id_of_;
};

/// Convenience wrapper: looks the query admission up in the cohort.
std::vector<RankedAdmission> rank_top_k(const CodeIndex& index, const Cohort& cohort,
                                        const std::string& query_key, const RankParams& params);

/// Oracle: pairwise scan over the whole cohort with the identical scoring and
/// tie-breaking contract as CodeIndex::rank_top_k.
std::vector<RankedAdmission> brute_force_rank(const Cohort& cohort, const std::string& query_key,
                                              const RankParams& params);

/// Line-delimited export: one record per rank position.
void write_ranking(std::ostream& out, const std::string& query_key,
                   const std::vector<RankedAdmission>& ranking);

} // namespace exprag
