#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>

#include "exprag/cohort.hpp"

namespace exprag {

enum class NoteStyle { Sentinel, Narrative };

/// Seeded synthetic cohort with planted cluster structure: admissions draw
/// codes mostly from their cluster's pool, so same-cluster pairs have
/// systematically higher Jaccard similarity than cross-cluster ones.
struct SynthParams {
    uint64_t seed = 42;
    size_t n_subjects = 200;
    size_t n_clusters = 2;
    // inclusive; must stay within the cohort filter bounds [3, 40]
    std::pair<size_t, size_t> codes_per_kind = {3, 40};
    // 0 = auto-sized from n_clusters
    std::array<size_t, 3> vocab_per_kind = {0, 0, 0};
    double cluster_overlap = 0.9; // probability a code comes from the cluster pool
    NoteStyle note_style = NoteStyle::Narrative;
    double second_admission_rate = 0.0; // fraction of subjects with two encounters

    void validate() const;
};

struct SynthCohort {
    Cohort cohort; // notes joined; every admission survives filter_admissions
    std::unordered_map<std::string, size_t> cluster_of; // admission key -> cluster
};

SynthCohort gen_cohort(const SynthParams& params);

/// Renders one discharge note for an admission. Sentinel style plants a
/// unique sentence per (admission, section); Narrative style writes filler
/// prose whose vocabulary is disjoint from code descriptions, so only the
/// discharge-plan sections mention them.
std::string gen_note(const AdmissionRecord& adm, const Cohort& cohort, NoteStyle style,
                     uint64_t note_seed);

/// Emits the cohort-core input files (three code tables + notes.jsonl).
struct SynthFiles {
    std::string diagnoses_csv;
    std::string medications_csv;
    std::string procedures_csv;
    std::string notes_jsonl;
};

SynthFiles render_files(const SynthCohort& synth);
void write_files(const SynthCohort& synth, const std::string& dir);

} // namespace exprag
