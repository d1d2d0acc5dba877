#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "exprag/cohort.hpp"
#include "exprag/rng.hpp"
#include "exprag/segment.hpp"

namespace exprag {

enum class OptionSource { Gold, EhrDistractor, PermutedDistractor };
enum class AnswerMode { MultiSelect, SingleSelect };

const char* option_source_name(OptionSource s);
const char* answer_mode_name(AnswerMode m);

struct QAOption {
    char letter = 'A';
    std::string text;
    OptionSource source = OptionSource::Gold;
};

struct QAItem {
    std::string question_id;
    std::string admission_key;
    TaskKind task = TaskKind::DiagnosisInference;
    AnswerMode mode = AnswerMode::MultiSelect;
    std::string question_text;
    std::string background;
    std::vector<QAOption> options; // letter order
    std::set<char> gold_letters;
};

struct GenParams {
    uint64_t seed = 0;
    size_t n_options_multi = 8;  // diagnosis / medication
    size_t n_options_single = 4; // instruction
    size_t min_bullets = 4;      // instruction key-point floor
    // per-task item quotas, indexed by TaskKind
    std::array<size_t, 3> counts = {0, 0, 0};
};

/// Produces plausible-but-wrong instruction options by perturbing the gold
/// key points. An LLM-backed implementation can replace the default.
class InstructionPermuter {
public:
    virtual ~InstructionPermuter() = default;
    virtual std::vector<std::string> permute(const std::vector<std::string>& key_points,
                                             const AdmissionRecord& adm, const Cohort& cohort,
                                             size_t variant, Rng& rng) = 0;
};

/// Seeded deterministic permuter: swaps two key points' trailing attributes,
/// negates one directive, or substitutes a medication/activity token from the
/// admission's own EHR.
class DefaultPermuter : public InstructionPermuter {
public:
    std::vector<std::string> permute(const std::vector<std::string>& key_points,
                                     const AdmissionRecord& adm, const Cohort& cohort,
                                     size_t variant, Rng& rng) override;
};

const char* task_question_text(TaskKind task);

/// Multi-select item: gold options extracted from the discharge report,
/// distractors sampled from the admission's own EHR code descriptions that do
/// not collide with gold. Throws Error (insufficient-distractors,
/// missing-gold-section, empty-background).
QAItem gen_multiselect_item(const AdmissionRecord& adm, const SegmentedNote& seg, TaskKind task,
                            const Cohort& cohort, const GenParams& params, Rng& rng,
                            const SegmenterConfig& config = SegmenterConfig::defaults());

/// Single-select instruction item: one gold key-point summary plus permuted
/// distractors. Throws Error (too-few-key-points, duplicate-options).
QAItem gen_instruction_item(const AdmissionRecord& adm, const SegmentedNote& seg,
                            const Cohort& cohort, const GenParams& params, Rng& rng,
                            InstructionPermuter& permuter,
                            const SegmenterConfig& config = SegmenterConfig::defaults());

struct DatasetManifest {
    uint64_t seed = 0;
    std::array<size_t, 3> requested = {0, 0, 0};
    std::array<size_t, 3> generated = {0, 0, 0};
    // task -> error code -> count
    std::array<std::map<std::string, size_t>, 3> skipped;

    std::string to_json() const;
};

struct Dataset {
    std::vector<QAItem> items;
    DatasetManifest manifest;
};

/// Walks admissions in key order and generates items until the per-task
/// quotas are filled. Deterministic for fixed (cohort, params).
Dataset build_dataset(const Cohort& cohort, const GenParams& params,
                      InstructionPermuter* permuter = nullptr,
                      const SegmenterConfig& config = SegmenterConfig::defaults());

void write_dataset(std::ostream& out, const std::vector<QAItem>& items);
std::vector<QAItem> read_dataset(std::istream& in);
void write_dataset_file(const std::string& path, const std::vector<QAItem>& items);
std::vector<QAItem> read_dataset_file(const std::string& path);

} // namespace exprag
