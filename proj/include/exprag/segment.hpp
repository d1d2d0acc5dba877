#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "exprag/text.hpp"

namespace exprag {

/// The seven canonical discharge-report sections, in document order.
enum class SectionKind {
    PatientDemography = 0,
    PresentingCondition,
    ClinicalAssessment,
    TreatmentPlan,
    InHospitalProgress,
    DischargeSummary,
    PostDischargeInstructions,
};

inline constexpr size_t kSectionCount = 7;

enum class Phase { ClinicalProfile, InHospital, DischargePlan };

const char* section_kind_name(SectionKind k);
std::optional<SectionKind> section_kind_from_name(std::string_view name);
const char* phase_name(Phase p);

/// Total mapping: sections 1-3 -> ClinicalProfile, 4-5 -> InHospital,
/// 6-7 -> DischargePlan.
Phase phase_of(SectionKind k);

enum class TaskKind { DiagnosisInference, MedicationInference, InstructionInference };

const char* task_kind_name(TaskKind t);
std::optional<TaskKind> task_kind_from_name(std::string_view name);

/// Header-synonym table. Matching is case-insensitive on the whole line with
/// an optional trailing colon (content may follow the colon).
struct SegmenterConfig {
    std::array<std::vector<std::string>, kSectionCount> synonyms;
    // headers anchoring gold extraction inside the discharge plan
    std::vector<std::string> diagnosis_gold_headers;
    std::vector<std::string> medication_gold_headers;

    static SegmenterConfig defaults();
    static SegmenterConfig from_json_file(const std::string& path);
    void save_json_file(const std::string& path) const;
};

/// One contiguous run of the note: a recognized section (with the header line
/// included in its bytes) or leading residual text.
struct NoteSegment {
    std::optional<SectionKind> kind; // nullopt = residual
    std::string header;              // matched synonym, lowercased
    Span span;                       // [begin, end) in the note
    std::string body;                // bytes after the header line
};

struct SegmentedNote {
    std::string admission_key;
    std::string text; // original note, byte-exact
    std::vector<NoteSegment> segments;

    bool has_section(SectionKind k) const;
    /// Concatenated raw bytes (header lines included) of all segments of the
    /// given kind, in document order.
    std::string section_text(SectionKind k) const;
    std::string residual() const;
    /// Byte-exact reconstruction of the original note.
    std::string reconstruct() const;
};

/// Splits a note at recognized header lines. A note with no recognized
/// headers yields a single residual segment.
SegmentedNote segment_note(const std::string& text,
                           const SegmenterConfig& config = SegmenterConfig::defaults());

/// Leakage-free task background: ClinicalProfile sections for diagnosis,
/// ClinicalProfile + InHospital for medication and instruction tasks, in
/// canonical section order. Throws Error (empty-background).
std::string assemble_background(const SegmentedNote& seg, TaskKind task);

struct GoldItem {
    std::string text; // option display text
    std::string key;  // normalized matching key (drug-name token for meds)
};

/// Gold answers from the discharge plan. Throws Error (missing-gold-section).
std::vector<GoldItem> extract_gold(const SegmentedNote& seg, TaskKind task,
                                   const SegmenterConfig& config = SegmenterConfig::defaults());

/// Leading tokens of a medication line up to the first numeric token: the
/// drug-name part, normalized.
std::string medication_name_key(std::string_view line);

} // namespace exprag
