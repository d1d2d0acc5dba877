#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace exprag {

enum class CodeKind { Diagnosis, Medication, Procedure };

inline constexpr std::array<CodeKind, 3> kCodeKinds = {
    CodeKind::Diagnosis, CodeKind::Medication, CodeKind::Procedure};

const char* code_kind_name(CodeKind k);
std::optional<CodeKind> code_kind_from_name(std::string_view name);

/// Trim, uppercase; embedded dots stripped for ICD-coded kinds. NDC
/// (medication) codes keep their full recorded string.
std::string normalize_code(std::string_view raw, CodeKind kind);

struct CodeEntry {
    std::string subject_key;
    std::string admission_key;
    CodeKind kind = CodeKind::Diagnosis;
    std::string code;        // normalized
    std::string description; // optional free text
};

/// One hospital encounter. Code collections are sorted, duplicate-free sets.
struct AdmissionRecord {
    std::string subject_key;
    std::string admission_key;
    std::vector<std::string> diag_codes;
    std::vector<std::string> med_codes;
    std::vector<std::string> proc_codes;
    std::string note; // empty = no discharge note joined

    const std::vector<std::string>& codes(CodeKind k) const {
        switch (k) {
        case CodeKind::Medication: return med_codes;
        case CodeKind::Procedure: return proc_codes;
        default: return diag_codes;
        }
    }
    std::vector<std::string>& codes(CodeKind k) {
        return const_cast<std::vector<std::string>&>(
            static_cast<const AdmissionRecord*>(this)->codes(k));
    }
    bool has_note() const { return !note.empty(); }
};

struct Cohort {
    std::map<std::string, AdmissionRecord> admissions; // key-ordered
    // (kind, code) -> human-readable description, shared across admissions
    std::array<std::unordered_map<std::string, std::string>, 3> descriptions;

    size_t size() const { return admissions.size(); }
    bool contains(const std::string& admission_key) const {
        return admissions.count(admission_key) != 0;
    }
    const AdmissionRecord& at(const std::string& admission_key) const;
    const std::string& description(CodeKind kind, const std::string& code) const;
    void set_description(CodeKind kind, const std::string& code, const std::string& text);
};

struct ParseOptions {
    char delimiter = ',';
    std::string subject_column = "subject_id";
    std::string admission_column = "hadm_id";
    std::string code_column = "code";
    // empty = pick the conventional column for the kind (long_title / drug)
    std::string description_column;
};

struct ParseStats {
    size_t rows = 0;
    size_t skipped_empty_code = 0; // rows dropped for an empty code field
};

/// Delimiter-separated code table with a header row. Throws Error
/// (missing-column, malformed-row) with line numbers.
std::vector<CodeEntry> parse_code_table(std::istream& input, CodeKind kind,
                                        const ParseOptions& options = {},
                                        ParseStats* stats = nullptr);

struct NoteRecord {
    std::string admission_key;
    std::string subject_key;
    std::string text;
};

/// Line-delimited JSON records {hadm_id, subject_id, text}. Throws Error
/// (malformed-line) with line numbers.
std::vector<NoteRecord> parse_notes(std::istream& input);

/// Groups entries into admissions, deduplicates codes, joins notes. Throws
/// Error (conflicting-subject) when one admission maps to two subjects.
Cohort build_cohort(const std::vector<CodeEntry>& diag,
                    const std::vector<CodeEntry>& med,
                    const std::vector<CodeEntry>& proc,
                    const std::vector<NoteRecord>& notes);

/// Keeps admissions with a non-empty note and all three code-set sizes in
/// [min_entries, max_entries], inclusive. Idempotent.
Cohort filter_admissions(const Cohort& cohort, size_t min_entries = 3,
                         size_t max_entries = 40);

/// Self-describing versioned archive for fast reload. Deterministic bytes for
/// a given cohort.
void save_cohort(const Cohort& cohort, std::ostream& out);
Cohort load_cohort(std::istream& in);
void save_cohort_file(const Cohort& cohort, const std::string& path);
Cohort load_cohort_file(const std::string& path);

} // namespace exprag
