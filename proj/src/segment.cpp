#include "exprag/segment.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "exprag/errors.hpp"

using json = nlohmann::json;

namespace exprag {

namespace {

constexpr std::array<const char*, kSectionCount> kSectionNames = {
    "patient_demography",    "presenting_condition", "clinical_assessment",
    "treatment_plan",        "in_hospital_progress", "discharge_summary",
    "post_discharge_instructions"};

} // namespace

const char* section_kind_name(SectionKind k) {
    return kSectionNames[static_cast<size_t>(k)];
}

std::optional<SectionKind> section_kind_from_name(std::string_view name) {
    for (size_t i = 0; i < kSectionCount; ++i)
        if (name == kSectionNames[i]) return static_cast<SectionKind>(i);
    return std::nullopt;
}

const char* phase_name(Phase p) {
    switch (p) {
    case Phase::ClinicalProfile: return "clinical_profile";
    case Phase::InHospital: return "in_hospital";
    case Phase::DischargePlan: return "discharge_plan";
    }
    return "clinical_profile";
}

Phase phase_of(SectionKind k) {
    switch (k) {
    case SectionKind::PatientDemography:
    case SectionKind::PresentingCondition:
    case SectionKind::ClinicalAssessment:
        return Phase::ClinicalProfile;
    case SectionKind::TreatmentPlan:
    case SectionKind::InHospitalProgress:
        return Phase::InHospital;
    default:
        return Phase::DischargePlan;
    }
}

const char* task_kind_name(TaskKind t) {
    switch (t) {
    case TaskKind::DiagnosisInference: return "diagnosis";
    case TaskKind::MedicationInference: return "medication";
    case TaskKind::InstructionInference: return "instruction";
    }
    return "diagnosis";
}

std::optional<TaskKind> task_kind_from_name(std::string_view name) {
    if (name == "diagnosis") return TaskKind::DiagnosisInference;
    if (name == "medication") return TaskKind::MedicationInference;
    if (name == "instruction") return TaskKind::InstructionInference;
    return std::nullopt;
}

SegmenterConfig SegmenterConfig::defaults() {
    SegmenterConfig c;
    auto set = [&](SectionKind k, std::vector<std::string> syns) {
        c.synonyms[static_cast<size_t>(k)] = std::move(syns);
    };
    set(SectionKind::PatientDemography,
        {"Patient Demography", "Demographics", "Patient Information"});
    set(SectionKind::PresentingCondition,
        {"Presenting Condition", "Chief Complaint", "History of Present Illness"});
    set(SectionKind::ClinicalAssessment,
        {"Clinical Assessment", "Physical Exam", "Pertinent Results", "Admission Labs"});
    set(SectionKind::TreatmentPlan,
        {"Treatment Plan", "Medications on Admission", "Admission Medications"});
    set(SectionKind::InHospitalProgress,
        {"In-Hospital Progress", "Brief Hospital Course", "Hospital Course"});
    set(SectionKind::DischargeSummary,
        {"Discharge Summary", "Discharge Diagnosis", "Discharge Diagnoses",
         "Discharge Medications", "Discharge Disposition", "Discharge Condition"});
    set(SectionKind::PostDischargeInstructions,
        {"Post-Discharge Instructions", "Discharge Instructions", "Followup Instructions"});
    c.diagnosis_gold_headers = {"discharge diagnosis", "discharge diagnoses"};
    c.medication_gold_headers = {"discharge medications"};
    return c;
}

SegmenterConfig SegmenterConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::missing_input, "cannot read segmenter config " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw Error(errc::config_invalid, "segmenter config is not a JSON object: " + path);
    SegmenterConfig c;
    const json sections = j.value("sections", json::object());
    for (size_t i = 0; i < kSectionCount; ++i) {
        auto it = sections.find(kSectionNames[i]);
        if (it == sections.end() || !it->is_array() || it->empty())
            throw Error(errc::config_invalid,
                        std::string("segmenter config misses section ") + kSectionNames[i]);
        c.synonyms[i] = it->get<std::vector<std::string>>();
    }
    c.diagnosis_gold_headers =
        j.value("diagnosis_gold_headers", std::vector<std::string>{"discharge diagnosis"});
    c.medication_gold_headers =
        j.value("medication_gold_headers", std::vector<std::string>{"discharge medications"});
    return c;
}

void SegmenterConfig::save_json_file(const std::string& path) const {
    json sections = json::object();
    for (size_t i = 0; i < kSectionCount; ++i) sections[kSectionNames[i]] = synonyms[i];
    json j = {{"sections", sections},
              {"diagnosis_gold_headers", diagnosis_gold_headers},
              {"medication_gold_headers", medication_gold_headers}};
    std::ofstream out(path);
    if (!out) throw Error(errc::io, "cannot write segmenter config " + path);
    out << j.dump(2) << '\n';
}

bool SegmentedNote::has_section(SectionKind k) const {
    return std::any_of(segments.begin(), segments.end(),
                       [&](const NoteSegment& s) { return s.kind == k; });
}

std::string SegmentedNote::section_text(SectionKind k) const {
    std::string out;
    for (const NoteSegment& s : segments)
        if (s.kind == k) out.append(text, s.span.begin, s.span.size());
    return out;
}

std::string SegmentedNote::residual() const {
    std::string out;
    for (const NoteSegment& s : segments)
        if (!s.kind) out.append(text, s.span.begin, s.span.size());
    return out;
}

std::string SegmentedNote::reconstruct() const {
    std::string out;
    for (const NoteSegment& s : segments) out.append(text, s.span.begin, s.span.size());
    return out;
}

namespace {

struct HeaderPattern {
    std::string synonym_lc;
    SectionKind kind;
};

// longest synonyms first so "discharge diagnosis" wins over "discharge"
std::vector<HeaderPattern> compile_patterns(const SegmenterConfig& config) {
    std::vector<HeaderPattern> out;
    for (size_t i = 0; i < kSectionCount; ++i)
        for (const std::string& syn : config.synonyms[i])
            out.push_back({to_lower(syn), static_cast<SectionKind>(i)});
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.synonym_lc.size() > b.synonym_lc.size();
    });
    return out;
}

// A line opens a section when, after trimming, it equals a synonym or starts
// with one directly followed by a colon.
const HeaderPattern* match_header(const std::string& line_lc,
                                  const std::vector<HeaderPattern>& patterns) {
    const std::string t = trim(line_lc);
    for (const HeaderPattern& p : patterns) {
        if (t == p.synonym_lc) return &p;
        if (t.size() > p.synonym_lc.size() && t.compare(0, p.synonym_lc.size(), p.synonym_lc) == 0) {
            size_t rest = p.synonym_lc.size();
            while (rest < t.size() && t[rest] == ' ') ++rest;
            if (rest < t.size() && t[rest] == ':') return &p;
        }
    }
    return nullptr;
}

} // namespace

SegmentedNote segment_note(const std::string& text, const SegmenterConfig& config) {
    SegmentedNote seg;
    seg.text = text;
    const std::vector<HeaderPattern> patterns = compile_patterns(config);

    struct HeaderHit {
        size_t line_begin;
        size_t body_begin; // after the header line's newline
        const HeaderPattern* pattern;
    };
    std::vector<HeaderHit> hits;

    size_t pos = 0;
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        size_t line_end = eol == std::string::npos ? text.size() : eol;
        std::string line_lc = to_lower(std::string_view(text).substr(pos, line_end - pos));
        if (const HeaderPattern* p = match_header(line_lc, patterns))
            hits.push_back({pos, eol == std::string::npos ? text.size() : eol + 1, p});
        if (eol == std::string::npos) break;
        pos = eol + 1;
    }

    if (hits.empty()) {
        if (!text.empty())
            seg.segments.push_back({std::nullopt, "", Span{0, text.size()}, text});
        return seg;
    }

    if (hits.front().line_begin > 0) {
        Span sp{0, hits.front().line_begin};
        seg.segments.push_back({std::nullopt, "", sp, text.substr(sp.begin, sp.size())});
    }
    for (size_t i = 0; i < hits.size(); ++i) {
        const size_t end = i + 1 < hits.size() ? hits[i + 1].line_begin : text.size();
        NoteSegment s;
        s.kind = hits[i].pattern->kind;
        s.header = hits[i].pattern->synonym_lc;
        s.span = Span{hits[i].line_begin, end};
        const size_t body_begin = std::min(hits[i].body_begin, end);
        s.body = text.substr(body_begin, end - body_begin);
        seg.segments.push_back(std::move(s));
    }
    return seg;
}

std::string assemble_background(const SegmentedNote& seg, TaskKind task) {
    const bool include_in_hospital = task != TaskKind::DiagnosisInference;
    std::string out;
    for (size_t i = 0; i < kSectionCount; ++i) {
        const SectionKind k = static_cast<SectionKind>(i);
        const Phase p = phase_of(k);
        if (p == Phase::DischargePlan) continue;
        if (p == Phase::InHospital && !include_in_hospital) continue;
        out += seg.section_text(k);
    }
    if (trim(out).empty())
        throw Error(errc::empty_background,
                    "no section of the required phases present for task " +
                        std::string(task_kind_name(task)));
    return out;
}

std::string medication_name_key(std::string_view line) {
    std::string_view body = strip_list_marker(line);
    std::string key;
    for (const Token& t : tokenize(body)) {
        if (!t.text.empty() && std::isdigit(static_cast<unsigned char>(t.text[0]))) break;
        if (!key.empty()) key.push_back(' ');
        key += t.text;
    }
    if (key.empty()) {
        auto words = tokenize_words(body);
        if (!words.empty()) key = words.front();
    }
    return key;
}

namespace {

std::vector<std::string> anchored_bodies(const SegmentedNote& seg,
                                         const std::vector<std::string>& anchors) {
    std::vector<std::string> out;
    for (const NoteSegment& s : seg.segments) {
        if (!s.kind) continue;
        for (const std::string& a : anchors)
            if (s.header == to_lower(a)) {
                out.push_back(s.body);
                break;
            }
    }
    return out;
}

} // namespace

std::vector<GoldItem> extract_gold(const SegmentedNote& seg, TaskKind task,
                                   const SegmenterConfig& config) {
    std::vector<GoldItem> gold;

    if (task == TaskKind::InstructionInference) {
        std::string body;
        for (const NoteSegment& s : seg.segments)
            if (s.kind == SectionKind::PostDischargeInstructions) body += s.body;
        std::string t = trim(body);
        if (t.empty())
            throw Error(errc::missing_gold_section, "no discharge-instruction section");
        gold.push_back({t, normalize_text(t)});
        return gold;
    }

    const auto& anchors = task == TaskKind::DiagnosisInference ? config.diagnosis_gold_headers
                                                               : config.medication_gold_headers;
    const std::vector<std::string> bodies = anchored_bodies(seg, anchors);
    if (bodies.empty())
        throw Error(errc::missing_gold_section,
                    std::string("no gold section for task ") + task_kind_name(task));

    for (const std::string& body : bodies) {
        for (const std::string& item : split_list_items(body)) {
            GoldItem g;
            if (task == TaskKind::DiagnosisInference) {
                g.text = normalize_text(item);
                g.key = g.text;
            } else {
                g.text = normalize_text(item);
                g.key = medication_name_key(item);
            }
            if (!g.key.empty() && !g.text.empty()) gold.push_back(std::move(g));
        }
    }
    if (gold.empty())
        throw Error(errc::missing_gold_section,
                    std::string("gold section empty for task ") + task_kind_name(task));
    return gold;
}

} // namespace exprag
