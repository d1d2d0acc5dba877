#include "exprag/cohort.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "exprag/errors.hpp"
#include "exprag/text.hpp"

using json = nlohmann::json;

namespace exprag {

const char* code_kind_name(CodeKind k) {
    switch (k) {
    case CodeKind::Diagnosis: return "diagnosis";
    case CodeKind::Medication: return "medication";
    case CodeKind::Procedure: return "procedure";
    }
    return "diagnosis";
}

std::optional<CodeKind> code_kind_from_name(std::string_view name) {
    if (name == "diagnosis") return CodeKind::Diagnosis;
    if (name == "medication") return CodeKind::Medication;
    if (name == "procedure") return CodeKind::Procedure;
    return std::nullopt;
}

std::string normalize_code(std::string_view raw, CodeKind kind) {
    std::string t = trim(raw);
    std::string out;
    out.reserve(t.size());
    const bool icd = kind != CodeKind::Medication;
    for (unsigned char c : t) {
        if (icd && c == '.') continue;
        out.push_back(static_cast<char>(std::toupper(c)));
    }
    return out;
}

const AdmissionRecord& Cohort::at(const std::string& admission_key) const {
    auto it = admissions.find(admission_key);
    if (it == admissions.end())
        throw Error(errc::unknown_admission, "admission not in cohort: " + admission_key);
    return it->second;
}

const std::string& Cohort::description(CodeKind kind, const std::string& code) const {
    const auto& table = descriptions[static_cast<size_t>(kind)];
    auto it = table.find(code);
    if (it != table.end() && !it->second.empty()) return it->second;
    return code;
}

void Cohort::set_description(CodeKind kind, const std::string& code, const std::string& text) {
    if (text.empty()) return;
    auto& table = descriptions[static_cast<size_t>(kind)];
    auto it = table.find(code);
    if (it == table.end()) table.emplace(code, text);
}

namespace {

std::string default_description_column(CodeKind kind) {
    return kind == CodeKind::Medication ? "drug" : "long_title";
}

// reads one logical line, tolerating \r\n endings
bool read_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

} // namespace

std::vector<CodeEntry> parse_code_table(std::istream& input, CodeKind kind,
                                        const ParseOptions& options, ParseStats* stats) {
    std::string line;
    if (!read_line(input, line))
        throw Error(errc::missing_column, "empty input: no header row");

    const std::vector<std::string> header = split_delimited(line, options.delimiter);
    auto column = [&](const std::string& name) -> std::optional<size_t> {
        for (size_t i = 0; i < header.size(); ++i)
            if (trim(header[i]) == name) return i;
        return std::nullopt;
    };

    auto require = [&](const std::string& name) {
        auto idx = column(name);
        if (!idx)
            throw Error(errc::missing_column, "header lacks required column '" + name + "'");
        return *idx;
    };

    const size_t subject_idx = require(options.subject_column);
    const size_t admission_idx = require(options.admission_column);
    const size_t code_idx = require(options.code_column);
    const std::string desc_name = options.description_column.empty()
                                      ? default_description_column(kind)
                                      : options.description_column;
    const std::optional<size_t> desc_idx = column(desc_name);

    std::vector<CodeEntry> entries;
    size_t line_no = 1;
    while (read_line(input, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_delimited(line, options.delimiter);
        if (cells.size() != header.size())
            throw Error(errc::malformed_row,
                        "line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(cells.size()));
        if (stats) stats->rows++;
        std::string code = normalize_code(cells[code_idx], kind);
        if (code.empty()) {
            if (stats) stats->skipped_empty_code++;
            continue;
        }
        CodeEntry e;
        e.subject_key = trim(cells[subject_idx]);
        e.admission_key = trim(cells[admission_idx]);
        e.kind = kind;
        e.code = std::move(code);
        if (desc_idx) e.description = trim(cells[*desc_idx]);
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<NoteRecord> parse_notes(std::istream& input) {
    std::vector<NoteRecord> notes;
    std::string line;
    size_t line_no = 0;
    while (read_line(input, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("hadm_id") ||
            !j.contains("subject_id") || !j.contains("text") || !j["text"].is_string())
            throw Error(errc::malformed_line,
                        "line " + std::to_string(line_no) + ": not a note record");
        NoteRecord r;
        auto as_string = [](const json& v) {
            return v.is_string() ? v.get<std::string>() : v.dump();
        };
        r.admission_key = as_string(j["hadm_id"]);
        r.subject_key = as_string(j["subject_id"]);
        r.text = j["text"].get<std::string>();
        notes.push_back(std::move(r));
    }
    return notes;
}

Cohort build_cohort(const std::vector<CodeEntry>& diag, const std::vector<CodeEntry>& med,
                    const std::vector<CodeEntry>& proc, const std::vector<NoteRecord>& notes) {
    Cohort cohort;

    auto admission = [&](const std::string& key, const std::string& subject) -> AdmissionRecord& {
        auto [it, inserted] = cohort.admissions.try_emplace(key);
        AdmissionRecord& adm = it->second;
        if (inserted) {
            adm.admission_key = key;
            adm.subject_key = subject;
        } else if (!subject.empty() && adm.subject_key != subject) {
            throw Error(errc::conflicting_subject,
                        "admission " + key + " claimed by subjects " + adm.subject_key +
                            " and " + subject);
        }
        return adm;
    };

    auto ingest = [&](const std::vector<CodeEntry>& entries) {
        for (const CodeEntry& e : entries) {
            AdmissionRecord& adm = admission(e.admission_key, e.subject_key);
            adm.codes(e.kind).push_back(e.code);
            cohort.set_description(e.kind, e.code, e.description);
        }
    };
    ingest(diag);
    ingest(med);
    ingest(proc);

    for (const NoteRecord& n : notes) {
        AdmissionRecord& adm = admission(n.admission_key, n.subject_key);
        adm.note = n.text;
    }

    for (auto& [key, adm] : cohort.admissions) {
        for (CodeKind k : kCodeKinds) {
            auto& v = adm.codes(k);
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        }
    }
    return cohort;
}

Cohort filter_admissions(const Cohort& cohort, size_t min_entries, size_t max_entries) {
    Cohort out;
    out.descriptions = cohort.descriptions;
    for (const auto& [key, adm] : cohort.admissions) {
        if (!adm.has_note()) continue;
        bool ok = true;
        for (CodeKind k : kCodeKinds) {
            size_t n = adm.codes(k).size();
            if (n < min_entries || n > max_entries) {
                ok = false;
                break;
            }
        }
        if (ok) out.admissions.emplace(key, adm);
    }
    return out;
}

namespace {
constexpr const char* kArchiveFormat = "exprag.cohort";
constexpr int kArchiveVersion = 1;
} // namespace

void save_cohort(const Cohort& cohort, std::ostream& out) {
    json header = {{"format", kArchiveFormat},
                   {"version", kArchiveVersion},
                   {"admissions", cohort.admissions.size()}};
    out << header.dump() << '\n';

    for (CodeKind k : kCodeKinds) {
        const auto& table = cohort.descriptions[static_cast<size_t>(k)];
        std::vector<std::pair<std::string, std::string>> sorted(table.begin(), table.end());
        std::sort(sorted.begin(), sorted.end());
        for (const auto& [code, text] : sorted) {
            json j = {{"kind", code_kind_name(k)}, {"code", code}, {"description", text}};
            out << "C" << j.dump() << '\n';
        }
    }

    for (const auto& [key, adm] : cohort.admissions) {
        json j = {{"hadm_id", adm.admission_key},
                  {"subject_id", adm.subject_key},
                  {"diag", adm.diag_codes},
                  {"med", adm.med_codes},
                  {"proc", adm.proc_codes}};
        if (adm.has_note()) j["text"] = adm.note;
        out << "A" << j.dump() << '\n';
    }
}

Cohort load_cohort(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw Error(errc::io, "cohort archive is empty");
    json header = json::parse(line, nullptr, false);
    if (header.is_discarded() || header.value("format", "") != kArchiveFormat)
        throw Error(errc::io, "not a cohort archive");
    if (header.value("version", 0) != kArchiveVersion)
        throw Error(errc::io, "unsupported cohort archive version");

    Cohort cohort;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const char tag = line[0];
        json j = json::parse(line.substr(1), nullptr, false);
        if (j.is_discarded())
            throw Error(errc::io, "corrupt archive line " + std::to_string(line_no));
        if (tag == 'C') {
            auto kind = code_kind_from_name(j.value("kind", ""));
            if (!kind) throw Error(errc::io, "bad code kind at line " + std::to_string(line_no));
            cohort.set_description(*kind, j.value("code", ""), j.value("description", ""));
        } else if (tag == 'A') {
            AdmissionRecord adm;
            adm.admission_key = j.value("hadm_id", "");
            adm.subject_key = j.value("subject_id", "");
            adm.diag_codes = j.value("diag", std::vector<std::string>{});
            adm.med_codes = j.value("med", std::vector<std::string>{});
            adm.proc_codes = j.value("proc", std::vector<std::string>{});
            adm.note = j.value("text", "");
            cohort.admissions.emplace(adm.admission_key, std::move(adm));
        } else {
            throw Error(errc::io, "unknown archive record at line " + std::to_string(line_no));
        }
    }
    return cohort;
}

void save_cohort_file(const Cohort& cohort, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(errc::io, "cannot write " + path);
    save_cohort(cohort, out);
}

Cohort load_cohort_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(errc::missing_input, "cannot read " + path);
    return load_cohort(in);
}

} // namespace exprag
