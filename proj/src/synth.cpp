#include "exprag/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "exprag/errors.hpp"
#include "exprag/rng.hpp"

using json = nlohmann::json;

namespace exprag {

namespace {

// Description vocabulary. Deliberately disjoint from the narrative filler
// pools below so note bodies stay decorrelated from code descriptions.
constexpr std::array<const char*, 16> kDiagAdj = {
    "refractory", "biliary",    "osmotic",   "fibrotic",  "ischemic",  "nodular",
    "stenotic",   "embolic",    "papillary", "sclerotic", "atrophic",  "hyperplastic",
    "necrotic",   "ulcerative", "varicose",  "granular"};
constexpr std::array<const char*, 16> kDiagNoun = {
    "myelopathy",  "angiopathy",  "dermatosis",  "nephrosis",  "colitis",     "neuritis",
    "arthropathy", "vasculitis",  "cardiopathy", "hepatosis",  "pneumonitis", "gastritis",
    "cystopathy",  "enteropathy", "myositis",    "osteopathy"};
constexpr std::array<const char*, 8> kDiagSite = {"lumbar",   "thoracic", "femoral", "radial",
                                                  "hepatic",  "renal",    "gastric", "cervical"};

constexpr std::array<const char*, 18> kDrugOnset = {"vex", "zal", "mor", "tril", "quen", "dal",
                                                    "fex", "nur", "pol", "sarn", "tib",  "lum",
                                                    "gar", "hex", "jor", "kel",  "wex",  "yal"};
constexpr std::array<const char*, 12> kDrugMid = {"ora", "ixi", "uve", "api", "eno", "yla",
                                                  "obi", "ute", "ami", "epa", "ozi", "ula"};
constexpr std::array<const char*, 10> kDrugEnd = {"zine", "mab",  "pril", "olol", "micin",
                                                  "vir",  "tide", "parin", "done", "xate"};
constexpr std::array<int, 8> kDoses = {5, 10, 20, 25, 40, 50, 75, 100};
constexpr std::array<const char*, 3> kForms = {"tablet", "capsule", "solution"};

constexpr std::array<const char*, 14> kProcVerb = {
    "endoscopic", "laparoscopic", "percutaneous", "arthroscopic", "transluminal",
    "stereotactic", "robotic",    "open",         "guided",       "staged",
    "bilateral",  "partial",      "total",        "revision"};
constexpr std::array<const char*, 14> kProcNoun = {
    "resection", "bypass",      "ablation",  "fixation",   "drainage",  "grafting",
    "ligation",  "angioplasty", "fusion",    "osteotomy",  "excision",  "stenting",
    "lavage",    "decompression"};

// Narrative filler vocabulary; no overlap with the description pools.
constexpr std::array<const char*, 24> kFillerWords = {
    "patient",  "remained", "stable",   "overnight", "observed", "tolerated",
    "routine",  "bedside",  "morning",  "evening",   "staff",    "noted",
    "gradual",  "improvement", "comfortable", "resting", "ambulating", "diet",
    "advanced", "vitals",   "within",   "normal",    "limits",   "course"};

std::string diag_description(size_t id) {
    std::string s = kDiagAdj[id % kDiagAdj.size()];
    s += ' ';
    s += kDiagSite[(id / kDiagAdj.size()) % kDiagSite.size()];
    s += ' ';
    s += kDiagNoun[(id / (kDiagAdj.size() * kDiagSite.size())) % kDiagNoun.size()];
    return s;
}

std::string drug_name(size_t id) {
    std::string s = kDrugOnset[id % kDrugOnset.size()];
    s += kDrugMid[(id / kDrugOnset.size()) % kDrugMid.size()];
    s += kDrugEnd[(id / (kDrugOnset.size() * kDrugMid.size())) % kDrugEnd.size()];
    s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

std::string med_description(size_t id) {
    std::string s = drug_name(id);
    s += ' ';
    s += std::to_string(kDoses[id % kDoses.size()]);
    s += " mg ";
    s += kForms[id % kForms.size()];
    return s;
}

std::string proc_description(size_t id) {
    std::string s = kProcVerb[id % kProcVerb.size()];
    s += ' ';
    s += kProcNoun[(id / kProcVerb.size()) % kProcNoun.size()];
    return s;
}

std::string code_string(CodeKind kind, size_t id) {
    const char prefix = kind == CodeKind::Diagnosis ? 'D'
                        : kind == CodeKind::Medication ? 'M'
                                                       : 'P';
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%c%05zu", prefix, id);
    return buf;
}

std::string describe(CodeKind kind, size_t id) {
    switch (kind) {
    case CodeKind::Diagnosis: return diag_description(id);
    case CodeKind::Medication: return med_description(id);
    case CodeKind::Procedure: return proc_description(id);
    }
    return {};
}

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
    return seed ^ (salt + 1) * 0x9e3779b97f4a7c15ULL;
}

std::string filler_paragraph(Rng& rng, size_t sentences) {
    std::string out;
    for (size_t s = 0; s < sentences; ++s) {
        const size_t len = 6 + rng.uniform(6);
        for (size_t w = 0; w < len; ++w) {
            std::string word = kFillerWords[rng.uniform(kFillerWords.size())];
            if (w == 0) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
            if (w) out.push_back(' ');
            out += word;
        }
        out += ".";
        if (s + 1 < sentences) out.push_back(' ');
    }
    return out;
}

size_t code_id(const std::string& code) { return std::stoul(code.substr(1)); }

} // namespace

void SynthParams::validate() const {
    if (n_subjects == 0) throw Error(errc::bad_param, "n_subjects must be positive");
    if (n_clusters == 0 || n_clusters > n_subjects)
        throw Error(errc::bad_param, "n_clusters must be in [1, n_subjects]");
    if (codes_per_kind.first < 3 || codes_per_kind.second > 40 ||
        codes_per_kind.first > codes_per_kind.second)
        throw Error(errc::bad_param,
                    "codes_per_kind must lie within the cohort filter bounds [3, 40]");
    if (cluster_overlap < 0.0 || cluster_overlap > 1.0)
        throw Error(errc::bad_param, "cluster_overlap must be in [0, 1]");
    if (second_admission_rate < 0.0 || second_admission_rate > 1.0)
        throw Error(errc::bad_param, "second_admission_rate must be in [0, 1]");
}

std::string gen_note(const AdmissionRecord& adm, const Cohort& cohort, NoteStyle style,
                     uint64_t note_seed) {
    Rng rng(note_seed);
    const bool sentinel = style == NoteStyle::Sentinel;

    auto body = [&](int section_ix) {
        if (sentinel) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "SENTINEL %s sec%d n%016llx.",
                          adm.admission_key.c_str(), section_ix,
                          static_cast<unsigned long long>(rng.next_u64()));
            return std::string(buf);
        }
        return filler_paragraph(rng, 2 + rng.uniform(3));
    };

    std::string note;
    note += "Patient Demography:\n" + body(0) + "\n\n";
    note += "Chief Complaint:\n" + body(1) + "\n\n";
    note += "Physical Exam:\n" + body(2) + "\n\n";
    note += "Treatment Plan:\n" + body(3) + "\n\n";
    note += "Brief Hospital Course:\n" + body(4) + "\n\n";

    // Discharge plan: prose summary over the full code sets, then the gold
    // lists. Gold bullets cover the first few codes of each kind so the rest
    // remain usable as EHR distractors.
    const size_t gold_diag = std::min<size_t>(3, adm.diag_codes.size());
    const size_t gold_med = std::min<size_t>(3, adm.med_codes.size());

    note += "Discharge Summary:\n";
    if (sentinel) note += body(5) + "\n";
    note += "Hospitalization addressed";
    for (size_t i = 0; i < adm.diag_codes.size(); ++i) {
        note += i ? ", " : " ";
        note += cohort.description(CodeKind::Diagnosis, adm.diag_codes[i]);
    }
    note += ". Prescriptions on file include";
    for (size_t i = 0; i < adm.med_codes.size(); ++i) {
        note += i ? ", " : " ";
        note += cohort.description(CodeKind::Medication, adm.med_codes[i]);
    }
    note += ".\n\n";

    note += "Discharge Diagnosis:\n";
    for (size_t i = 0; i < gold_diag; ++i)
        note += std::to_string(i + 1) + ". " +
                cohort.description(CodeKind::Diagnosis, adm.diag_codes[i]) + "\n";
    note += "\n";

    note += "Discharge Medications:\n";
    for (size_t i = 0; i < gold_med; ++i)
        note += std::to_string(i + 1) + ". " +
                cohort.description(CodeKind::Medication, adm.med_codes[i]) + "\n";
    note += "\n";

    note += "Discharge Instructions:\n";
    if (sentinel) note += body(6) + "\n";
    const std::string drug0 =
        adm.med_codes.empty() ? std::string("rest") : drug_name(code_id(adm.med_codes[0]));
    const std::string drug1 = adm.med_codes.size() > 1 ? drug_name(code_id(adm.med_codes[1]))
                                                       : drug0;
    note += "- Take " + drug0 + " each morning with food.\n";
    note += "- Continue " + drug1 + " until your follow up visit.\n";
    note += "- Avoid heavy lifting for two weeks.\n";
    note += "- Call the clinic if fever or worsening pain develops.\n";
    if (!sentinel && rng.chance(0.5))
        note += "- Keep the incision site clean and dry.\n";
    return note;
}

SynthCohort gen_cohort(const SynthParams& params) {
    params.validate();
    SynthCohort out;
    Cohort& cohort = out.cohort;

    std::array<size_t, 3> vocab = params.vocab_per_kind;
    for (size_t& v : vocab) {
        if (v == 0) v = std::max<size_t>(params.n_clusters * 80, 160);
        if (v / params.n_clusters < params.codes_per_kind.second)
            throw Error(errc::bad_param,
                        "vocab too small: cluster pools must hold codes_per_kind.max codes");
    }

    // register descriptions for every vocabulary code
    for (CodeKind kind : kCodeKinds) {
        const size_t ki = static_cast<size_t>(kind);
        for (size_t id = 0; id < vocab[ki]; ++id)
            cohort.set_description(kind, code_string(kind, id), describe(kind, id));
    }

    struct PendingAdmission {
        std::string subject;
        std::string admission;
        size_t cluster;
        uint64_t salt;
    };
    std::vector<PendingAdmission> pending;
    size_t admission_counter = 0;
    for (size_t i = 0; i < params.n_subjects; ++i) {
        char skey[32];
        std::snprintf(skey, sizeof(skey), "S%06zu", i);
        const size_t cluster = i % params.n_clusters;
        Rng subject_rng(mix_seed(params.seed, 0xabcd0000 + i));
        const size_t admissions =
            1 + (subject_rng.uniform01() < params.second_admission_rate ? 1 : 0);
        for (size_t a = 0; a < admissions; ++a) {
            char hkey[32];
            std::snprintf(hkey, sizeof(hkey), "H%06zu", admission_counter++);
            pending.push_back({skey, hkey, cluster, static_cast<uint64_t>(admission_counter)});
        }
    }

    for (const PendingAdmission& p : pending) {
        AdmissionRecord adm;
        adm.subject_key = p.subject;
        adm.admission_key = p.admission;
        Rng rng(mix_seed(params.seed, p.salt));

        for (CodeKind kind : kCodeKinds) {
            const size_t ki = static_cast<size_t>(kind);
            const size_t pool = vocab[ki] / params.n_clusters;
            const size_t span = params.codes_per_kind.second - params.codes_per_kind.first + 1;
            const size_t want = params.codes_per_kind.first + rng.uniform(span);

            std::vector<std::string> codes;
            codes.reserve(want);
            size_t attempts = 0;
            while (codes.size() < want && attempts < want * 40) {
                ++attempts;
                size_t id;
                // cluster pools interleave ids (id mod n_clusters == cluster)
                // so code order carries no cluster bias
                if (rng.uniform01() < params.cluster_overlap)
                    id = p.cluster + params.n_clusters * rng.uniform(pool);
                else
                    id = rng.uniform(vocab[ki]);
                std::string code = code_string(kind, id);
                if (std::find(codes.begin(), codes.end(), code) == codes.end())
                    codes.push_back(std::move(code));
            }
            std::sort(codes.begin(), codes.end());
            adm.codes(kind) = std::move(codes);
        }

        adm.note = gen_note(adm, cohort, params.note_style, mix_seed(params.seed, p.salt ^ 0x5a5a));
        out.cluster_of.emplace(adm.admission_key, p.cluster);
        cohort.admissions.emplace(adm.admission_key, std::move(adm));
    }
    return out;
}

SynthFiles render_files(const SynthCohort& synth) {
    SynthFiles files;
    files.diagnoses_csv = "subject_id,hadm_id,code,long_title\n";
    files.medications_csv = "subject_id,hadm_id,code,drug\n";
    files.procedures_csv = "subject_id,hadm_id,code,long_title\n";

    for (const auto& [key, adm] : synth.cohort.admissions) {
        auto emit = [&](std::string& table, CodeKind kind) {
            for (const std::string& code : adm.codes(kind)) {
                table += adm.subject_key + ',' + adm.admission_key + ',' + code + ',' +
                         synth.cohort.description(kind, code) + '\n';
            }
        };
        emit(files.diagnoses_csv, CodeKind::Diagnosis);
        emit(files.medications_csv, CodeKind::Medication);
        emit(files.procedures_csv, CodeKind::Procedure);
        json note = {{"hadm_id", adm.admission_key},
                     {"subject_id", adm.subject_key},
                     {"text", adm.note}};
        files.notes_jsonl += note.dump() + '\n';
    }
    return files;
}

void write_files(const SynthCohort& synth, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const SynthFiles files = render_files(synth);
    auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
        if (!out) throw Error(errc::io, "cannot write " + name + " under " + dir);
        out << content;
    };
    write("diagnoses.csv", files.diagnoses_csv);
    write("medications.csv", files.medications_csv);
    write("procedures.csv", files.procedures_csv);
    write("notes.jsonl", files.notes_jsonl);
}

} // namespace exprag
