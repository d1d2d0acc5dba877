#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "exprag/cohort.hpp"
#include "exprag/errors.hpp"

using namespace exprag;

namespace {

std::vector<CodeEntry> parse_csv(const std::string& text, CodeKind kind,
                                 ParseStats* stats = nullptr) {
    std::istringstream in(text);
    return parse_code_table(in, kind, ParseOptions{}, stats);
}

} // namespace

TEST_CASE("parse_code_table normalizes ICD codes and keeps row order") {
    ParseStats stats;
    const auto entries = parse_csv(
        "subject_id,hadm_id,code,long_title\n"
        "S1,H1,E11.9,diabetes\n"
        "S1,H1,I10,hypertension\n",
        CodeKind::Diagnosis, &stats);
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].code == "E119"); // dots stripped
    CHECK(entries[1].code == "I10");
    CHECK(entries[0].description == "diabetes");
    CHECK(stats.rows == 2);
}

TEST_CASE("parse_code_table header-only file yields empty sequence") {
    CHECK(parse_csv("subject_id,hadm_id,code\n", CodeKind::Diagnosis).empty());
}

TEST_CASE("parse_code_table reports missing columns and malformed rows") {
    try {
        parse_csv("subject_id,code\nS1,X\n", CodeKind::Diagnosis);
        FAIL("expected missing-column");
    } catch (const Error& e) {
        CHECK(e.code() == errc::missing_column);
        CHECK(std::string(e.what()).find("hadm_id") != std::string::npos);
    }
    try {
        parse_csv("subject_id,hadm_id,code\nS1,H1,X\nS1,H1\n", CodeKind::Diagnosis);
        FAIL("expected malformed-row");
    } catch (const Error& e) {
        CHECK(e.code() == errc::malformed_row);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("parse_code_table skips empty code fields with a warning counter") {
    ParseStats stats;
    const auto entries = parse_csv("subject_id,hadm_id,code\nS1,H1,\nS1,H1,I10\n",
                                   CodeKind::Diagnosis, &stats);
    CHECK(entries.size() == 1);
    CHECK(stats.skipped_empty_code == 1);
}

TEST_CASE("medication codes keep embedded dots, ICD codes lose them") {
    CHECK(normalize_code(" e11.9 ", CodeKind::Diagnosis) == "E119");
    CHECK(normalize_code("0071.0155", CodeKind::Medication) == "0071.0155");
    CHECK(normalize_code("02hv33z", CodeKind::Procedure) == "02HV33Z");
}

TEST_CASE("parse_notes reads JSONL and preserves text byte-exactly") {
    std::istringstream in(
        R"({"hadm_id":"H1","subject_id":"S1","text":"line1\nline2\t end"})"
        "\n");
    const auto notes = parse_notes(in);
    REQUIRE(notes.size() == 1);
    CHECK(notes[0].admission_key == "H1");
    CHECK(notes[0].text == "line1\nline2\t end");

    std::istringstream empty("");
    CHECK(parse_notes(empty).empty());

    std::istringstream bad(R"({"hadm_id":"H1","subject_id":"S1"})"
                           "\n");
    try {
        parse_notes(bad);
        FAIL("expected malformed-line");
    } catch (const Error& e) {
        CHECK(e.code() == errc::malformed_line);
    }
}

namespace {

CodeEntry entry(const std::string& subj, const std::string& adm, CodeKind kind,
                const std::string& code) {
    return {subj, adm, kind, code, ""};
}

AdmissionRecord make_admission(const std::string& key, size_t nd, size_t nm, size_t np,
                               bool with_note) {
    AdmissionRecord adm;
    adm.subject_key = "S" + key;
    adm.admission_key = key;
    auto fill = [&](std::vector<std::string>& v, size_t n, const char* prefix) {
        for (size_t i = 0; i < n; ++i) v.push_back(prefix + std::to_string(i));
        std::sort(v.begin(), v.end());
    };
    fill(adm.diag_codes, nd, "D");
    fill(adm.med_codes, nm, "M");
    fill(adm.proc_codes, np, "P");
    if (with_note) adm.note = "note";
    return adm;
}

Cohort cohort_of(std::vector<AdmissionRecord> admissions) {
    Cohort c;
    for (AdmissionRecord& a : admissions) c.admissions.emplace(a.admission_key, std::move(a));
    return c;
}

} // namespace

TEST_CASE("build_cohort groups, deduplicates and joins notes") {
    const std::vector<CodeEntry> diag = {entry("S1", "H1", CodeKind::Diagnosis, "D1"),
                                         entry("S1", "H1", CodeKind::Diagnosis, "D2"),
                                         entry("S1", "H1", CodeKind::Diagnosis, "D1")};
    const std::vector<NoteRecord> notes = {{"H2", "S2", "note body"}};
    const Cohort cohort = build_cohort(diag, {}, {}, notes);
    REQUIRE(cohort.size() == 2);
    CHECK(cohort.at("H1").diag_codes == std::vector<std::string>{"D1", "D2"});
    CHECK_FALSE(cohort.at("H1").has_note());
    CHECK(cohort.at("H2").diag_codes.empty());
    CHECK(cohort.at("H2").note == "note body");
}

TEST_CASE("build_cohort rejects an admission claimed by two subjects") {
    const std::vector<CodeEntry> diag = {entry("S1", "H1", CodeKind::Diagnosis, "D1"),
                                         entry("S2", "H1", CodeKind::Diagnosis, "D2")};
    try {
        build_cohort(diag, {}, {}, {});
        FAIL("expected conflicting-subject");
    } catch (const Error& e) {
        CHECK(e.code() == errc::conflicting_subject);
    }
}

TEST_CASE("filter_admissions enforces the inclusive 3-40 band and the note requirement") {
    const Cohort cohort = cohort_of({
        make_admission("H1", 2, 5, 5, true),     // too few diagnoses
        make_admission("H2", 3, 3, 3, true),     // boundary: retained
        make_admission("H3", 10, 10, 10, false), // no note
        make_admission("H4", 40, 40, 40, true),  // boundary: retained
        make_admission("H5", 41, 5, 5, true),    // too many diagnoses
    });
    const Cohort kept = filter_admissions(cohort);
    CHECK(kept.size() == 2);
    CHECK(kept.contains("H2"));
    CHECK(kept.contains("H4"));

    SUBCASE("idempotent") {
        const Cohort again = filter_admissions(kept);
        CHECK(again.size() == kept.size());
        for (const auto& [key, adm] : again.admissions) CHECK(kept.contains(key));
    }

    SUBCASE("originals unmodified") {
        CHECK(cohort.size() == 5);
        CHECK(cohort.at("H1").diag_codes.size() == 2);
    }
}

TEST_CASE("unknown admission lookup raises unknown-admission") {
    const Cohort cohort = cohort_of({make_admission("H1", 3, 3, 3, true)});
    try {
        cohort.at("H9");
        FAIL("expected unknown-admission");
    } catch (const Error& e) {
        CHECK(e.code() == errc::unknown_admission);
    }
}

TEST_CASE("cohort archive round-trips byte-identically") {
    Cohort cohort =
        cohort_of({make_admission("H1", 3, 4, 5, true), make_admission("H2", 5, 5, 5, false)});
    cohort.set_description(CodeKind::Diagnosis, "D0", "first diagnosis");
    cohort.set_description(CodeKind::Medication, "M1", "some drug 5 mg");

    std::ostringstream first;
    save_cohort(cohort, first);
    std::istringstream reload(first.str());
    const Cohort loaded = load_cohort(reload);
    std::ostringstream second;
    save_cohort(loaded, second);

    CHECK(first.str() == second.str());
    CHECK(loaded.size() == cohort.size());
    CHECK(loaded.at("H1").note == "note");
    CHECK(loaded.description(CodeKind::Diagnosis, "D0") == "first diagnosis");
    CHECK(loaded.description(CodeKind::Diagnosis, "D9") == "D9"); // fallback to the code
}

TEST_CASE("load_cohort rejects foreign files") {
    std::istringstream junk("not an archive\n");
    CHECK_THROWS_AS(load_cohort(junk), Error);
}
