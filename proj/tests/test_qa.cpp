#include <doctest.h>

#include <set>
#include <sstream>

#include "exprag/errors.hpp"
#include "exprag/qa.hpp"
#include "exprag/synth.hpp"
#include "exprag/text.hpp"

using namespace exprag;

namespace {

Cohort small_cohort() {
    Cohort c;
    AdmissionRecord adm;
    adm.admission_key = "H1";
    adm.subject_key = "S1";
    adm.diag_codes = {"D1", "D2", "D3"};
    adm.med_codes = {"M1", "M2"};
    adm.proc_codes = {"P1"};
    adm.note =
        "Patient Demography:\nMale, 58.\n\n"
        "Chief Complaint:\nHeadache for two weeks.\n\n"
        "Brief Hospital Course:\nObserved and treated.\n\n"
        "Discharge Diagnosis:\n1. Hypertension\n\n"
        "Discharge Medications:\n1. Amlodipine 5 mg PO daily\n\n"
        "Discharge Instructions:\n- Take amlodipine every morning.\n- Avoid salty food.\n"
        "- Walk twenty minutes daily.\n- Call the clinic if dizzy.\n";
    c.admissions.emplace("H1", adm);
    c.set_description(CodeKind::Diagnosis, "D1", "Hypertension");
    c.set_description(CodeKind::Diagnosis, "D2", "Anemia");
    c.set_description(CodeKind::Diagnosis, "D3", "Gout");
    c.set_description(CodeKind::Medication, "M1", "Amlodipine 5 mg tablet");
    c.set_description(CodeKind::Medication, "M2", "Lisinopril 10 mg tablet");
    return c;
}

SynthParams qa_synth_params(uint64_t seed, size_t subjects = 40) {
    SynthParams p;
    p.seed = seed;
    p.n_subjects = subjects;
    p.n_clusters = 2;
    p.codes_per_kind = {12, 24}; // enough non-gold codes to act as distractors
    return p;
}

} // namespace

TEST_CASE("multi-select item keeps gold and excludes overlapping candidates") {
    const Cohort cohort = small_cohort();
    const AdmissionRecord& adm = cohort.at("H1");
    const SegmentedNote seg = segment_note(adm.note);

    GenParams params;
    params.n_options_multi = 3;
    Rng rng(1);
    const QAItem item =
        gen_multiselect_item(adm, seg, TaskKind::DiagnosisInference, cohort, params, rng);

    REQUIRE(item.options.size() == 3);
    CHECK(item.mode == AnswerMode::MultiSelect);
    CHECK(item.gold_letters.size() == 1);

    std::set<std::string> texts;
    for (const QAOption& o : item.options) texts.insert(o.text);
    CHECK(texts == std::set<std::string>{"hypertension", "anemia", "gout"});
    for (const QAOption& o : item.options) {
        if (o.text == "hypertension")
            CHECK(o.source == OptionSource::Gold);
        else
            CHECK(o.source == OptionSource::EhrDistractor);
    }
    CHECK(item.background.find("Chief Complaint") != std::string::npos);
    CHECK(item.background.find("Discharge") == std::string::npos);
}

TEST_CASE("all-overlapping candidates raise insufficient-distractors") {
    Cohort cohort = small_cohort();
    // every EHR description now collides with the single gold item
    cohort.descriptions[static_cast<size_t>(CodeKind::Diagnosis)].clear();
    for (const char* code : {"D1", "D2", "D3"})
        cohort.set_description(CodeKind::Diagnosis, code, "Hypertension");
    const AdmissionRecord& adm = cohort.at("H1");
    const SegmentedNote seg = segment_note(adm.note);
    GenParams params;
    params.n_options_multi = 3;
    Rng rng(1);
    try {
        gen_multiselect_item(adm, seg, TaskKind::DiagnosisInference, cohort, params, rng);
        FAIL("expected insufficient-distractors");
    } catch (const Error& e) {
        CHECK(e.code() == errc::insufficient_distractors);
    }
}

TEST_CASE("medication distractors compare on the drug-name token") {
    const Cohort cohort = small_cohort();
    const AdmissionRecord& adm = cohort.at("H1");
    const SegmentedNote seg = segment_note(adm.note);
    GenParams params;
    params.n_options_multi = 2; // 1 gold + 1 distractor
    Rng rng(3);
    const QAItem item =
        gen_multiselect_item(adm, seg, TaskKind::MedicationInference, cohort, params, rng);
    REQUIRE(item.options.size() == 2);
    // amlodipine (gold, name-level match) excluded from candidates; lisinopril remains
    bool saw_lisinopril = false;
    for (const QAOption& o : item.options)
        if (o.source == OptionSource::EhrDistractor) {
            CHECK(o.text.find("lisinopril") != std::string::npos);
            saw_lisinopril = true;
        }
    CHECK(saw_lisinopril);
}

TEST_CASE("instruction item has one gold and distinct permuted distractors") {
    const Cohort cohort = small_cohort();
    const AdmissionRecord& adm = cohort.at("H1");
    const SegmentedNote seg = segment_note(adm.note);
    GenParams params;
    Rng rng(7);
    DefaultPermuter permuter;
    const QAItem item = gen_instruction_item(adm, seg, cohort, params, rng, permuter);

    CHECK(item.mode == AnswerMode::SingleSelect);
    REQUIRE(item.options.size() == 4);
    CHECK(item.gold_letters.size() == 1);

    std::set<std::string> normalized;
    for (const QAOption& o : item.options) CHECK(normalized.insert(normalize_text(o.text)).second);
    size_t gold_count = 0;
    for (const QAOption& o : item.options)
        if (o.source == OptionSource::Gold) {
            ++gold_count;
            CHECK(item.gold_letters.count(o.letter) == 1);
            CHECK(o.text.find("Take amlodipine every morning") != std::string::npos);
        } else {
            CHECK(o.source == OptionSource::PermutedDistractor);
        }
    CHECK(gold_count == 1);
}

TEST_CASE("too few instruction bullets raise too-few-key-points") {
    Cohort cohort = small_cohort();
    AdmissionRecord adm = cohort.at("H1");
    adm.note = "Chief Complaint:\nCough.\n\nDischarge Instructions:\n- Rest.\n- Hydrate.\n";
    cohort.admissions["H1"] = adm;
    const SegmentedNote seg = segment_note(adm.note);
    GenParams params; // min_bullets = 4
    Rng rng(1);
    DefaultPermuter permuter;
    try {
        gen_instruction_item(adm, seg, cohort, params, rng, permuter);
        FAIL("expected too-few-key-points");
    } catch (const Error& e) {
        CHECK(e.code() == errc::too_few_key_points);
    }
}

TEST_CASE("items are byte-deterministic for a fixed seed") {
    const Cohort cohort = small_cohort();
    const AdmissionRecord& adm = cohort.at("H1");
    const SegmentedNote seg = segment_note(adm.note);
    GenParams params;
    params.n_options_multi = 3;

    auto render = [&](uint64_t seed) {
        Rng rng(seed);
        const QAItem item =
            gen_multiselect_item(adm, seg, TaskKind::DiagnosisInference, cohort, params, rng);
        std::ostringstream out;
        write_dataset(out, {item});
        return out.str();
    };
    CHECK(render(5) == render(5));
    CHECK(render(5) != render(6)); // the shuffle actually depends on the seed
}

TEST_CASE("build_dataset fills quotas deterministically and reports skips") {
    const SynthCohort synth = gen_cohort(qa_synth_params(42));
    GenParams params;
    params.seed = 9;
    params.counts = {10, 10, 10};

    const Dataset first = build_dataset(synth.cohort, params);
    CHECK(first.items.size() == 30);
    CHECK(first.manifest.generated == std::array<size_t, 3>{10, 10, 10});

    std::ostringstream bytes1, bytes2;
    write_dataset(bytes1, first.items);
    write_dataset(bytes2, build_dataset(synth.cohort, params).items);
    CHECK(bytes1.str() == bytes2.str());

    SUBCASE("zero counts produce an empty dataset with a valid manifest") {
        GenParams zero;
        const Dataset empty = build_dataset(synth.cohort, zero);
        CHECK(empty.items.empty());
        CHECK(empty.manifest.to_json().find("generated") != std::string::npos);
    }

    SUBCASE("unreachable quotas are reported as a shortfall, not an error") {
        GenParams greedy;
        greedy.counts = {10000, 0, 0};
        const Dataset d = build_dataset(synth.cohort, greedy);
        CHECK(d.manifest.generated[0] < 10000);
        CHECK(d.items.size() == d.manifest.generated[0]);
    }
}

TEST_CASE("dataset soundness and leakage on a sentinel cohort") {
    SynthParams sp = qa_synth_params(17, 60);
    sp.note_style = NoteStyle::Sentinel;
    const SynthCohort synth = gen_cohort(sp);
    GenParams params;
    params.seed = 4;
    params.counts = {15, 15, 15};
    const Dataset dataset = build_dataset(synth.cohort, params);
    REQUIRE(dataset.items.size() == 45);

    for (const QAItem& item : dataset.items) {
        // soundness: gold letters map to gold options and to extracted gold text
        const SegmentedNote seg = segment_note(synth.cohort.at(item.admission_key).note);
        CHECK(!item.gold_letters.empty());
        std::set<char> letters;
        for (const QAOption& o : item.options) letters.insert(o.letter);
        for (char g : item.gold_letters) CHECK(letters.count(g) == 1);

        std::set<std::string> gold_norm, distractor_norm;
        for (const QAOption& o : item.options) {
            if (o.source == OptionSource::Gold)
                gold_norm.insert(normalize_text(o.text));
            else
                distractor_norm.insert(normalize_text(o.text));
        }
        for (const std::string& d : distractor_norm) CHECK(gold_norm.count(d) == 0);

        if (item.task != TaskKind::InstructionInference) {
            std::set<std::string> extracted;
            for (const GoldItem& g : extract_gold(seg, item.task)) extracted.insert(g.text);
            for (const QAOption& o : item.options)
                if (o.source == OptionSource::Gold) CHECK(extracted.count(o.text) == 1);
        }

        // mode matches task
        if (item.task == TaskKind::InstructionInference)
            CHECK(item.mode == AnswerMode::SingleSelect);
        else
            CHECK(item.mode == AnswerMode::MultiSelect);

        // leakage: the background shares no sentence with any discharge-plan
        // section (sentinel sentences are unique per section)
        std::set<std::string> plan_sentences;
        for (SectionKind k : {SectionKind::DischargeSummary,
                              SectionKind::PostDischargeInstructions}) {
            const std::string text = seg.section_text(k);
            for (const Span& s : split_sentences(text))
                plan_sentences.insert(trim(text.substr(s.begin, s.size())));
        }
        for (const Span& s : split_sentences(item.background)) {
            const std::string sentence = trim(item.background.substr(s.begin, s.size()));
            CHECK(plan_sentences.count(sentence) == 0);
        }
    }
}

TEST_CASE("dataset JSONL round-trips") {
    const SynthCohort synth = gen_cohort(qa_synth_params(23, 10));
    GenParams params;
    params.counts = {3, 3, 3};
    const Dataset dataset = build_dataset(synth.cohort, params);
    REQUIRE(!dataset.items.empty());

    std::ostringstream out;
    write_dataset(out, dataset.items);
    std::istringstream in(out.str());
    const auto loaded = read_dataset(in);
    REQUIRE(loaded.size() == dataset.items.size());
    for (size_t i = 0; i < loaded.size(); ++i) {
        CHECK(loaded[i].question_id == dataset.items[i].question_id);
        CHECK(loaded[i].task == dataset.items[i].task);
        CHECK(loaded[i].mode == dataset.items[i].mode);
        CHECK(loaded[i].background == dataset.items[i].background);
        CHECK(loaded[i].gold_letters == dataset.items[i].gold_letters);
        REQUIRE(loaded[i].options.size() == dataset.items[i].options.size());
        for (size_t o = 0; o < loaded[i].options.size(); ++o) {
            CHECK(loaded[i].options[o].letter == dataset.items[i].options[o].letter);
            CHECK(loaded[i].options[o].text == dataset.items[i].options[o].text);
            CHECK(loaded[i].options[o].source == dataset.items[i].options[o].source);
        }
    }
}
