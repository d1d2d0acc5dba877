#include <doctest.h>

#include <cmath>
#include <sstream>

#include "exprag/errors.hpp"
#include "exprag/ranker.hpp"
#include "exprag/rng.hpp"
#include "exprag/synth.hpp"

using namespace exprag;

namespace {

std::vector<std::string> codes(std::initializer_list<const char*> xs) {
    std::vector<std::string> v;
    for (const char* x : xs) v.emplace_back(x);
    std::sort(v.begin(), v.end());
    return v;
}

AdmissionRecord adm(const std::string& key, const std::string& subject,
                    std::vector<std::string> d, std::vector<std::string> m,
                    std::vector<std::string> p, const char* note = "note") {
    AdmissionRecord a;
    a.admission_key = key;
    a.subject_key = subject;
    a.diag_codes = std::move(d);
    a.med_codes = std::move(m);
    a.proc_codes = std::move(p);
    a.note = note;
    return a;
}

Cohort cohort_of(std::vector<AdmissionRecord> admissions) {
    Cohort c;
    for (AdmissionRecord& a : admissions) c.admissions.emplace(a.admission_key, std::move(a));
    return c;
}

} // namespace

TEST_CASE("jaccard fixtures") {
    CHECK(jaccard(codes({"X", "Y", "Z"}), codes({"X", "Y", "Z"})) == 1.0);
    CHECK(jaccard(codes({"X"}), codes({"Y"})) == 0.0);
    CHECK(jaccard(codes({"A", "B", "C"}), codes({"B", "C", "D"})) == 0.5); // 2/4
    CHECK(jaccard({}, {}) == 0.0);                                          // J(∅,∅) = 0
    CHECK(jaccard({}, codes({"N1"})) == 0.0);
}

TEST_CASE("modality_similarity picks the right code sets") {
    const AdmissionRecord p = adm("H1", "S1", codes({"A", "B"}), {}, codes({"P1", "P2", "P3"}));
    const AdmissionRecord q = adm("H2", "S2", codes({"A", "B"}), codes({"N1"}), codes({"P3", "P4"}));
    CHECK(modality_similarity(p, q, CodeKind::Diagnosis) == 1.0);
    CHECK(modality_similarity(p, q, CodeKind::Medication) == 0.0); // empty vs non-empty
    CHECK(modality_similarity(p, q, CodeKind::Procedure) == 0.25); // 1/4
}

TEST_CASE("combined_similarity applies raw weights") {
    const SimilarityScore parts{0.6, 0.3, 0.0, 0.0};
    CHECK(combined_similarity(parts, SimilarityWeights::uniform()) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(combined_similarity(parts, {1.0, 0.0, 0.0}) == 0.6); // task-focused
    CHECK(combined_similarity({0.0, 0.0, 0.0, 0.0}, {2.0, 5.0, 1.0}) == 0.0);

    SUBCASE("weight presets") {
        CHECK(SimilarityWeights::task_focused(CodeKind::Diagnosis).diag == 1.0);
        CHECK(SimilarityWeights::task_focused(CodeKind::Diagnosis).med == 0.0);
        const auto comp = SimilarityWeights::complementary(CodeKind::Diagnosis);
        CHECK(comp.diag == 0.0);
        CHECK(comp.med == 1.0);
        CHECK(comp.proc == 1.0); // weights sum to 2, used raw
    }

    SUBCASE("invalid weights rejected") {
        CHECK_THROWS_AS(SimilarityWeights({-0.1, 0.5, 0.5}).validate(), Error);
        CHECK_THROWS_AS(SimilarityWeights({0.0, 0.0, 0.0}).validate(), Error);
    }
}

TEST_CASE("score symmetry") {
    const AdmissionRecord p =
        adm("H1", "S1", codes({"A", "B", "C"}), codes({"M1", "M2"}), codes({"P1"}));
    const AdmissionRecord q =
        adm("H2", "S2", codes({"B", "C", "D"}), codes({"M2"}), codes({"P2"}));
    const SimilarityWeights w{0.2, 0.5, 0.3};
    CHECK(score_pair(p, q, w).tau == score_pair(q, p, w).tau);
}

TEST_CASE("build_code_index postings and set sizes are consistent") {
    const Cohort cohort = cohort_of({
        adm("H1", "S1", codes({"D1", "D2"}), codes({"M1"}), codes({"P1"})),
        adm("H2", "S2", codes({"D1"}), codes({"M2"}), codes({"P1", "P2"})),
    });
    const CodeIndex index = CodeIndex::build(cohort);
    CHECK(index.admission_count() == 2);
    CHECK(index.posting_count(CodeKind::Diagnosis, "D1") == 2);
    CHECK(index.posting_count(CodeKind::Diagnosis, "D2") == 1);
    CHECK(index.posting_count(CodeKind::Diagnosis, "D9") == 0);
    CHECK(index.set_size(CodeKind::Procedure, "H2") == 2);

    SUBCASE("empty cohort") {
        const CodeIndex empty = CodeIndex::build(Cohort{});
        CHECK(empty.admission_count() == 0);
    }
}

TEST_CASE("index set sizes match every admission on a synthetic cohort") {
    SynthParams params;
    params.seed = 11;
    params.n_subjects = 500;
    params.n_clusters = 3;
    params.note_style = NoteStyle::Sentinel;
    const SynthCohort synth = gen_cohort(params);
    const CodeIndex index = CodeIndex::build(synth.cohort);
    for (const auto& [key, a] : synth.cohort.admissions)
        for (CodeKind kind : kCodeKinds)
            CHECK(index.set_size(kind, key) == a.codes(kind).size());
}

TEST_CASE("rank_top_k orders by similarity with forced winner") {
    const Cohort cohort = cohort_of({
        adm("H0", "S0", codes({"D1", "D2"}), codes({"M1"}), codes({"P1"})),
        adm("H1", "S1", codes({"D1", "D2"}), codes({"M1"}), codes({"P1"})), // identical
        adm("H2", "S2", codes({"X1"}), codes({"Y1"}), codes({"Z1"})),       // disjoint
    });
    const CodeIndex index = CodeIndex::build(cohort);
    RankParams params;
    params.k = 1;
    const auto top = rank_top_k(index, cohort, "H0", params);
    REQUIRE(top.size() == 1);
    CHECK(top[0].admission_key == "H1");
    CHECK(top[0].score.tau == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rank_top_k rejects unknown queries") {
    const Cohort cohort = cohort_of({adm("H0", "S0", codes({"D1"}), {}, {})});
    const CodeIndex index = CodeIndex::build(cohort);
    try {
        rank_top_k(index, cohort, "H404", RankParams{});
        FAIL("expected unknown-admission");
    } catch (const Error& e) {
        CHECK(e.code() == errc::unknown_admission);
    }
    CHECK_THROWS_AS(brute_force_rank(cohort, "H404", RankParams{}), Error);
}

TEST_CASE("self is excluded; same-subject exclusion honours the flag") {
    const Cohort cohort = cohort_of({
        adm("H0", "S0", codes({"D1"}), codes({"M1"}), codes({"P1"})),
        adm("H1", "S0", codes({"D1"}), codes({"M1"}), codes({"P1"})), // same subject
        adm("H2", "S2", codes({"D1"}), codes({"M9"}), codes({"P9"})),
    });
    const CodeIndex index = CodeIndex::build(cohort);
    RankParams params;
    params.k = 10;

    const auto excluded = rank_top_k(index, cohort, "H0", params);
    REQUIRE(excluded.size() == 1);
    CHECK(excluded[0].admission_key == "H2");

    params.exclude_same_subject = false;
    const auto included = rank_top_k(index, cohort, "H0", params);
    REQUIRE(included.size() == 2);
    CHECK(included[0].admission_key == "H1");

    SUBCASE("single-admission cohort ranks nothing") {
        const Cohort lone = cohort_of({adm("H0", "S0", codes({"D1"}), {}, {})});
        CHECK(brute_force_rank(lone, "H0", RankParams{}).empty());
    }
}

TEST_CASE("oracle equivalence on a synthetic cohort across weight settings") {
    SynthParams sp;
    sp.seed = 7;
    sp.n_subjects = 300;
    sp.n_clusters = 2;
    sp.second_admission_rate = 0.15;
    sp.note_style = NoteStyle::Sentinel;
    const SynthCohort synth = gen_cohort(sp);
    const CodeIndex index = CodeIndex::build(synth.cohort);

    std::vector<std::string> keys;
    for (const auto& [key, a] : synth.cohort.admissions) keys.push_back(key);

    const std::vector<SimilarityWeights> settings = {
        SimilarityWeights::uniform(),
        SimilarityWeights::task_focused(CodeKind::Diagnosis),
        SimilarityWeights::complementary(CodeKind::Medication),
        {0.9, 0.05, 0.05},
    };

    Rng rng(99);
    for (int trial = 0; trial < 12; ++trial) {
        const std::string& query = keys[rng.uniform(keys.size())];
        for (const SimilarityWeights& w : settings) {
            RankParams params;
            params.k = 15;
            params.weights = w;
            params.exclude_same_subject = (trial % 2) == 0;
            const auto fast = rank_top_k(index, synth.cohort, query, params);
            const auto slow = brute_force_rank(synth.cohort, query, params);
            REQUIRE(fast.size() == slow.size());
            for (size_t i = 0; i < fast.size(); ++i) {
                CHECK(fast[i].admission_key == slow[i].admission_key);
                CHECK(fast[i].score.tau == doctest::Approx(slow[i].score.tau).epsilon(1e-12));
                CHECK(fast[i].score.tau_diag == slow[i].score.tau_diag);
            }
        }
    }
}

TEST_CASE("weight monotonicity and boundedness") {
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const SimilarityScore parts{rng.uniform01(), rng.uniform01(), rng.uniform01(), 0.0};
        SimilarityWeights w{rng.uniform01(), rng.uniform01(), rng.uniform01() + 1e-6};
        const double tau = combined_similarity(parts, w);
        CHECK(tau >= 0.0);
        CHECK(tau <= w.diag + w.med + w.proc + 1e-12);
        SimilarityWeights bumped = w;
        bumped.med += 0.25;
        CHECK(combined_similarity(parts, bumped) >= tau - 1e-12);
    }
}

TEST_CASE("scaling all weights preserves ranking order and scales tau") {
    SynthParams sp;
    sp.seed = 21;
    sp.n_subjects = 120;
    sp.n_clusters = 2;
    sp.note_style = NoteStyle::Sentinel;
    const SynthCohort synth = gen_cohort(sp);
    const CodeIndex index = CodeIndex::build(synth.cohort);
    const std::string query = synth.cohort.admissions.begin()->first;

    Rng rng(31);
    for (int i = 0; i < 20; ++i) {
        const double c = 0.01 + 10.0 * rng.uniform01();
        RankParams base;
        base.k = 10;
        base.weights = {rng.uniform01() + 0.01, rng.uniform01(), rng.uniform01()};
        RankParams scaled = base;
        scaled.weights = {base.weights.diag * c, base.weights.med * c, base.weights.proc * c};

        const auto r1 = rank_top_k(index, synth.cohort, query, base);
        const auto r2 = rank_top_k(index, synth.cohort, query, scaled);
        REQUIRE(r1.size() == r2.size());
        for (size_t j = 0; j < r1.size(); ++j) {
            CHECK(r1[j].admission_key == r2[j].admission_key);
            CHECK(r2[j].score.tau ==
                  doctest::Approx(c * r1[j].score.tau).epsilon(1e-12));
        }
    }
}

TEST_CASE("code index save/load round-trip preserves rankings") {
    SynthParams sp;
    sp.seed = 3;
    sp.n_subjects = 80;
    sp.note_style = NoteStyle::Sentinel;
    const SynthCohort synth = gen_cohort(sp);
    const CodeIndex index = CodeIndex::build(synth.cohort);

    std::stringstream buffer;
    index.save(buffer);
    const CodeIndex loaded = CodeIndex::load(buffer);

    const std::string query = synth.cohort.admissions.begin()->first;
    RankParams params;
    params.k = 8;
    const auto a = rank_top_k(index, synth.cohort, query, params);
    const auto b = rank_top_k(loaded, synth.cohort, query, params);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].admission_key == b[i].admission_key);
        CHECK(a[i].score.tau == b[i].score.tau);
    }
}

TEST_CASE("write_ranking emits one record per rank") {
    std::vector<RankedAdmission> ranking = {{"H2", {1.0, 0.5, 0.25, 0.583}},
                                            {"H7", {0.0, 0.0, 0.0, 0.0}}};
    std::ostringstream out;
    write_ranking(out, "H0", ranking);
    const std::string text = out.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    CHECK(text.find("\"rank\":1") != std::string::npos);
    CHECK(text.find("\"candidate_key\":\"H2\"") != std::string::npos);
    CHECK(text.find("\"tau_proc\":0.25") != std::string::npos);
}
