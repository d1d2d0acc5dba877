#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "exprag/llm.hpp"
#include "exprag/ranker.hpp"
#include "exprag/retrieve.hpp"
#include "exprag/text_rank.hpp"

namespace exprag {

enum class ContextMode { DirectAsk, TextRanker, ExpRagEhr };

const char* context_mode_name(ContextMode m);
std::optional<ContextMode> context_mode_from_name(std::string_view name);

struct EvalRecord {
    std::string question_id;
    TaskKind task = TaskKind::DiagnosisInference;
    AnswerMode mode = AnswerMode::MultiSelect;
    ContextMode context_mode = ContextMode::DirectAsk;
    std::set<char> gold;
    ParsedAnswer parsed;
};

/// Exact-match accuracy in percent: a record scores only when the parsed set
/// equals gold exactly; invalid answers count as incorrect.
double exact_match_accuracy(const std::vector<EvalRecord>& records);

/// Set-overlap F1 for one question. gold must be non-empty.
double option_f1(const std::set<char>& selected, const std::set<char>& gold);

/// Sample Pearson correlation; nullopt when either input is constant.
std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);

/// Pearson over average ranks (ties share their mean rank).
std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y);

/// 1-based average ranks; exposed for the ties fixture.
std::vector<double> ranks_with_ties(const std::vector<double>& values);

/// 100 * (new - base) / base. Throws zero-baseline.
double relative_improvement(double new_percent, double base_percent);

struct CellMetrics {
    size_t n = 0;
    double accuracy = 0.0; // percent
    double macro_f1 = 0.0;
    double invalid_rate = 0.0; // fraction
};

struct MetricsReport {
    std::string model;
    // (context mode, task) -> metrics
    std::map<std::pair<ContextMode, TaskKind>, CellMetrics> cells;

    std::string to_json() const;
};

MetricsReport aggregate_metrics(const std::vector<EvalRecord>& records,
                                const std::string& model);

/// Table-shaped rendering: one row per context mode, accuracy/F1 per task.
std::string render_metrics_table(const MetricsReport& report);

void write_records(std::ostream& out, const std::vector<EvalRecord>& records);
std::vector<EvalRecord> read_records(std::istream& in);

struct HarnessConfig {
    std::vector<ContextMode> modes = {ContextMode::DirectAsk, ContextMode::TextRanker,
                                      ContextMode::ExpRagEhr};
    RankParams rank;                                    // k = 15, uniform weights
    RetrieveMethod method = RetrieveMethod::HierMerge;  // auto-merge style default
    RetrieveParams retrieve;
    size_t context_budget = 6000; // characters; 0 = unlimited
    // keep context in report-rank/document order instead of score order; the
    // top-k sweep relies on this to make contexts grow monotonically with k
    bool context_in_document_order = false;
    RetryPolicy retry{3, 0};
    std::string model = "mock";
    size_t max_parallel = 1; // provider calls in flight
    PromptTemplate prompt = PromptTemplate::defaults();
};

struct QaRunOutput {
    std::vector<EvalRecord> records; // sorted by (context mode, question id)
    MetricsReport report;
    std::string transcript_jsonl;
};

/// Runs every question under every requested context mode: rank, retrieve,
/// prompt, complete, parse. Provider failures are recorded as invalid answers
/// rather than aborting the run.
QaRunOutput run_qa_harness(const std::vector<QAItem>& dataset, const Cohort& cohort,
                           const CodeIndex& index, ChatProvider& provider,
                           const HarnessConfig& config,
                           EmbeddingProvider* text_provider = nullptr);

struct SweepEntry {
    size_t k = 0;
    MetricsReport report;
};

/// Re-runs the EHR-ranker mode for each k in turn.
std::vector<SweepEntry> run_topk_sweep(const std::vector<QAItem>& dataset, const Cohort& cohort,
                                       const CodeIndex& index, ChatProvider& provider,
                                       HarnessConfig config, const std::vector<size_t>& ks);

/// Scores one (target, candidate) pair per modality; the harness averages the
/// three into a single ground-truth value.
class PairAnnotator {
public:
    virtual ~PairAnnotator() = default;
    virtual std::array<double, 3> score_modalities(const AdmissionRecord& target,
                                                   const AdmissionRecord& candidate,
                                                   const Cohort& cohort) = 0;
    virtual std::string name() const = 0;
};

/// Synthetic oracle: the three Jaccard similarities themselves.
class ExactEhrAnnotator : public PairAnnotator {
public:
    std::array<double, 3> score_modalities(const AdmissionRecord& target,
                                           const AdmissionRecord& candidate,
                                           const Cohort& cohort) override;
    std::string name() const override { return "ehr-exact"; }
};

class ConstantAnnotator : public PairAnnotator {
public:
    explicit ConstantAnnotator(double value = 1.0) : value_(value) {}
    std::array<double, 3> score_modalities(const AdmissionRecord&, const AdmissionRecord&,
                                           const Cohort&) override {
        return {value_, value_, value_};
    }
    std::string name() const override { return "constant"; }

private:
    double value_;
};

/// LLM-judged pair similarity through any chat provider; parses three 0-10
/// modality scores from the reply.
class LlmAnnotator : public PairAnnotator {
public:
    LlmAnnotator(ChatProvider& provider, RetryPolicy retry = {});
    std::array<double, 3> score_modalities(const AdmissionRecord& target,
                                           const AdmissionRecord& candidate,
                                           const Cohort& cohort) override;
    std::string name() const override;

private:
    ChatProvider* provider_;
    RetryPolicy retry_;
};

struct CorrelationConfig {
    size_t n_targets = 100;
    size_t n_random = 20; // uniform candidates per target
    size_t n_pool = 80;   // candidates from the non-zero-similarity pool
    uint64_t seed = 0;
    SimilarityWeights ehr_weights; // uniform by default
    bool include_lexical = true;
};

struct RankerCorrelation {
    std::string ranker;
    double mean_pearson = 0.0;
    double mean_spearman = 0.0;
    size_t targets_used = 0;
    size_t undefined_excluded = 0; // targets dropped for constant scores
};

struct CorrelationReport {
    size_t targets_sampled = 0;
    size_t pool_shortfalls = 0; // targets whose restricted pool ran short
    std::vector<RankerCorrelation> rankers;

    std::string to_json() const;
    std::string render_table() const;
};

/// Per target: n_random uniform candidates plus n_pool drawn (without
/// replacement) from the admissions with non-zero EHR similarity in at least
/// one modality; correlations of each ranker's scores against the annotator,
/// averaged over targets.
CorrelationReport run_correlation_harness(const Cohort& cohort, PairAnnotator& annotator,
                                          const CorrelationConfig& config);

} // namespace exprag
