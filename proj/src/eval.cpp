#include "exprag/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "exprag/errors.hpp"
#include "exprag/rng.hpp"
#include "exprag/text.hpp"

using json = nlohmann::json;

namespace exprag {

const char* context_mode_name(ContextMode m) {
    switch (m) {
    case ContextMode::DirectAsk: return "direct-ask";
    case ContextMode::TextRanker: return "text-ranker";
    case ContextMode::ExpRagEhr: return "exprag-ehr";
    }
    return "direct-ask";
}

std::optional<ContextMode> context_mode_from_name(std::string_view name) {
    if (name == "direct-ask" || name == "direct") return ContextMode::DirectAsk;
    if (name == "text-ranker" || name == "text") return ContextMode::TextRanker;
    if (name == "exprag-ehr" || name == "ehr") return ContextMode::ExpRagEhr;
    return std::nullopt;
}

double exact_match_accuracy(const std::vector<EvalRecord>& records) {
    if (records.empty()) throw Error(errc::empty_input, "no records to score");
    size_t correct = 0;
    for (const EvalRecord& r : records)
        if (r.parsed.valid && r.parsed.letters == r.gold) ++correct;
    return 100.0 * static_cast<double>(correct) / static_cast<double>(records.size());
}

double option_f1(const std::set<char>& selected, const std::set<char>& gold) {
    if (gold.empty()) throw Error(errc::bad_param, "gold set must be non-empty");
    if (selected.empty()) return 0.0;
    size_t inter = 0;
    for (char c : selected) inter += gold.count(c);
    const double p = static_cast<double>(inter) / static_cast<double>(selected.size());
    const double r = static_cast<double>(inter) / static_cast<double>(gold.size());
    if (p + r == 0.0) return 0.0;
    return 2.0 * p * r / (p + r);
}

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw Error(errc::dimension_mismatch, "correlation inputs differ in length");
    if (x.size() < 2) throw Error(errc::bad_param, "correlation needs at least 2 points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt; // constant input
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> ranks_with_ties(const std::vector<double>& values) {
    std::vector<size_t> order(values.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size(), 0.0);
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg_rank;
        i = j + 1;
    }
    return ranks;
}

std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw Error(errc::dimension_mismatch, "correlation inputs differ in length");
    if (x.size() < 2) throw Error(errc::bad_param, "correlation needs at least 2 points");
    return pearson(ranks_with_ties(x), ranks_with_ties(y));
}

double relative_improvement(double new_percent, double base_percent) {
    if (base_percent <= 0.0)
        throw Error(errc::zero_baseline, "relative improvement needs a positive baseline");
    return 100.0 * (new_percent - base_percent) / base_percent;
}

MetricsReport aggregate_metrics(const std::vector<EvalRecord>& records,
                                const std::string& model) {
    MetricsReport report;
    report.model = model;
    std::map<std::pair<ContextMode, TaskKind>, std::vector<const EvalRecord*>> groups;
    for (const EvalRecord& r : records) groups[{r.context_mode, r.task}].push_back(&r);
    for (const auto& [key, group] : groups) {
        CellMetrics cell;
        cell.n = group.size();
        size_t correct = 0, invalid = 0;
        double f1_sum = 0.0;
        for (const EvalRecord* r : group) {
            if (!r->parsed.valid) {
                ++invalid;
                continue; // scores 0 on both metrics
            }
            if (r->parsed.letters == r->gold) ++correct;
            f1_sum += option_f1(r->parsed.letters, r->gold);
        }
        cell.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(cell.n);
        cell.macro_f1 = f1_sum / static_cast<double>(cell.n);
        cell.invalid_rate = static_cast<double>(invalid) / static_cast<double>(cell.n);
        report.cells.emplace(key, cell);
    }
    return report;
}

std::string MetricsReport::to_json() const {
    json cells_json = json::array();
    for (const auto& [key, cell] : cells) {
        cells_json.push_back({{"context_mode", context_mode_name(key.first)},
                              {"task", task_kind_name(key.second)},
                              {"n", cell.n},
                              {"accuracy", cell.accuracy},
                              {"macro_f1", cell.macro_f1},
                              {"invalid_rate", cell.invalid_rate}});
    }
    json j = {{"model", model}, {"cells", cells_json}};
    return j.dump(2);
}

std::string render_metrics_table(const MetricsReport& report) {
    constexpr std::array<ContextMode, 3> modes = {ContextMode::DirectAsk,
                                                  ContextMode::TextRanker,
                                                  ContextMode::ExpRagEhr};
    constexpr std::array<TaskKind, 3> tasks = {TaskKind::InstructionInference,
                                               TaskKind::DiagnosisInference,
                                               TaskKind::MedicationInference};
    std::ostringstream out;
    out << "model: " << report.model << "\n";
    char line[160];
    std::snprintf(line, sizeof(line), "%-12s %12s %12s %8s %12s %8s\n", "context",
                  "instr.acc", "diag.acc", "diag.f1", "med.acc", "med.f1");
    out << line;
    auto cell = [&](ContextMode m, TaskKind t) -> const CellMetrics* {
        auto it = report.cells.find({m, t});
        return it == report.cells.end() ? nullptr : &it->second;
    };
    for (ContextMode m : modes) {
        bool any = false;
        for (TaskKind t : tasks) any |= cell(m, t) != nullptr;
        if (!any) continue;
        std::string row;
        auto fmt = [&](const CellMetrics* c, bool with_f1) {
            char buf[64];
            if (!c) {
                std::snprintf(buf, sizeof(buf), " %12s", "-");
                row += buf;
                if (with_f1) {
                    std::snprintf(buf, sizeof(buf), " %8s", "-");
                    row += buf;
                }
                return;
            }
            std::snprintf(buf, sizeof(buf), " %12.2f", c->accuracy);
            row += buf;
            if (with_f1) {
                std::snprintf(buf, sizeof(buf), " %8.3f", c->macro_f1);
                row += buf;
            }
        };
        char head[32];
        std::snprintf(head, sizeof(head), "%-12s", context_mode_name(m));
        row = head;
        fmt(cell(m, TaskKind::InstructionInference), false);
        fmt(cell(m, TaskKind::DiagnosisInference), true);
        fmt(cell(m, TaskKind::MedicationInference), true);
        out << row << "\n";
    }

    // summary row: mean relative improvement of the EHR ranker over the
    // text ranker across the task cells where both ran
    std::vector<double> improvements;
    for (TaskKind t : tasks) {
        const CellMetrics* ehr = cell(ContextMode::ExpRagEhr, t);
        const CellMetrics* text = cell(ContextMode::TextRanker, t);
        if (ehr && text && text->accuracy > 0.0)
            improvements.push_back(relative_improvement(ehr->accuracy, text->accuracy));
    }
    if (!improvements.empty()) {
        const double mean = std::accumulate(improvements.begin(), improvements.end(), 0.0) /
                            static_cast<double>(improvements.size());
        char buf[96];
        std::snprintf(buf, sizeof(buf),
                      "avg relative improvement (ehr vs text, accuracy): %+.2f%%\n", mean);
        out << buf;
    }
    return out.str();
}

void write_records(std::ostream& out, const std::vector<EvalRecord>& records) {
    for (const EvalRecord& r : records) {
        json gold = json::array();
        for (char c : r.gold) gold.push_back(std::string(1, c));
        json letters = json::array();
        for (char c : r.parsed.letters) letters.push_back(std::string(1, c));
        json j = {{"question_id", r.question_id},
                  {"task", task_kind_name(r.task)},
                  {"mode", answer_mode_name(r.mode)},
                  {"context_mode", context_mode_name(r.context_mode)},
                  {"gold", gold},
                  {"valid", r.parsed.valid},
                  {"letters", letters}};
        if (!r.parsed.valid) j["reason"] = r.parsed.reason;
        out << j.dump() << '\n';
    }
}

std::vector<EvalRecord> read_records(std::istream& in) {
    std::vector<EvalRecord> records;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw Error(errc::malformed_line, "records line " + std::to_string(line_no));
        EvalRecord r;
        r.question_id = j.value("question_id", "");
        r.task = task_kind_from_name(j.value("task", "diagnosis"))
                     .value_or(TaskKind::DiagnosisInference);
        r.mode = j.value("mode", "multi") == std::string("single") ? AnswerMode::SingleSelect
                                                                   : AnswerMode::MultiSelect;
        r.context_mode = context_mode_from_name(j.value("context_mode", "direct-ask"))
                             .value_or(ContextMode::DirectAsk);
        for (const json& g : j.value("gold", json::array())) {
            const std::string s = g.get<std::string>();
            if (!s.empty()) r.gold.insert(s[0]);
        }
        r.parsed.valid = j.value("valid", false);
        for (const json& g : j.value("letters", json::array())) {
            const std::string s = g.get<std::string>();
            if (!s.empty()) r.parsed.letters.insert(s[0]);
        }
        r.parsed.reason = j.value("reason", "");
        records.push_back(std::move(r));
    }
    return records;
}

namespace {

// Runs fn(i) for i in [0, n) with at most max_parallel workers. Results land
// at their own indices, so output order is independent of scheduling.
void parallel_for(size_t n, size_t max_parallel, const std::function<void(size_t)>& fn) {
    if (max_parallel <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> workers;
    const size_t n_workers = std::min(max_parallel, n);
    std::vector<std::exception_ptr> errors(n_workers);
    for (size_t w = 0; w < n_workers; ++w) {
        workers.emplace_back([&, w] {
            try {
                for (;;) {
                    const size_t i = next.fetch_add(1);
                    if (i >= n) break;
                    fn(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (std::thread& t : workers) t.join();
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

std::string retrieval_query(const QAItem& item) {
    std::string q = item.question_text;
    for (const QAOption& o : item.options) {
        q += ' ';
        q += o.text;
    }
    return q;
}

std::string text_ranker_query(const QAItem& item) {
    // question, options, background — in that order
    std::string q = item.question_text;
    q += '\n';
    q += render_options(item);
    q += '\n';
    q += item.background;
    return q;
}

} // namespace

QaRunOutput run_qa_harness(const std::vector<QAItem>& dataset, const Cohort& cohort,
                           const CodeIndex& index, ChatProvider& provider,
                           const HarnessConfig& config, EmbeddingProvider* text_provider) {
    const bool wants_text = std::find(config.modes.begin(), config.modes.end(),
                                      ContextMode::TextRanker) != config.modes.end();

    std::unique_ptr<LexicalTfidfProvider> lexical;
    NoteEmbeddingCache embedding_cache;
    if (wants_text && !text_provider) {
        std::vector<std::string> notes;
        notes.reserve(cohort.size());
        for (const auto& [key, adm] : cohort.admissions) notes.push_back(adm.note);
        lexical = std::make_unique<LexicalTfidfProvider>(notes);
        text_provider = lexical.get();
    }
    // warm the note-embedding cache before any parallel section
    if (wants_text) embedding_cache.vectors(cohort, *text_provider);

    struct Job {
        const QAItem* item;
        ContextMode mode;
    };
    std::vector<Job> jobs;
    for (ContextMode mode : config.modes)
        for (const QAItem& item : dataset) jobs.push_back({&item, mode});

    std::vector<EvalRecord> records(jobs.size());
    std::vector<std::string> transcripts(jobs.size());

    auto run_job = [&](size_t ji) {
        const Job& job = jobs[ji];
        const QAItem& item = *job.item;

        std::string context;
        if (job.mode != ContextMode::DirectAsk) {
            std::vector<Report> reports;
            if (job.mode == ContextMode::ExpRagEhr) {
                const auto ranked = index.rank_top_k(cohort.at(item.admission_key), config.rank);
                reports.reserve(ranked.size());
                for (const RankedAdmission& r : ranked)
                    reports.push_back({r.admission_key, cohort.at(r.admission_key).note});
            } else {
                TextRankParams tparams;
                tparams.k = config.rank.k;
                tparams.exclude_same_subject = config.rank.exclude_same_subject;
                const auto ranked =
                    rank_top_k_text(cohort, text_ranker_query(item), tparams, *text_provider,
                                    item.admission_key, &embedding_cache);
                reports.reserve(ranked.size());
                for (const TextRankedAdmission& r : ranked)
                    reports.push_back({r.admission_key, cohort.at(r.admission_key).note});
            }
            std::vector<RetrievalHit> hits =
                retrieve(reports, retrieval_query(item), config.method, config.retrieve);
            if (config.context_in_document_order) {
                std::map<std::string, size_t> doc_rank;
                for (size_t i = 0; i < reports.size(); ++i)
                    doc_rank.emplace(reports[i].admission_key, i);
                std::stable_sort(hits.begin(), hits.end(),
                                 [&](const RetrievalHit& a, const RetrievalHit& b) {
                                     const size_t ra = doc_rank.at(a.chunk.source_key);
                                     const size_t rb = doc_rank.at(b.chunk.source_key);
                                     if (ra != rb) return ra < rb;
                                     return a.chunk.char_span.begin < b.chunk.char_span.begin;
                                 });
            }
            context = assemble_context(hits, config.context_budget);
        }

        ChatRequest request;
        request.model = config.model;
        request.messages = render_prompt(item, context, config.prompt);
        request.tag = item.question_id;
        request.context_text = context;

        EvalRecord record;
        record.question_id = item.question_id;
        record.task = item.task;
        record.mode = item.mode;
        record.context_mode = job.mode;
        record.gold = item.gold_letters;

        std::ostringstream transcript;
        try {
            const ChatExchange exchange = complete_with_retries(provider, request, config.retry);
            record.parsed = parse_answer(exchange.response_text, item.mode, item.options.size());
            write_transcript_line(transcript, item.question_id, prompt_hash(request.messages),
                                  exchange.response_text, exchange.attempts,
                                  exchange.latency_ms);
        } catch (const Error& e) {
            record.parsed = ParsedAnswer::invalid(e.code());
            write_transcript_line(transcript, item.question_id, prompt_hash(request.messages),
                                  std::string("<error: ") + e.code() + ">", config.retry.max_attempts,
                                  0.0);
        }
        records[ji] = std::move(record);
        transcripts[ji] = transcript.str();
    };

    parallel_for(jobs.size(), config.max_parallel, run_job);

    std::sort(records.begin(), records.end(), [](const EvalRecord& a, const EvalRecord& b) {
        if (a.context_mode != b.context_mode)
            return static_cast<int>(a.context_mode) < static_cast<int>(b.context_mode);
        return a.question_id < b.question_id;
    });

    QaRunOutput out;
    out.records = std::move(records);
    out.report = aggregate_metrics(out.records, config.model + "/" + provider.name());
    for (std::string& t : transcripts) out.transcript_jsonl += t;
    return out;
}

std::vector<SweepEntry> run_topk_sweep(const std::vector<QAItem>& dataset, const Cohort& cohort,
                                       const CodeIndex& index, ChatProvider& provider,
                                       HarnessConfig config, const std::vector<size_t>& ks) {
    config.modes = {ContextMode::ExpRagEhr};
    std::vector<SweepEntry> entries;
    for (size_t k : ks) {
        config.rank.k = k;
        QaRunOutput run = run_qa_harness(dataset, cohort, index, provider, config);
        entries.push_back({k, std::move(run.report)});
    }
    return entries;
}

std::array<double, 3> ExactEhrAnnotator::score_modalities(const AdmissionRecord& target,
                                                          const AdmissionRecord& candidate,
                                                          const Cohort&) {
    return {modality_similarity(target, candidate, CodeKind::Diagnosis),
            modality_similarity(target, candidate, CodeKind::Medication),
            modality_similarity(target, candidate, CodeKind::Procedure)};
}

LlmAnnotator::LlmAnnotator(ChatProvider& provider, RetryPolicy retry)
    : provider_(&provider), retry_(retry) {}

std::string LlmAnnotator::name() const { return "llm:" + provider_->name(); }

std::array<double, 3> LlmAnnotator::score_modalities(const AdmissionRecord& target,
                                                     const AdmissionRecord& candidate,
                                                     const Cohort& cohort) {
    auto describe_all = [&](const AdmissionRecord& adm) {
        std::string out;
        for (CodeKind kind : kCodeKinds) {
            out += std::string(code_kind_name(kind)) + ": ";
            const auto& codes = adm.codes(kind);
            for (size_t i = 0; i < codes.size(); ++i) {
                if (i) out += ", ";
                out += cohort.description(kind, codes[i]);
            }
            out += "\n";
        }
        return out;
    };

    ChatRequest request;
    request.messages = {
        {"system",
         "You compare two hospital admissions. Reply with three integers 0-10 separated by "
         "spaces: diagnosis similarity, medication similarity, procedure similarity."},
        {"user", "Admission A:\n" + describe_all(target) + "\nAdmission B:\n" +
                     describe_all(candidate)}};
    const ChatExchange exchange = complete_with_retries(*provider_, request, retry_);

    std::array<double, 3> scores = {0.0, 0.0, 0.0};
    size_t found = 0;
    const std::string& text = exchange.response_text;
    for (size_t i = 0; i < text.size() && found < 3;) {
        if (std::isdigit(static_cast<unsigned char>(text[i]))) {
            size_t j = i;
            while (j < text.size() && (std::isdigit(static_cast<unsigned char>(text[j])) ||
                                       text[j] == '.'))
                ++j;
            scores[found++] = std::min(10.0, std::stod(text.substr(i, j - i))) / 10.0;
            i = j;
        } else {
            ++i;
        }
    }
    return scores;
}

std::string CorrelationReport::to_json() const {
    json rankers_json = json::array();
    for (const RankerCorrelation& r : rankers)
        rankers_json.push_back({{"ranker", r.ranker},
                                {"mean_pearson", r.mean_pearson},
                                {"mean_spearman", r.mean_spearman},
                                {"targets_used", r.targets_used},
                                {"undefined_excluded", r.undefined_excluded}});
    json j = {{"targets_sampled", targets_sampled},
              {"pool_shortfalls", pool_shortfalls},
              {"rankers", rankers_json}};
    return j.dump(2);
}

std::string CorrelationReport::render_table() const {
    std::ostringstream out;
    char line[128];
    std::snprintf(line, sizeof(line), "%-24s %10s %10s %10s\n", "ranker", "pearson", "spearman",
                  "targets");
    out << line;
    for (const RankerCorrelation& r : rankers) {
        std::snprintf(line, sizeof(line), "%-24s %10.4f %10.4f %10zu\n", r.ranker.c_str(),
                      r.mean_pearson, r.mean_spearman, r.targets_used);
        out << line;
    }
    std::snprintf(line, sizeof(line), "targets sampled: %zu, pool shortfalls: %zu\n",
                  targets_sampled, pool_shortfalls);
    out << line;
    return out.str();
}

CorrelationReport run_correlation_harness(const Cohort& cohort, PairAnnotator& annotator,
                                          const CorrelationConfig& config) {
    std::vector<std::string> keys;
    keys.reserve(cohort.size());
    for (const auto& [key, adm] : cohort.admissions) keys.push_back(key);
    if (keys.size() < config.n_random + 2)
        throw Error(errc::bad_param, "cohort too small for the sampling plan");

    Rng rng(config.seed ^ 0xc0ffee);
    std::vector<size_t> target_picks = rng.sample_indices(keys.size(), config.n_targets);

    std::unique_ptr<LexicalTfidfProvider> lexical;
    NoteEmbeddingCache cache;
    const std::vector<DocVector>* note_vecs = nullptr;
    if (config.include_lexical) {
        std::vector<std::string> notes;
        notes.reserve(keys.size());
        for (const std::string& k : keys) notes.push_back(cohort.admissions.at(k).note);
        lexical = std::make_unique<LexicalTfidfProvider>(notes);
        note_vecs = &cache.vectors(cohort, *lexical);
    }
    std::map<std::string, size_t> key_index;
    for (size_t i = 0; i < keys.size(); ++i) key_index.emplace(keys[i], i);

    CorrelationReport report;
    report.targets_sampled = target_picks.size();

    struct Accumulator {
        double pearson_sum = 0.0, spearman_sum = 0.0;
        size_t used = 0, undefined = 0;
    };
    Accumulator ehr_acc, lex_acc;

    for (size_t t : target_picks) {
        const std::string& target_key = keys[t];
        const AdmissionRecord& target = cohort.admissions.at(target_key);

        // 20 uniform candidates, excluding the target itself
        std::set<size_t> chosen;
        while (chosen.size() < std::min(config.n_random, keys.size() - 1)) {
            const size_t pick = static_cast<size_t>(rng.uniform(keys.size()));
            if (pick != t) chosen.insert(pick);
        }

        // restricted pool: non-zero EHR similarity in at least one modality
        std::vector<size_t> pool;
        for (size_t i = 0; i < keys.size(); ++i) {
            if (i == t || chosen.count(i)) continue;
            const AdmissionRecord& cand = cohort.admissions.at(keys[i]);
            bool nonzero = false;
            for (CodeKind kind : kCodeKinds)
                if (modality_similarity(target, cand, kind) > 0.0) {
                    nonzero = true;
                    break;
                }
            if (nonzero) pool.push_back(i);
        }
        if (pool.size() < config.n_pool) report.pool_shortfalls++;
        for (size_t pick : rng.sample_indices(pool.size(), config.n_pool))
            chosen.insert(pool[pick]);

        std::vector<double> annotation, ehr_score, lex_score;
        for (size_t ci : chosen) {
            const AdmissionRecord& cand = cohort.admissions.at(keys[ci]);
            const auto parts = annotator.score_modalities(target, cand, cohort);
            annotation.push_back((parts[0] + parts[1] + parts[2]) / 3.0);
            ehr_score.push_back(combined_similarity(
                {modality_similarity(target, cand, CodeKind::Diagnosis),
                 modality_similarity(target, cand, CodeKind::Medication),
                 modality_similarity(target, cand, CodeKind::Procedure), 0.0},
                config.ehr_weights));
            if (note_vecs)
                lex_score.push_back(
                    cosine((*note_vecs)[key_index.at(target_key)], (*note_vecs)[ci]));
        }

        auto absorb = [&](Accumulator& acc, const std::vector<double>& scores) {
            const auto p = pearson(scores, annotation);
            const auto s = spearman(scores, annotation);
            if (!p || !s) {
                acc.undefined++;
                return;
            }
            acc.pearson_sum += *p;
            acc.spearman_sum += *s;
            acc.used++;
        };
        absorb(ehr_acc, ehr_score);
        if (note_vecs) absorb(lex_acc, lex_score);
    }

    auto finish = [](const std::string& name, const Accumulator& acc) {
        RankerCorrelation r;
        r.ranker = name;
        r.targets_used = acc.used;
        r.undefined_excluded = acc.undefined;
        if (acc.used > 0) {
            r.mean_pearson = acc.pearson_sum / static_cast<double>(acc.used);
            r.mean_spearman = acc.spearman_sum / static_cast<double>(acc.used);
        }
        return r;
    };
    report.rankers.push_back(finish("exprag-ehr", ehr_acc));
    if (config.include_lexical) report.rankers.push_back(finish("lexical-tfidf", lex_acc));
    return report;
}

} // namespace exprag
