#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "exprag/config.hpp"
#include "exprag/errors.hpp"
#include "exprag/eval.hpp"
#include "exprag/qa.hpp"
#include "exprag/synth.hpp"

using json = nlohmann::json;
using namespace exprag;

namespace {

namespace fs = std::filesystem;

int exit_code_for(const std::string& code) {
    if (code == errc::missing_input) return 2;
    if (code == errc::config_invalid || code == errc::bad_param ||
        code == errc::unknown_method || code == errc::unfilled_placeholder)
        return 3;
    if (code == errc::transport || code == errc::auth_rejected || code == "rate-limited" ||
        code == errc::context_too_long || code == errc::provider_failure)
        return 4;
    return 1;
}

std::vector<std::string> split_csv_arg(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) out.push_back(part);
    return out;
}

SimilarityWeights parse_weights(const std::string& s) {
    const auto parts = split_csv_arg(s);
    if (parts.size() != 3)
        throw Error(errc::config_invalid, "--weights expects d,m,p, got '" + s + "'");
    SimilarityWeights w;
    w.diag = std::stod(parts[0]);
    w.med = std::stod(parts[1]);
    w.proc = std::stod(parts[2]);
    w.validate();
    return w;
}

void write_text_file(const std::string& path, const std::string& content, bool append = false) {
    if (const fs::path parent = fs::path(path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    std::ofstream out(path, append ? std::ios::binary | std::ios::app : std::ios::binary);
    if (!out) throw Error(errc::io, "cannot write " + path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(errc::missing_input, "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CodeIndex obtain_index(const Cohort& cohort, const std::string& index_path) {
    if (!index_path.empty() && fs::exists(index_path)) return CodeIndex::load_file(index_path);
    CodeIndex index = CodeIndex::build(cohort);
    if (!index_path.empty()) index.save_file(index_path);
    return index;
}

std::unique_ptr<ChatProvider> make_provider(const RunConfig& config,
                                            const std::vector<QAItem>& dataset) {
    if (config.provider.rfind("mock:", 0) == 0)
        return make_mock_provider(config.provider.substr(5), dataset);
    if (config.provider == "http") return std::make_unique<HttpChatProvider>(config.chat);
    throw Error(errc::config_invalid, "unknown provider '" + config.provider +
                                          "' (expected mock:<name> or http)");
}

PromptTemplate load_prompt(const RunConfig& config) {
    if (config.prompt_template_path.empty()) return PromptTemplate::defaults();
    return PromptTemplate::from_json_file(config.prompt_template_path);
}

HarnessConfig harness_config(const RunConfig& config, const std::string& modes_csv) {
    HarnessConfig h;
    h.modes.clear();
    for (const std::string& name : split_csv_arg(modes_csv)) {
        auto mode = context_mode_from_name(name);
        if (!mode) throw Error(errc::config_invalid, "unknown context mode '" + name + "'");
        h.modes.push_back(*mode);
    }
    if (h.modes.empty()) throw Error(errc::config_invalid, "--modes selected nothing");
    h.rank.k = config.k;
    h.rank.weights = config.weights;
    h.rank.exclude_same_subject = config.exclude_same_subject;
    auto method = retrieve_method_from_name(config.retriever);
    if (!method)
        throw Error(errc::unknown_method, "unknown retriever '" + config.retriever + "'");
    h.method = *method;
    h.retrieve = config.retrieve;
    h.context_budget = config.context_budget;
    h.retry = config.retry;
    h.model = config.chat.model;
    h.max_parallel = config.provider.rfind("mock:", 0) == 0 ? 1 : config.max_parallel;
    h.prompt = load_prompt(config);
    return h;
}

// Pre-scan for --config so flag defaults can come from the file.
RunConfig preload_config(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") return RunConfig::from_json_file(argv[i + 1]);
    return RunConfig{};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ExpRAG: EHR-based experience retrieval, DischargeQA generation, evaluation"};
    app.require_subcommand(1);

    RunConfig cfg;
    try {
        cfg = preload_config(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: code=" << e.code() << " message=" << e.what() << "\n";
        return exit_code_for(e.code());
    }
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (defaults for all flags)");

    // ---- synth ----------------------------------------------------------
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic cohort");
    uint64_t synth_seed = 42;
    size_t synth_subjects = 200, synth_clusters = 2;
    double synth_overlap = 0.9, synth_second = 0.0;
    size_t codes_min = 3, codes_max = 40;
    std::string synth_style = "narrative", synth_out = "data";
    synth_cmd->add_option("--seed", synth_seed);
    synth_cmd->add_option("--subjects", synth_subjects);
    synth_cmd->add_option("--clusters", synth_clusters);
    synth_cmd->add_option("--overlap", synth_overlap);
    synth_cmd->add_option("--codes-min", codes_min);
    synth_cmd->add_option("--codes-max", codes_max);
    synth_cmd->add_option("--second-admission-rate", synth_second);
    synth_cmd->add_option("--style", synth_style, "sentinel|narrative");
    synth_cmd->add_option("--out", synth_out, "output directory");

    // ---- ingest ---------------------------------------------------------
    auto* ingest_cmd = app.add_subcommand("ingest", "parse code tables + notes into an archive");
    std::string in_diag, in_med, in_proc, in_notes, ingest_out = "cohort.jsonl";
    std::string delimiter = ",";
    bool no_filter = false;
    size_t min_entries = 3, max_entries = 40;
    ingest_cmd->add_option("--diag", in_diag)->required();
    ingest_cmd->add_option("--med", in_med)->required();
    ingest_cmd->add_option("--proc", in_proc)->required();
    ingest_cmd->add_option("--notes", in_notes)->required();
    ingest_cmd->add_option("--delimiter", delimiter);
    ingest_cmd->add_flag("--no-filter", no_filter, "keep admissions that fail the 3-40 filter");
    ingest_cmd->add_option("--min-entries", min_entries);
    ingest_cmd->add_option("--max-entries", max_entries);
    ingest_cmd->add_option("--out", ingest_out);

    // ---- segment --------------------------------------------------------
    auto* segment_cmd = app.add_subcommand("segment", "split one discharge note into sections");
    std::string seg_cohort, seg_admission, seg_out, seg_synonyms;
    segment_cmd->add_option("--cohort", seg_cohort)->required();
    segment_cmd->add_option("--admission", seg_admission)->required();
    segment_cmd->add_option("--synonyms", seg_synonyms, "header synonym config (JSON)");
    segment_cmd->add_option("--out", seg_out);

    // ---- rank -----------------------------------------------------------
    auto* rank_cmd = app.add_subcommand("rank", "rank similar admissions for a query");
    std::string rank_cohort = cfg.cohort_path, rank_query, rank_out, rank_index = cfg.index_path;
    std::string rank_ranker = cfg.ranker, rank_weights_arg;
    size_t rank_k = cfg.k;
    rank_cmd->add_option("--cohort", rank_cohort);
    rank_cmd->add_option("--query", rank_query)->required();
    rank_cmd->add_option("--k", rank_k);
    rank_cmd->add_option("--weights", rank_weights_arg, "diag,med,proc");
    rank_cmd->add_option("--ranker", rank_ranker, "ehr|text-lexical|text-remote");
    rank_cmd->add_option("--index", rank_index, "code index file (built + saved when missing)");
    rank_cmd->add_option("--out", rank_out, "ranking JSONL (stdout when omitted)");

    // ---- retrieve -------------------------------------------------------
    auto* retrieve_cmd = app.add_subcommand("retrieve", "fine-grained retrieval over a ranking");
    std::string ret_cohort = cfg.cohort_path, ret_ranking, ret_question, ret_out;
    std::string ret_method = cfg.retriever, ret_qid = "q0";
    size_t ret_top_n = cfg.retrieve.top_n;
    retrieve_cmd->add_option("--cohort", ret_cohort);
    retrieve_cmd->add_option("--ranking", ret_ranking, "rank output JSONL")->required();
    retrieve_cmd->add_option("--question", ret_question)->required();
    retrieve_cmd->add_option("--question-id", ret_qid);
    retrieve_cmd->add_option("--retriever", ret_method, "bm25|sentence-window|hier-merge");
    retrieve_cmd->add_option("--top-n", ret_top_n);
    retrieve_cmd->add_option("--out", ret_out, "hits JSONL (stdout when omitted)");

    // ---- genqa ----------------------------------------------------------
    auto* genqa_cmd = app.add_subcommand("genqa", "build a DischargeQA-style dataset");
    std::string gen_cohort_path = cfg.cohort_path, gen_out = cfg.dataset_path, gen_manifest;
    std::string gen_counts = "30,30,30";
    uint64_t gen_seed = cfg.seed;
    size_t gen_multi = 8, gen_single = 4, gen_min_bullets = 4;
    genqa_cmd->add_option("--cohort", gen_cohort_path);
    genqa_cmd->add_option("--counts", gen_counts, "diagnosis,medication,instruction");
    genqa_cmd->add_option("--seed", gen_seed);
    genqa_cmd->add_option("--options-multi", gen_multi);
    genqa_cmd->add_option("--options-single", gen_single);
    genqa_cmd->add_option("--min-bullets", gen_min_bullets);
    genqa_cmd->add_option("--out", gen_out);
    genqa_cmd->add_option("--manifest", gen_manifest, "defaults to <out>.manifest.json");

    // ---- ask ------------------------------------------------------------
    auto* ask_cmd = app.add_subcommand("ask", "run the inference pipeline over a dataset");
    std::string ask_dataset = cfg.dataset_path, ask_cohort = cfg.cohort_path;
    std::string ask_index = cfg.index_path, ask_provider = cfg.provider;
    std::string ask_modes = "direct,text,ehr", ask_out = "records.jsonl";
    std::string ask_transcript, ask_report, ask_sweep, ask_retriever = cfg.retriever;
    std::string ask_weights_arg;
    size_t ask_k = cfg.k;
    ask_cmd->add_option("--dataset", ask_dataset);
    ask_cmd->add_option("--cohort", ask_cohort);
    ask_cmd->add_option("--index", ask_index);
    ask_cmd->add_option("--provider", ask_provider, "mock:echo-gold|mock:fixed:A|mock:context-aware|http");
    ask_cmd->add_option("--modes", ask_modes, "direct,text,ehr subset");
    ask_cmd->add_option("--k", ask_k);
    ask_cmd->add_option("--weights", ask_weights_arg, "diag,med,proc");
    ask_cmd->add_option("--retriever", ask_retriever);
    ask_cmd->add_option("--sweep-k", ask_sweep, "comma-separated k values for a per-k sweep");
    ask_cmd->add_option("--out", ask_out, "records JSONL");
    ask_cmd->add_option("--transcript", ask_transcript);
    ask_cmd->add_option("--report", ask_report, "metrics JSON");

    // ---- eval -----------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("eval", "aggregate metrics from records");
    std::string eval_records, eval_out, eval_model = "model";
    eval_cmd->add_option("--records", eval_records)->required();
    eval_cmd->add_option("--model", eval_model);
    eval_cmd->add_option("--out", eval_out, "metrics JSON");

    // ---- correlate ------------------------------------------------------
    auto* corr_cmd = app.add_subcommand("correlate", "ranker-vs-annotator correlation study");
    std::string corr_cohort = cfg.cohort_path, corr_annotator = "ehr-exact", corr_out;
    size_t corr_targets = 100, corr_random = 20, corr_pool = 80;
    uint64_t corr_seed = cfg.seed;
    bool corr_no_lexical = false;
    corr_cmd->add_option("--cohort", corr_cohort);
    corr_cmd->add_option("--annotator", corr_annotator, "ehr-exact|constant[:value]");
    corr_cmd->add_option("--targets", corr_targets);
    corr_cmd->add_option("--random", corr_random);
    corr_cmd->add_option("--pool", corr_pool);
    corr_cmd->add_option("--seed", corr_seed);
    corr_cmd->add_flag("--no-lexical", corr_no_lexical);
    corr_cmd->add_option("--out", corr_out, "report JSON");

    // ---- report ---------------------------------------------------------
    auto* report_cmd = app.add_subcommand("report", "render human-readable tables");
    std::string rep_records, rep_correlation, rep_model = "model";
    report_cmd->add_option("--records", rep_records);
    report_cmd->add_option("--correlation", rep_correlation);
    report_cmd->add_option("--model", rep_model);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth_cmd) {
            SynthParams params;
            params.seed = synth_seed;
            params.n_subjects = synth_subjects;
            params.n_clusters = synth_clusters;
            params.cluster_overlap = synth_overlap;
            params.codes_per_kind = {codes_min, codes_max};
            params.second_admission_rate = synth_second;
            if (synth_style == "sentinel")
                params.note_style = NoteStyle::Sentinel;
            else if (synth_style == "narrative")
                params.note_style = NoteStyle::Narrative;
            else
                throw Error(errc::config_invalid, "unknown note style '" + synth_style + "'");
            const SynthCohort synth = gen_cohort(params);
            write_files(synth, synth_out);
            std::cout << "wrote " << synth.cohort.size() << " admissions under " << synth_out
                      << "\n";
        } else if (*ingest_cmd) {
            ParseOptions opts;
            if (delimiter.size() != 1)
                throw Error(errc::config_invalid, "--delimiter must be one character");
            opts.delimiter = delimiter[0];
            auto parse_table = [&](const std::string& path, CodeKind kind) {
                std::ifstream in(path);
                if (!in) throw Error(errc::missing_input, "cannot read " + path);
                return parse_code_table(in, kind, opts);
            };
            const auto diag = parse_table(in_diag, CodeKind::Diagnosis);
            const auto med = parse_table(in_med, CodeKind::Medication);
            const auto proc = parse_table(in_proc, CodeKind::Procedure);
            std::ifstream notes_in(in_notes);
            if (!notes_in) throw Error(errc::missing_input, "cannot read " + in_notes);
            const auto notes = parse_notes(notes_in);
            Cohort cohort = build_cohort(diag, med, proc, notes);
            const size_t before = cohort.size();
            if (!no_filter) cohort = filter_admissions(cohort, min_entries, max_entries);
            save_cohort_file(cohort, ingest_out);
            std::cout << "ingested " << before << " admissions, kept " << cohort.size()
                      << ", archive " << ingest_out << "\n";
        } else if (*segment_cmd) {
            const Cohort cohort = load_cohort_file(seg_cohort);
            const AdmissionRecord& adm = cohort.at(seg_admission);
            if (!adm.has_note()) throw Error(errc::missing_input, "admission has no note");
            const SegmenterConfig seg_config = seg_synonyms.empty()
                                                   ? SegmenterConfig::defaults()
                                                   : SegmenterConfig::from_json_file(seg_synonyms);
            const SegmentedNote seg = segment_note(adm.note, seg_config);
            json sections = json::object();
            for (size_t i = 0; i < kSectionCount; ++i) {
                const auto kind = static_cast<SectionKind>(i);
                if (seg.has_section(kind))
                    sections[section_kind_name(kind)] = seg.section_text(kind);
            }
            json out = {{"admission_key", seg_admission},
                        {"sections", sections},
                        {"residual", seg.residual()}};
            const std::string text = out.dump(2) + "\n";
            if (seg_out.empty())
                std::cout << text;
            else
                write_text_file(seg_out, text);
        } else if (*rank_cmd) {
            const Cohort cohort = load_cohort_file(rank_cohort);
            std::ostringstream lines;
            if (rank_ranker == "ehr") {
                RankParams params;
                params.k = rank_k;
                params.exclude_same_subject = cfg.exclude_same_subject;
                params.weights =
                    rank_weights_arg.empty() ? cfg.weights : parse_weights(rank_weights_arg);
                const CodeIndex index = obtain_index(cohort, rank_index);
                const auto ranking = rank_top_k(index, cohort, rank_query, params);
                write_ranking(lines, rank_query, ranking);
            } else if (rank_ranker == "text-lexical" || rank_ranker == "text-remote") {
                std::unique_ptr<EmbeddingProvider> provider;
                if (rank_ranker == "text-lexical") {
                    std::vector<std::string> notes;
                    for (const auto& [key, adm] : cohort.admissions) notes.push_back(adm.note);
                    provider = std::make_unique<LexicalTfidfProvider>(notes);
                } else {
                    provider = std::make_unique<RemoteEmbeddingProvider>(cfg.embedding);
                }
                TextRankParams params;
                params.k = rank_k;
                params.exclude_same_subject = cfg.exclude_same_subject;
                const auto ranking = rank_top_k_text(cohort, cohort.at(rank_query).note, params,
                                                     *provider, rank_query);
                size_t rank_no = 0;
                for (const TextRankedAdmission& r : ranking) {
                    json j = {{"query_key", rank_query},
                              {"rank", ++rank_no},
                              {"candidate_key", r.admission_key},
                              {"score", r.score}};
                    lines << j.dump() << '\n';
                }
            } else {
                throw Error(errc::config_invalid, "unknown ranker '" + rank_ranker + "'");
            }
            if (rank_out.empty())
                std::cout << lines.str();
            else
                write_text_file(rank_out, lines.str());
        } else if (*retrieve_cmd) {
            const Cohort cohort = load_cohort_file(ret_cohort);
            std::vector<Report> reports;
            std::istringstream ranking(read_text_file(ret_ranking));
            std::string line;
            while (std::getline(ranking, line)) {
                if (line.empty()) continue;
                json j = json::parse(line, nullptr, false);
                if (j.is_discarded() || !j.contains("candidate_key"))
                    throw Error(errc::malformed_line, "bad ranking record: " + line);
                const std::string key = j["candidate_key"].get<std::string>();
                reports.push_back({key, cohort.at(key).note});
            }
            auto method = retrieve_method_from_name(ret_method);
            if (!method)
                throw Error(errc::unknown_method, "unknown retriever '" + ret_method + "'");
            RetrieveParams params = cfg.retrieve;
            params.top_n = ret_top_n;
            const auto hits = retrieve(reports, ret_question, *method, params);
            std::ostringstream lines;
            write_hits(lines, ret_qid, hits);
            if (ret_out.empty())
                std::cout << lines.str();
            else
                write_text_file(ret_out, lines.str());
        } else if (*genqa_cmd) {
            const Cohort cohort = load_cohort_file(gen_cohort_path);
            GenParams params;
            params.seed = gen_seed;
            params.n_options_multi = gen_multi;
            params.n_options_single = gen_single;
            params.min_bullets = gen_min_bullets;
            const auto counts = split_csv_arg(gen_counts);
            if (counts.size() != 3)
                throw Error(errc::config_invalid, "--counts expects d,m,i");
            for (size_t t = 0; t < 3; ++t) params.counts[t] = std::stoull(counts[t]);
            const Dataset dataset = build_dataset(cohort, params);
            write_dataset_file(gen_out, dataset.items);
            const std::string manifest_path =
                gen_manifest.empty() ? gen_out + ".manifest.json" : gen_manifest;
            write_text_file(manifest_path, dataset.manifest.to_json() + "\n");
            bool shortfall = false;
            for (size_t t = 0; t < 3; ++t)
                shortfall |= dataset.manifest.generated[t] < params.counts[t];
            std::cout << "generated " << dataset.items.size() << " items -> " << gen_out
                      << " (manifest " << manifest_path << ")\n";
            if (shortfall) {
                std::cerr << "error: code=partial-run message=quota shortfall, see manifest\n";
                return 5;
            }
        } else if (*ask_cmd) {
            const Cohort cohort = load_cohort_file(ask_cohort);
            const auto dataset = read_dataset_file(ask_dataset);
            RunConfig run_cfg = cfg;
            run_cfg.provider = ask_provider;
            run_cfg.k = ask_k;
            run_cfg.retriever = ask_retriever;
            if (!ask_weights_arg.empty()) run_cfg.weights = parse_weights(ask_weights_arg);
            const HarnessConfig harness = harness_config(run_cfg, ask_modes);
            const CodeIndex index = obtain_index(cohort, ask_index);
            auto provider = make_provider(run_cfg, dataset);
            std::unique_ptr<EmbeddingProvider> text_embedder;
            if (run_cfg.ranker == "text-remote")
                text_embedder = std::make_unique<RemoteEmbeddingProvider>(run_cfg.embedding);

            if (!ask_sweep.empty()) {
                std::vector<size_t> ks;
                for (const std::string& part : split_csv_arg(ask_sweep))
                    ks.push_back(std::stoull(part));
                const auto entries =
                    run_topk_sweep(dataset, cohort, index, *provider, harness, ks);
                json out = json::array();
                for (const SweepEntry& e : entries) {
                    std::cout << "== k=" << e.k << "\n" << render_metrics_table(e.report);
                    out.push_back({{"k", e.k}, {"report", json::parse(e.report.to_json())}});
                }
                write_text_file(ask_out, out.dump(2) + "\n");
            } else {
                const QaRunOutput run = run_qa_harness(dataset, cohort, index, *provider,
                                                       harness, text_embedder.get());
                std::ostringstream lines;
                write_records(lines, run.records);
                write_text_file(ask_out, lines.str());
                // reruns append to the transcript, never rewrite history
                if (!ask_transcript.empty())
                    write_text_file(ask_transcript, run.transcript_jsonl, true);
                if (!ask_report.empty())
                    write_text_file(ask_report, run.report.to_json() + "\n");
                std::cout << render_metrics_table(run.report);
            }
        } else if (*eval_cmd) {
            std::istringstream in(read_text_file(eval_records));
            const auto records = read_records(in);
            const MetricsReport report = aggregate_metrics(records, eval_model);
            std::cout << render_metrics_table(report);
            if (!eval_out.empty()) write_text_file(eval_out, report.to_json() + "\n");
        } else if (*corr_cmd) {
            const Cohort cohort = load_cohort_file(corr_cohort);
            std::unique_ptr<PairAnnotator> annotator;
            if (corr_annotator == "ehr-exact") {
                annotator = std::make_unique<ExactEhrAnnotator>();
            } else if (corr_annotator.rfind("constant", 0) == 0) {
                double value = 1.0;
                if (corr_annotator.size() > 9 && corr_annotator[8] == ':')
                    value = std::stod(corr_annotator.substr(9));
                annotator = std::make_unique<ConstantAnnotator>(value);
            } else {
                throw Error(errc::config_invalid,
                            "unknown annotator '" + corr_annotator + "'");
            }
            CorrelationConfig corr;
            corr.n_targets = corr_targets;
            corr.n_random = corr_random;
            corr.n_pool = corr_pool;
            corr.seed = corr_seed;
            corr.ehr_weights = cfg.weights;
            corr.include_lexical = !corr_no_lexical;
            const CorrelationReport report = run_correlation_harness(cohort, *annotator, corr);
            std::cout << report.render_table();
            if (!corr_out.empty()) write_text_file(corr_out, report.to_json() + "\n");
        } else if (*report_cmd) {
            if (rep_records.empty() && rep_correlation.empty())
                throw Error(errc::missing_input, "report needs --records or --correlation");
            if (!rep_records.empty()) {
                std::istringstream in(read_text_file(rep_records));
                const auto records = read_records(in);
                std::cout << render_metrics_table(aggregate_metrics(records, rep_model));
            }
            if (!rep_correlation.empty()) {
                // re-render the stored JSON as a table
                json j = json::parse(read_text_file(rep_correlation), nullptr, false);
                if (j.is_discarded())
                    throw Error(errc::config_invalid, "bad correlation report JSON");
                CorrelationReport report;
                report.targets_sampled = j.value("targets_sampled", 0);
                report.pool_shortfalls = j.value("pool_shortfalls", 0);
                for (const json& r : j.value("rankers", json::array())) {
                    RankerCorrelation rc;
                    rc.ranker = r.value("ranker", "");
                    rc.mean_pearson = r.value("mean_pearson", 0.0);
                    rc.mean_spearman = r.value("mean_spearman", 0.0);
                    rc.targets_used = r.value("targets_used", 0);
                    rc.undefined_excluded = r.value("undefined_excluded", 0);
                    report.rankers.push_back(std::move(rc));
                }
                std::cout << report.render_table();
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: code=" << e.code() << " message=" << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: code=internal message=" << e.what() << "\n";
        return 1;
    }
    return 0;
}
