#include "exprag/qa.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "exprag/errors.hpp"
#include "exprag/text.hpp"

using json = nlohmann::json;

namespace exprag {

const char* option_source_name(OptionSource s) {
    switch (s) {
    case OptionSource::Gold: return "gold";
    case OptionSource::EhrDistractor: return "ehr";
    case OptionSource::PermutedDistractor: return "permuted";
    }
    return "gold";
}

const char* answer_mode_name(AnswerMode m) {
    return m == AnswerMode::MultiSelect ? "multi" : "single";
}

const char* task_question_text(TaskKind task) {
    switch (task) {
    case TaskKind::DiagnosisInference:
        return "Which diagnoses should be documented in this patient's discharge summary?";
    case TaskKind::MedicationInference:
        return "Which medications should be prescribed to this patient at discharge?";
    case TaskKind::InstructionInference:
        return "What is the best discharge instruction for this patient?";
    }
    return "";
}

namespace {

std::string make_question_id(TaskKind task, const std::string& admission_key) {
    return std::string(task_kind_name(task)) + "-" + admission_key;
}

void assign_letters(QAItem& item, std::vector<std::pair<std::string, OptionSource>> texts,
                    Rng& rng) {
    if (texts.size() > 26)
        throw Error(errc::bad_param, "more than 26 options cannot be lettered");
    rng.shuffle(texts);
    item.options.clear();
    item.gold_letters.clear();
    for (size_t i = 0; i < texts.size(); ++i) {
        QAOption opt;
        opt.letter = static_cast<char>('A' + i);
        opt.text = std::move(texts[i].first);
        opt.source = texts[i].second;
        if (opt.source == OptionSource::Gold) item.gold_letters.insert(opt.letter);
        item.options.push_back(std::move(opt));
    }
}

} // namespace

QAItem gen_multiselect_item(const AdmissionRecord& adm, const SegmentedNote& seg, TaskKind task,
                            const Cohort& cohort, const GenParams& params, Rng& rng,
                            const SegmenterConfig& config) {
    if (task == TaskKind::InstructionInference)
        throw Error(errc::bad_param, "instruction items are single-select");
    const CodeKind kind =
        task == TaskKind::DiagnosisInference ? CodeKind::Diagnosis : CodeKind::Medication;

    std::vector<GoldItem> gold_raw = extract_gold(seg, task, config);
    // dedup by matching key, first occurrence wins
    std::vector<GoldItem> gold;
    std::set<std::string> gold_keys;
    for (GoldItem& g : gold_raw)
        if (gold_keys.insert(g.key).second) gold.push_back(std::move(g));

    if (gold.size() + 1 > params.n_options_multi)
        throw Error(errc::insufficient_distractors,
                    "gold items leave no room for distractors (" + std::to_string(gold.size()) +
                        " gold, " + std::to_string(params.n_options_multi) + " options)");

    // distractor candidates: the admission's own EHR descriptions of the
    // matching kind whose normalized text collides with no gold item
    std::vector<std::string> candidates;
    std::set<std::string> seen;
    for (const std::string& code : adm.codes(kind)) {
        const std::string& desc = cohort.description(kind, code);
        const std::string text = normalize_text(desc);
        const std::string key =
            kind == CodeKind::Medication ? medication_name_key(desc) : text;
        if (text.empty() || key.empty()) continue;
        if (gold_keys.count(key)) continue;
        if (!seen.insert(text).second) continue;
        candidates.push_back(text);
    }
    std::sort(candidates.begin(), candidates.end());

    const size_t need = params.n_options_multi - gold.size();
    if (candidates.size() < need)
        throw Error(errc::insufficient_distractors,
                    "need " + std::to_string(need) + " distractors, have " +
                        std::to_string(candidates.size()));

    QAItem item;
    item.question_id = make_question_id(task, adm.admission_key);
    item.admission_key = adm.admission_key;
    item.task = task;
    item.mode = AnswerMode::MultiSelect;
    item.question_text = task_question_text(task);
    item.background = assemble_background(seg, task);

    std::vector<std::pair<std::string, OptionSource>> texts;
    for (const GoldItem& g : gold) texts.emplace_back(g.text, OptionSource::Gold);
    for (size_t pick : rng.sample_indices(candidates.size(), need))
        texts.emplace_back(candidates[pick], OptionSource::EhrDistractor);
    assign_letters(item, std::move(texts), rng);
    return item;
}

namespace {

constexpr std::array<const char*, 6> kActivities = {"swimming",  "driving", "jogging",
                                                    "gardening", "cycling", "stairs"};

std::string summarize_key_points(const std::vector<std::string>& key_points) {
    std::string out;
    for (const std::string& kp : key_points) {
        const auto sentences = split_sentences(kp);
        std::string first =
            sentences.empty() ? trim(kp)
                              : trim(std::string_view(kp).substr(sentences[0].begin,
                                                                 sentences[0].size()));
        while (!first.empty() && (first.back() == '.' || first.back() == '!')) first.pop_back();
        if (first.empty()) continue;
        if (!out.empty()) out += "; ";
        out += first;
    }
    out += ".";
    return out;
}

} // namespace

std::vector<std::string> DefaultPermuter::permute(const std::vector<std::string>& key_points,
                                                  const AdmissionRecord& adm,
                                                  const Cohort& cohort, size_t variant,
                                                  Rng& rng) {
    std::vector<std::string> out = key_points;
    if (out.empty()) return out;

    auto last_word = [](const std::string& s) -> std::pair<size_t, std::string> {
        const auto tokens = tokenize(s);
        if (tokens.empty()) return {std::string::npos, ""};
        const Token& t = tokens.back();
        return {t.span.begin, s.substr(t.span.begin, t.span.size())};
    };

    switch (variant % 3) {
    case 0: { // swap the trailing attributes of two key points
        if (out.size() < 2) {
            out.front() += " only as needed";
            break;
        }
        size_t i = rng.uniform(out.size());
        size_t j = rng.uniform(out.size() - 1);
        if (j >= i) ++j;
        auto [pi, wi] = last_word(out[i]);
        auto [pj, wj] = last_word(out[j]);
        if (pi == std::string::npos || pj == std::string::npos || wi == wj) {
            std::swap(out[i], out[j]);
        } else {
            out[i] = out[i].substr(0, pi) + wj + out[i].substr(pi + wi.size());
            out[j] = out[j].substr(0, pj) + wi + out[j].substr(pj + wj.size());
        }
        break;
    }
    case 1: { // negate one directive
        size_t i = rng.uniform(out.size());
        const std::string lc = to_lower(out[i]);
        if (lc.rfind("do not ", 0) == 0)
            out[i] = out[i].substr(7);
        else if (lc.rfind("avoid ", 0) == 0)
            out[i] = "Continue " + out[i].substr(6);
        else
            out[i] = "Do not " + to_lower(std::string_view(out[i]).substr(0, 1)) +
                     out[i].substr(1);
        break;
    }
    default: { // substitute a medication/activity token from the EHR
        size_t i = rng.uniform(out.size());
        std::string substitute;
        if (!adm.med_codes.empty()) {
            const std::string& code = adm.med_codes[rng.uniform(adm.med_codes.size())];
            substitute = medication_name_key(cohort.description(CodeKind::Medication, code));
        }
        if (substitute.empty()) substitute = kActivities[rng.uniform(kActivities.size())];
        auto [pos, word] = last_word(out[i]);
        if (pos == std::string::npos || word == substitute)
            out[i] += " " + substitute;
        else
            out[i] = out[i].substr(0, pos) + substitute + out[i].substr(pos + word.size());
        break;
    }
    }
    return out;
}

QAItem gen_instruction_item(const AdmissionRecord& adm, const SegmentedNote& seg,
                            const Cohort& cohort, const GenParams& params, Rng& rng,
                            InstructionPermuter& permuter, const SegmenterConfig& config) {
    const std::vector<GoldItem> gold = extract_gold(seg, TaskKind::InstructionInference, config);
    const std::vector<std::string> key_points = split_list_items(gold.at(0).text);
    if (key_points.size() < params.min_bullets)
        throw Error(errc::too_few_key_points,
                    "instruction has " + std::to_string(key_points.size()) +
                        " key points, need " + std::to_string(params.min_bullets));

    if (params.n_options_single < 2)
        throw Error(errc::bad_param, "single-select items need at least 2 options");

    const std::string gold_text = summarize_key_points(key_points);
    std::set<std::string> used{normalize_text(gold_text)};

    std::vector<std::pair<std::string, OptionSource>> texts;
    texts.emplace_back(gold_text, OptionSource::Gold);
    const size_t need = params.n_options_single - 1;
    for (size_t d = 0; d < need; ++d) {
        std::string text;
        bool ok = false;
        for (size_t attempt = 0; attempt < 8 && !ok; ++attempt) {
            const auto permuted = permuter.permute(key_points, adm, cohort,
                                                   d + attempt * need, rng);
            text = summarize_key_points(permuted);
            ok = used.insert(normalize_text(text)).second;
        }
        if (!ok)
            throw Error(errc::duplicate_options,
                        "could not derive a distinct permuted option");
        texts.emplace_back(std::move(text), OptionSource::PermutedDistractor);
    }

    QAItem item;
    item.question_id = make_question_id(TaskKind::InstructionInference, adm.admission_key);
    item.admission_key = adm.admission_key;
    item.task = TaskKind::InstructionInference;
    item.mode = AnswerMode::SingleSelect;
    item.question_text = task_question_text(TaskKind::InstructionInference);
    item.background = assemble_background(seg, TaskKind::InstructionInference);
    assign_letters(item, std::move(texts), rng);
    return item;
}

Dataset build_dataset(const Cohort& cohort, const GenParams& params,
                      InstructionPermuter* permuter, const SegmenterConfig& config) {
    Dataset out;
    out.manifest.seed = params.seed;
    out.manifest.requested = params.counts;

    DefaultPermuter default_permuter;
    InstructionPermuter& perm = permuter ? *permuter : default_permuter;

    constexpr std::array<TaskKind, 3> tasks = {TaskKind::DiagnosisInference,
                                               TaskKind::MedicationInference,
                                               TaskKind::InstructionInference};

    size_t adm_index = 0;
    for (const auto& [key, adm] : cohort.admissions) {
        ++adm_index;
        if (!adm.has_note()) continue;
        bool quota_left = false;
        for (size_t t = 0; t < 3; ++t)
            quota_left |= out.manifest.generated[t] < params.counts[t];
        if (!quota_left) break;

        SegmentedNote seg = segment_note(adm.note, config);
        seg.admission_key = key;

        for (size_t t = 0; t < 3; ++t) {
            if (out.manifest.generated[t] >= params.counts[t]) continue;
            Rng rng(params.seed ^ (0x517cc1b727220a95ULL * (adm_index * 3 + t + 1)));
            try {
                QAItem item;
                if (tasks[t] == TaskKind::InstructionInference)
                    item = gen_instruction_item(adm, seg, cohort, params, rng, perm, config);
                else
                    item = gen_multiselect_item(adm, seg, tasks[t], cohort, params, rng, config);
                out.items.push_back(std::move(item));
                out.manifest.generated[t]++;
            } catch (const Error& e) {
                out.manifest.skipped[t][e.code()]++;
            }
        }
    }
    return out;
}

std::string DatasetManifest::to_json() const {
    json skipped_json = json::object();
    constexpr std::array<TaskKind, 3> tasks = {TaskKind::DiagnosisInference,
                                               TaskKind::MedicationInference,
                                               TaskKind::InstructionInference};
    json generated_json = json::object();
    json requested_json = json::object();
    for (size_t t = 0; t < 3; ++t) {
        const char* name = task_kind_name(tasks[t]);
        generated_json[name] = generated[t];
        requested_json[name] = requested[t];
        skipped_json[name] = skipped[t];
    }
    json j = {{"seed", seed},
              {"requested", requested_json},
              {"generated", generated_json},
              {"skipped", skipped_json}};
    return j.dump(2);
}

namespace {

json option_to_json(const QAOption& o) {
    return {{"letter", std::string(1, o.letter)},
            {"text", o.text},
            {"source", option_source_name(o.source)}};
}

} // namespace

void write_dataset(std::ostream& out, const std::vector<QAItem>& items) {
    for (const QAItem& item : items) {
        json options = json::array();
        for (const QAOption& o : item.options) options.push_back(option_to_json(o));
        json gold = json::array();
        for (char c : item.gold_letters) gold.push_back(std::string(1, c));
        json j = {{"question_id", item.question_id},
                  {"admission_key", item.admission_key},
                  {"task", task_kind_name(item.task)},
                  {"mode", answer_mode_name(item.mode)},
                  {"question", item.question_text},
                  {"background", item.background},
                  {"options", options},
                  {"gold_letters", gold}};
        out << j.dump() << '\n';
    }
}

std::vector<QAItem> read_dataset(std::istream& in) {
    std::vector<QAItem> items;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw Error(errc::malformed_line, "dataset line " + std::to_string(line_no));
        QAItem item;
        item.question_id = j.value("question_id", "");
        item.admission_key = j.value("admission_key", "");
        auto task = task_kind_from_name(j.value("task", ""));
        if (!task)
            throw Error(errc::malformed_line,
                        "dataset line " + std::to_string(line_no) + ": bad task");
        item.task = *task;
        item.mode = j.value("mode", "multi") == std::string("single") ? AnswerMode::SingleSelect
                                                                      : AnswerMode::MultiSelect;
        item.question_text = j.value("question", "");
        item.background = j.value("background", "");
        for (const json& o : j.value("options", json::array())) {
            QAOption opt;
            const std::string letter = o.value("letter", "A");
            opt.letter = letter.empty() ? 'A' : letter[0];
            opt.text = o.value("text", "");
            const std::string source = o.value("source", "gold");
            opt.source = source == "ehr"        ? OptionSource::EhrDistractor
                         : source == "permuted" ? OptionSource::PermutedDistractor
                                                : OptionSource::Gold;
            item.options.push_back(std::move(opt));
        }
        for (const json& g : j.value("gold_letters", json::array())) {
            const std::string s = g.get<std::string>();
            if (!s.empty()) item.gold_letters.insert(s[0]);
        }
        items.push_back(std::move(item));
    }
    return items;
}

void write_dataset_file(const std::string& path, const std::vector<QAItem>& items) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(errc::io, "cannot write " + path);
    write_dataset(out, items);
}

std::vector<QAItem> read_dataset_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(errc::missing_input, "cannot read " + path);
    return read_dataset(in);
}

} // namespace exprag
