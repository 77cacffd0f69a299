#include "ckgrag/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ckgrag/error.hpp"
#include "ckgrag/text.hpp"

namespace ckgrag {

using json = nlohmann::json;

const char* to_string(QuestionKind kind) {
    return kind == QuestionKind::Causal ? "causal" : "counterfactual";
}

QuestionKind question_kind_from_string(std::string_view s) {
    if (s == "causal") return QuestionKind::Causal;
    if (s == "counterfactual") return QuestionKind::Counterfactual;
    throw Error(ErrorKind::CorruptFile, "unknown question kind: " + std::string(s));
}

std::vector<EvalQuestion> load_dataset(const std::filesystem::path& file) {
    std::string content = read_file(file.string());
    std::istringstream in(content);
    std::string line;
    std::vector<EvalQuestion> questions;
    std::set<std::string> seen_ids;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::CorruptFile, "dataset line " + std::to_string(line_no) +
                                                    " is not valid JSON: " + e.what());
        }
        EvalQuestion q;
        q.id = record.at("id").get<std::string>();
        q.question = record.at("question").get<std::string>();
        q.ideal_answer = record.at("ideal_answer").get<std::string>();
        for (const json& doc : record.at("relevant_doc_ids")) {
            q.relevant_doc_ids.insert(doc.get<std::string>());
        }
        q.kind = question_kind_from_string(record.at("kind").get<std::string>());
        if (q.ideal_answer.empty()) {
            throw Error(ErrorKind::CorruptFile, "question " + q.id + " has an empty ideal answer");
        }
        if (q.relevant_doc_ids.empty()) {
            throw Error(ErrorKind::NoRelevantDocs,
                        "question " + q.id + " has no relevant documents");
        }
        if (!seen_ids.insert(q.id).second) {
            throw Error(ErrorKind::CorruptFile, "duplicate question id: " + q.id);
        }
        questions.push_back(std::move(q));
    }
    if (questions.empty()) {
        throw Error(ErrorKind::EmptyInput, "dataset is empty: " + file.string());
    }
    return questions;
}

RetrievalJudgment RetrievalJudgment::make(const std::set<std::string>& retrieved,
                                          const std::set<std::string>& relevant) {
    RetrievalJudgment j;
    j.retrieved = retrieved;
    std::set_intersection(retrieved.begin(), retrieved.end(), relevant.begin(), relevant.end(),
                          std::inserter(j.relevant_retrieved, j.relevant_retrieved.begin()));
    j.relevant_total = relevant.size();
    return j;
}

void EvalWeights::validate() const {
    if (w1 < 0.0 || w2 < 0.0) {
        throw Error(ErrorKind::Config, "weights must be non-negative");
    }
    if (std::abs((w1 + w2) - 1.0) > 1e-12) {
        throw Error(ErrorKind::Config, "w1 + w2 must equal 1");
    }
}

double precision(const RetrievalJudgment& j, bool* empty_retrieval) {
    if (empty_retrieval != nullptr) *empty_retrieval = j.retrieved.empty();
    if (j.retrieved.empty()) return 0.0;
    return static_cast<double>(j.relevant_retrieved.size()) /
           static_cast<double>(j.retrieved.size());
}

double recall(const RetrievalJudgment& j) {
    if (j.relevant_total == 0) {
        throw Error(ErrorKind::NoRelevantDocs, "recall is undefined when R = 0");
    }
    return static_cast<double>(j.relevant_retrieved.size()) /
           static_cast<double>(j.relevant_total);
}

double answer_similarity(const std::string& generated, const std::string& ideal,
                         EmbeddingService& embed) {
    if (generated.empty() || ideal.empty()) {
        throw Error(ErrorKind::EmptyInput, "answer similarity requires non-empty texts");
    }
    double cosine = embed.embed_one(generated).dot(embed.embed_one(ideal));
    return std::clamp(cosine, 0.0, 1.0);
}

JudgeScores judge(const std::string& question, const std::string& ideal,
                  const std::string& generated, const std::string& context,
                  ChatService& judge_chat) {
    if (question.empty() || ideal.empty() || generated.empty() || context.empty()) {
        throw Error(ErrorKind::EmptyInput, "judge requires non-empty fields");
    }
    json response = judge_chat.chat(PromptKind::JudgeAnswer,
                                    json{{"question", question},
                                         {"ideal_answer", ideal},
                                         {"generated_answer", generated},
                                         {"context", context}});
    return JudgeScores{response.at("c_score").get<int>(), response.at("fr_score").get<int>()};
}

double lj_score(const JudgeScores& scores) {
    return static_cast<double>(scores.c_score + scores.fr_score) / 10.0;
}

double ccis(double sim, double lj, const EvalWeights& weights) {
    weights.validate();
    return weights.w1 * sim + weights.w2 * lj;
}

double crs(double sim, double lj, QuestionKind kind, const EvalWeights& weights) {
    if (kind != QuestionKind::Counterfactual) {
        throw Error(ErrorKind::QuestionKindMismatch,
                    "CRS applies to counterfactual-kind questions only");
    }
    return ccis(sim, lj, weights);
}

json MetricsReport::to_json() const {
    json records_json = json::array();
    for (const MetricsRecord& r : records) {
        json record{{"question_id", r.question_id},
                    {"system", r.system},
                    {"kind", to_string(r.kind)},
                    {"precision", r.precision},
                    {"recall", r.recall},
                    {"sim", r.sim},
                    {"lj", r.lj},
                    {"ccis", r.ccis},
                    {"c_score", r.judge.c_score},
                    {"fr_score", r.judge.fr_score},
                    {"empty_retrieval", r.empty_retrieval}};
        if (r.crs) record["crs"] = *r.crs;
        if (r.error) record["error"] = *r.error;
        records_json.push_back(std::move(record));
    }
    json aggregates_json = json::object();
    for (const auto& [name, agg] : aggregates) {
        json entry{{"questions", agg.questions},
                   {"errors", agg.errors},
                   {"precision_pct", agg.precision_pct},
                   {"recall_pct", agg.recall_pct},
                   {"ccis_pct", agg.ccis_pct}};
        if (agg.crs_pct) entry["crs_pct"] = *agg.crs_pct;
        aggregates_json[name] = std::move(entry);
    }
    return json{{"config", config_snapshot},
                {"transcript_sha256", transcript_sha256},
                {"question_count", question_count},
                {"records", records_json},
                {"aggregates", aggregates_json}};
}

std::string MetricsReport::to_csv() const {
    std::ostringstream out;
    out << "question_id,system,kind,precision,recall,sim,lj,ccis,crs,c_score,fr_score,error\n";
    for (const MetricsRecord& r : records) {
        out << r.question_id << ',' << r.system << ',' << to_string(r.kind) << ','
            << r.precision << ',' << r.recall << ',' << r.sim << ',' << r.lj << ','
            << r.ccis << ',';
        if (r.crs) out << *r.crs;
        out << ',' << r.judge.c_score << ',' << r.judge.fr_score << ',';
        if (r.error) {
            std::string sanitized = *r.error;
            std::replace(sanitized.begin(), sanitized.end(), ',', ';');
            std::replace(sanitized.begin(), sanitized.end(), '\n', ' ');
            out << sanitized;
        }
        out << '\n';
    }
    return out.str();
}

MetricsReport run_eval(std::span<const EvalQuestion> dataset,
                       std::span<AnswerSystem* const> systems, EmbeddingService& embed,
                       ChatService& judge_chat, const EvalWeights& weights,
                       json config_snapshot, std::string transcript_sha256) {
    if (dataset.empty()) throw Error(ErrorKind::EmptyInput, "dataset is empty");
    if (systems.empty()) throw Error(ErrorKind::EmptyInput, "no systems to evaluate");
    weights.validate();

    MetricsReport report;
    report.config_snapshot = std::move(config_snapshot);
    report.transcript_sha256 = std::move(transcript_sha256);
    report.question_count = dataset.size();

    std::vector<const EvalQuestion*> ordered;
    for (const EvalQuestion& q : dataset) ordered.push_back(&q);
    std::sort(ordered.begin(), ordered.end(),
              [](const EvalQuestion* a, const EvalQuestion* b) { return a->id < b->id; });

    for (const EvalQuestion* question : ordered) {
        for (AnswerSystem* system : systems) {
            MetricsRecord record;
            record.question_id = question->id;
            record.system = system->name();
            record.kind = question->kind;
            try {
                AnswerOutput output = system->answer(*question);
                auto judgment =
                    RetrievalJudgment::make(output.retrieved_doc_ids, question->relevant_doc_ids);
                record.precision = precision(judgment, &record.empty_retrieval);
                record.recall = recall(judgment);
                record.sim = answer_similarity(output.text, question->ideal_answer, embed);
                record.judge = judge(question->question, question->ideal_answer, output.text,
                                     output.context.empty() ? "(no context)" : output.context,
                                     judge_chat);
                record.lj = lj_score(record.judge);
                record.ccis = ccis(record.sim, record.lj, weights);
                if (question->kind == QuestionKind::Counterfactual) {
                    record.crs = crs(record.sim, record.lj, question->kind, weights);
                }
            } catch (const Error& e) {
                record.error = e.what();
            }
            report.records.push_back(std::move(record));
        }
    }

    for (AnswerSystem* system : systems) {
        SystemAggregate agg;
        double precision_sum = 0.0, recall_sum = 0.0, ccis_sum = 0.0, crs_sum = 0.0;
        std::size_t complete = 0, cf_count = 0;
        for (const MetricsRecord& r : report.records) {
            if (r.system != system->name()) continue;
            ++agg.questions;
            if (r.error) {
                ++agg.errors;
                continue;
            }
            ++complete;
            precision_sum += r.precision;
            recall_sum += r.recall;
            ccis_sum += r.ccis;
            if (r.crs) {
                crs_sum += *r.crs;
                ++cf_count;
            }
        }
        if (complete > 0) {
            agg.precision_pct = 100.0 * precision_sum / static_cast<double>(complete);
            agg.recall_pct = 100.0 * recall_sum / static_cast<double>(complete);
            agg.ccis_pct = 100.0 * ccis_sum / static_cast<double>(complete);
        }
        if (cf_count > 0) agg.crs_pct = 100.0 * crs_sum / static_cast<double>(cf_count);
        report.aggregates.emplace_back(system->name(), agg);
    }
    return report;
}

}  // namespace ckgrag
