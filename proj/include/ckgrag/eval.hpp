#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ckgrag/providers.hpp"

namespace ckgrag {

enum class QuestionKind { Causal, Counterfactual };

const char* to_string(QuestionKind kind);
QuestionKind question_kind_from_string(std::string_view s);

struct EvalQuestion {
    std::string id;
    std::string question;
    std::string ideal_answer;
    std::set<std::string> relevant_doc_ids;
    QuestionKind kind = QuestionKind::Causal;
};

/// JSONL dataset of {id, question, ideal_answer, relevant_doc_ids, kind}.
/// Questions with an empty relevant set are rejected at load time, naming the
/// offending id.
std::vector<EvalQuestion> load_dataset(const std::filesystem::path& file);

/// Document-level retrieval outcome for one question: S_q (retrieved),
/// R_q (relevant retrieved) and R (relevant total).
struct RetrievalJudgment {
    std::set<std::string> retrieved;
    std::set<std::string> relevant_retrieved;
    std::size_t relevant_total = 0;

    static RetrievalJudgment make(const std::set<std::string>& retrieved,
                                  const std::set<std::string>& relevant);
};

struct EvalWeights {
    double w1 = 0.5;
    double w2 = 0.5;

    void validate() const;  // non-negative, sum exactly 1 within 1e-12
};

/// |R_q| / |S_q|; empty retrieval is defined as 0.0 with the flag set.
double precision(const RetrievalJudgment& j, bool* empty_retrieval = nullptr);

/// |R_q| / |R|; requires R >= 1.
double recall(const RetrievalJudgment& j);

/// Cosine of the two answer embeddings, clamped to [0, 1].
double answer_similarity(const std::string& generated, const std::string& ideal,
                         EmbeddingService& embed);

JudgeScores judge(const std::string& question, const std::string& ideal,
                  const std::string& generated, const std::string& context,
                  ChatService& judge_chat);

/// (c_score + fr_score) / 10, so the range is [0.2, 1.0].
double lj_score(const JudgeScores& scores);

/// w1 * sim + w2 * lj.
double ccis(double sim, double lj, const EvalWeights& weights);

/// Same formula, valid only for counterfactual-kind questions.
double crs(double sim, double lj, QuestionKind kind, const EvalWeights& weights);

struct AnswerOutput {
    std::string text;
    std::set<std::string> retrieved_doc_ids;
    std::string context;
};

struct AnswerSystem {
    virtual ~AnswerSystem() = default;
    virtual std::string name() const = 0;
    virtual AnswerOutput answer(const EvalQuestion& question) = 0;
};

struct MetricsRecord {
    std::string question_id;
    std::string system;
    QuestionKind kind = QuestionKind::Causal;
    double precision = 0.0;
    double recall = 0.0;
    double sim = 0.0;
    double lj = 0.0;
    double ccis = 0.0;
    std::optional<double> crs;
    JudgeScores judge;
    bool empty_retrieval = false;
    std::optional<std::string> error;
};

struct SystemAggregate {
    std::size_t questions = 0;
    std::size_t errors = 0;
    // Percent scale means over completed questions.
    double precision_pct = 0.0;
    double recall_pct = 0.0;
    double ccis_pct = 0.0;
    std::optional<double> crs_pct;  // over counterfactual-kind questions only
};

struct MetricsReport {
    nlohmann::json config_snapshot;
    std::string transcript_sha256;
    std::size_t question_count = 0;
    std::vector<MetricsRecord> records;  // ordered by (question id, system)
    std::vector<std::pair<std::string, SystemAggregate>> aggregates;

    nlohmann::json to_json() const;
    std::string to_csv() const;
};

/// Runs every system over every question, scoring each answer with the four
/// metrics. Per-question failures degrade to an error-flagged record.
MetricsReport run_eval(std::span<const EvalQuestion> dataset,
                       std::span<AnswerSystem* const> systems, EmbeddingService& embed,
                       ChatService& judge_chat, const EvalWeights& weights,
                       nlohmann::json config_snapshot, std::string transcript_sha256);

}  // namespace ckgrag
