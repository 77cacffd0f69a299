// ckgrag: build a causal knowledge graph from documents, answer causal
// queries with counterfactual validation, and compare against a regular RAG
// baseline.

#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ckgrag/error.hpp"
#include "ckgrag/runtime.hpp"
#include "ckgrag/text.hpp"

namespace {

using namespace ckgrag;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitProvider = 3;
constexpr int kExitData = 4;

int exit_code_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::Config:
            return kExitUsage;
        case ErrorKind::ProviderUnavailable:
        case ErrorKind::MalformedAfterRetries:
            return kExitProvider;
        default:
            return kExitData;
    }
}

int cmd_index(const RunConfig& cfg, bool as_json) {
    IndexStats stats = run_index(cfg);
    if (as_json) {
        std::cout << stats.to_json().dump() << "\n";
    } else {
        std::cout << "indexed " << stats.docs << " docs, " << stats.chunks << " chunks, "
                  << stats.pairs << " pairs\n"
                  << "nodes created " << stats.nodes_created << ", reused "
                  << stats.nodes_reused << "; edges added " << stats.edges_added
                  << ", duplicate " << stats.edges_duplicate << "\n";
        for (const ChunkFailure& f : stats.failures) {
            std::cout << "warning: " << f.doc_id << "#" << f.chunk_index << ": " << f.error
                      << "\n";
        }
    }
    return kExitOk;
}

int cmd_query(const RunConfig& cfg, const std::string& query, bool as_json) {
    FinalAnswer answer = run_query(cfg, query);
    if (as_json) {
        std::cout << answer.to_json().dump() << "\n";
    } else {
        std::cout << answer.to_text();
    }
    return kExitOk;
}

int cmd_eval(const RunConfig& cfg) {
    if (cfg.report.empty()) throw Error(ErrorKind::Config, "--report is required");
    MetricsReport report = run_eval_protocol(cfg);

    write_file(cfg.report, report.to_json().dump(2) + "\n");
    std::filesystem::path csv_path(cfg.report);
    csv_path.replace_extension(".csv");
    write_file(csv_path.string(), report.to_csv());

    for (const auto& [name, agg] : report.aggregates) {
        std::cout << name << ": precision " << agg.precision_pct << ", recall "
                  << agg.recall_pct << ", ccis " << agg.ccis_pct;
        if (agg.crs_pct) std::cout << ", crs " << *agg.crs_pct;
        if (agg.errors > 0) std::cout << " (" << agg.errors << " errors)";
        std::cout << "\n";
    }
    std::cout << "report written to " << cfg.report << "\n";
    return kExitOk;
}

int cmd_export(const RunConfig& cfg, const std::string& format, const std::string& out_path) {
    if (cfg.graph_dir.empty()) throw Error(ErrorKind::Config, "--graph-dir is required");
    CausalGraph graph = CausalGraph::load(cfg.graph_dir);
    std::ostringstream buffer;
    if (format == "dot") {
        graph.export_dot(buffer);
    } else {
        graph.export_records(buffer);
    }
    if (out_path.empty()) {
        std::cout << buffer.str();
    } else {
        write_file(out_path, buffer.str());
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal knowledge graph RAG engine"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand name

    RunConfig cfg;
    app.set_config("--config");
    app.allow_config_extras(false);

    app.add_option("--corpus", cfg.corpus, "Corpus directory or JSONL file");
    app.add_option("--graph-dir", cfg.graph_dir, "Graph directory");
    app.add_option("--transcripts", cfg.transcripts, "Provider transcript file");
    app.add_option("--dataset", cfg.dataset, "Evaluation dataset (JSONL)");
    app.add_option("--report", cfg.report, "Evaluation report output path");
    app.add_option("--prompts-dir", cfg.prompts_dir, "Prompt template directory");

    std::string mode;
    app.add_option("--mode", mode, "Provider mode for chat and judge")
        ->check(CLI::IsMember({"live", "record", "replay"}));
    app.add_option("--chat-mode", cfg.chat_mode, "Chat provider mode")
        ->check(CLI::IsMember({"live", "record", "replay"}));
    app.add_option("--judge-mode", cfg.judge_mode, "Judge provider mode")
        ->check(CLI::IsMember({"live", "record", "replay"}));
    app.add_option("--embed-mode", cfg.embed_mode, "Embedding provider mode")
        ->check(CLI::IsMember({"mock", "live", "record", "replay"}));

    app.add_option("--max-chunk-chars", cfg.max_chunk_chars, "Chunk window size");
    app.add_option("--overlap-chars", cfg.overlap_chars, "Chunk overlap");
    app.add_option("--tau-consolidate", cfg.tau_consolidate, "Consolidation cosine threshold");
    app.add_option("--consolidation-k", cfg.consolidation_k, "Consolidation candidate count");
    app.add_option("--retrieve-k", cfg.retrieve_k, "Retrieval candidate count");
    app.add_option("--d-factual", cfg.d_factual, "Factual traversal depth");
    app.add_option("--d-cf", cfg.d_cf, "Counterfactual traversal depth");
    app.add_option("--baseline-k", cfg.baseline_k, "Baseline retrieval depth");
    app.add_option("--w1", cfg.w1, "Similarity weight");
    app.add_option("--w2", cfg.w2, "Judge weight");
    app.add_option("--max-retries", cfg.max_retries, "Chat attempt budget");

    bool as_json = false;
    app.add_flag("--json", as_json, "Machine-readable output");

    CLI::App* index_cmd = app.add_subcommand("index", "Build the graph and baseline index");
    CLI::App* query_cmd = app.add_subcommand("query", "Answer a causal query");
    std::string query_text;
    query_cmd->add_option("query", query_text, "The question to answer")->required();
    CLI::App* eval_cmd = app.add_subcommand("eval", "Compare causal and baseline systems");
    CLI::App* export_cmd = app.add_subcommand("export", "Export the graph");
    std::string export_format = "dot";
    std::string export_out;
    export_cmd->add_option("--format", export_format, "Export format")
        ->check(CLI::IsMember({"dot", "records"}));
    export_cmd->add_option("--out", export_out, "Output file (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return kExitUsage;
    }

    if (!mode.empty()) {
        cfg.chat_mode = mode;
        cfg.judge_mode = mode;
    }

    try {
        cfg.validate();
        if (index_cmd->parsed()) return cmd_index(cfg, as_json);
        if (query_cmd->parsed()) return cmd_query(cfg, query_text, as_json);
        if (eval_cmd->parsed()) return cmd_eval(cfg);
        if (export_cmd->parsed()) return cmd_export(cfg, export_format, export_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
