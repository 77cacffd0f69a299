// Python bindings for the core operations: graph construction and search,
// chunking, the mock embedder, the evaluation metrics, and the replay-driven
// index/query/eval entry points.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "ckgrag/error.hpp"
#include "ckgrag/runtime.hpp"
#include "ckgrag/text.hpp"

namespace py = pybind11;
using namespace ckgrag;
using json = nlohmann::json;

namespace {

py::object json_to_py(const json& value) {
    switch (value.type()) {
        case json::value_t::null:
            return py::none();
        case json::value_t::boolean:
            return py::bool_(value.get<bool>());
        case json::value_t::number_integer:
            return py::int_(value.get<long long>());
        case json::value_t::number_unsigned:
            return py::int_(value.get<unsigned long long>());
        case json::value_t::number_float:
            return py::float_(value.get<double>());
        case json::value_t::string:
            return py::str(value.get<std::string>());
        case json::value_t::array: {
            py::list list;
            for (const json& item : value) list.append(json_to_py(item));
            return list;
        }
        case json::value_t::object: {
            py::dict dict;
            for (const auto& [key, item] : value.items()) {
                dict[py::str(key)] = json_to_py(item);
            }
            return dict;
        }
        default:
            return py::none();
    }
}

Embedding embedding_from_values(const std::vector<float>& values) {
    return Embedding::from_raw(values);
}

std::vector<float> embedding_to_values(const Embedding& e) {
    return std::vector<float>(e.values().begin(), e.values().end());
}

py::dict node_to_dict(const EventNode& node) {
    py::dict out;
    out["id"] = node.id;
    out["text"] = node.text;
    out["polarity"] = std::string(to_string(node.polarity));
    py::list sources;
    for (const SourceRef& s : node.sources) {
        py::dict source;
        source["doc_id"] = s.doc_id;
        source["chunk_index"] = s.chunk_index;
        source["char_start"] = s.char_start;
        source["char_end"] = s.char_end;
        source["excerpt"] = s.excerpt;
        sources.append(source);
    }
    out["sources"] = sources;
    return out;
}

}  // namespace

PYBIND11_MODULE(ckgrag, m) {
    m.doc() = "Causal knowledge graph RAG engine";

    py::register_exception<Error>(m, "CkgError");

    m.def("canonical_text", &canonical_text, py::arg("text"));
    m.def("node_id_for", &node_id_for, py::arg("text"));
    m.def(
        "mock_embed",
        [](const std::string& text) { return embedding_to_values(mock_embed(text)); },
        py::arg("text"), "Deterministic 384-dim unit embedding for offline use");

    py::class_<Chunk>(m, "Chunk")
        .def_readonly("doc_id", &Chunk::doc_id)
        .def_readonly("chunk_index", &Chunk::chunk_index)
        .def_readonly("char_start", &Chunk::char_start)
        .def_readonly("char_end", &Chunk::char_end)
        .def_readonly("text", &Chunk::text);

    m.def(
        "chunk_document",
        [](const std::string& doc_id, const std::string& text, std::size_t max_chunk_chars,
           std::size_t overlap_chars) {
            return chunk_document(doc_id, text, ChunkerConfig{max_chunk_chars, overlap_chars});
        },
        py::arg("doc_id"), py::arg("text"), py::arg("max_chunk_chars") = 1200,
        py::arg("overlap_chars") = 200);

    py::class_<SourceRef>(m, "SourceRef")
        .def(py::init([](std::string doc_id, std::uint32_t chunk_index, std::size_t char_start,
                         std::size_t char_end, std::string excerpt) {
                 return SourceRef{std::move(doc_id), chunk_index, char_start, char_end,
                                  std::move(excerpt)};
             }),
             py::arg("doc_id"), py::arg("chunk_index"), py::arg("char_start"),
             py::arg("char_end"), py::arg("excerpt"))
        .def_readonly("doc_id", &SourceRef::doc_id)
        .def_readonly("chunk_index", &SourceRef::chunk_index)
        .def_readonly("char_start", &SourceRef::char_start)
        .def_readonly("char_end", &SourceRef::char_end)
        .def_readonly("excerpt", &SourceRef::excerpt);

    py::class_<CausalChain>(m, "CausalChain")
        .def_readonly("path", &CausalChain::path)
        .def_property_readonly("edges", [](const CausalChain& chain) {
            py::list edges;
            for (const CausalEdge& e : chain.edges) {
                edges.append(py::make_tuple(e.cause_id, e.effect_id, e.source.doc_id));
            }
            return edges;
        });

    py::class_<CausalGraph>(m, "CausalGraph")
        .def(py::init<>())
        .def(
            "add_node",
            [](CausalGraph& graph, const std::string& text, const std::vector<float>& embedding,
               const std::string& polarity, const SourceRef& source) {
                return graph.add_node(text, embedding_from_values(embedding),
                                      polarity_from_string(polarity), source);
            },
            py::arg("text"), py::arg("embedding"), py::arg("polarity"), py::arg("source"))
        .def("add_source", &CausalGraph::add_source, py::arg("node_id"), py::arg("source"))
        .def("add_edge", &CausalGraph::add_edge, py::arg("cause_id"), py::arg("effect_id"),
             py::arg("source"))
        .def(
            "vector_search",
            [](const CausalGraph& graph, const std::vector<float>& query, std::size_t k) {
                py::list hits;
                for (const SearchHit& hit :
                     graph.vector_search(embedding_from_values(query), k)) {
                    hits.append(py::make_tuple(hit.node_id, hit.score));
                }
                return hits;
            },
            py::arg("query"), py::arg("k"))
        .def("traverse_upstream", &CausalGraph::traverse_upstream, py::arg("node_id"),
             py::arg("max_depth"))
        .def("traverse_downstream", &CausalGraph::traverse_downstream, py::arg("node_id"),
             py::arg("max_depth"))
        .def(
            "node",
            [](const CausalGraph& graph, const std::string& node_id) -> py::object {
                auto node = graph.node(node_id);
                if (!node) return py::none();
                return node_to_dict(*node);
            },
            py::arg("node_id"))
        .def("node_ids", &CausalGraph::node_ids)
        .def("node_count", &CausalGraph::node_count)
        .def("edge_count", &CausalGraph::edge_count)
        .def("save",
             [](const CausalGraph& graph, const std::string& dir) { graph.save(dir); })
        .def_static("load",
                    [](const std::string& dir) { return CausalGraph::load(dir); })
        .def("export_dot", [](const CausalGraph& graph, const std::string& file) {
            graph.export_dot(std::filesystem::path(file));
        });

    // Evaluation metrics
    m.def(
        "precision",
        [](const std::set<std::string>& retrieved, const std::set<std::string>& relevant) {
            return precision(RetrievalJudgment::make(retrieved, relevant));
        },
        py::arg("retrieved"), py::arg("relevant"));
    m.def(
        "recall",
        [](const std::set<std::string>& retrieved, const std::set<std::string>& relevant) {
            return recall(RetrievalJudgment::make(retrieved, relevant));
        },
        py::arg("retrieved"), py::arg("relevant"));
    m.def(
        "lj_score", [](int c_score, int fr_score) { return lj_score(JudgeScores{c_score, fr_score}); },
        py::arg("c_score"), py::arg("fr_score"));
    m.def(
        "ccis",
        [](double sim, double lj, double w1, double w2) {
            return ccis(sim, lj, EvalWeights{w1, w2});
        },
        py::arg("sim"), py::arg("lj"), py::arg("w1") = 0.5, py::arg("w2") = 0.5);
    m.def(
        "crs",
        [](double sim, double lj, const std::string& kind, double w1, double w2) {
            return crs(sim, lj, question_kind_from_string(kind), EvalWeights{w1, w2});
        },
        py::arg("sim"), py::arg("lj"), py::arg("kind"), py::arg("w1") = 0.5,
        py::arg("w2") = 0.5);

    // Config + replay-driven pipeline entry points
    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("corpus", &RunConfig::corpus)
        .def_readwrite("graph_dir", &RunConfig::graph_dir)
        .def_readwrite("transcripts", &RunConfig::transcripts)
        .def_readwrite("dataset", &RunConfig::dataset)
        .def_readwrite("prompts_dir", &RunConfig::prompts_dir)
        .def_readwrite("chat_mode", &RunConfig::chat_mode)
        .def_readwrite("embed_mode", &RunConfig::embed_mode)
        .def_readwrite("judge_mode", &RunConfig::judge_mode)
        .def_readwrite("max_chunk_chars", &RunConfig::max_chunk_chars)
        .def_readwrite("overlap_chars", &RunConfig::overlap_chars)
        .def_readwrite("tau_consolidate", &RunConfig::tau_consolidate)
        .def_readwrite("consolidation_k", &RunConfig::consolidation_k)
        .def_readwrite("retrieve_k", &RunConfig::retrieve_k)
        .def_readwrite("d_factual", &RunConfig::d_factual)
        .def_readwrite("d_cf", &RunConfig::d_cf)
        .def_readwrite("baseline_k", &RunConfig::baseline_k)
        .def_readwrite("w1", &RunConfig::w1)
        .def_readwrite("w2", &RunConfig::w2)
        .def_readwrite("max_retries", &RunConfig::max_retries);

    m.def(
        "run_index",
        [](const RunConfig& cfg) {
            RunConfig validated = cfg;
            validated.validate();
            return json_to_py(run_index(validated).to_json());
        },
        py::arg("config"));
    m.def(
        "run_query",
        [](const RunConfig& cfg, const std::string& query) {
            RunConfig validated = cfg;
            validated.validate();
            return json_to_py(run_query(validated, query).to_json());
        },
        py::arg("config"), py::arg("query"));
    m.def(
        "run_eval",
        [](const RunConfig& cfg) {
            RunConfig validated = cfg;
            validated.validate();
            return json_to_py(run_eval_protocol(cfg).to_json());
        },
        py::arg("config"));
}
