#include "ckgrag/store.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ckgrag/error.hpp"
#include "ckgrag/text.hpp"

namespace ckgrag {

using json = nlohmann::json;

const char* to_string(Polarity p) {
    switch (p) {
        case Polarity::Increase: return "increase";
        case Polarity::Decrease: return "decrease";
        case Polarity::Presence: return "presence";
        case Polarity::Absence: return "absence";
        case Polarity::Neutral: return "neutral";
    }
    return "neutral";
}

Polarity polarity_from_string(std::string_view s) {
    if (s == "increase") return Polarity::Increase;
    if (s == "decrease") return Polarity::Decrease;
    if (s == "presence") return Polarity::Presence;
    if (s == "absence") return Polarity::Absence;
    if (s == "neutral") return Polarity::Neutral;
    throw Error(ErrorKind::CorruptFile, "unknown polarity: " + std::string(s));
}

std::string node_id_for(std::string_view text) {
    std::string canonical = canonical_text(text);
    if (canonical.empty()) throw Error(ErrorKind::EmptyText, "event text is empty");
    return sha256_hex(canonical);
}

namespace {

std::string source_key(const SourceRef& s) {
    std::ostringstream out;
    out << s.doc_id << '\x1f' << s.chunk_index << '\x1f' << s.char_start << '\x1f'
        << s.char_end;
    return out.str();
}

std::string edge_key(const std::string& cause, const std::string& effect,
                     const SourceRef& source) {
    return cause + '\x1f' + effect + '\x1f' + source_key(source);
}

void validate_source(const SourceRef& s) {
    if (s.char_start >= s.char_end) {
        throw Error(ErrorKind::CorruptFile,
                    "source range is empty or inverted for doc " + s.doc_id);
    }
}

json source_to_json(const SourceRef& s) {
    return json{{"doc_id", s.doc_id},
                {"chunk_index", s.chunk_index},
                {"char_start", s.char_start},
                {"char_end", s.char_end},
                {"excerpt", s.excerpt}};
}

SourceRef source_from_json(const json& j) {
    SourceRef s;
    s.doc_id = j.at("doc_id").get<std::string>();
    s.chunk_index = j.at("chunk_index").get<std::uint32_t>();
    s.char_start = j.at("char_start").get<std::size_t>();
    s.char_end = j.at("char_end").get<std::size_t>();
    s.excerpt = j.at("excerpt").get<std::string>();
    validate_source(s);
    return s;
}

bool edge_before(const CausalEdge* a, const CausalEdge* b) {
    if (a->cause_id != b->cause_id) return a->cause_id < b->cause_id;
    if (a->effect_id != b->effect_id) return a->effect_id < b->effect_id;
    return a->source.key() < b->source.key();
}

std::vector<const CausalEdge*> ordered_edges(const std::vector<CausalEdge>& edges) {
    std::vector<const CausalEdge*> out;
    out.reserve(edges.size());
    for (const CausalEdge& e : edges) out.push_back(&e);
    std::sort(out.begin(), out.end(), edge_before);
    return out;
}

std::string dot_escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (c == '"' || c == '\\') {
            out.push_back('\\');
            out.push_back(c);
        } else if (c == '\n') {
            out += "\\n";
        } else {
            out.push_back(c);
        }
    }
    return out;
}

constexpr int kFormatVersion = 1;

}  // namespace

CausalGraph::CausalGraph(CausalGraph&& other) noexcept {
    std::unique_lock lock(other.mutex_);
    nodes_ = std::move(other.nodes_);
    edges_ = std::move(other.edges_);
    out_edges_ = std::move(other.out_edges_);
    in_edges_ = std::move(other.in_edges_);
    edge_keys_ = std::move(other.edge_keys_);
}

CausalGraph& CausalGraph::operator=(CausalGraph&& other) noexcept {
    if (this != &other) {
        std::scoped_lock lock(mutex_, other.mutex_);
        nodes_ = std::move(other.nodes_);
        edges_ = std::move(other.edges_);
        out_edges_ = std::move(other.out_edges_);
        in_edges_ = std::move(other.in_edges_);
        edge_keys_ = std::move(other.edge_keys_);
    }
    return *this;
}

std::string CausalGraph::add_node(std::string_view text, const Embedding& embedding,
                                  Polarity polarity, const SourceRef& source) {
    std::string canonical = canonical_text(text);
    if (canonical.empty()) throw Error(ErrorKind::EmptyText, "event text is empty");
    validate_source(source);
    std::string id = sha256_hex(canonical);

    std::unique_lock lock(mutex_);
    auto it = nodes_.find(id);
    if (it != nodes_.end()) {
        it->second.sources.push_back(source);
        return id;
    }
    EventNode node{id, std::string(text), embedding, polarity, {source}};
    nodes_.emplace(id, std::move(node));
    return id;
}

void CausalGraph::add_source(const std::string& node_id, const SourceRef& source) {
    validate_source(source);
    std::unique_lock lock(mutex_);
    auto it = nodes_.find(node_id);
    if (it == nodes_.end()) throw Error(ErrorKind::UnknownNode, node_id);
    it->second.sources.push_back(source);
}

bool CausalGraph::add_edge(const std::string& cause_id, const std::string& effect_id,
                           const SourceRef& source) {
    validate_source(source);
    if (cause_id == effect_id) {
        throw Error(ErrorKind::SelfLoop, "cause and effect are the same node: " + cause_id);
    }
    std::unique_lock lock(mutex_);
    if (!nodes_.count(cause_id)) throw Error(ErrorKind::UnknownNode, cause_id);
    if (!nodes_.count(effect_id)) throw Error(ErrorKind::UnknownNode, effect_id);
    std::string key = edge_key(cause_id, effect_id, source);
    if (!edge_keys_.insert(key).second) return false;
    std::size_t index = edges_.size();
    edges_.push_back(CausalEdge{cause_id, effect_id, source});
    out_edges_[cause_id].push_back(index);
    in_edges_[effect_id].push_back(index);
    return true;
}

bool CausalGraph::has_node(const std::string& node_id) const {
    std::shared_lock lock(mutex_);
    return nodes_.count(node_id) > 0;
}

std::optional<EventNode> CausalGraph::node(const std::string& node_id) const {
    std::shared_lock lock(mutex_);
    auto it = nodes_.find(node_id);
    if (it == nodes_.end()) return std::nullopt;
    return it->second;
}

std::size_t CausalGraph::node_count() const {
    std::shared_lock lock(mutex_);
    return nodes_.size();
}

std::size_t CausalGraph::edge_count() const {
    std::shared_lock lock(mutex_);
    return edges_.size();
}

std::vector<std::string> CausalGraph::node_ids() const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> out;
    out.reserve(nodes_.size());
    for (const auto& [id, _] : nodes_) out.push_back(id);
    return out;
}

std::vector<EventNode> CausalGraph::nodes_snapshot() const {
    std::shared_lock lock(mutex_);
    std::vector<EventNode> out;
    out.reserve(nodes_.size());
    for (const auto& [_, node] : nodes_) out.push_back(node);
    return out;
}

std::vector<CausalEdge> CausalGraph::edges_snapshot() const {
    std::shared_lock lock(mutex_);
    return edges_;
}

std::vector<SearchHit> CausalGraph::vector_search(const Embedding& query,
                                                  std::size_t k) const {
    std::shared_lock lock(mutex_);
    std::vector<SearchHit> hits;
    hits.reserve(nodes_.size());
    // Map iteration is id-ascending, so a stable sort on score keeps the
    // required tie-break for free.
    for (const auto& [id, node] : nodes_) {
        hits.push_back(SearchHit{id, query.dot(node.embedding)});
    }
    std::stable_sort(hits.begin(), hits.end(),
                     [](const SearchHit& a, const SearchHit& b) { return a.score > b.score; });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

std::vector<CausalChain> CausalGraph::traverse_upstream(const std::string& node_id,
                                                        std::size_t max_depth) const {
    return traverse(node_id, max_depth, /*upstream=*/true);
}

std::vector<CausalChain> CausalGraph::traverse_downstream(const std::string& node_id,
                                                          std::size_t max_depth) const {
    return traverse(node_id, max_depth, /*upstream=*/false);
}

std::vector<CausalChain> CausalGraph::traverse(const std::string& node_id,
                                               std::size_t max_depth, bool upstream) const {
    std::shared_lock lock(mutex_);
    if (!nodes_.count(node_id)) throw Error(ErrorKind::UnknownNode, node_id);

    const auto& link_index = upstream ? in_edges_ : out_edges_;
    auto neighbors = [&](const std::string& id) {
        std::set<std::string> distinct;
        auto it = link_index.find(id);
        if (it != link_index.end()) {
            for (std::size_t edge_index : it->second) {
                const CausalEdge& e = edges_[edge_index];
                distinct.insert(upstream ? e.cause_id : e.effect_id);
            }
        }
        return distinct;
    };

    // Simple paths only: the per-path visited set guarantees termination on
    // cyclic graphs.
    std::vector<std::vector<std::string>> sequences;
    std::vector<std::string> path{node_id};
    std::set<std::string> on_path{node_id};

    auto dfs = [&](auto&& self, const std::string& current) -> void {
        if (path.size() > max_depth) return;
        for (const std::string& next : neighbors(current)) {
            if (on_path.count(next)) continue;
            path.push_back(next);
            on_path.insert(next);
            sequences.push_back(path);
            self(self, next);
            on_path.erase(next);
            path.pop_back();
        }
    };
    dfs(dfs, node_id);

    // Orient every path cause-first.
    std::vector<CausalChain> chains;
    chains.reserve(sequences.size());
    for (auto& seq : sequences) {
        if (upstream) std::reverse(seq.begin(), seq.end());
        CausalChain chain;
        chain.path = std::move(seq);
        for (std::size_t i = 0; i + 1 < chain.path.size(); ++i) {
            chain.edges.push_back(canonical_edge(chain.path[i], chain.path[i + 1]));
        }
        chains.push_back(std::move(chain));
    }
    std::sort(chains.begin(), chains.end(),
              [](const CausalChain& a, const CausalChain& b) { return a.path < b.path; });
    return chains;
}

CausalEdge CausalGraph::canonical_edge(const std::string& cause_id,
                                       const std::string& effect_id) const {
    const CausalEdge* best = nullptr;
    auto it = out_edges_.find(cause_id);
    if (it != out_edges_.end()) {
        for (std::size_t edge_index : it->second) {
            const CausalEdge& e = edges_[edge_index];
            if (e.effect_id != effect_id) continue;
            if (best == nullptr || e.source.key() < best->source.key()) best = &e;
        }
    }
    if (best == nullptr) {
        throw Error(ErrorKind::UnknownNode,
                    "no stored edge between " + cause_id + " and " + effect_id);
    }
    return *best;
}

std::vector<CausalEdge> CausalGraph::edges_between(const std::string& cause_id,
                                                   const std::string& effect_id) const {
    std::shared_lock lock(mutex_);
    std::vector<CausalEdge> out;
    auto it = out_edges_.find(cause_id);
    if (it != out_edges_.end()) {
        for (std::size_t edge_index : it->second) {
            if (edges_[edge_index].effect_id == effect_id) out.push_back(edges_[edge_index]);
        }
    }
    std::sort(out.begin(), out.end(), [](const CausalEdge& a, const CausalEdge& b) {
        return a.source.key() < b.source.key();
    });
    return out;
}

void CausalGraph::save(const std::filesystem::path& dir) const {
    std::shared_lock lock(mutex_);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());

    std::string nodes_payload;
    for (const auto& [id, node] : nodes_) {
        json sources = json::array();
        for (const SourceRef& s : node.sources) sources.push_back(source_to_json(s));
        json record{{"id", id},
                    {"text", node.text},
                    {"polarity", to_string(node.polarity)},
                    {"embedding", node.embedding.to_base64()},
                    {"sources", sources}};
        nodes_payload += record.dump();
        nodes_payload += '\n';
    }

    std::string edges_payload;
    for (const CausalEdge* e : ordered_edges(edges_)) {
        json record{{"cause_id", e->cause_id},
                    {"effect_id", e->effect_id},
                    {"source", source_to_json(e->source)}};
        edges_payload += record.dump();
        edges_payload += '\n';
    }

    json manifest{{"format_version", kFormatVersion},
                  {"node_count", nodes_.size()},
                  {"edge_count", edges_.size()},
                  {"checksum", sha256_hex(nodes_payload + edges_payload)}};

    write_file((dir / "nodes").string(), nodes_payload);
    write_file((dir / "edges").string(), edges_payload);
    write_file((dir / "manifest").string(), manifest.dump() + "\n");
}

CausalGraph CausalGraph::load(const std::filesystem::path& dir) {
    std::string manifest_text = read_file((dir / "manifest").string());
    json manifest;
    try {
        manifest = json::parse(manifest_text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::CorruptFile, std::string("manifest is not valid JSON: ") + e.what());
    }
    int version = manifest.value("format_version", -1);
    if (version != kFormatVersion) {
        throw Error(ErrorKind::FormatVersionMismatch,
                    "expected format_version " + std::to_string(kFormatVersion) + ", found " +
                        std::to_string(version));
    }

    std::string nodes_payload = read_file((dir / "nodes").string());
    std::string edges_payload = read_file((dir / "edges").string());
    std::string expected = manifest.value("checksum", "");
    if (sha256_hex(nodes_payload + edges_payload) != expected) {
        throw Error(ErrorKind::CorruptFile, "checksum mismatch in " + dir.string());
    }

    CausalGraph graph;
    auto parse_lines = [](const std::string& payload, auto&& handler) {
        std::istringstream in(payload);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json record;
            try {
                record = json::parse(line);
            } catch (const json::exception& e) {
                throw Error(ErrorKind::CorruptFile, std::string("bad record: ") + e.what());
            }
            handler(record);
        }
    };

    parse_lines(nodes_payload, [&](const json& record) {
        EventNode node{record.at("id").get<std::string>(),
                       record.at("text").get<std::string>(),
                       Embedding::from_base64(record.at("embedding").get<std::string>()),
                       polarity_from_string(record.at("polarity").get<std::string>()),
                       {}};
        if (node_id_for(node.text) != node.id) {
            throw Error(ErrorKind::CorruptFile, "node id does not match its text: " + node.id);
        }
        for (const json& s : record.at("sources")) node.sources.push_back(source_from_json(s));
        if (node.sources.empty()) {
            throw Error(ErrorKind::CorruptFile, "node without sources: " + node.id);
        }
        if (!graph.nodes_.emplace(node.id, node).second) {
            throw Error(ErrorKind::CorruptFile, "duplicate node record: " + node.id);
        }
    });

    parse_lines(edges_payload, [&](const json& record) {
        std::string cause = record.at("cause_id").get<std::string>();
        std::string effect = record.at("effect_id").get<std::string>();
        SourceRef source = source_from_json(record.at("source"));
        try {
            if (!graph.add_edge(cause, effect, source)) {
                throw Error(ErrorKind::CorruptFile, "duplicate edge record");
            }
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::CorruptFile) throw;
            throw Error(ErrorKind::CorruptFile, e.what());
        }
    });

    if (graph.nodes_.size() != manifest.value("node_count", std::size_t{0}) ||
        graph.edges_.size() != manifest.value("edge_count", std::size_t{0})) {
        throw Error(ErrorKind::CorruptFile, "manifest counts do not match records");
    }
    return graph;
}

void CausalGraph::export_dot(std::ostream& out) const {
    std::shared_lock lock(mutex_);
    out << "digraph ckg {\n";
    for (const auto& [id, node] : nodes_) {
        out << "  \"" << id << "\" [label=\"" << dot_escape(node.text) << "\"];\n";
    }
    // One statement per (cause, effect); the tooltip carries every source doc.
    std::map<std::pair<std::string, std::string>, std::set<std::string>> grouped;
    for (const CausalEdge& e : edges_) {
        grouped[{e.cause_id, e.effect_id}].insert(e.source.doc_id);
    }
    for (const auto& [pair, docs] : grouped) {
        std::string joined;
        for (const std::string& d : docs) {
            if (!joined.empty()) joined += ",";
            joined += d;
        }
        out << "  \"" << pair.first << "\" -> \"" << pair.second << "\" [tooltip=\""
            << dot_escape(joined) << "\"];\n";
    }
    out << "}\n";
}

void CausalGraph::export_dot(const std::filesystem::path& file) const {
    std::ostringstream buf;
    export_dot(buf);
    write_file(file.string(), buf.str());
}

void CausalGraph::export_records(std::ostream& out) const {
    std::shared_lock lock(mutex_);
    for (const auto& [id, node] : nodes_) {
        json sources = json::array();
        for (const SourceRef& s : node.sources) sources.push_back(source_to_json(s));
        json record{{"record", "node"},
                    {"id", id},
                    {"text", node.text},
                    {"polarity", to_string(node.polarity)},
                    {"embedding", node.embedding.to_base64()},
                    {"sources", sources}};
        out << record.dump() << "\n";
    }
    for (const CausalEdge* e : ordered_edges(edges_)) {
        json record{{"record", "edge"},
                    {"cause_id", e->cause_id},
                    {"effect_id", e->effect_id},
                    {"source", source_to_json(e->source)}};
        out << record.dump() << "\n";
    }
}

}  // namespace ckgrag
