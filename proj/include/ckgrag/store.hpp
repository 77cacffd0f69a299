#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "ckgrag/embedding.hpp"

namespace ckgrag {

enum class Polarity { Increase, Decrease, Presence, Absence, Neutral };

const char* to_string(Polarity p);
Polarity polarity_from_string(std::string_view s);

/// Verbatim provenance: `excerpt` equals the document slice at
/// [char_start, char_end).
struct SourceRef {
    std::string doc_id;
    std::uint32_t chunk_index = 0;
    std::size_t char_start = 0;
    std::size_t char_end = 0;
    std::string excerpt;

    auto key() const {
        return std::tie(doc_id, chunk_index, char_start, char_end);
    }
    bool operator==(const SourceRef& o) const { return key() == o.key() && excerpt == o.excerpt; }
};

struct EventNode {
    std::string id;  // sha256 of canonical text
    std::string text;
    Embedding embedding;
    Polarity polarity = Polarity::Neutral;
    std::vector<SourceRef> sources;
};

struct CausalEdge {
    std::string cause_id;
    std::string effect_id;
    SourceRef source;
};

/// A simple path through the graph, listed cause-first; `edges[i]` links
/// `path[i]` to `path[i+1]`.
struct CausalChain {
    std::vector<std::string> path;
    std::vector<CausalEdge> edges;
};

struct SearchHit {
    std::string node_id;
    double score = 0.0;
};

/// Node id for a given event text (content hash of the canonical form).
std::string node_id_for(std::string_view text);

/// Embedded causal knowledge graph. Single writer / multiple readers:
/// mutations take an exclusive lock, reads a shared one.
class CausalGraph {
public:
    CausalGraph() = default;
    CausalGraph(CausalGraph&&) noexcept;
    CausalGraph& operator=(CausalGraph&&) noexcept;

    /// Inserts or reuses the node for `text`. A second call with the same
    /// canonical text appends `source` and leaves text/polarity untouched.
    std::string add_node(std::string_view text, const Embedding& embedding,
                         Polarity polarity, const SourceRef& source);

    /// Appends a provenance record to an existing node.
    void add_source(const std::string& node_id, const SourceRef& source);

    /// Returns true when a new edge was stored, false for an exact duplicate
    /// (cause, effect, source) triple.
    bool add_edge(const std::string& cause_id, const std::string& effect_id,
                  const SourceRef& source);

    bool has_node(const std::string& node_id) const;
    std::optional<EventNode> node(const std::string& node_id) const;
    std::size_t node_count() const;
    std::size_t edge_count() const;
    std::vector<std::string> node_ids() const;
    std::vector<EventNode> nodes_snapshot() const;
    std::vector<CausalEdge> edges_snapshot() const;

    /// Exact top-k by cosine: exhaustive scan, descending score, ties broken
    /// by ascending node id. Returns min(k, node_count()) hits.
    std::vector<SearchHit> vector_search(const Embedding& query, std::size_t k) const;

    /// All simple paths of at most `max_depth` edges ending at `node_id`,
    /// ordered lexicographically by the path's id sequence.
    std::vector<CausalChain> traverse_upstream(const std::string& node_id,
                                               std::size_t max_depth) const;

    /// Mirror image: simple paths starting at `node_id`.
    std::vector<CausalChain> traverse_downstream(const std::string& node_id,
                                                 std::size_t max_depth) const;

    /// Every stored edge between the two nodes (one per source).
    std::vector<CausalEdge> edges_between(const std::string& cause_id,
                                          const std::string& effect_id) const;

    void save(const std::filesystem::path& dir) const;
    static CausalGraph load(const std::filesystem::path& dir);

    void export_dot(std::ostream& out) const;
    void export_dot(const std::filesystem::path& file) const;
    void export_records(std::ostream& out) const;

private:
    std::vector<CausalChain> traverse(const std::string& node_id, std::size_t max_depth,
                                      bool upstream) const;
    CausalEdge canonical_edge(const std::string& cause_id, const std::string& effect_id) const;

    mutable std::shared_mutex mutex_;
    std::map<std::string, EventNode> nodes_;
    std::vector<CausalEdge> edges_;
    // node id -> indices into edges_
    std::map<std::string, std::vector<std::size_t>> out_edges_;
    std::map<std::string, std::vector<std::size_t>> in_edges_;
    std::set<std::string> edge_keys_;
};

}  // namespace ckgrag
