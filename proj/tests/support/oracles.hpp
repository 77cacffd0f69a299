#pragma once

// Independent reference implementations used to cross-check the engine.
// These deliberately share no code with the production paths they verify.

#include <string>
#include <utility>
#include <vector>

#include "ckgrag/store.hpp"

namespace ckgrag::testing {

/// Exhaustive cosine ranking: reverse-order double accumulation, explicit
/// (score desc, id asc) comparator.
std::vector<std::pair<std::string, double>> oracle_top_k(
    const std::vector<EventNode>& nodes, std::span<const float, Embedding::kDim> query,
    std::size_t k);

/// All simple paths with at most `max_depth` edges ending at `target`,
/// root-first, sorted lexicographically by id sequence.
std::vector<std::vector<std::string>> oracle_paths_to(const std::vector<CausalEdge>& edges,
                                                      const std::string& target,
                                                      std::size_t max_depth);

/// Mirror: simple paths starting at `start`.
std::vector<std::vector<std::string>> oracle_paths_from(const std::vector<CausalEdge>& edges,
                                                        const std::string& start,
                                                        std::size_t max_depth);

/// Minimal DOT digraph grammar checker (quoted ids, attribute lists,
/// edge statements). Returns false and fills `error` on the first violation.
bool dot_parses(const std::string& text, std::string* error);

}  // namespace ckgrag::testing
