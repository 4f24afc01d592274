#pragma once

#include <string>
#include <utility>
#include <vector>

#include "covfair/entailment.hpp"

namespace covfair {

struct DecomposerProvider {
    enum class Kind { RuleBased, Remote };
    Kind kind = Kind::RuleBased;
    RemoteConfig remote;  // endpoint required for Kind::Remote

    void validate() const;
};

/// Splits a summary into atomic units.
///
/// The rule-based splitter only splits, never merges or rephrases: first at
/// sentence boundaries, then at top-level semicolons, then at coordinating
/// conjunctions (and, but, or, so, yet) that join two independent clauses.
std::vector<std::string> decompose(const std::string& summary_text,
                                   const DecomposerProvider& provider);

std::vector<std::string> decompose_rule_based(const std::string& summary_text);

/// Batched remote decomposition: POST /v1/decompose {"texts": [...]}.
std::vector<std::vector<std::string>> decompose_remote(const std::vector<std::string>& texts,
                                                       const RemoteConfig& config);

/// Undirected graph over summary units; an edge joins two units that entail
/// each other with probability above the threshold in both directions.
struct EntailmentGraph {
    std::size_t nodes = 0;
    double threshold = 0.95;
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // u < v, sorted
    std::vector<double> probs;  // row-major directed p(u -> v); diagonal unused

    double prob(std::size_t u, std::size_t v) const { return probs[u * nodes + v]; }
    /// Component id per node; ids are numbered by first appearance.
    std::vector<std::size_t> components() const;
};

EntailmentGraph build_entailment_graph(const std::vector<std::string>& units,
                                       EntailmentProvider& scorer, double threshold = 0.95);
EntailmentGraph build_entailment_graph(std::size_t nodes, std::vector<double> directed_probs,
                                       double threshold = 0.95);

/// Keeps one unit per connected component: the one entailing the most other
/// units of its component (lowest index on ties). Original order is kept.
std::vector<std::size_t> dedupe_indices(const EntailmentGraph& graph);
std::vector<std::string> dedupe_units(const std::vector<std::string>& units,
                                      EntailmentProvider& scorer, double threshold = 0.95);

}  // namespace covfair
