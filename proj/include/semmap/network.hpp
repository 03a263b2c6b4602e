#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "semmap/matrix.hpp"

namespace semmap {

// Thresholded similarity graph over words. Isolated nodes are kept: a word
// dropping out of the giant component is itself a finding worth showing.
struct CowordNetwork {
    struct Node {
        std::string word;
        std::int64_t frequency = 0;
    };
    struct Edge {
        std::size_t u = 0, v = 0;  // u < v
        double weight = 0.0;
    };

    std::vector<Node> nodes;
    std::vector<Edge> edges;
    double tau = 0.0;

    double total_edge_weight() const;
};

struct Partition {
    std::vector<int> assignment;  // node -> community, ids contiguous from 0
    double modularity_q = 0.0;

    int num_communities() const;
};

// Edge (u,v) kept iff similarity strictly exceeds tau.
CowordNetwork build_network(const SimilarityMatrix& sim,
                            const std::vector<std::int64_t>& frequencies,
                            double tau);

// Weighted Newman-Girvan modularity of an assignment.
double modularity(const CowordNetwork& net, const std::vector<int>& assignment);

// Two-phase greedy modularity optimization (local moves, then aggregation).
// Fully deterministic: nodes are swept in ascending id order, a node moves
// to the first community achieving the maximal positive gain, and ties with
// the current community keep the node where it is.
Partition louvain_partition(const CowordNetwork& net);

std::size_t isolate_count(const CowordNetwork& net);

// Display size for a node, 1 + ln(frequency).
double node_size(std::int64_t frequency);

// Writes base.net / base.clu / base.vec (1-based vertex numbering,
// community ids shifted by +1, weights at 6 significant digits).
void export_pajek(const CowordNetwork& net, const Partition& partition,
                  const std::filesystem::path& base);

void export_graphml(const CowordNetwork& net, const Partition& partition,
                    const std::filesystem::path& file);

// Reads the vertex labels back from a Pajek .net file.
std::vector<std::string> read_pajek_labels(const std::filesystem::path& net_file);

// Reconstructs a network from a Pajek .net file plus node frequencies
// (weights carry the file's textual precision).
CowordNetwork read_pajek_network(const std::filesystem::path& net_file);

}  // namespace semmap
