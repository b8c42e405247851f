#pragma once

// Dominators, back edges and natural-loop forests.

#include <string>
#include <utility>
#include <vector>

#include "asmlens/model.hpp"

namespace asmlens::loops {

// Directed graph over nodes 0..n-1. Node order is address order when built
// from a function.
struct Graph {
    int entry = 0;
    std::vector<std::vector<int>> succ;
    int size() const { return static_cast<int>(succ.size()); }
};

// Immediate dominators by the iterative reverse-postorder algorithm.
// idom[entry] == entry; unreachable nodes get -1.
std::vector<int> compute_dominators(const Graph& g);

bool dominates(const std::vector<int>& idom, int a, int b);

// Edges u->v with v dominating u, sorted.
std::vector<std::pair<int, int>> find_back_edges(const Graph& g, const std::vector<int>& idom);

struct NaturalLoop {
    int header = 0;
    std::vector<std::pair<int, int>> back_edges;
    std::vector<int> members;  // sorted
    int parent = -1;           // index into the result vector
    std::vector<int> children; // sorted by header
    int depth = 1;
    std::string label;         // "L1.2"
};

// Loop forest in pre-order (parents first, siblings by ascending header).
// Loops sharing a header are merged. An irreducible cycle produces a message
// in `diagnostics` and no loop.
std::vector<NaturalLoop> build_loop_forest(const Graph& g, const std::vector<int>& idom,
                                           std::vector<std::string>& diagnostics);

// Natural loop of one back edge: the header plus every node that reaches the
// source without passing through the header.
std::vector<int> natural_loop(const Graph& g, int source, int header);

// Builds the forest for one function. `blocks` are the function's blocks in
// address order; call edges are ignored.
LoopForest analyze_function(const FunctionRecord& function, const std::vector<BasicBlock>& all_blocks,
                            const std::vector<BlockId>& blocks, const std::vector<ControlFlowEdge>& edges);

}  // namespace asmlens::loops
