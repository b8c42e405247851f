#pragma once

// Independent oracles shared by the unit tests and the acceptance run.

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "asmlens/layout.hpp"
#include "asmlens/loops.hpp"
#include "support.hpp"

namespace testsupport {

// Nodes reachable from the entry, optionally with one node removed.
std::vector<bool> reachable(const loops::Graph& g, int skip = -1);
// a dominates b iff removing a disconnects b from the entry.
bool dominates_oracle(const loops::Graph& g, int a, int b);
std::vector<int> idom_oracle(const loops::Graph& g);
// Reducibility by T1/T2 reduction of the reachable subgraph.
bool reducible_oracle(const loops::Graph& g);
// Header -> members, merged over the back edges sharing the header.
std::map<int, std::set<int>> loops_oracle(const loops::Graph& g);
loops::Graph random_graph(std::mt19937& rng, int n);

std::set<BlockId> rows_of_kind(const layout::LayoutPlan& p, layout::RowKind k);
std::set<BlockId> displaced_oracle(const layout::FunctionView& view);
bool contiguous_in(const std::vector<BlockId>& order, const std::set<BlockId>& members);
std::vector<BlockId> row_blocks(const layout::LayoutPlan& p);
// Every layout invariant for one synthetic function; "" or the first violation.
std::string check_invariants(const SynthFunction& f, bool ideal_order);

}  // namespace testsupport
