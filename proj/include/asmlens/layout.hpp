#pragma once

// Per-function block layouts: memory-address order with pseudo-blocks, and
// loop-structure order with moved-block markers, plus back-edge arcs.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "asmlens/model.hpp"

namespace asmlens::layout {

enum class RowKind { RealBlock, PseudoBlock };
enum class Spacing { None, IntraFunction, InterFunction };
enum class OrderingMode { MemoryAddress, LoopStructure };

const char* to_string(RowKind k);
const char* to_string(Spacing s);
const char* to_string(OrderingMode m);
std::optional<OrderingMode> parse_mode(const std::string& text);  // "memory"/"loop" and the long names

struct LayoutRow {
    RowKind kind = RowKind::RealBlock;
    BlockId block_id;
    int indent = 0;
    std::size_t order_index = 0;
    bool dashed_border = false;
    Spacing spacing_before = Spacing::IntraFunction;
    bool fall_through_arrow_after = false;
};

struct BackEdgeArc {
    std::size_t from_row = 0;
    std::size_t to_row = 0;
    int lane = 0;
    std::string loop_id;
    BackEdge edge;
};

struct LayoutPlan {
    FunctionId function_id;
    OrderingMode ordering_mode = OrderingMode::MemoryAddress;
    std::vector<LayoutRow> rows;
    std::vector<BackEdgeArc> arcs;
    std::vector<std::string> diagnostics;
};

// What the layout needs to know about one function. Block ids ascend with
// address, so `blocks` sorted by id is address order.
struct FunctionView {
    FunctionId function_id;
    std::vector<BlockId> blocks;
    std::vector<bool> falls_through;  // blocks[i] falls through to blocks[i + 1]
    const LoopForest* forest = nullptr;
};

FunctionView function_view(const ProgramModel& model, FunctionId function);

// Loop members are non-contiguous in the function's address order.
bool is_disparate(const FunctionView& view, const Loop& loop);

// Blocks that break their loop's contiguity. Loops are visited outermost
// first; within the remaining blocks, the run of members containing the
// header (or the longest run when the header itself was displaced) stays in
// place and every other member is displaced.
std::set<BlockId> displaced_blocks(const FunctionView& view);

// Nested order: at every level, direct blocks and child-loop groups sorted by
// their first non-displaced address; a displaced block sorts by its own.
std::vector<BlockId> ideal_sequence(const FunctionView& view);

LayoutPlan memory_order_layout(const FunctionView& view);
LayoutPlan loop_structure_layout(const FunctionView& view);
LayoutPlan build_layout(const FunctionView& view, OrderingMode mode);

// One arc per back edge, lane = loop depth - 1. Endpoints use pseudo rows
// when present.
std::vector<BackEdgeArc> route_back_edges(const LayoutPlan& plan, const LoopForest& forest);

}  // namespace asmlens::layout
