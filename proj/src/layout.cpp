#include "asmlens/layout.hpp"

#include <algorithm>
#include <map>

namespace asmlens::layout {

const char* to_string(RowKind k) { return k == RowKind::RealBlock ? "real_block" : "pseudo_block"; }

const char* to_string(Spacing s) {
    switch (s) {
    case Spacing::None: return "none";
    case Spacing::IntraFunction: return "intra_function";
    case Spacing::InterFunction: return "inter_function";
    }
    return "?";
}

const char* to_string(OrderingMode m) { return m == OrderingMode::MemoryAddress ? "memory_address" : "loop_structure"; }

std::optional<OrderingMode> parse_mode(const std::string& text) {
    if (text == "memory" || text == "memory_address") return OrderingMode::MemoryAddress;
    if (text == "loop" || text == "loop_structure") return OrderingMode::LoopStructure;
    return std::nullopt;
}

FunctionView function_view(const ProgramModel& model, FunctionId function) {
    FunctionView v;
    v.function_id = function;
    v.blocks = model.function_blocks(function);
    v.forest = &model.loops(function);
    v.falls_through.resize(v.blocks.size(), false);
    for (std::size_t i = 0; i + 1 < v.blocks.size(); ++i)
        for (const auto& e : model.out_edges(v.blocks[i]))
            if (e.kind == EdgeKind::FallThrough && e.target == v.blocks[i + 1]) v.falls_through[i] = true;
    return v;
}

namespace {

// Maximal runs of `members` in `sequence`.
std::vector<std::vector<BlockId>> runs_of(const std::vector<BlockId>& sequence, const std::set<BlockId>& members) {
    std::vector<std::vector<BlockId>> runs;
    bool open = false;
    for (BlockId b : sequence) {
        if (members.count(b)) {
            if (!open) runs.emplace_back();
            runs.back().push_back(b);
            open = true;
        } else {
            open = false;
        }
    }
    return runs;
}

}  // namespace

bool is_disparate(const FunctionView& view, const Loop& loop) {
    return runs_of(view.blocks, loop.member_blocks).size() > 1;
}

std::set<BlockId> displaced_blocks(const FunctionView& view) {
    std::set<BlockId> displaced;
    if (!view.forest) return displaced;
    for (const auto& loop : view.forest->loops) {  // pre-order: parents first
        std::vector<BlockId> remaining;
        for (BlockId b : view.blocks)
            if (!displaced.count(b)) remaining.push_back(b);
        auto runs = runs_of(remaining, loop.member_blocks);
        if (runs.size() <= 1) continue;
        std::size_t anchor = runs.size();
        for (std::size_t i = 0; i < runs.size() && anchor == runs.size(); ++i)
            if (std::find(runs[i].begin(), runs[i].end(), loop.header_block) != runs[i].end()) anchor = i;
        if (anchor == runs.size()) {
            anchor = 0;
            for (std::size_t i = 1; i < runs.size(); ++i)
                if (runs[i].size() > runs[anchor].size()) anchor = i;
        }
        for (std::size_t i = 0; i < runs.size(); ++i)
            if (i != anchor) displaced.insert(runs[i].begin(), runs[i].end());
    }
    return displaced;
}

namespace {

struct Item {
    BlockId key;
    std::vector<BlockId> blocks;
};

// Emits the ideal order of `members` (the blocks of one level), where
// `children` are the loops directly nested at this level.
std::vector<BlockId> order_level(const std::set<BlockId>& members, const std::vector<std::size_t>& children,
                                 const LoopForest& forest, const std::set<BlockId>& displaced) {
    std::vector<Item> items;
    std::set<BlockId> in_child;
    for (std::size_t c : children) {
        const Loop& child = forest.loops[c];
        in_child.insert(child.member_blocks.begin(), child.member_blocks.end());
        Item item;
        item.blocks = order_level(child.member_blocks, child.children, forest, displaced);
        item.key = *child.member_blocks.begin();
        for (BlockId b : child.member_blocks)
            if (!displaced.count(b)) {
                item.key = b;
                break;
            }
        items.push_back(std::move(item));
    }
    for (BlockId b : members)
        if (!in_child.count(b)) items.push_back({b, {b}});
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.key < b.key; });
    std::vector<BlockId> out;
    for (auto& item : items) out.insert(out.end(), item.blocks.begin(), item.blocks.end());
    return out;
}

int depth_of(const FunctionView& view, BlockId b) { return view.forest ? view.forest->depth_of(b) : 0; }

std::vector<BlockId> ideal_with(const FunctionView& view, const std::set<BlockId>& displaced) {
    if (!view.forest || view.forest->loops.empty()) return view.blocks;
    std::set<BlockId> all(view.blocks.begin(), view.blocks.end());
    return order_level(all, view.forest->roots, *view.forest, displaced);
}

void finish_rows(LayoutPlan& plan) {
    for (std::size_t i = 0; i < plan.rows.size(); ++i) {
        plan.rows[i].order_index = i;
        plan.rows[i].spacing_before = i == 0 ? Spacing::InterFunction : Spacing::IntraFunction;
    }
}

void note_multi_loop_displacement(const FunctionView& view, const std::set<BlockId>& displaced, LayoutPlan& plan) {
    if (!view.forest) return;
    for (BlockId b : displaced) {
        int n = 0;
        for (const auto& l : view.forest->loops)
            if (l.member_blocks.count(b) && is_disparate(view, l)) ++n;
        if (n > 1)
            plan.diagnostics.push_back(to_string(b) + " is displaced from " + std::to_string(n) +
                                       " disparate loops; one pseudo-block emitted");
    }
}

}  // namespace

std::vector<BlockId> ideal_sequence(const FunctionView& view) { return ideal_with(view, displaced_blocks(view)); }

LayoutPlan memory_order_layout(const FunctionView& view) {
    LayoutPlan plan;
    plan.function_id = view.function_id;
    plan.ordering_mode = OrderingMode::MemoryAddress;
    auto displaced = displaced_blocks(view);
    auto ideal = ideal_with(view, displaced);

    // Gap i lies just before the i-th kept (non-displaced) block.
    std::vector<BlockId> kept;
    for (BlockId b : view.blocks)
        if (!displaced.count(b)) kept.push_back(b);
    std::vector<std::vector<BlockId>> pseudo_in_gap(kept.size() + 1), real_in_gap(kept.size() + 1);
    std::size_t seen = 0;
    for (BlockId b : ideal) {
        if (displaced.count(b))
            pseudo_in_gap[seen].push_back(b);
        else
            ++seen;
    }
    for (BlockId b : view.blocks) {
        if (!displaced.count(b)) continue;
        auto gap = static_cast<std::size_t>(std::lower_bound(kept.begin(), kept.end(), b) - kept.begin());
        real_in_gap[gap].push_back(b);
    }
    auto push = [&](RowKind kind, BlockId b) {
        LayoutRow r;
        r.kind = kind;
        r.block_id = b;
        r.indent = depth_of(view, b);
        plan.rows.push_back(r);
    };
    for (std::size_t g = 0; g <= kept.size(); ++g) {
        for (BlockId b : pseudo_in_gap[g]) push(RowKind::PseudoBlock, b);
        for (BlockId b : real_in_gap[g]) push(RowKind::RealBlock, b);
        if (g < kept.size()) push(RowKind::RealBlock, kept[g]);
    }
    finish_rows(plan);
    note_multi_loop_displacement(view, displaced, plan);
    if (view.forest) plan.arcs = route_back_edges(plan, *view.forest);
    return plan;
}

LayoutPlan loop_structure_layout(const FunctionView& view) {
    LayoutPlan plan;
    plan.function_id = view.function_id;
    plan.ordering_mode = OrderingMode::LoopStructure;
    auto displaced = displaced_blocks(view);
    auto ideal = ideal_with(view, displaced);

    std::map<BlockId, std::size_t> address_pos;
    for (std::size_t i = 0; i < view.blocks.size(); ++i) address_pos[view.blocks[i]] = i;
    for (std::size_t i = 0; i < ideal.size(); ++i) {
        LayoutRow r;
        r.block_id = ideal[i];
        r.indent = depth_of(view, ideal[i]);
        r.dashed_border = displaced.count(ideal[i]) > 0;
        std::size_t pos = address_pos.at(ideal[i]);
        r.fall_through_arrow_after = i + 1 < ideal.size() && pos + 1 < view.blocks.size() &&
                                     view.blocks[pos + 1] == ideal[i + 1] && view.falls_through[pos];
        plan.rows.push_back(r);
    }
    finish_rows(plan);
    note_multi_loop_displacement(view, displaced, plan);
    if (view.forest) plan.arcs = route_back_edges(plan, *view.forest);
    return plan;
}

LayoutPlan build_layout(const FunctionView& view, OrderingMode mode) {
    return mode == OrderingMode::MemoryAddress ? memory_order_layout(view) : loop_structure_layout(view);
}

std::vector<BackEdgeArc> route_back_edges(const LayoutPlan& plan, const LoopForest& forest) {
    std::map<BlockId, std::size_t> real_row, pseudo_row;
    for (const auto& r : plan.rows) (r.kind == RowKind::RealBlock ? real_row : pseudo_row)[r.block_id] = r.order_index;
    auto row_of = [&](BlockId b) -> std::optional<std::size_t> {
        if (auto it = pseudo_row.find(b); it != pseudo_row.end()) return it->second;
        if (auto it = real_row.find(b); it != real_row.end()) return it->second;
        return std::nullopt;
    };
    std::vector<BackEdgeArc> arcs;
    for (const auto& loop : forest.loops) {
        for (const auto& e : loop.back_edges) {
            auto from = row_of(e.source);
            auto to = row_of(e.header);
            if (!from || !to) continue;
            arcs.push_back({*from, *to, loop.depth - 1, loop.loop_id, e});
        }
    }
    return arcs;
}

}  // namespace asmlens::layout
