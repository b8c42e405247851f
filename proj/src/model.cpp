#include "asmlens/model.hpp"

#include <algorithm>
#include <charconv>

namespace asmlens {

std::string to_string(BlockId id) { return "B" + std::to_string(id.value); }

std::optional<BlockId> parse_block_id(const std::string& text) {
    if (text.size() < 2 || text[0] != 'B') return std::nullopt;
    std::uint32_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data() + 1, text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return BlockId{v};
}

const char* to_string(EdgeKind kind) {
    switch (kind) {
    case EdgeKind::FallThrough: return "fall_through";
    case EdgeKind::Jump: return "jump";
    case EdgeKind::ConditionalTaken: return "conditional_taken";
    case EdgeKind::Call: return "call";
    case EdgeKind::CallReturn: return "call_return";
    }
    return "?";
}

std::string Instruction::text() const {
    std::string s = mnemonic;
    for (std::size_t i = 0; i < operands.size(); ++i) {
        s += i == 0 ? " " : ", ";
        s += operands[i].text;
    }
    return s;
}

std::optional<std::size_t> LoopForest::innermost(BlockId block) const {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < loops.size(); ++i) {
        if (loops[i].member_blocks.count(block) && (!best || loops[i].depth > loops[*best].depth)) best = i;
    }
    return best;
}

int LoopForest::depth_of(BlockId block) const {
    auto l = innermost(block);
    return l ? loops[*l].depth : 0;
}

void ProgramModel::finalize() {
    insn_index_.clear();
    insn_index_.reserve(instructions.size());
    for (std::size_t i = 0; i < instructions.size(); ++i) insn_index_[instructions[i].address] = i;

    block_by_start_.clear();
    function_blocks_.assign(functions.size(), {});
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        block_by_start_[blocks[i].start_address] = i;
        function_blocks_.at(blocks[i].function_id.value).push_back(blocks[i].block_id);
    }

    std::sort(edges.begin(), edges.end());
    edge_offsets_.assign(blocks.size() + 1, 0);
    for (const auto& e : edges) ++edge_offsets_[e.source.value + 1];
    for (std::size_t i = 1; i < edge_offsets_.size(); ++i) edge_offsets_[i] += edge_offsets_[i - 1];

    std::sort(line_map.begin(), line_map.end());
    line_map.erase(std::unique(line_map.begin(), line_map.end()), line_map.end());
    by_file_.assign(files.size(), {});
    for (const auto& m : line_map) by_file_.at(m.file_id.value).push_back(m);
}

const Instruction* ProgramModel::instruction_at(Address a) const {
    auto it = insn_index_.find(a);
    return it == insn_index_.end() ? nullptr : &instructions[it->second];
}

std::optional<std::size_t> ProgramModel::instruction_index(Address a) const {
    auto it = insn_index_.find(a);
    if (it == insn_index_.end()) return std::nullopt;
    return it->second;
}

const BasicBlock* ProgramModel::block_at(Address start) const {
    auto it = block_by_start_.find(start);
    return it == block_by_start_.end() ? nullptr : &blocks[it->second];
}

const BasicBlock* ProgramModel::block_containing(Address a) const {
    auto it = std::upper_bound(blocks.begin(), blocks.end(), a,
                               [](Address x, const BasicBlock& b) { return x < b.start_address; });
    if (it == blocks.begin()) return nullptr;
    --it;
    return a < it->end_address ? &*it : nullptr;
}

std::optional<FunctionId> ProgramModel::find_function(const std::string& name) const {
    for (const auto& f : functions)
        if (f.name == name) return f.function_id;
    return std::nullopt;
}

const FunctionRecord* ProgramModel::function_containing(Address a) const {
    for (const auto& f : functions)
        for (const auto& r : f.address_ranges)
            if (r.contains(a)) return &f;
    return nullptr;
}

std::span<const ControlFlowEdge> ProgramModel::out_edges(BlockId id) const {
    if (id.value + 1 >= edge_offsets_.size()) return {};
    return std::span<const ControlFlowEdge>(edges.data() + edge_offsets_[id.value],
                                            edge_offsets_[id.value + 1] - edge_offsets_[id.value]);
}

std::span<const LineMapping> ProgramModel::mappings_for(Address a) const {
    auto lo = std::lower_bound(line_map.begin(), line_map.end(), a,
                               [](const LineMapping& m, Address x) { return m.address < x; });
    auto hi = std::upper_bound(lo, line_map.end(), a, [](Address x, const LineMapping& m) { return x < m.address; });
    return std::span<const LineMapping>(line_map.data() + (lo - line_map.begin()), static_cast<std::size_t>(hi - lo));
}

}  // namespace asmlens
