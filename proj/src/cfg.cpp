#include "asmlens/cfg.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

namespace asmlens::cfg {
namespace {

std::string hex(Address a) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(a));
    return buf;
}

bool ends_block(const Instruction& insn) { return insn.is_control_transfer || insn.is_terminator; }

}  // namespace

std::vector<BasicBlock> build_basic_blocks(const std::vector<Instruction>& instructions,
                                           const std::vector<FunctionRecord>& functions) {
    std::unordered_set<Address> leaders;
    for (const auto& f : functions)
        for (const auto& r : f.address_ranges) leaders.insert(r.start);
    for (std::size_t i = 0; i < instructions.size(); ++i) {
        const auto& insn = instructions[i];
        if (insn.transfer_target) leaders.insert(*insn.transfer_target);
        if (ends_block(insn)) leaders.insert(insn.end());
    }

    std::vector<BasicBlock> blocks;
    for (const auto& f : functions) {
        for (const auto& r : f.address_ranges) {
            auto it = std::lower_bound(instructions.begin(), instructions.end(), r.start,
                                       [](const Instruction& x, Address a) { return x.address < a; });
            BasicBlock* cur = nullptr;
            for (; it != instructions.end() && it->address < r.end; ++it) {
                if (!cur || leaders.count(it->address) || cur->end_address != it->address) {
                    blocks.push_back(BasicBlock{});
                    cur = &blocks.back();
                    cur->function_id = f.function_id;
                    cur->start_address = it->address;
                }
                cur->instruction_addresses.push_back(it->address);
                cur->end_address = it->end();
                if (ends_block(*it)) cur = nullptr;
            }
        }
    }
    std::sort(blocks.begin(), blocks.end(),
              [](const BasicBlock& a, const BasicBlock& b) { return a.start_address < b.start_address; });
    for (std::size_t i = 0; i < blocks.size(); ++i) blocks[i].block_id = BlockId{static_cast<std::uint32_t>(i)};
    return blocks;
}

std::vector<ControlFlowEdge> build_edges(std::vector<BasicBlock>& blocks, const std::vector<Instruction>& instructions,
                                         std::vector<Diagnostic>& diagnostics) {
    std::unordered_map<Address, std::size_t> by_start;
    for (std::size_t i = 0; i < blocks.size(); ++i) by_start[blocks[i].start_address] = i;
    std::unordered_map<Address, std::size_t> insn_at;
    for (std::size_t i = 0; i < instructions.size(); ++i) insn_at[instructions[i].address] = i;

    std::vector<ControlFlowEdge> edges;
    for (auto& b : blocks) {
        b.falls_through = false;
        const Instruction& last = instructions[insn_at.at(b.instruction_addresses.back())];

        auto add_target = [&](EdgeKind kind) {
            if (!last.transfer_target) return;
            auto t = by_start.find(*last.transfer_target);
            if (t == by_start.end()) {
                diagnostics.push_back({"cfg", "dangling target " + hex(*last.transfer_target) + " from " +
                                                  hex(last.address) + " in " + to_string(b.block_id)});
                return;
            }
            edges.push_back({b.block_id, blocks[t->second].block_id, kind});
        };
        auto add_fall_through = [&] {
            auto n = by_start.find(b.end_address);
            if (n == by_start.end() || blocks[n->second].function_id != b.function_id) return;
            edges.push_back({b.block_id, blocks[n->second].block_id, EdgeKind::FallThrough});
            b.falls_through = true;
        };

        if (last.is_return || last.is_terminator) continue;
        if (last.is_call) {
            add_target(EdgeKind::Call);
            add_fall_through();
        } else if (last.is_control_transfer && last.is_conditional) {
            add_target(EdgeKind::ConditionalTaken);
            add_fall_through();
        } else if (last.is_control_transfer) {
            add_target(EdgeKind::Jump);
        } else {
            add_fall_through();
        }
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

}  // namespace asmlens::cfg
