#pragma once

// Basic-block partitioning and control-flow edges.

#include <vector>

#include "asmlens/model.hpp"

namespace asmlens::cfg {

// Leaders are range starts, static transfer targets and the instructions that
// follow a control transfer or terminator. Blocks never cross a function range
// and are numbered B0, B1, ... by ascending start address over the program.
std::vector<BasicBlock> build_basic_blocks(const std::vector<Instruction>& instructions,
                                           const std::vector<FunctionRecord>& functions);

// Edges per block terminator. Targets that are not block starts are dropped
// and reported in `diagnostics`. Also sets BasicBlock::falls_through.
std::vector<ControlFlowEdge> build_edges(std::vector<BasicBlock>& blocks, const std::vector<Instruction>& instructions,
                                         std::vector<Diagnostic>& diagnostics);

}  // namespace asmlens::cfg
