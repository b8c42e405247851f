#pragma once

// DWARF v2-v5 readers for the line table and variable locations.

#include <functional>
#include <string>
#include <vector>

#include "asmlens/elf.hpp"
#include "asmlens/model.hpp"

namespace asmlens::dwarf {

struct LineRow {
    Address address = 0;
    std::string path;  // normalized absolute or compilation-relative path
    std::uint32_t line = 0;
};

// Rows of one line-program sequence in program order; `end` is the
// end_sequence address.
struct LineSequence {
    std::vector<LineRow> rows;
    Address end = 0;
};

struct LineTables {
    std::vector<LineSequence> sequences;
    std::vector<std::string> files;  // every file named in a line-table header
    bool present = false;            // a .debug_line section exists
};

// All sequences from .debug_line, reached through each compilation unit's
// DW_AT_stmt_list. Throws Error{MalformedDebugInfo}.
LineTables read_line_tables(const elf::ElfFile& elf);

// Predicate telling whether the function entered at an address sets up
// rbp as a frame pointer; used to turn CFA-relative slots into rbp offsets.
using FramePointerQuery = std::function<bool(Address function_entry)>;

// Variable and parameter locations that are a single register, a single
// register-relative slot, or a static address. Anything else is skipped.
std::vector<VariableLocation> read_variables(const elf::ElfFile& elf, const FramePointerQuery& has_frame_pointer);

// x86-64 DWARF register number to 64-bit register name ("" when unknown).
std::string register_name(unsigned dwarf_reg);

}  // namespace asmlens::dwarf
