#pragma once

// Executable loading: functions, instructions, line map and variables.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "asmlens/dwarf.hpp"
#include "asmlens/elf.hpp"
#include "asmlens/model.hpp"

namespace asmlens::ingest {

struct CodeSection {
    Address base = 0;
    std::span<const std::uint8_t> bytes;
};

// Function records from the symbol tables (plus PLT stubs), sorted by entry
// address with disjoint ranges. An executable section with no function
// symbol at all becomes a single function named after the section.
std::vector<FunctionRecord> discover_functions(const elf::ElfFile& elf);

// Linear sweep of every function range. Instructions never cross a range end:
// an instruction that would is replaced by a one-byte "(bad)".
std::vector<Instruction> disassemble_ranges(const std::vector<CodeSection>& sections,
                                            const std::vector<FunctionRecord>& functions);

// Each line-table row covers the instructions from its address up to the next
// distinct row address of the same sequence. Rows with line 0 are skipped.
// `files` must be sorted by path and indexed by file_id.
std::vector<LineMapping> extract_line_map(const dwarf::LineTables& tables, const std::vector<Instruction>& instructions,
                                          const std::vector<SourceFile>& files);

// Source files named by the line table; application code when found under
// one of `source_roots`, in which case the content is loaded.
std::vector<SourceFile> collect_files(const std::vector<std::string>& paths,
                                      const std::vector<std::string>& source_roots);

// push rbp; mov rbp, rsp at the start of the function (after an optional endbr64).
bool has_frame_pointer(const std::vector<Instruction>& instructions, Address entry);

// Sets OperandText::resolved_variable wherever an operand's register or slot
// matches a variable location live at the instruction.
void resolve_operands(std::vector<Instruction>& instructions, const std::vector<VariableLocation>& variables);

// Builds blocks, edges, loop forests and the file tree of a model whose
// instructions, functions, files, line map and variables are filled, resolves
// operand variables and finalizes the indexes.
void assemble(ProgramModel& model);

// Full pipeline. Throws Error{UnreadableFile} or Error{NotAnExecutable}. A
// binary without a line table yields a model with no_debug_info set.
std::shared_ptr<ProgramModel> load_binary(const std::string& path, const std::vector<std::string>& source_roots = {});

}  // namespace asmlens::ingest
