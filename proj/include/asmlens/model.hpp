#pragma once

// Core data model shared by every analysis stage. A ProgramModel is built once
// by ingest::load_binary and is immutable afterwards.

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace asmlens {

using Address = std::uint64_t;

template <class Tag>
struct StrongId {
    std::uint32_t value = 0;
    friend auto operator<=>(const StrongId&, const StrongId&) = default;
};

using BlockId = StrongId<struct BlockTag>;
using FunctionId = StrongId<struct FunctionTag>;
using FileId = StrongId<struct FileTag>;

std::string to_string(BlockId id);              // "B17"
std::optional<BlockId> parse_block_id(const std::string& text);

struct AddressRange {
    Address start = 0;
    Address end = 0;  // exclusive
    bool contains(Address a) const { return a >= start && a < end; }
    friend auto operator<=>(const AddressRange&, const AddressRange&) = default;
};

// ---------------------------------------------------------------------------
// ingest

enum class OperandKind { Register, Immediate, Memory, Address };

struct MemoryRef {
    std::string segment;  // "fs"/"gs" or empty
    std::string base;     // 64-bit register family name, "rip" or empty
    std::string index;
    int scale = 1;
    std::int64_t displacement = 0;
    std::optional<Address> absolute;  // rip-relative or absolute moffs
};

struct OperandText {
    std::string text;
    OperandKind kind = OperandKind::Register;
    std::optional<std::string> resolved_variable;
    std::string register_name;        // set for Register operands
    std::optional<MemoryRef> memory;  // set for Memory operands
};

struct Instruction {
    Address address = 0;
    std::string mnemonic;
    std::vector<OperandText> operands;
    std::uint32_t byte_length = 1;
    bool is_control_transfer = false;
    std::optional<Address> transfer_target;
    bool is_call = false;
    bool is_return = false;
    bool is_conditional = false;
    // hlt/ud2: control never continues to the next address.
    bool is_terminator = false;

    Address end() const { return address + byte_length; }
    std::string text() const;  // "mov eax, dword ptr [rbp-0x4]"
};

struct LineMapping {
    Address address = 0;
    FileId file_id;
    std::uint32_t line = 0;
    friend auto operator<=>(const LineMapping&, const LineMapping&) = default;
};

struct SourceFile {
    FileId file_id;
    std::string path;
    bool is_application_code = false;
    std::optional<std::string> content;
};

struct FunctionRecord {
    FunctionId function_id;
    std::string name;
    Address entry_address = 0;
    std::vector<AddressRange> address_ranges;
};

// A DWARF variable location valid over [range.start, range.end).
struct VariableLocation {
    enum class Kind { Register, FrameSlot, Global };
    std::string name;
    AddressRange range;
    Kind kind = Kind::Register;
    std::string register_name;  // Register: register family; FrameSlot: base register
    std::int64_t offset = 0;    // FrameSlot: offset from base register
    Address global_address = 0;
    friend auto operator<=>(const VariableLocation&, const VariableLocation&) = default;
};

// ---------------------------------------------------------------------------
// cfg

enum class EdgeKind { FallThrough, Jump, ConditionalTaken, Call, CallReturn };
const char* to_string(EdgeKind kind);

struct BasicBlock {
    BlockId block_id;
    FunctionId function_id;
    Address start_address = 0;
    Address end_address = 0;
    std::vector<Address> instruction_addresses;
    bool falls_through = false;  // has an outgoing fall_through edge
};

struct ControlFlowEdge {
    BlockId source;
    BlockId target;
    EdgeKind kind = EdgeKind::FallThrough;
    friend auto operator<=>(const ControlFlowEdge&, const ControlFlowEdge&) = default;
};

// ---------------------------------------------------------------------------
// loops

struct BackEdge {
    BlockId source;
    BlockId header;
    friend auto operator<=>(const BackEdge&, const BackEdge&) = default;
};

struct Loop {
    std::string loop_id;  // "<function>:<label>", unique in the program
    BlockId header_block;
    std::vector<BackEdge> back_edges;
    std::set<BlockId> member_blocks;  // includes members of nested loops
    std::optional<std::size_t> parent;  // index into LoopForest::loops
    std::vector<std::size_t> children;  // sorted by header address
    int depth = 1;
    std::string label;                  // "L1.2"
    std::map<BlockId, int> member_index;  // 1-based ordinal by address
};

struct LoopForest {
    FunctionId function_id;
    std::vector<Loop> loops;           // pre-order: parents precede children
    std::vector<std::size_t> roots;    // sorted by header address
    std::vector<std::string> diagnostics;

    // Innermost loop containing the block, if any.
    std::optional<std::size_t> innermost(BlockId block) const;
    int depth_of(BlockId block) const;
};

struct Diagnostic {
    std::string stage;
    std::string message;
};

// ---------------------------------------------------------------------------

struct FileTreeNode {
    std::string name;
    std::string path;
    std::optional<FileId> file;  // set for leaves
    std::vector<FileTreeNode> children;
};

class ProgramModel {
public:
    std::string binary_path;
    bool no_debug_info = false;

    std::vector<Instruction> instructions;  // strictly increasing by address
    std::vector<FunctionRecord> functions;  // by entry address
    std::vector<SourceFile> files;          // by path; file_id == index
    std::vector<LineMapping> line_map;      // sorted
    std::vector<VariableLocation> variables;
    std::vector<BasicBlock> blocks;         // block_id == index, ascending start
    std::vector<ControlFlowEdge> edges;     // sorted
    std::vector<LoopForest> loop_forests;   // one per function, same order
    FileTreeNode file_tree;
    std::vector<Diagnostic> diagnostics;

    // Builds lookup tables. Called once by the builder after all vectors are filled.
    void finalize();

    const Instruction* instruction_at(Address a) const;
    std::optional<std::size_t> instruction_index(Address a) const;
    const BasicBlock* block_at(Address start) const;      // block starting at address
    const BasicBlock* block_containing(Address a) const;
    const BasicBlock& block(BlockId id) const { return blocks.at(id.value); }
    const FunctionRecord& function(FunctionId id) const { return functions.at(id.value); }
    const LoopForest& loops(FunctionId id) const { return loop_forests.at(id.value); }
    std::optional<FunctionId> find_function(const std::string& name) const;
    const FunctionRecord* function_containing(Address a) const;

    // Blocks of one function in ascending address order.
    const std::vector<BlockId>& function_blocks(FunctionId id) const { return function_blocks_.at(id.value); }
    std::span<const ControlFlowEdge> out_edges(BlockId id) const;

    // Line map views.
    std::span<const LineMapping> mappings_for(Address a) const;
    const std::vector<LineMapping>& mappings_for_file(FileId f) const { return by_file_.at(f.value); }

private:
    std::unordered_map<Address, std::size_t> insn_index_;
    std::unordered_map<Address, std::size_t> block_by_start_;
    std::vector<std::vector<BlockId>> function_blocks_;
    std::vector<std::size_t> edge_offsets_;  // per block into edges (edges sorted by source)
    std::vector<std::vector<LineMapping>> by_file_;
};

using ModelPtr = std::shared_ptr<const ProgramModel>;

}  // namespace asmlens

template <class Tag>
struct std::hash<asmlens::StrongId<Tag>> {
    std::size_t operator()(const asmlens::StrongId<Tag>& id) const noexcept { return id.value; }
};
