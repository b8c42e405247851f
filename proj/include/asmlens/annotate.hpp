#pragma once

// Instruction annotations: jump-target labels, variable badges, tooltips.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "asmlens/model.hpp"

namespace asmlens::annotate {

struct JumpTargetLabel {
    Address instruction_address = 0;
    std::string target_function_name;
    BlockId target_block_id;
    Address raw_target_address = 0;
};

// Present for static transfers whose target starts a block.
std::optional<JumpTargetLabel> jump_label(const ProgramModel& model, const Instruction& insn);

struct VariableBadge {
    Address instruction_address = 0;
    std::size_t operand_index = 0;
    std::string variable_name;
};

std::vector<VariableBadge> variable_badges(const Instruction& insn);

struct TooltipEntry {
    std::string mnemonic;
    std::string instruction_name;
    std::string meaning;
    std::string notes;
    std::string opcode;
    friend bool operator==(const TooltipEntry&, const TooltipEntry&) = default;
};

// Tab-separated table, one record per mnemonic:
//   mnemonic <TAB> instruction <TAB> meaning <TAB> notes <TAB> opcode
// '#' lines are comments; "\t", "\n" and "\\" escape inside fields.
class TooltipTable {
public:
    static TooltipTable parse(const std::string& text);   // throws Error{BadRequest} on malformed records
    static TooltipTable load(const std::string& path);    // throws Error{UnreadableFile}
    // Table shipped in the data directory.
    static const TooltipTable& bundled();

    std::string serialize() const;
    const std::map<std::string, TooltipEntry>& entries() const { return entries_; }
    int version() const { return version_; }

    // Exact match, then the mnemonic without a "rep"/"lock"-style prefix.
    std::optional<TooltipEntry> lookup(const std::string& mnemonic) const;

    friend bool operator==(const TooltipTable&, const TooltipTable&) = default;

private:
    int version_ = 1;
    std::map<std::string, TooltipEntry> entries_;
};

std::optional<TooltipEntry> tooltip(const std::string& mnemonic);

// Directory holding tooltips.tsv; ASMLENS_DATA_DIR overrides the build-time path.
std::string data_dir();

}  // namespace asmlens::annotate
