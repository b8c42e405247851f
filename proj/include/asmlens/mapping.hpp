#pragma once

// Source line <-> instruction correspondence, highlight sets and file-tree coloring.

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "asmlens/model.hpp"

namespace asmlens::mapping {

using SourceLine = std::pair<FileId, std::uint32_t>;

// Throws Error{UnknownFile}.
std::set<Address> instructions_for_lines(const ProgramModel& model, FileId file, std::uint32_t first_line,
                                         std::uint32_t last_line);
// Throws Error{UnknownAddress} for an address that is not an instruction.
std::set<SourceLine> lines_for_instructions(const ProgramModel& model, const std::set<Address>& addresses);
// Lines with at least one mapping. Throws Error{UnknownFile}.
std::set<std::uint32_t> mapped_line_markers(const ProgramModel& model, FileId file);

enum class Origin { SourceSelection, DisassemblySelection };
const char* to_string(Origin o);

struct HighlightSet {
    int color_id = 0;
    std::set<Address> instruction_addresses;
    std::set<SourceLine> source_selections;
    Origin origin = Origin::SourceSelection;

    // Lowest highlighted address, the auto-scroll target.
    std::optional<Address> scroll_target() const;
};

// Selected lines are kept as given; instructions are their mapped addresses.
HighlightSet highlight_from_source(const ProgramModel& model, int color_id, FileId file, std::uint32_t first_line,
                                   std::uint32_t last_line);
// Selected instructions are kept; lines are their mappings.
HighlightSet highlight_from_instructions(const ProgramModel& model, int color_id, const std::set<Address>& addresses);
// Re-derives a highlight from its own origin selection.
HighlightSet rederive(const ProgramModel& model, const HighlightSet& h);

struct ColoredNode {
    std::string name;
    std::string path;
    std::optional<FileId> file;
    bool is_application_code = false;
    std::set<int> colors;
    std::vector<ColoredNode> children;
};

// Colors every file holding a mapped line of a highlighted instruction and
// propagates colors to the ancestors.
ColoredNode files_for_highlight(const ProgramModel& model, const std::vector<HighlightSet>& highlights);

}  // namespace asmlens::mapping
