#pragma once

// JSON encoding shared by the CLI and the HTTP service.

#include <optional>
#include <string>

#include <json.hpp>

#include "asmlens/annotate.hpp"
#include "asmlens/layout.hpp"
#include "asmlens/mapping.hpp"
#include "asmlens/minimap.hpp"
#include "asmlens/model.hpp"
#include "asmlens/stats.hpp"

namespace asmlens::json_out {

using json = nlohmann::json;

std::string hex(Address a);
// Accepts "0x1a2b", "1a2b" or a JSON number. Throws Error{BadRequest}.
Address parse_address(const json& value);

json summary(const ProgramModel& model);
json report(const stats::CorpusReport& report);
// Summary, corpus report, per-function loop forests and diagnostics.
json analysis(const ProgramModel& model);

json instruction(const ProgramModel& model, const Instruction& insn);
// Block header: function name, block id, containing loops.
json block_header(const ProgramModel& model, BlockId block);

// Rows [offset, offset + limit) with instructions; arcs touching the page are
// included with absolute row indexes. limit == 0 means all rows.
json layout(const ProgramModel& model, const layout::LayoutPlan& plan, std::size_t offset = 0, std::size_t limit = 0);

json minimap(const minimap::MinimapModel& m);
json highlight(const mapping::HighlightSet& h);
json file_tree(const mapping::ColoredNode& node);
json source_file(const ProgramModel& model, FileId file);
json tooltip(const annotate::TooltipEntry& e);

// Stable text form: two-space indent, trailing newline.
std::string dump(const json& j);

}  // namespace asmlens::json_out
