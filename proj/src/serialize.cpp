#include "asmlens/serialize.hpp"

#include <cstdio>
#include <map>

#include "asmlens/error.hpp"

namespace asmlens::json_out {

std::string hex(Address a) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(a));
    return buf;
}

Address parse_address(const json& value) {
    if (value.is_number_unsigned() || value.is_number_integer()) return value.get<Address>();
    if (!value.is_string()) throw Error(ErrorKind::BadRequest, "address must be a string or number");
    std::string s = value.get<std::string>();
    if (s.rfind("0x", 0) == 0 || s.rfind("0X", 0) == 0) s = s.substr(2);
    if (s.empty() || s.find_first_not_of("0123456789abcdefABCDEF") != std::string::npos)
        throw Error(ErrorKind::BadRequest, "malformed address '" + value.get<std::string>() + "'");
    return std::stoull(s, nullptr, 16);
}

namespace {

const char* kind_name(OperandKind k) {
    switch (k) {
    case OperandKind::Register: return "register";
    case OperandKind::Immediate: return "immediate";
    case OperandKind::Memory: return "memory";
    case OperandKind::Address: return "address";
    }
    return "?";
}

json fraction(const stats::Fraction& f) {
    return {{"numerator", f.numerator}, {"denominator", f.denominator}, {"value", f.value()}};
}

json loop_json(const Loop& l, const LoopForest& forest) {
    json members = json::array();
    for (BlockId b : l.member_blocks) members.push_back(to_string(b));
    json back = json::array();
    for (const auto& e : l.back_edges) back.push_back({{"source", to_string(e.source)}, {"header", to_string(e.header)}});
    json j = {{"loop_id", l.loop_id},
              {"label", l.label},
              {"header_block", to_string(l.header_block)},
              {"depth", l.depth},
              {"member_blocks", members},
              {"back_edges", back},
              {"parent_loop", nullptr}};
    if (l.parent) j["parent_loop"] = forest.loops[*l.parent].loop_id;
    return j;
}

}  // namespace

json summary(const ProgramModel& model) {
    std::size_t loops = 0;
    for (const auto& f : model.loop_forests) loops += f.loops.size();
    std::size_t app = 0;
    for (const auto& f : model.files) app += f.is_application_code;
    return {{"binary", model.binary_path},
            {"functions", model.functions.size()},
            {"instructions", model.instructions.size()},
            {"blocks", model.blocks.size()},
            {"edges", model.edges.size()},
            {"loops", loops},
            {"files", model.files.size()},
            {"application_files", app},
            {"line_mappings", model.line_map.size()},
            {"variable_locations", model.variables.size()},
            {"no_debug_info", model.no_debug_info}};
}

json report(const stats::CorpusReport& r) {
    json hist = json::object();
    std::size_t total = 0;
    for (const auto& [size, count] : r.block_size_histogram) {
        hist[std::to_string(size)] = count;
        total += count;
    }
    return {{"disparate_loop_fraction", r.disparate_loops.value()},
            {"disparate_loops", fraction(r.disparate_loops)},
            {"multi_file_instruction_fraction", r.multi_file.of_mapped.value()},
            {"multi_file_instructions", fraction(r.multi_file.of_mapped)},
            {"multi_file_instruction_fraction_of_all", r.multi_file.of_all.value()},
            {"max_files_per_instruction", r.multi_file.max_files_per_instruction},
            {"block_size_histogram", hist},
            {"block_count", total}};
}

json analysis(const ProgramModel& model) {
    json functions = json::array();
    for (const auto& f : model.functions) {
        const auto& forest = model.loops(f.function_id);
        json loops = json::array();
        for (const auto& l : forest.loops) loops.push_back(loop_json(l, forest));
        json ranges = json::array();
        for (const auto& r : f.address_ranges) ranges.push_back({hex(r.start), hex(r.end)});
        functions.push_back({{"function_id", f.function_id.value},
                             {"name", f.name},
                             {"entry_address", hex(f.entry_address)},
                             {"address_ranges", ranges},
                             {"blocks", model.function_blocks(f.function_id).size()},
                             {"loops", loops}});
    }
    json diags = json::array();
    for (const auto& d : model.diagnostics) diags.push_back({{"stage", d.stage}, {"message", d.message}});
    return {{"summary", summary(model)},
            {"report", report(stats::corpus_report(model))},
            {"functions", functions},
            {"diagnostics", diags}};
}

json instruction(const ProgramModel& model, const Instruction& insn) {
    json ops = json::array();
    for (const auto& o : insn.operands) {
        json op = {{"text", o.text}, {"kind", kind_name(o.kind)}};
        if (o.resolved_variable) op["variable"] = *o.resolved_variable;
        ops.push_back(op);
    }
    json j = {{"address", hex(insn.address)},
              {"mnemonic", insn.mnemonic},
              {"operands", ops},
              {"text", insn.text()},
              {"byte_length", insn.byte_length},
              {"is_control_transfer", insn.is_control_transfer},
              {"is_call", insn.is_call},
              {"is_return", insn.is_return},
              {"is_conditional", insn.is_conditional}};
    if (insn.transfer_target) j["transfer_target"] = hex(*insn.transfer_target);
    if (auto label = annotate::jump_label(model, insn)) {
        j["jump_label"] = {{"target_function_name", label->target_function_name},
                           {"target_block_id", to_string(label->target_block_id)},
                           {"raw_target_address", hex(label->raw_target_address)}};
    }
    json badges = json::array();
    for (const auto& b : annotate::variable_badges(insn))
        badges.push_back({{"operand_index", b.operand_index}, {"variable_name", b.variable_name}});
    j["variable_badges"] = badges;
    json lines = json::array();
    for (const auto& m : model.mappings_for(insn.address)) lines.push_back({{"file_id", m.file_id.value}, {"line", m.line}});
    j["source_lines"] = lines;
    return j;
}

json block_header(const ProgramModel& model, BlockId block) {
    const auto& b = model.block(block);
    const auto& forest = model.loops(b.function_id);
    json loops = json::array();
    std::string innermost;
    int best = 0;
    for (const auto& l : forest.loops) {
        auto it = l.member_index.find(block);
        if (it == l.member_index.end()) continue;
        loops.push_back({{"loop_id", l.loop_id}, {"label", l.label}, {"member_index", it->second}, {"depth", l.depth},
                         {"is_header", l.header_block == block}});
        if (l.depth > best) {
            best = l.depth;
            innermost = l.label;
        }
    }
    json j = {{"function", model.function(b.function_id).name},
              {"block_id", to_string(block)},
              {"start_address", hex(b.start_address)},
              {"end_address", hex(b.end_address)},
              {"instruction_count", b.instruction_addresses.size()},
              {"loops", loops},
              {"loop_label", nullptr}};
    if (!innermost.empty()) j["loop_label"] = innermost;
    return j;
}

json layout(const ProgramModel& model, const layout::LayoutPlan& plan, std::size_t offset, std::size_t limit) {
    std::size_t total = plan.rows.size();
    std::size_t begin = std::min(offset, total);
    std::size_t end = limit == 0 ? total : std::min(total, begin + limit);

    std::map<BlockId, std::size_t> real_row;
    for (const auto& r : plan.rows)
        if (r.kind == layout::RowKind::RealBlock) real_row[r.block_id] = r.order_index;

    json rows = json::array();
    for (std::size_t i = begin; i < end; ++i) {
        const auto& r = plan.rows[i];
        json row = {{"order_index", r.order_index},
                    {"kind", layout::to_string(r.kind)},
                    {"block_id", to_string(r.block_id)},
                    {"indent", r.indent},
                    {"dashed_border", r.dashed_border},
                    {"spacing_before", layout::to_string(r.spacing_before)},
                    {"fall_through_arrow_after", r.fall_through_arrow_after},
                    {"header", block_header(model, r.block_id)}};
        if (r.kind == layout::RowKind::PseudoBlock) {
            row["real_row"] = real_row.at(r.block_id);
        } else {
            json insns = json::array();
            for (Address a : model.block(r.block_id).instruction_addresses)
                insns.push_back(instruction(model, *model.instruction_at(a)));
            row["instructions"] = insns;
        }
        rows.push_back(row);
    }
    json arcs = json::array();
    for (const auto& a : plan.arcs) {
        std::size_t lo = std::min(a.from_row, a.to_row), hi = std::max(a.from_row, a.to_row);
        if (hi < begin || lo >= end) continue;
        arcs.push_back({{"from_row", a.from_row},
                        {"to_row", a.to_row},
                        {"lane", a.lane},
                        {"loop_id", a.loop_id},
                        {"source_block", to_string(a.edge.source)},
                        {"header_block", to_string(a.edge.header)}});
    }
    json j = {{"function_id", plan.function_id.value},
              {"function", model.function(plan.function_id).name},
              {"ordering_mode", layout::to_string(plan.ordering_mode)},
              {"total_rows", total},
              {"offset", begin},
              {"rows", rows},
              {"arcs", arcs},
              {"diagnostics", plan.diagnostics},
              {"next_offset", nullptr}};
    if (end < total) j["next_offset"] = end;
    return j;
}

json minimap(const minimap::MinimapModel& m) {
    json entries = json::array();
    for (const auto& e : m.entries) {
        json j = {{"block_id", to_string(e.block_id)},
                  {"row", e.row},
                  {"height_units", e.height_units},
                  {"indent", e.indent},
                  {"dashed", e.dashed},
                  {"shade", minimap::to_string(e.shade)},
                  {"highlight_color", nullptr}};
        if (e.highlight_color) j["highlight_color"] = *e.highlight_color;
        entries.push_back(j);
    }
    return {{"entries", entries},
            {"window_begin", m.window_begin},
            {"window_end", m.window_end},
            {"overflow_above", m.overflow_above},
            {"overflow_below", m.overflow_below},
            {"empty_window", m.empty_window}};
}

json highlight(const mapping::HighlightSet& h) {
    json addrs = json::array();
    for (Address a : h.instruction_addresses) addrs.push_back(hex(a));
    json lines = json::array();
    for (const auto& [f, l] : h.source_selections) lines.push_back({{"file_id", f.value}, {"line", l}});
    json j = {{"color_id", h.color_id},
              {"origin", mapping::to_string(h.origin)},
              {"instruction_addresses", addrs},
              {"source_selections", lines},
              {"scroll_target", nullptr}};
    if (auto t = h.scroll_target()) j["scroll_target"] = hex(*t);
    return j;
}

json file_tree(const mapping::ColoredNode& node) {
    json children = json::array();
    for (const auto& c : node.children) children.push_back(file_tree(c));
    json j = {{"name", node.name}, {"path", node.path}, {"colors", node.colors}, {"children", children}};
    if (node.file) {
        j["file_id"] = node.file->value;
        j["is_application_code"] = node.is_application_code;
    }
    return j;
}

json source_file(const ProgramModel& model, FileId file) {
    if (file.value >= model.files.size()) throw Error(ErrorKind::UnknownFile, "unknown file id " + std::to_string(file.value));
    const auto& f = model.files[file.value];
    json markers = json::array();
    for (auto l : mapping::mapped_line_markers(model, file)) markers.push_back(l);
    json j = {{"file_id", file.value},
              {"path", f.path},
              {"is_application_code", f.is_application_code},
              {"mapped_lines", markers},
              {"content", nullptr}};
    if (f.content) j["content"] = *f.content;
    return j;
}

json tooltip(const annotate::TooltipEntry& e) {
    return {{"mnemonic", e.mnemonic},
            {"instruction", e.instruction_name},
            {"meaning", e.meaning},
            {"notes", e.notes},
            {"opcode", e.opcode}};
}

std::string dump(const json& j) { return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n"; }

}  // namespace asmlens::json_out
