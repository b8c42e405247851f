#include "asmlens/mapping.hpp"

#include <cstdio>
#include <map>

#include "asmlens/error.hpp"

namespace asmlens::mapping {

namespace {
void check_file(const ProgramModel& model, FileId file) {
    if (file.value >= model.files.size())
        throw Error(ErrorKind::UnknownFile, "unknown file id " + std::to_string(file.value));
}
}  // namespace

std::set<Address> instructions_for_lines(const ProgramModel& model, FileId file, std::uint32_t first_line,
                                         std::uint32_t last_line) {
    check_file(model, file);
    std::set<Address> out;
    for (const auto& m : model.mappings_for_file(file))
        if (m.line >= first_line && m.line <= last_line) out.insert(m.address);
    return out;
}

std::set<SourceLine> lines_for_instructions(const ProgramModel& model, const std::set<Address>& addresses) {
    std::set<SourceLine> out;
    for (Address a : addresses) {
        if (!model.instruction_at(a)) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(a));
            throw Error(ErrorKind::UnknownAddress, std::string("no instruction at ") + buf);
        }
        for (const auto& m : model.mappings_for(a)) out.emplace(m.file_id, m.line);
    }
    return out;
}

std::set<std::uint32_t> mapped_line_markers(const ProgramModel& model, FileId file) {
    check_file(model, file);
    std::set<std::uint32_t> out;
    for (const auto& m : model.mappings_for_file(file)) out.insert(m.line);
    return out;
}

const char* to_string(Origin o) { return o == Origin::SourceSelection ? "source_selection" : "disassembly_selection"; }

std::optional<Address> HighlightSet::scroll_target() const {
    if (instruction_addresses.empty()) return std::nullopt;
    return *instruction_addresses.begin();
}

HighlightSet highlight_from_source(const ProgramModel& model, int color_id, FileId file, std::uint32_t first_line,
                                   std::uint32_t last_line) {
    HighlightSet h;
    h.color_id = color_id;
    h.origin = Origin::SourceSelection;
    h.instruction_addresses = instructions_for_lines(model, file, first_line, last_line);
    for (std::uint32_t l = first_line; l <= last_line && l >= first_line; ++l) h.source_selections.emplace(file, l);
    return h;
}

HighlightSet highlight_from_instructions(const ProgramModel& model, int color_id, const std::set<Address>& addresses) {
    HighlightSet h;
    h.color_id = color_id;
    h.origin = Origin::DisassemblySelection;
    h.source_selections = lines_for_instructions(model, addresses);
    h.instruction_addresses = addresses;
    return h;
}

HighlightSet rederive(const ProgramModel& model, const HighlightSet& h) {
    if (h.origin == Origin::DisassemblySelection)
        return highlight_from_instructions(model, h.color_id, h.instruction_addresses);
    HighlightSet out;
    out.color_id = h.color_id;
    out.origin = Origin::SourceSelection;
    out.source_selections = h.source_selections;
    for (const auto& [f, l] : h.source_selections) {
        auto a = instructions_for_lines(model, f, l, l);
        out.instruction_addresses.insert(a.begin(), a.end());
    }
    return out;
}

namespace {

ColoredNode color_node(const FileTreeNode& n, const ProgramModel& model, const std::map<FileId, std::set<int>>& colors) {
    ColoredNode c;
    c.name = n.name;
    c.path = n.path;
    c.file = n.file;
    if (n.file) {
        c.is_application_code = model.files.at(n.file->value).is_application_code;
        if (auto it = colors.find(*n.file); it != colors.end()) c.colors = it->second;
    }
    for (const auto& child : n.children) {
        c.children.push_back(color_node(child, model, colors));
        c.colors.insert(c.children.back().colors.begin(), c.children.back().colors.end());
    }
    return c;
}

}  // namespace

ColoredNode files_for_highlight(const ProgramModel& model, const std::vector<HighlightSet>& highlights) {
    std::map<FileId, std::set<int>> colors;
    for (const auto& h : highlights)
        for (Address a : h.instruction_addresses)
            for (const auto& m : model.mappings_for(a)) colors[m.file_id].insert(h.color_id);
    return color_node(model.file_tree, model, colors);
}

}  // namespace asmlens::mapping
