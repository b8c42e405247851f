#include "asmlens/minimap.hpp"

#include "asmlens/error.hpp"

namespace asmlens::minimap {

const char* to_string(Shade s) { return s == Shade::Application ? "application" : "system"; }

int height_units(std::size_t n) { return n <= 4 ? 1 : static_cast<int>((n + 3) / 4); }

namespace {
bool highlighted(const RowInfo& r) { return !r.pseudo && r.highlight_color.has_value(); }
}  // namespace

MinimapModel build_minimap(const std::vector<RowInfo>& rows, std::size_t budget, std::optional<std::size_t> anchor) {
    MinimapModel m;
    std::optional<std::size_t> first, last;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].matches_filter) continue;
        if (!first) first = i;
        last = i;
    }
    if (!first) {
        m.empty_window = true;
        bool any = false;
        for (const auto& r : rows) any = any || highlighted(r);
        m.overflow_above = m.overflow_below = any;
        return m;
    }
    std::size_t begin = *first;
    if (anchor && *anchor > *first && *anchor <= *last) begin = *anchor;
    std::size_t used = 0;
    std::size_t end = begin;
    while (end <= *last) {
        const auto& r = rows[end];
        int h = r.pseudo ? 1 : height_units(r.instruction_count);
        if (end > begin && used + static_cast<std::size_t>(h) > budget) break;
        used += static_cast<std::size_t>(h);
        MinimapEntry e;
        e.block_id = r.block_id;
        e.row = end;
        e.height_units = h;
        e.indent = r.indent;
        e.dashed = r.pseudo;
        e.shade = r.application ? Shade::Application : Shade::System;
        if (!r.pseudo) e.highlight_color = r.highlight_color;
        m.entries.push_back(e);
        ++end;
    }
    m.window_begin = begin;
    m.window_end = end;
    for (std::size_t i = 0; i < begin && !m.overflow_above; ++i) m.overflow_above = highlighted(rows[i]);
    for (std::size_t i = end; i < rows.size() && !m.overflow_below; ++i) m.overflow_below = highlighted(rows[i]);
    return m;
}

BlockId seek(const std::vector<RowInfo>& rows, const MinimapModel& model, Direction direction) {
    if (direction == Direction::Above) {
        std::size_t limit = model.empty_window ? rows.size() : model.window_begin;
        for (std::size_t i = limit; i-- > 0;)
            if (highlighted(rows[i])) return rows[i].block_id;
    } else {
        std::size_t from = model.empty_window ? 0 : model.window_end;
        for (std::size_t i = from; i < rows.size(); ++i)
            if (highlighted(rows[i])) return rows[i].block_id;
    }
    throw Error(ErrorKind::NoFurtherHighlight, direction == Direction::Above ? "no highlighted block above the window"
                                                                             : "no highlighted block below the window");
}

}  // namespace asmlens::minimap
