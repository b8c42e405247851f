#pragma once

// Block-level overview strip for one layout window.

#include <cstddef>
#include <optional>
#include <vector>

#include "asmlens/model.hpp"

namespace asmlens::minimap {

enum class Shade { Application, System };
enum class Direction { Above, Below };
const char* to_string(Shade s);

inline constexpr std::size_t kDefaultBudget = 2000;

// max(1, ceil(n / 4))
int height_units(std::size_t instruction_count);

// One layout row as seen by the mini-map.
struct RowInfo {
    BlockId block_id;
    bool pseudo = false;
    int indent = 0;
    std::size_t instruction_count = 0;
    bool application = false;
    std::optional<int> highlight_color;  // lowest color whose highlight touches the block
    bool matches_filter = false;         // block maps to the active file
};

struct MinimapEntry {
    BlockId block_id;
    std::size_t row = 0;  // index into the row list
    int height_units = 1;
    int indent = 0;
    bool dashed = false;
    Shade shade = Shade::System;
    std::optional<int> highlight_color;
};

struct MinimapModel {
    std::vector<MinimapEntry> entries;
    std::size_t window_begin = 0;  // row range [begin, end)
    std::size_t window_end = 0;
    bool overflow_above = false;
    bool overflow_below = false;
    bool empty_window = false;
};

// Window = contiguous rows from the first to the last row matching the filter,
// starting at `anchor` when it falls inside that span, truncated once the
// height budget is used up. With no matching row the model is empty and both
// overflow flags tell whether any highlight exists.
MinimapModel build_minimap(const std::vector<RowInfo>& rows, std::size_t budget = kDefaultBudget,
                           std::optional<std::size_t> anchor = std::nullopt);

// Nearest highlighted real row outside the window. Throws Error{NoFurtherHighlight}.
BlockId seek(const std::vector<RowInfo>& rows, const MinimapModel& model, Direction direction);

}  // namespace asmlens::minimap
