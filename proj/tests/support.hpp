#pragma once

#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "asmlens/layout.hpp"
#include "asmlens/model.hpp"

namespace testsupport {

using namespace asmlens;

// Path of a compiled fixture ("bubble_sort", "nested5", "sequential",
// "continue_loop", "inline_main", "bubble_sort_stripped").
std::string fixture(const std::string& name);
std::string fixture_source_dir();
std::string golden_dir();
std::string cli_path();

// Cached fixture models loaded with the fixture source directory as root.
ModelPtr load_fixture(const std::string& name);

// One function named `name` spanning `bytes` at `base`, run through the
// decoder and the full assemble step.
std::shared_ptr<ProgramModel> model_from_bytes(const std::vector<std::uint8_t>& bytes, Address base,
                                               const std::string& name = "f",
                                               const std::vector<VariableLocation>& variables = {});

// Runs a shell command, returning its exit status and stdout.
int run(const std::string& command, std::string* out = nullptr);
bool have_tool(const std::string& name);

// ---------------------------------------------------------------------------
// Synthetic functions for layout tests. Blocks are listed in ideal nested
// order; `loops` holds the chain of loop keys from outermost to innermost.

struct SynthBlock {
    std::vector<int> loops;
    bool header = false;  // header of its innermost loop
    bool latch = false;   // back edge to the header of its innermost loop
    bool falls_through = true;
};

struct SynthFunction {
    std::string name = "synth";
    std::vector<SynthBlock> ideal;          // in ideal order
    std::vector<std::size_t> address_order;  // address position -> index into `ideal`
    // Built by finish():
    LoopForest forest;
    std::vector<BlockId> id_of;  // ideal index -> block id
    layout::FunctionView view() const;
    void finish();
};

// Random reducible nest: up to `max_depth` levels and roughly `max_blocks`
// blocks. Every loop has a header and one or two latches among its direct
// blocks. Address order is ideal order.
SynthFunction random_nest(std::mt19937& rng, int max_depth, int max_blocks);
// Moves `moves` random non-header blocks to random address positions.
void perturb(SynthFunction& f, std::mt19937& rng, int moves);

// Outer loop whose inner loop's latch sits after the function's tail:
// addresses B0..B7 with the inner latch at B7.
SynthFunction interleaved_nest();
// Five nested loops; the level-3 body block (ideal index 4) sits at the end
// of the function, twelve blocks past its loop.
SynthFunction quintuple_with_moved_block();
nlohmann::json read_json(const std::string& path);

// Structure-only JSON used for golden comparisons.
nlohmann::json plan_structure(const layout::LayoutPlan& plan);

// True when no two arcs cross (a < c < b < d on row intervals).
bool arcs_properly_nested(const std::vector<layout::BackEdgeArc>& arcs, std::string* why = nullptr);

}  // namespace testsupport
