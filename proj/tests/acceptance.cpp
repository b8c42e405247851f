// Acceptance run: one PASS/FAIL line per primary criterion.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "asmlens/error.hpp"
#include "asmlens/ingest.hpp"
#include "asmlens/layout.hpp"
#include "asmlens/loops.hpp"
#include "asmlens/mapping.hpp"
#include "asmlens/minimap.hpp"
#include "asmlens/service.hpp"
#include "asmlens/stats.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace asmlens;
using namespace testsupport;

namespace {

const char* kFixtures[] = {"bubble_sort", "nested5", "sequential", "continue_loop", "inline_main"};

struct Outcome {
    bool ok = true;
    std::string detail;
};

// Records the first failure; later ones only bump the count.
struct Check {
    Outcome out;
    int failures = 0;
    void require(bool cond, const std::string& what) {
        if (cond) return;
        if (failures++ == 0) out.detail = what;
        out.ok = false;
    }
    Outcome done(const std::string& summary) {
        if (out.ok) out.detail = summary;
        else if (failures > 1) out.detail += " (+" + std::to_string(failures - 1) + " more)";
        return out;
    }
};

double seconds_since(std::chrono::steady_clock::time_point t) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

Outcome cfg_partition() {
    Check c;
    auto start = std::chrono::steady_clock::now();
    std::size_t blocks = 0, insns = 0;
    for (const char* name : kFixtures) {
        auto m = ingest::load_binary(fixture(name), {fixture_source_dir()});
        std::vector<Address> stream;
        for (const auto& b : m->blocks) stream.insert(stream.end(), b.instruction_addresses.begin(), b.instruction_addresses.end());
        std::vector<Address> expect;
        for (const auto& i : m->instructions) expect.push_back(i.address);
        c.require(stream == expect, std::string(name) + ": blocks do not reproduce the instruction stream");
        for (const auto& b : m->blocks)
            c.require(m->instruction_at(b.instruction_addresses.back())->end() == b.end_address,
                      std::string(name) + ": block end mismatch at " + to_string(b.block_id));
        for (const auto& e : m->edges)
            if (e.kind == EdgeKind::FallThrough)
                c.require(m->block(e.target).start_address == m->block(e.source).end_address,
                          std::string(name) + ": fall-through " + to_string(e.source) + " not adjacent");
        blocks += m->blocks.size();
        insns += m->instructions.size();
    }
    double s = seconds_since(start);
    c.require(s < 5.0, "took " + std::to_string(s) + " s");
    std::ostringstream d;
    d << "5 fixtures, " << insns << " instructions in " << blocks << " blocks, " << s << " s";
    return c.done(d.str());
}

Outcome dominator_oracle() {
    Check c;
    auto start = std::chrono::steady_clock::now();
    std::mt19937 rng(1234);
    int reducible = 0;
    for (int trial = 0; reducible < 250 && trial < 50000; ++trial) {
        auto g = random_graph(rng, std::uniform_int_distribution<int>(2, 12)(rng));
        if (!reducible_oracle(g)) continue;
        ++reducible;
        auto idom = loops::compute_dominators(g);
        c.require(idom == idom_oracle(g), "dominators differ on graph " + std::to_string(trial));
        std::vector<std::string> diags;
        auto forest = loops::build_loop_forest(g, idom, diags);
        std::map<int, std::set<int>> got;
        for (const auto& l : forest) got[l.header] = {l.members.begin(), l.members.end()};
        c.require(got == loops_oracle(g), "loop members differ on graph " + std::to_string(trial));
    }
    double s = seconds_since(start);
    c.require(reducible >= 200, "only " + std::to_string(reducible) + " reducible graphs");
    c.require(s < 60.0, "took " + std::to_string(s) + " s");
    return c.done(std::to_string(reducible) + " reducible graphs, 0 mismatches");
}

Outcome layout_invariants() {
    Check c;
    std::mt19937 rng(4321);
    int cases = 0, with_pseudo = 0;
    for (int i = 0; i < 600; ++i) {
        auto f = random_nest(rng, 5, 40);
        bool ideal = i % 3 == 0;
        if (!ideal) perturb(f, rng, 1 + i % 4);
        auto why = check_invariants(f, ideal);
        c.require(why.empty(), "case " + std::to_string(i) + ": " + why);
        ++cases;
        with_pseudo += !layout::displaced_blocks(f.view()).empty();
    }
    return c.done(std::to_string(cases) + " generated forests (" + std::to_string(with_pseudo) +
                  " with pseudo-blocks), 0 violations");
}

Outcome interleaved_golden() {
    Check c;
    auto f = interleaved_nest();
    auto view = f.view();
    auto mem = layout::memory_order_layout(view);
    auto loop = layout::loop_structure_layout(view);
    c.require(plan_structure(mem) == read_json(golden_dir() + "/interleaved_memory.json"), "memory layout differs from golden");
    c.require(plan_structure(loop) == read_json(golden_dir() + "/interleaved_loop.json"), "loop layout differs from golden");
    auto pseudo = rows_of_kind(mem, layout::RowKind::PseudoBlock);
    c.require(pseudo.size() == 1, "expected exactly one pseudo-block");
    bool inner_from_pseudo = false;
    for (const auto& a : mem.arcs)
        if (a.lane == 1) inner_from_pseudo = mem.rows.at(a.from_row).kind == layout::RowKind::PseudoBlock;
    c.require(inner_from_pseudo, "inner back edge not sourced at the pseudo-block");
    c.require(arcs_properly_nested(mem.arcs), "arcs cross");
    return c.done("one pseudo-block, inner arc from it, no crossing, golden match");
}

Outcome minimap_scaling() {
    Check c;
    for (std::size_t n = 1; n <= 64; ++n) {
        int expect = static_cast<int>((n + 3) / 4);
        c.require(minimap::height_units(n) == std::max(1, expect), "height_units(" + std::to_string(n) + ")");
    }
    std::mt19937 rng(5);
    std::vector<minimap::RowInfo> rows(10000);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].block_id = BlockId{static_cast<std::uint32_t>(i)};
        rows[i].instruction_count = 1 + rng() % 30;
        rows[i].pseudo = rng() % 20 == 0;
        rows[i].matches_filter = i >= 4000 && i < 6000;
    }
    auto height = [](const minimap::MinimapModel& m) {
        int h = 0;
        for (const auto& e : m.entries) h += e.height_units;
        return h;
    };
    int plain = height(minimap::build_minimap(rows, 1500, 4200));
    for (auto& r : rows)
        if (rng() % 500 == 0) r.highlight_color = static_cast<int>(rng() % 3);
    auto model = minimap::build_minimap(rows, 1500, 4200);
    c.require(height(model) == plain, "highlighting changed the total height");

    std::optional<BlockId> above, below;
    for (std::size_t i = model.window_begin; i-- > 0;)
        if (rows[i].highlight_color && !rows[i].pseudo) {
            above = rows[i].block_id;
            break;
        }
    for (std::size_t i = model.window_end; i < rows.size(); ++i)
        if (rows[i].highlight_color && !rows[i].pseudo) {
            below = rows[i].block_id;
            break;
        }
    auto start = std::chrono::steady_clock::now();
    auto got_above = minimap::seek(rows, model, minimap::Direction::Above);
    auto got_below = minimap::seek(rows, model, minimap::Direction::Below);
    double ms = seconds_since(start) * 1000;
    c.require(above && got_above == *above, "seek above");
    c.require(below && got_below == *below, "seek below");
    c.require(ms < 50, "seek took " + std::to_string(ms) + " ms");
    std::ostringstream d;
    d << "n=1..64 heights, sum invariant, seek on 10000 blocks in " << ms << " ms";
    return c.done(d.str());
}

Outcome mapping_symmetry() {
    Check c;
    auto m = load_fixture("inline_main");
    std::size_t pairs = 0;
    for (const auto& lm : m->line_map) {
        auto insns = mapping::instructions_for_lines(*m, lm.file_id, lm.line, lm.line);
        c.require(insns.count(lm.address) == 1, "line -> instruction missing");
        auto lines = mapping::lines_for_instructions(*m, {lm.address});
        c.require(lines.count({lm.file_id, lm.line}) == 1, "instruction -> line missing");
        for (Address a : insns)
            c.require(mapping::lines_for_instructions(*m, {a}).count({lm.file_id, lm.line}) == 1, "asymmetric pair");
        ++pairs;
    }
    auto r = stats::multi_file_instruction_fraction(*m);
    c.require(r.of_mapped.value() > 0, "multi_file_instruction_fraction is 0");
    c.require(r.max_files_per_instruction >= 2, "max_files_per_instruction < 2");
    std::ostringstream d;
    d << pairs << " mappings symmetric; multi-file fraction " << r.of_mapped.numerator << "/" << r.of_mapped.denominator
      << ", max files per instruction " << r.max_files_per_instruction;
    return c.done(d.str());
}

Outcome quintuple_nesting() {
    Check c;
    auto m = load_fixture("nested5");
    auto fid = m->find_function("nest5");
    c.require(fid.has_value(), "nest5 missing");
    if (!fid) return c.done("");
    const auto& forest = m->loops(*fid);
    bool deepest = false;
    for (const auto& l : forest.loops) deepest |= l.label == "L1.1.1.1.1" && l.depth == 5;
    c.require(deepest, "no L1.1.1.1.1 at depth 5");
    auto plan = layout::memory_order_layout(layout::function_view(*m, *fid));
    c.require(plan.arcs.size() == 5, "expected 5 arcs, got " + std::to_string(plan.arcs.size()));
    c.require(arcs_properly_nested(plan.arcs), "fixture arcs cross");

    auto f = quintuple_with_moved_block();
    auto view = f.view();
    BlockId moved = f.id_of[4];
    BlockId last_kept{0};
    for (auto b : f.forest.loops[2].member_blocks)
        if (b != moved) last_kept = std::max(last_kept, b);
    c.require(moved.value - last_kept.value - 1 >= 11, "moved block is fewer than 11 blocks away");
    auto mem = layout::memory_order_layout(view);
    c.require(rows_of_kind(mem, layout::RowKind::PseudoBlock) == std::set<BlockId>{moved}, "pseudo-block missing");
    auto loop = layout::loop_structure_layout(view);
    auto order = row_blocks(loop);
    for (const auto& l : f.forest.loops) c.require(contiguous_in(order, l.member_blocks), l.label + " not contiguous");
    for (const auto& r : loop.rows) c.require(r.dashed_border == (r.block_id == moved), "dashed flag on " + to_string(r.block_id));
    return c.done("depth 5 labels, 5 nested arcs; block moved " + std::to_string(moved.value - last_kept.value - 1) +
                  " blocks away gets a pseudo-block and a dashed border");
}

Outcome determinism() {
    Check c;
    for (const char* name : kFixtures) {
        std::string a, b;
        std::string cmd = cli_path() + " analyze " + fixture(name) + " --source-root " + fixture_source_dir();
        c.require(run(cmd, &a) == 0 && run(cmd, &b) == 0, std::string(name) + ": analyze failed");
        c.require(!a.empty() && a == b, std::string(name) + ": output differs between runs");
    }
    return c.done("analyze byte-identical twice on 5 fixtures");
}

Outcome headless() {
    Check c;
    std::string out;
    c.require(run(cli_path() + " layout " + fixture("bubble_sort") + " --function bubble_sort --mode loop", &out) == 0,
              "CLI layout failed");
    service::Service svc;
    auto load = svc.dispatch("POST", "/api/v1/load", {}, {{"path", fixture("bubble_sort")}, {"source_roots", {fixture_source_dir()}}});
    c.require(load.status == 200, "API load failed");
    if (load.status == 200) {
        std::string bid = load.body["binary_id"], sid = load.body["session_id"];
        auto view = svc.dispatch("POST", "/api/v1/sessions/" + sid + "/views", {}, {{"function", "bubble_sort"}});
        c.require(view.status == 201, "API view failed");
        std::string v = "/api/v1/sessions/" + sid + "/views/" + std::to_string(view.body.value("view_id", 0));
        c.require(svc.dispatch("GET", v + "/layout").status == 200, "API layout failed");
        c.require(svc.dispatch("GET", v + "/minimap").status == 200, "API minimap failed");
        c.require(svc.dispatch("GET", "/api/v1/binaries/" + bid + "/analysis").status == 200, "API analysis failed");
    }
    return c.done("CLI and in-process API calls only; no UI component built");
}

}  // namespace

int main() {
    struct Criterion {
        const char* id;
        const char* name;
        std::function<Outcome()> run;
    };
    std::vector<Criterion> criteria = {
        {"A1", "cfg-partition", cfg_partition},
        {"A2", "dominator-loop-oracle", dominator_oracle},
        {"A3", "layout-invariants", layout_invariants},
        {"A4", "interleaved-nest-golden", interleaved_golden},
        {"A5", "minimap-scaling", minimap_scaling},
        {"A6", "mapping-symmetry", mapping_symmetry},
        {"A7", "quintuple-nesting", quintuple_nesting},
        {"A8", "determinism", determinism},
        {"A9", "headless", headless},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s %s %s: %s\n", o.ok ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
        std::fflush(stdout);
        failed += !o.ok;
    }
    return failed == 0 ? 0 : 1;
}
