#include <gtest/gtest.h>

#include <fstream>

#include "asmlens/layout.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace asmlens;
using namespace asmlens::layout;
using testsupport::SynthBlock;
using testsupport::SynthFunction;

using namespace testsupport;


TEST(Layout, InterleavedNestMatchesGolden) {
    auto f = interleaved_nest();
    auto view = f.view();
    auto mem = memory_order_layout(view);
    auto loop = loop_structure_layout(view);
    EXPECT_EQ(testsupport::plan_structure(mem), read_json(testsupport::golden_dir() + "/interleaved_memory.json"))
        << testsupport::plan_structure(mem).dump(2);
    EXPECT_EQ(testsupport::plan_structure(loop), read_json(testsupport::golden_dir() + "/interleaved_loop.json"))
        << testsupport::plan_structure(loop).dump(2);
    EXPECT_EQ(rows_of_kind(mem, RowKind::PseudoBlock), (std::set<BlockId>{BlockId{7}}));
    // B7 sits in both loops, so the multi-loop case is flagged once.
    ASSERT_EQ(mem.diagnostics.size(), 1u);
    EXPECT_NE(mem.diagnostics[0].find("B7"), std::string::npos);
}

TEST(Layout, InterleavedNestCrossesWithoutPseudoBlocks) {
    // Arcs drawn on plain address rows: inner 7->3, outer 4->1 cross.
    std::vector<BackEdgeArc> naive = {{4, 1, 0, "outer", {}}, {7, 3, 1, "inner", {}}};
    EXPECT_FALSE(testsupport::arcs_properly_nested(naive));
    auto f = interleaved_nest();
    EXPECT_TRUE(testsupport::arcs_properly_nested(memory_order_layout(f.view()).arcs));
}

TEST(Layout, IdealOrderIsUnchanged) {
    auto f = interleaved_nest();
    f.address_order = {0, 1, 2, 3, 4, 5, 6, 7};
    f.finish();
    auto view = f.view();
    auto mem = memory_order_layout(view);
    auto loop = loop_structure_layout(view);
    EXPECT_TRUE(rows_of_kind(mem, RowKind::PseudoBlock).empty());
    EXPECT_EQ(row_blocks(mem), view.blocks);
    EXPECT_EQ(row_blocks(loop), view.blocks);
    for (const auto& r : loop.rows) EXPECT_FALSE(r.dashed_border);
}

TEST(Layout, GeneratedForestInvariants) {
    std::mt19937 rng(7);
    int cases = 0, with_pseudo = 0;
    for (int i = 0; i < 900; ++i) {
        auto f = testsupport::random_nest(rng, 5, 40);
        bool ideal = i % 3 == 0;
        if (!ideal) testsupport::perturb(f, rng, 1 + i % 4);
        auto why = check_invariants(f, ideal);
        ASSERT_EQ(why, "") << "case " << i;
        ++cases;
        if (!displaced_blocks(f.view()).empty()) ++with_pseudo;
    }
    EXPECT_GE(cases, 500);
    EXPECT_GE(with_pseudo, 100);  // the generator must actually exercise pseudo-blocks
}

TEST(Layout, FallThroughArrowsOnlyBetweenAddressNeighbours) {
    std::mt19937 rng(99);
    for (int i = 0; i < 200; ++i) {
        auto f = testsupport::random_nest(rng, 4, 30);
        testsupport::perturb(f, rng, 2);
        auto view = f.view();
        auto loop = loop_structure_layout(view);
        for (std::size_t r = 0; r < loop.rows.size(); ++r) {
            auto b = loop.rows[r].block_id;
            bool expect = r + 1 < loop.rows.size() && loop.rows[r + 1].block_id.value == b.value + 1 &&
                          view.falls_through[b.value];
            EXPECT_EQ(loop.rows[r].fall_through_arrow_after, expect);
        }
        for (const auto& row : memory_order_layout(view).rows) EXPECT_FALSE(row.fall_through_arrow_after);
    }
}

TEST(Layout, QuintupleNestWithDisplacedLevelThreeBlock) {
    SynthFunction f = quintuple_with_moved_block();
    auto view = f.view();
    BlockId moved = f.id_of[4];

    // at least 11 blocks lie between the loop's last kept member and the moved block
    const Loop& level3 = f.forest.loops[2];
    ASSERT_EQ(level3.label, "L1.1.1");
    BlockId last_kept{0};
    for (auto b : level3.member_blocks)
        if (b != moved) last_kept = std::max(last_kept, b);
    EXPECT_GE(moved.value - last_kept.value - 1, 11u);

    auto mem = memory_order_layout(view);
    EXPECT_EQ(rows_of_kind(mem, RowKind::PseudoBlock), (std::set<BlockId>{moved}));
    // The slot follows the loop's last kept member: the moved block's own
    // address sorts it after every other item of its loop.
    std::size_t last_kept_row = 0, pseudo_row = 0;
    for (std::size_t i = 0; i < mem.rows.size(); ++i) {
        if (mem.rows[i].block_id == last_kept) last_kept_row = i;
        if (mem.rows[i].kind == RowKind::PseudoBlock) pseudo_row = i;
    }
    EXPECT_EQ(pseudo_row, last_kept_row + 1);
    EXPECT_EQ(mem.rows[pseudo_row].indent, 3);
    EXPECT_EQ(mem.rows.back().block_id, moved);

    auto loop = loop_structure_layout(view);
    auto order = row_blocks(loop);
    for (const auto& l : f.forest.loops) EXPECT_TRUE(contiguous_in(order, l.member_blocks)) << l.label;
    for (const auto& r : loop.rows) EXPECT_EQ(r.dashed_border, r.block_id == moved);
    EXPECT_EQ(check_invariants(f, false), "");
}

TEST(Layout, QuintupleFixtureHasFiveNestedArcs) {
    auto m = testsupport::load_fixture("nested5");
    auto fid = *m->find_function("nest5");
    auto view = function_view(*m, fid);
    for (auto mode : {OrderingMode::MemoryAddress, OrderingMode::LoopStructure}) {
        auto plan = build_layout(view, mode);
        ASSERT_EQ(plan.arcs.size(), 5u);
        std::set<int> lanes;
        for (const auto& a : plan.arcs) lanes.insert(a.lane);
        EXPECT_EQ(lanes, (std::set<int>{0, 1, 2, 3, 4}));
        EXPECT_TRUE(testsupport::arcs_properly_nested(plan.arcs));
        // each deeper arc lies strictly inside the previous one
        std::vector<std::pair<std::size_t, std::size_t>> spans(5);
        for (const auto& a : plan.arcs) spans[static_cast<std::size_t>(a.lane)] = std::minmax(a.from_row, a.to_row);
        for (std::size_t i = 1; i < 5; ++i) {
            EXPECT_LE(spans[i - 1].first, spans[i].first);
            EXPECT_GE(spans[i - 1].second, spans[i].second);
        }
    }
}

TEST(Layout, FixtureViewsSatisfyBasicInvariants) {
    for (const char* name : {"bubble_sort", "nested5", "sequential", "continue_loop", "inline_main"}) {
        auto m = testsupport::load_fixture(name);
        for (const auto& fn : m->functions) {
            auto view = function_view(*m, fn.function_id);
            auto mem = memory_order_layout(view);
            std::vector<BlockId> real;
            for (const auto& r : mem.rows)
                if (r.kind == RowKind::RealBlock) real.push_back(r.block_id);
            EXPECT_EQ(real, m->function_blocks(fn.function_id));
            auto loop = loop_structure_layout(view);
            auto order = row_blocks(loop);
            std::sort(order.begin(), order.end());
            EXPECT_EQ(order, m->function_blocks(fn.function_id));
            ASSERT_FALSE(mem.rows.empty());
            EXPECT_EQ(mem.rows[0].spacing_before, Spacing::InterFunction);
        }
    }
}

TEST(Layout, ModeNames) {
    EXPECT_EQ(parse_mode("memory"), OrderingMode::MemoryAddress);
    EXPECT_EQ(parse_mode("loop_structure"), OrderingMode::LoopStructure);
    EXPECT_FALSE(parse_mode("sideways"));
}
