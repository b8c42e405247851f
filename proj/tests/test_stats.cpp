#include <gtest/gtest.h>

#include "asmlens/layout.hpp"
#include "asmlens/stats.hpp"
#include "support.hpp"

using namespace asmlens;

namespace {

const char* kFixtures[] = {"bubble_sort", "nested5", "sequential", "continue_loop", "inline_main"};

}  // namespace

TEST(Stats, DisparateFractionCountsNonContiguousLoops) {
    for (const char* name : kFixtures) {
        auto m = testsupport::load_fixture(name);
        std::size_t loops = 0, disparate = 0;
        bool any_pseudo = false;
        for (const auto& fn : m->functions) {
            const auto& blocks = m->function_blocks(fn.function_id);
            for (const auto& l : m->loops(fn.function_id).loops) {
                ++loops;
                std::vector<std::size_t> pos;
                for (std::size_t i = 0; i < blocks.size(); ++i)
                    if (l.member_blocks.count(blocks[i])) pos.push_back(i);
                if (pos.back() - pos.front() + 1 != pos.size()) ++disparate;
            }
            auto plan = layout::memory_order_layout(layout::function_view(*m, fn.function_id));
            for (const auto& r : plan.rows) any_pseudo |= r.kind == layout::RowKind::PseudoBlock;
        }
        auto f = stats::disparate_loop_fraction(*m);
        EXPECT_EQ(f.denominator, loops) << name;
        EXPECT_EQ(f.numerator, disparate) << name;
        EXPECT_EQ(f.value() > 0, any_pseudo) << name;
    }
}

TEST(Stats, MultiFileFractionByDefinition) {
    for (const char* name : kFixtures) {
        auto m = testsupport::load_fixture(name);
        std::size_t mapped = 0, multi = 0, most = 0;
        for (const auto& insn : m->instructions) {
            std::set<FileId> files;
            for (const auto& lm : m->mappings_for(insn.address)) files.insert(lm.file_id);
            if (!files.empty()) ++mapped;
            if (files.size() > 1) ++multi;
            most = std::max(most, files.size());
        }
        auto r = stats::multi_file_instruction_fraction(*m);
        EXPECT_EQ(r.of_mapped.numerator, multi);
        EXPECT_EQ(r.of_mapped.denominator, mapped);
        EXPECT_EQ(r.of_all.numerator, multi);
        EXPECT_EQ(r.of_all.denominator, m->instructions.size());
        EXPECT_EQ(r.max_files_per_instruction, most);
    }
}

TEST(Stats, HistogramAccountsForEveryBlockAndInstruction) {
    for (const char* name : kFixtures) {
        auto m = testsupport::load_fixture(name);
        auto h = stats::block_size_histogram(*m);
        std::size_t blocks = 0, insns = 0;
        for (const auto& [size, count] : h) {
            EXPECT_GT(size, 0u);
            blocks += count;
            insns += size * count;
        }
        EXPECT_EQ(blocks, m->blocks.size());
        EXPECT_EQ(insns, m->instructions.size());
    }
}

TEST(Stats, HistogramCsv) {
    EXPECT_EQ(stats::histogram_csv({{1, 4}, {3, 2}}), "instructions_per_block,blocks\n1,4\n3,2\n");
    EXPECT_EQ(stats::histogram_csv({}), "instructions_per_block,blocks\n");
}

TEST(Stats, EmptyFractionIsZero) {
    stats::Fraction f;
    EXPECT_EQ(f.value(), 0.0);
    auto m = testsupport::model_from_bytes({0xc3}, 0x1000);
    auto d = stats::disparate_loop_fraction(*m);
    EXPECT_EQ(d.denominator, 0u);
    auto r = stats::corpus_report(*m);
    EXPECT_EQ(r.multi_file.of_all.denominator, 1u);
    EXPECT_EQ(r.block_size_histogram, (std::map<std::size_t, std::size_t>{{1, 1}}));
}
