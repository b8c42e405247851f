#include <gtest/gtest.h>

#include <functional>

#include "asmlens/error.hpp"
#include "asmlens/mapping.hpp"
#include "asmlens/stats.hpp"
#include "support.hpp"

using namespace asmlens;
using namespace asmlens::mapping;

namespace {

FileId file_ending(const ProgramModel& m, const std::string& suffix) {
    for (const auto& f : m.files)
        if (f.path.ends_with(suffix)) return f.file_id;
    throw std::runtime_error("no file " + suffix);
}

void expect_same(const HighlightSet& a, const HighlightSet& b) {
    EXPECT_EQ(a.color_id, b.color_id);
    EXPECT_EQ(a.instruction_addresses, b.instruction_addresses);
    EXPECT_EQ(a.source_selections, b.source_selections);
    EXPECT_EQ(a.origin, b.origin);
}

template <class F>
ErrorKind error_of(F f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::BadRequest;
}

const ColoredNode* find_node(const ColoredNode& n, const std::function<bool(const ColoredNode&)>& pred) {
    if (pred(n)) return &n;
    for (const auto& c : n.children)
        if (auto* r = find_node(c, pred)) return r;
    return nullptr;
}

}  // namespace

// Both query directions agree with the raw line map and with each other.
TEST(Mapping, RoundTripOnCrossFileInline) {
    auto m = testsupport::load_fixture("inline_main");
    std::map<SourceLine, std::set<Address>> by_line;
    std::map<Address, std::set<SourceLine>> by_addr;
    for (const auto& lm : m->line_map) {
        by_line[{lm.file_id, lm.line}].insert(lm.address);
        by_addr[lm.address].insert({lm.file_id, lm.line});
    }
    ASSERT_FALSE(by_line.empty());
    for (const auto& [line, addrs] : by_line) {
        EXPECT_EQ(instructions_for_lines(*m, line.first, line.second, line.second), addrs);
        for (Address a : addrs) EXPECT_TRUE(lines_for_instructions(*m, {a}).count(line));
    }
    for (const auto& [a, lines] : by_addr) {
        EXPECT_EQ(lines_for_instructions(*m, {a}), lines);
        for (const auto& l : lines) EXPECT_TRUE(instructions_for_lines(*m, l.first, l.second, l.second).count(a));
    }
    for (const auto& f : m->files) {
        std::set<std::uint32_t> expect;
        for (const auto& [line, _] : by_line)
            if (line.first == f.file_id) expect.insert(line.second);
        EXPECT_EQ(mapped_line_markers(*m, f.file_id), expect);
    }
}

TEST(Mapping, InlinedInstructionsSpanTwoFiles) {
    auto m = testsupport::load_fixture("inline_main");
    auto r = stats::multi_file_instruction_fraction(*m);
    EXPECT_GT(r.of_mapped.numerator, 0u);
    EXPECT_GT(r.of_mapped.value(), 0.0);
    EXPECT_GE(r.max_files_per_instruction, 2u);
    EXPECT_LE(r.of_mapped.denominator, r.of_all.denominator);
    EXPECT_EQ(r.of_all.denominator, m->instructions.size());
}

TEST(Mapping, LineRangeIsInclusive) {
    auto m = testsupport::load_fixture("bubble_sort");
    FileId f = file_ending(*m, "bubble_sort.c");
    std::set<Address> expect;
    for (const auto& lm : m->line_map)
        if (lm.file_id == f && lm.line >= 7 && lm.line <= 9) expect.insert(lm.address);
    EXPECT_EQ(instructions_for_lines(*m, f, 7, 9), expect);
    EXPECT_TRUE(instructions_for_lines(*m, f, 1, 1).empty());
}

TEST(Mapping, HighlightFromSourceKeepsSelection) {
    auto m = testsupport::load_fixture("bubble_sort");
    FileId f = file_ending(*m, "bubble_sort.c");
    auto h = highlight_from_source(*m, 2, f, 8, 10);
    EXPECT_EQ(h.color_id, 2);
    EXPECT_EQ(h.origin, Origin::SourceSelection);
    EXPECT_EQ(h.source_selections, (std::set<SourceLine>{{f, 8}, {f, 9}, {f, 10}}));
    EXPECT_EQ(h.instruction_addresses, instructions_for_lines(*m, f, 8, 10));
    ASSERT_FALSE(h.instruction_addresses.empty());
    EXPECT_EQ(h.scroll_target(), *h.instruction_addresses.begin());
    // the loop body spans at least two blocks
    std::set<BlockId> blocks;
    for (Address a : h.instruction_addresses) blocks.insert(m->block_containing(a)->block_id);
    EXPECT_GE(blocks.size(), 2u);
}

TEST(Mapping, HighlightFromInstructions) {
    auto m = testsupport::load_fixture("inline_main");
    std::set<Address> picked;
    for (std::size_t i = 0; i < m->instructions.size(); i += 7) picked.insert(m->instructions[i].address);
    auto h = highlight_from_instructions(*m, 1, picked);
    EXPECT_EQ(h.instruction_addresses, picked);
    EXPECT_EQ(h.source_selections, lines_for_instructions(*m, picked));
    EXPECT_EQ(h.origin, Origin::DisassemblySelection);
}

TEST(Mapping, RederiveIsIdempotent) {
    auto m = testsupport::load_fixture("inline_main");
    FileId f = file_ending(*m, "vec_ops.h");
    auto src = highlight_from_source(*m, 0, f, 1, 20);
    expect_same(rederive(*m, src), src);
    expect_same(rederive(*m, rederive(*m, src)), rederive(*m, src));
    std::set<Address> some{m->instructions[3].address, m->instructions[40].address};
    auto dis = highlight_from_instructions(*m, 4, some);
    expect_same(rederive(*m, dis), dis);
}

TEST(Mapping, Errors) {
    auto m = testsupport::load_fixture("bubble_sort");
    FileId bogus{static_cast<std::uint32_t>(m->files.size() + 5)};
    EXPECT_EQ(error_of([&] { instructions_for_lines(*m, bogus, 1, 2); }), ErrorKind::UnknownFile);
    EXPECT_EQ(error_of([&] { mapped_line_markers(*m, bogus); }), ErrorKind::UnknownFile);
    Address mid = m->instructions[1].address + 1;
    if (!m->instruction_at(mid)) {
        EXPECT_EQ(error_of([&] { lines_for_instructions(*m, {mid}); }), ErrorKind::UnknownAddress);
    }
}

// Two highlights from different files color their leaves and all ancestors.
TEST(Mapping, FileTreeColorsPropagate) {
    auto m = testsupport::load_fixture("inline_main");
    FileId main_c = file_ending(*m, "inline_main.c");
    FileId vec_h = file_ending(*m, "vec_ops.h");
    auto main_lines = mapped_line_markers(*m, main_c);
    ASSERT_FALSE(main_lines.empty());
    // a main.c line whose code is not inlined from the header
    std::optional<std::uint32_t> pure;
    for (auto l : main_lines) {
        bool only_main = true;
        for (const auto& sl : lines_for_instructions(*m, instructions_for_lines(*m, main_c, l, l)))
            only_main &= sl.first == main_c;
        if (only_main) {
            pure = l;
            break;
        }
    }
    ASSERT_TRUE(pure);
    auto h0 = highlight_from_source(*m, 0, main_c, *pure, *pure);
    auto vec_lines = mapped_line_markers(*m, vec_h);
    auto h1 = highlight_from_source(*m, 1, vec_h, *vec_lines.begin(), *vec_lines.rbegin());

    auto tree = files_for_highlight(*m, {h0, h1});
    auto* main_leaf = find_node(tree, [&](const ColoredNode& n) { return n.file == main_c; });
    auto* vec_leaf = find_node(tree, [&](const ColoredNode& n) { return n.file == vec_h; });
    ASSERT_TRUE(main_leaf && vec_leaf);
    EXPECT_TRUE(main_leaf->colors.count(0));
    EXPECT_TRUE(vec_leaf->colors.count(1));
    EXPECT_TRUE(main_leaf->is_application_code);
    // h0 was chosen to touch no header code
    EXPECT_FALSE(vec_leaf->colors.count(0));

    // every ancestor's colors are the union of its children's
    std::function<std::set<int>(const ColoredNode&)> check = [&](const ColoredNode& n) {
        if (n.children.empty()) return n.colors;
        std::set<int> u;
        for (const auto& c : n.children) {
            auto cc = check(c);
            u.insert(cc.begin(), cc.end());
        }
        EXPECT_EQ(n.colors, u) << n.path;
        return n.colors;
    };
    EXPECT_EQ(check(tree), (std::set<int>{0, 1}));
}
