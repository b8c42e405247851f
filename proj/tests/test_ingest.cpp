#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "asmlens/error.hpp"
#include "asmlens/ingest.hpp"
#include "support.hpp"

using namespace asmlens;
using testsupport::load_fixture;

namespace {

const char* kFixtures[] = {"bubble_sort", "nested5", "sequential", "continue_loop", "inline_main"};

ErrorKind load_error(const std::string& path) {
    try {
        ingest::load_binary(path);
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error for " << path;
    return ErrorKind::BadRequest;
}

}  // namespace

TEST(Ingest, FunctionsSortedAndDisjoint) {
    for (const char* name : kFixtures) {
        auto m = load_fixture(name);
        ASSERT_FALSE(m->functions.empty());
        Address prev_end = 0;
        for (std::size_t i = 0; i < m->functions.size(); ++i) {
            const auto& f = m->functions[i];
            EXPECT_EQ(f.function_id.value, i);
            ASSERT_FALSE(f.address_ranges.empty());
            bool entry_inside = false;
            for (const auto& r : f.address_ranges) entry_inside |= r.contains(f.entry_address);
            EXPECT_TRUE(entry_inside) << f.name;
            if (i > 0) {
                EXPECT_GT(f.entry_address, m->functions[i - 1].entry_address);
            }
            EXPECT_GE(f.address_ranges.front().start, prev_end) << f.name;
            prev_end = f.address_ranges.back().end;
        }
    }
}

TEST(Ingest, InstructionsIncreaseAndStayInFunctions) {
    for (const char* name : kFixtures) {
        auto m = load_fixture(name);
        for (std::size_t i = 1; i < m->instructions.size(); ++i)
            ASSERT_GT(m->instructions[i].address, m->instructions[i - 1].address);
        for (const auto& insn : m->instructions) {
            const auto* f = m->function_containing(insn.address);
            ASSERT_NE(f, nullptr) << std::hex << insn.address;
            bool inside = false;
            for (const auto& r : f->address_ranges) inside |= insn.address >= r.start && insn.end() <= r.end;
            EXPECT_TRUE(inside) << std::hex << insn.address;
        }
    }
}

// Every sized text symbol reported by nm is the entry of some function.
TEST(Ingest, FunctionsCoverSymbolTable) {
    if (!testsupport::have_tool("nm")) GTEST_SKIP() << "nm not installed";
    for (const char* name : kFixtures) {
        auto m = load_fixture(name);
        std::string out;
        ASSERT_EQ(testsupport::run("nm -S --defined-only " + testsupport::fixture(name), &out), 0);
        std::istringstream in(out);
        std::string line;
        int checked = 0;
        while (std::getline(in, line)) {
            std::istringstream ls(line);
            std::string addr, size, type, sym;
            if (!(ls >> addr >> size >> type >> sym)) continue;
            if ((type != "T" && type != "t") || std::stoull(size, nullptr, 16) == 0) continue;
            Address a = std::stoull(addr, nullptr, 16);
            const auto* f = m->function_containing(a);
            ASSERT_NE(f, nullptr) << sym;
            EXPECT_EQ(f->entry_address, a) << sym;
            ++checked;
        }
        EXPECT_GE(checked, 2) << name;
    }
}

TEST(Ingest, LineMapPointsAtInstructions) {
    for (const char* name : kFixtures) {
        auto m = load_fixture(name);
        EXPECT_FALSE(m->no_debug_info);
        ASSERT_FALSE(m->line_map.empty()) << name;
        for (const auto& lm : m->line_map) {
            ASSERT_NE(m->instruction_at(lm.address), nullptr) << std::hex << lm.address;
            ASSERT_LT(lm.file_id.value, m->files.size());
            EXPECT_GT(lm.line, 0u);
        }
    }
}

TEST(Ingest, ApplicationFilesAreUnderRootsWithContent) {
    auto m = load_fixture("inline_main");
    bool saw_main = false, saw_header = false;
    for (const auto& f : m->files) {
        EXPECT_EQ(f.is_application_code, f.content.has_value()) << f.path;
        if (f.is_application_code) {
            EXPECT_EQ(f.path.rfind(testsupport::fixture_source_dir(), 0), 0u) << f.path;
        }
        saw_main |= f.path.ends_with("inline_main.c") && f.is_application_code;
        saw_header |= f.path.ends_with("vec_ops.h") && f.is_application_code;
    }
    EXPECT_TRUE(saw_main);
    EXPECT_TRUE(saw_header);
    for (std::size_t i = 1; i < m->files.size(); ++i) EXPECT_LT(m->files[i - 1].path, m->files[i].path);
}

TEST(Ingest, WithoutRootsNothingIsApplicationCode) {
    auto m = ingest::load_binary(testsupport::fixture("bubble_sort"));
    for (const auto& f : m->files) EXPECT_FALSE(f.is_application_code) << f.path;
}

TEST(Ingest, Errors) {
    EXPECT_EQ(load_error(testsupport::fixture_source_dir() + "/bubble_sort.c"), ErrorKind::NotAnExecutable);
    EXPECT_EQ(load_error(testsupport::fixture_source_dir() + "/does-not-exist"), ErrorKind::UnreadableFile);
    std::string empty = ::testing::TempDir() + "/asmlens_empty";
    std::ofstream(empty).close();
    EXPECT_EQ(load_error(empty), ErrorKind::NotAnExecutable);
    std::string truncated = ::testing::TempDir() + "/asmlens_truncated";
    {
        std::ifstream in(testsupport::fixture("bubble_sort"), std::ios::binary);
        std::string head(100, '\0');
        in.read(head.data(), 100);
        std::ofstream(truncated, std::ios::binary) << head;
    }
    EXPECT_EQ(load_error(truncated), ErrorKind::NotAnExecutable);
}

TEST(Ingest, StrippedBinaryHasNoDebugInfo) {
    auto m = ingest::load_binary(testsupport::fixture("bubble_sort_stripped"));
    EXPECT_TRUE(m->no_debug_info);
    EXPECT_TRUE(m->line_map.empty());
    EXPECT_FALSE(m->instructions.empty());
    EXPECT_FALSE(m->blocks.empty());
    bool text = false;
    for (const auto& f : m->functions) text |= f.name == ".text";
    EXPECT_TRUE(text);
}

TEST(Ingest, FrameSlotVariablesResolveAtO0) {
    auto m = load_fixture("continue_loop");
    auto fid = m->find_function("skip_odd");
    ASSERT_TRUE(fid);
    std::set<std::string> seen;
    for (auto b : m->function_blocks(*fid))
        for (auto a : m->block(b).instruction_addresses)
            for (const auto& op : m->instruction_at(a)->operands)
                if (op.resolved_variable) seen.insert(*op.resolved_variable);
    for (const char* v : {"data", "count", "i", "sum", "v"}) EXPECT_TRUE(seen.count(v)) << v;
}

TEST(Ingest, FramePointerDetection) {
    auto m = load_fixture("continue_loop");
    auto f = m->function(*m->find_function("skip_odd"));
    EXPECT_TRUE(ingest::has_frame_pointer(m->instructions, f.entry_address));
    auto o2 = load_fixture("bubble_sort");
    auto g = o2->function(*o2->find_function("bubble_sort"));
    EXPECT_FALSE(ingest::has_frame_pointer(o2->instructions, g.entry_address));
}
