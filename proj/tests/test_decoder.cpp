#include <gtest/gtest.h>

#include <cstring>
#include <regex>
#include <sstream>

#include "asmlens/x86_decoder.hpp"
#include "support.hpp"

using namespace asmlens;

namespace {

std::string decode_text(std::vector<std::uint8_t> bytes, Address at = 0x1000) {
    return x86::decode(bytes, at).text();
}

// objdump and our text, reduced to a comparable form.
std::string normalize(std::string s) {
    if (auto p = s.find(" <"); p != std::string::npos) s.erase(p);
    if (auto p = s.find('#'); p != std::string::npos) s.erase(p);
    std::string out;
    bool space = false;
    for (char c : s) {
        if (c == ' ' || c == '\t') {
            space = true;
            continue;
        }
        if (space && !out.empty() && out.back() != ',') out += ' ';
        space = false;
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    for (const char* prefix : {"bnd ", "notrack "})
        if (out.rfind(prefix, 0) == 0) out.erase(0, std::strlen(prefix));
    return out;
}

}  // namespace

TEST(Decoder, FrozenEncodings) {
    EXPECT_EQ(decode_text({0x55}), "push rbp");
    EXPECT_EQ(decode_text({0x48, 0x89, 0xe5}), "mov rbp, rsp");
    EXPECT_EQ(decode_text({0x8b, 0x45, 0xfc}), "mov eax, dword ptr [rbp-0x4]");
    EXPECT_EQ(decode_text({0xc3}), "ret");
    EXPECT_EQ(decode_text({0xf3, 0x0f, 0x1e, 0xfa}), "endbr64");
    EXPECT_EQ(decode_text({0xc5, 0xf8, 0x58, 0xc1}), "vaddps xmm0, xmm0, xmm1");
    EXPECT_EQ(decode_text({0x0f, 0x1f, 0x44, 0x00, 0x00}), "nop dword ptr [rax+rax*1+0x0]");
}

TEST(Decoder, ControlTransferFlags) {
    auto call = x86::decode(std::vector<std::uint8_t>{0xe8, 0x10, 0x00, 0x00, 0x00}, 0x1000);
    EXPECT_TRUE(call.is_call);
    EXPECT_TRUE(call.is_control_transfer);
    EXPECT_EQ(call.transfer_target, Address{0x1015});
    EXPECT_EQ(call.byte_length, 5u);

    auto je = x86::decode(std::vector<std::uint8_t>{0x74, 0xfe}, 0x2000);
    EXPECT_TRUE(je.is_conditional);
    EXPECT_EQ(je.mnemonic, "je");
    EXPECT_EQ(je.transfer_target, Address{0x2000});

    auto jmp_reg = x86::decode(std::vector<std::uint8_t>{0xff, 0xe0}, 0x3000);
    EXPECT_TRUE(jmp_reg.is_control_transfer);
    EXPECT_FALSE(jmp_reg.transfer_target.has_value());

    EXPECT_TRUE(x86::decode(std::vector<std::uint8_t>{0xc3}, 0).is_return);
    EXPECT_TRUE(x86::decode(std::vector<std::uint8_t>{0xf4}, 0).is_terminator);
    EXPECT_TRUE(x86::decode(std::vector<std::uint8_t>{0x0f, 0x0b}, 0).is_terminator);
}

TEST(Decoder, InvalidByteIsOneByteBad) {
    auto bad = x86::decode(std::vector<std::uint8_t>{0x06, 0x90}, 0x10);
    EXPECT_EQ(bad.mnemonic, "(bad)");
    EXPECT_EQ(bad.byte_length, 1u);
    auto truncated = x86::decode(std::vector<std::uint8_t>{0x48, 0x8b}, 0x10);
    EXPECT_EQ(truncated.mnemonic, "(bad)");
    EXPECT_EQ(truncated.byte_length, 1u);
}

TEST(Decoder, SweepIsContiguous) {
    std::vector<std::uint8_t> bytes = {0x55, 0x48, 0x89, 0xe5, 0x06, 0x5d, 0xc3};
    auto insns = x86::sweep(bytes, 0x400);
    ASSERT_FALSE(insns.empty());
    Address expect = 0x400;
    for (const auto& i : insns) {
        EXPECT_EQ(i.address, expect);
        expect = i.end();
    }
    EXPECT_EQ(expect, 0x400u + bytes.size());
}

TEST(Decoder, RegisterFamily) {
    EXPECT_EQ(x86::register_family("eax"), "rax");
    EXPECT_EQ(x86::register_family("al"), "rax");
    EXPECT_EQ(x86::register_family("r9b"), "r9");
    EXPECT_EQ(x86::register_family("r10d"), "r10");
    EXPECT_EQ(x86::register_family("sil"), "rsi");
    EXPECT_EQ(x86::register_family("xmm3"), "xmm3");
}

// Every instruction of every fixture agrees with objdump's Intel syntax.
TEST(Decoder, MatchesObjdumpOnFixtures) {
    if (!testsupport::have_tool("objdump")) GTEST_SKIP() << "objdump not installed";
    std::regex line_re(R"(^\s*([0-9a-f]+):\t(.*)$)");
    for (const char* name : {"bubble_sort", "nested5", "sequential", "continue_loop", "inline_main"}) {
        auto model = testsupport::load_fixture(name);
        std::string dump;
        ASSERT_EQ(testsupport::run("objdump -d -M intel --no-show-raw-insn " + testsupport::fixture(name), &dump), 0);
        std::istringstream in(dump);
        std::string line;
        std::size_t compared = 0, mismatched = 0;
        while (std::getline(in, line)) {
            std::smatch m;
            if (!std::regex_match(line, m, line_re)) continue;
            Address a = std::stoull(m[1].str(), nullptr, 16);
            const Instruction* insn = model->instruction_at(a);
            if (!insn) continue;  // outside any function range
            ++compared;
            std::string theirs = normalize(m[2].str());
            std::string ours = normalize(insn->text());
            // objdump prints direct branch targets without the 0x.
            if (insn->transfer_target) {
                if (auto p = ours.find(" 0x"); p != std::string::npos) ours.erase(p + 1, 2);
            }
            if (theirs != ours && ++mismatched <= 10) ADD_FAILURE() << name << " @" << std::hex << a << ": objdump '" << theirs << "' ours '" << ours << "'";
        }
        EXPECT_GT(compared, 50u) << name;
        EXPECT_EQ(mismatched, 0u) << name;
    }
}
