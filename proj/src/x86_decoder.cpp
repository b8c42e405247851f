#include "asmlens/x86_decoder.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <string_view>

namespace asmlens::x86 {
namespace {

constexpr std::array<const char*, 16> kGpr64 = {"rax", "rcx", "rdx", "rbx", "rsp", "rbp", "rsi", "rdi",
                                                 "r8",  "r9",  "r10", "r11", "r12", "r13", "r14", "r15"};
constexpr std::array<const char*, 16> kGpr32 = {"eax", "ecx", "edx", "ebx", "esp", "ebp", "esi", "edi",
                                                 "r8d", "r9d", "r10d", "r11d", "r12d", "r13d", "r14d", "r15d"};
constexpr std::array<const char*, 16> kGpr16 = {"ax",  "cx",  "dx",   "bx",   "sp",   "bp",   "si",   "di",
                                                 "r8w", "r9w", "r10w", "r11w", "r12w", "r13w", "r14w", "r15w"};
constexpr std::array<const char*, 16> kGpr8 = {"al",  "cl",  "dl",   "bl",   "spl",  "bpl",  "sil",  "dil",
                                                "r8b", "r9b", "r10b", "r11b", "r12b", "r13b", "r14b", "r15b"};
constexpr std::array<const char*, 8> kGpr8Legacy = {"al", "cl", "dl", "bl", "ah", "ch", "dh", "bh"};
constexpr std::array<const char*, 8> kSeg = {"es", "cs", "ss", "ds", "fs", "gs", "?", "?"};
constexpr std::array<const char*, 16> kCond = {"o", "no", "b",  "ae", "e", "ne", "be", "a",
                                               "s", "ns", "p",  "np", "l", "ge", "le", "g"};

// Entry flags.
enum : std::uint32_t {
    kD64 = 1u << 0,      // default 64-bit operand size
    kF64 = 1u << 1,      // forced 64-bit operand size
    kSse = 1u << 2,      // has a VEX form spelled with a "v" prefix
    kNoHMem = 1u << 3,   // VEX H operand absent for the memory form (vmovss/vmovsd)
    kVexOnly = 1u << 4,  // invalid without VEX
    kModrm = 1u << 5,    // has a ModRM byte even with no operands
    kOszNames = 1u << 6, // mnemonic "a/b/c" selected by operand size 16/32/64
    kCmpPseudo = 1u << 7,  // cmpps family: immediate folded into the mnemonic
    kNoRep = 1u << 8,
    kString = 1u << 9,   // rep/repz/repnz printed as a mnemonic prefix
    kStringZ = 1u << 10, // cmps/scas: repz/repnz
    kInvalid = 1u << 11,
};

struct Entry {
    const char* mnem = nullptr;
    const char* ops = "";
    std::uint32_t flags = 0;
    const std::array<Entry, 8>* group = nullptr;
    bool valid() const { return mnem != nullptr || group != nullptr; }
};

using Group = std::array<Entry, 8>;

// ---------------------------------------------------------------------------
// Tables

Entry E(const char* m, const char* o = "", std::uint32_t f = 0) { return Entry{m, o, f, nullptr}; }
Entry G(const Group* g, std::uint32_t f = 0) { return Entry{nullptr, "", f, g}; }

struct Tables {
    std::array<Entry, 256> one{};
    // 0F map: [opcode][prefix] with prefix 0 none, 1 66, 2 F3, 3 F2
    std::array<std::array<Entry, 4>, 256> two{};
    std::array<std::array<Entry, 4>, 256> m38{};
    std::array<std::array<Entry, 4>, 256> m3a{};
    // VEX-only entries for maps 1..3.
    std::array<std::array<std::array<Entry, 4>, 256>, 4> vex{};
    // Alternate entries used when ModRM.mod == 3, keyed like `two`.
    std::map<std::pair<int, int>, Entry> two_mod3;

    Group grp1, grp1a, grp2, grp3b, grp3v, grp4, grp5, grp11b, grp11v;
    Group grp6, grp7mem, grp8, grp9mem, grp9reg, grp15mem, grp15reg, grp16, grpP;
    Group grp12, grp13, grp14, grp12mmx, grp13mmx, grp14mmx, grp17;

    Tables() {
        build_one();
        build_two();
        build_38();
        build_3a();
        build_vex();
    }

    void sse(int op, Entry none, Entry p66 = {}, Entry f3 = {}, Entry f2 = {}) {
        two[op] = {none, p66, f3, f2};
    }

    void build_one() {
        const char* alu[8] = {"add", "or", "adc", "sbb", "and", "sub", "xor", "cmp"};
        for (int i = 0; i < 8; ++i) {
            int b = i * 8;
            one[b + 0] = E(alu[i], "Eb,Gb");
            one[b + 1] = E(alu[i], "Ev,Gv");
            one[b + 2] = E(alu[i], "Gb,Eb");
            one[b + 3] = E(alu[i], "Gv,Ev");
            one[b + 4] = E(alu[i], "AL,Ib");
            one[b + 5] = E(alu[i], "rAX,Iz");
        }
        for (int r = 0; r < 8; ++r) {
            one[0x50 + r] = E("push", "Zq", kD64);
            one[0x58 + r] = E("pop", "Zq", kD64);
        }
        one[0x63] = E("movsxd", "Gv,Ed");
        one[0x68] = E("push", "Iz", kD64);
        one[0x69] = E("imul", "Gv,Ev,Iz");
        one[0x6a] = E("push", "Is", kD64);
        one[0x6b] = E("imul", "Gv,Ev,Is");
        one[0x6c] = E("ins", "Yb,DX", kString);
        one[0x6d] = E("ins", "Yz,DX", kString);
        one[0x6e] = E("outs", "DX,Xb", kString);
        one[0x6f] = E("outs", "DX,Xz", kString);
        for (int c = 0; c < 16; ++c) one[0x70 + c] = E(nullptr, "Jb", kF64);  // named at decode
        for (int i = 0; i < 8; ++i) grp1[i] = E(alu[i]);
        one[0x80] = G(&grp1);
        one[0x81] = G(&grp1);
        one[0x83] = G(&grp1);
        one[0x84] = E("test", "Eb,Gb");
        one[0x85] = E("test", "Ev,Gv");
        one[0x86] = E("xchg", "Eb,Gb");
        one[0x87] = E("xchg", "Ev,Gv");
        one[0x88] = E("mov", "Eb,Gb");
        one[0x89] = E("mov", "Ev,Gv");
        one[0x8a] = E("mov", "Gb,Eb");
        one[0x8b] = E("mov", "Gv,Ev");
        one[0x8c] = E("mov", "Ev,Sw");
        one[0x8d] = E("lea", "Gv,M");
        one[0x8e] = E("mov", "Sw,Ew");
        grp1a[0] = E("pop", "Ev", kD64);
        one[0x8f] = G(&grp1a);
        one[0x90] = E("nop");
        for (int r = 1; r < 8; ++r) one[0x90 + r] = E("xchg", "Zv,rAX");
        one[0x98] = E("cbw/cwde/cdqe", "", kOszNames);
        one[0x99] = E("cwd/cdq/cqo", "", kOszNames);
        one[0x9b] = E("fwait");
        one[0x9c] = E("pushf", "", kD64);
        one[0x9d] = E("popf", "", kD64);
        one[0x9e] = E("sahf");
        one[0x9f] = E("lahf");
        one[0xa0] = E("movabs", "AL,Ob");
        one[0xa1] = E("movabs", "rAX,Ov");
        one[0xa2] = E("movabs", "Ob,AL");
        one[0xa3] = E("movabs", "Ov,rAX");
        one[0xa4] = E("movs", "Yb,Xb", kString);
        one[0xa5] = E("movs", "Yv,Xv", kString);
        one[0xa6] = E("cmps", "Xb,Yb", kString | kStringZ);
        one[0xa7] = E("cmps", "Xv,Yv", kString | kStringZ);
        one[0xa8] = E("test", "AL,Ib");
        one[0xa9] = E("test", "rAX,Iz");
        one[0xaa] = E("stos", "Yb,AL", kString);
        one[0xab] = E("stos", "Yv,rAX", kString);
        one[0xac] = E("lods", "AL,Xb", kString);
        one[0xad] = E("lods", "rAX,Xv", kString);
        one[0xae] = E("scas", "AL,Yb", kString | kStringZ);
        one[0xaf] = E("scas", "rAX,Yv", kString | kStringZ);
        for (int r = 0; r < 8; ++r) {
            one[0xb0 + r] = E("mov", "Zb,Ib");
            one[0xb8 + r] = E("mov", "Zv,Iv");
        }
        const char* shifts[8] = {"rol", "ror", "rcl", "rcr", "shl", "shr", "shl", "sar"};
        for (int i = 0; i < 8; ++i) grp2[i] = E(shifts[i]);
        one[0xc0] = G(&grp2);
        one[0xc1] = G(&grp2);
        one[0xc2] = E("ret", "Iw", kF64);
        one[0xc3] = E("ret", "", kF64);
        grp11b[0] = E("mov", "Eb,Ib");
        grp11v[0] = E("mov", "Ev,Iz");
        one[0xc6] = G(&grp11b);
        one[0xc7] = G(&grp11v);
        one[0xc8] = E("enter", "Iw,Ib");
        one[0xc9] = E("leave", "", kD64);
        one[0xca] = E("retf", "Iw");
        one[0xcb] = E("retf");
        one[0xcc] = E("int3");
        one[0xcd] = E("int", "Ib");
        one[0xcf] = E("iret/iretd/iretq", "", kOszNames);
        one[0xd0] = G(&grp2);
        one[0xd1] = G(&grp2);
        one[0xd2] = G(&grp2);
        one[0xd3] = G(&grp2);
        one[0xd7] = E("xlat", "Xlat");
        for (int i = 0; i < 8; ++i) one[0xd8 + i] = E("(x87)", "", kModrm);
        one[0xe0] = E("loopne", "Jb", kF64);
        one[0xe1] = E("loope", "Jb", kF64);
        one[0xe2] = E("loop", "Jb", kF64);
        one[0xe3] = E("jrcxz", "Jb", kF64);
        one[0xe4] = E("in", "AL,Ib");
        one[0xe5] = E("in", "eAX,Ib");
        one[0xe6] = E("out", "Ib,AL");
        one[0xe7] = E("out", "Ib,eAX");
        one[0xe8] = E("call", "Jz", kF64);
        one[0xe9] = E("jmp", "Jz", kF64);
        one[0xeb] = E("jmp", "Jb", kF64);
        one[0xec] = E("in", "AL,DX");
        one[0xed] = E("in", "eAX,DX");
        one[0xee] = E("out", "DX,AL");
        one[0xef] = E("out", "DX,eAX");
        one[0xf1] = E("int1");
        one[0xf4] = E("hlt");
        one[0xf5] = E("cmc");
        grp3b = {E("test", "Eb,Ib"), E("test", "Eb,Ib"), E("not", "Eb"),  E("neg", "Eb"),
                 E("mul", "Eb"),     E("imul", "Eb"),    E("div", "Eb"),  E("idiv", "Eb")};
        grp3v = {E("test", "Ev,Iz"), E("test", "Ev,Iz"), E("not", "Ev"),  E("neg", "Ev"),
                 E("mul", "Ev"),     E("imul", "Ev"),    E("div", "Ev"),  E("idiv", "Ev")};
        one[0xf6] = G(&grp3b);
        one[0xf7] = G(&grp3v);
        one[0xf8] = E("clc");
        one[0xf9] = E("stc");
        one[0xfa] = E("cli");
        one[0xfb] = E("sti");
        one[0xfc] = E("cld");
        one[0xfd] = E("std");
        grp4[0] = E("inc", "Eb");
        grp4[1] = E("dec", "Eb");
        one[0xfe] = G(&grp4);
        grp5 = {E("inc", "Ev"),      E("dec", "Ev"), E("call", "Eq", kF64), E("call", "Mp"),
                E("jmp", "Eq", kF64), E("jmp", "Mp"), E("push", "Ev", kD64), Entry{}};
        one[0xff] = G(&grp5);
    }

    void build_two() {
        grp6 = {E("sldt", "Ew"), E("str", "Ew"), E("lldt", "Ew"), E("ltr", "Ew"),
                E("verr", "Ew"), E("verw", "Ew"), Entry{}, Entry{}};
        two[0x00][0] = G(&grp6);
        grp7mem = {E("sgdt", "M"), E("sidt", "M"), E("lgdt", "M"), E("lidt", "M"),
                   E("smsw", "Ew"), Entry{}, E("lmsw", "Ew"), E("invlpg", "Mb")};
        two[0x01][0] = G(&grp7mem);  // mod == 3 handled in decode
        two[0x02][0] = E("lar", "Gv,Ew");
        two[0x03][0] = E("lsl", "Gv,Ew");
        two[0x05][0] = E("syscall");
        two[0x06][0] = E("clts");
        two[0x07][0] = E("sysret");
        two[0x08][0] = E("invd");
        two[0x09][0] = E("wbinvd");
        two[0x0b][0] = E("ud2");
        grpP = {E("prefetch", "Mb"), E("prefetchw", "Mb"), E("prefetchwt1", "Mb"), E("prefetch", "Mb"),
                E("prefetch", "Mb"), E("prefetch", "Mb"),  E("prefetch", "Mb"),    E("prefetch", "Mb")};
        two[0x0d][0] = G(&grpP);
        two[0x0e][0] = E("femms");

        sse(0x10, E("movups", "Vx,Wx", kSse), E("movupd", "Vx,Wx", kSse),
            E("movss", "Vss,Hss,Wss", kSse | kNoHMem), E("movsd", "Vsd,Hsd,Wsd", kSse | kNoHMem));
        sse(0x11, E("movups", "Wx,Vx", kSse), E("movupd", "Wx,Vx", kSse),
            E("movss", "Wss,Hss,Vss", kSse | kNoHMem), E("movsd", "Wsd,Hsd,Vsd", kSse | kNoHMem));
        sse(0x12, E("movlps", "Vdq,Hdq,Mq", kSse), E("movlpd", "Vdq,Hdq,Mq", kSse),
            E("movsldup", "Vx,Wx", kSse), E("movddup", "Vx,Wm", kSse));
        two_mod3[{0x12, 0}] = E("movhlps", "Vdq,Hdq,Udq", kSse);
        sse(0x13, E("movlps", "Mq,Vdq", kSse), E("movlpd", "Mq,Vdq", kSse));
        sse(0x14, E("unpcklps", "Vx,Hx,Wx", kSse), E("unpcklpd", "Vx,Hx,Wx", kSse));
        sse(0x15, E("unpckhps", "Vx,Hx,Wx", kSse), E("unpckhpd", "Vx,Hx,Wx", kSse));
        sse(0x16, E("movhps", "Vdq,Hdq,Mq", kSse), E("movhpd", "Vdq,Hdq,Mq", kSse),
            E("movshdup", "Vx,Wx", kSse));
        two_mod3[{0x16, 0}] = E("movlhps", "Vdq,Hdq,Udq", kSse);
        sse(0x17, E("movhps", "Mq,Vdq", kSse), E("movhpd", "Mq,Vdq", kSse));
        grp16 = {E("prefetchnta", "Mb"), E("prefetcht0", "Mb"), E("prefetcht1", "Mb"), E("prefetcht2", "Mb"),
                 E("nop", "Ev"),         E("nop", "Ev"),        E("nop", "Ev"),        E("nop", "Ev")};
        two[0x18][0] = G(&grp16);
        for (int op = 0x19; op <= 0x1f; ++op) two[op][0] = E("nop", "Ev");
        two[0x20][0] = E("mov", "Rq,Cq");
        two[0x21][0] = E("mov", "Rq,Dq");
        two[0x22][0] = E("mov", "Cq,Rq");
        two[0x23][0] = E("mov", "Dq,Rq");
        sse(0x28, E("movaps", "Vx,Wx", kSse), E("movapd", "Vx,Wx", kSse));
        sse(0x29, E("movaps", "Wx,Vx", kSse), E("movapd", "Wx,Vx", kSse));
        sse(0x2a, E("cvtpi2ps", "Vdq,Qq"), E("cvtpi2pd", "Vdq,Qq"), E("cvtsi2ss", "Vss,Hss,Ey", kSse),
            E("cvtsi2sd", "Vsd,Hsd,Ey", kSse));
        sse(0x2b, E("movntps", "Mx,Vx", kSse), E("movntpd", "Mx,Vx", kSse));
        sse(0x2c, E("cvttps2pi", "Pq,Wq"), E("cvttpd2pi", "Pq,Wdq"), E("cvttss2si", "Gy,Wss", kSse),
            E("cvttsd2si", "Gy,Wsd", kSse));
        sse(0x2d, E("cvtps2pi", "Pq,Wq"), E("cvtpd2pi", "Pq,Wdq"), E("cvtss2si", "Gy,Wss", kSse),
            E("cvtsd2si", "Gy,Wsd", kSse));
        sse(0x2e, E("ucomiss", "Vss,Wss", kSse), E("ucomisd", "Vsd,Wsd", kSse));
        sse(0x2f, E("comiss", "Vss,Wss", kSse), E("comisd", "Vsd,Wsd", kSse));
        two[0x30][0] = E("wrmsr");
        two[0x31][0] = E("rdtsc");
        two[0x32][0] = E("rdmsr");
        two[0x33][0] = E("rdpmc");
        two[0x34][0] = E("sysenter");
        two[0x35][0] = E("sysexit");
        two[0x37][0] = E("getsec");
        for (int c = 0; c < 16; ++c) two[0x40 + c][0] = E(nullptr, "Gv,Ev");  // cmovcc
        sse(0x50, E("movmskps", "Gd,Ux", kSse), E("movmskpd", "Gd,Ux", kSse));
        sse(0x51, E("sqrtps", "Vx,Wx", kSse), E("sqrtpd", "Vx,Wx", kSse), E("sqrtss", "Vss,Hss,Wss", kSse),
            E("sqrtsd", "Vsd,Hsd,Wsd", kSse));
        sse(0x52, E("rsqrtps", "Vx,Wx", kSse), {}, E("rsqrtss", "Vss,Hss,Wss", kSse));
        sse(0x53, E("rcpps", "Vx,Wx", kSse), {}, E("rcpss", "Vss,Hss,Wss", kSse));
        const char* logic[4] = {"and", "andn", "or", "xor"};
        for (int i = 0; i < 4; ++i) {
            std::string* ps = new std::string(std::string(logic[i]) + "ps");
            std::string* pd = new std::string(std::string(logic[i]) + "pd");
            sse(0x54 + i, E(ps->c_str(), "Vx,Hx,Wx", kSse), E(pd->c_str(), "Vx,Hx,Wx", kSse));
        }
        const std::pair<int, const char*> arith[] = {{0x58, "add"}, {0x59, "mul"}, {0x5c, "sub"},
                                                     {0x5d, "min"}, {0x5e, "div"}, {0x5f, "max"}};
        for (auto [op, name] : arith) {
            auto* n = new std::array<std::string, 4>{std::string(name) + "ps", std::string(name) + "pd",
                                                     std::string(name) + "ss", std::string(name) + "sd"};
            sse(op, E((*n)[0].c_str(), "Vx,Hx,Wx", kSse), E((*n)[1].c_str(), "Vx,Hx,Wx", kSse),
                E((*n)[2].c_str(), "Vss,Hss,Wss", kSse), E((*n)[3].c_str(), "Vsd,Hsd,Wsd", kSse));
        }
        sse(0x5a, E("cvtps2pd", "Vx,Wh", kSse), E("cvtpd2ps", "Vdq,Wx", kSse), E("cvtss2sd", "Vsd,Hsd,Wss", kSse),
            E("cvtsd2ss", "Vss,Hss,Wsd", kSse));
        sse(0x5b, E("cvtdq2ps", "Vx,Wx", kSse), E("cvtps2dq", "Vx,Wx", kSse), E("cvttps2dq", "Vx,Wx", kSse));

        // MMX / SSE2 integer block.
        const std::pair<int, const char*> mmx[] = {
            {0x60, "punpcklbw"}, {0x61, "punpcklwd"}, {0x62, "punpckldq"}, {0x63, "packsswb"},
            {0x64, "pcmpgtb"},   {0x65, "pcmpgtw"},   {0x66, "pcmpgtd"},   {0x67, "packuswb"},
            {0x68, "punpckhbw"}, {0x69, "punpckhwd"}, {0x6a, "punpckhdq"}, {0x6b, "packssdw"},
            {0x74, "pcmpeqb"},   {0x75, "pcmpeqw"},   {0x76, "pcmpeqd"},
            {0xd4, "paddq"},     {0xd5, "pmullw"},    {0xd8, "psubusb"},   {0xd9, "psubusw"},
            {0xda, "pminub"},    {0xdb, "pand"},      {0xdc, "paddusb"},   {0xdd, "paddusw"},
            {0xde, "pmaxub"},    {0xdf, "pandn"},     {0xe0, "pavgb"},     {0xe3, "pavgw"},
            {0xe4, "pmulhuw"},   {0xe5, "pmulhw"},    {0xe8, "psubsb"},    {0xe9, "psubsw"},
            {0xea, "pminsw"},    {0xeb, "por"},       {0xec, "paddsb"},    {0xed, "paddsw"},
            {0xee, "pmaxsw"},    {0xef, "pxor"},      {0xf4, "pmuludq"},   {0xf5, "pmaddwd"},
            {0xf6, "psadbw"},    {0xf8, "psubb"},     {0xf9, "psubw"},     {0xfa, "psubd"},
            {0xfb, "psubq"},     {0xfc, "paddb"},     {0xfd, "paddw"},     {0xfe, "paddd"}};
        for (auto [op, name] : mmx) {
            const char* mm_ops = (op >= 0x60 && op <= 0x62) ? "Pq,Qd" : "Pq,Qq";
            sse(op, E(name, mm_ops), E(name, "Vx,Hx,Wx", kSse));
        }
        const std::pair<int, const char*> shift_xmm[] = {{0xd1, "psrlw"}, {0xd2, "psrld"}, {0xd3, "psrlq"},
                                                         {0xe1, "psraw"}, {0xe2, "psrad"}, {0xf1, "psllw"},
                                                         {0xf2, "pslld"}, {0xf3, "psllq"}};
        for (auto [op, name] : shift_xmm) sse(op, E(name, "Pq,Qq"), E(name, "Vx,Hx,Wdq", kSse));
        sse(0x6c, {}, E("punpcklqdq", "Vx,Hx,Wx", kSse));
        sse(0x6d, {}, E("punpckhqdq", "Vx,Hx,Wx", kSse));
        sse(0x6e, E("movd|movq", "Pq,Ey"), E("movd|movq", "Vdq,Ey", kSse));
        sse(0x6f, E("movq", "Pq,Qq"), E("movdqa", "Vx,Wx", kSse), E("movdqu", "Vx,Wx", kSse));
        sse(0x70, E("pshufw", "Pq,Qq,Ib"), E("pshufd", "Vx,Wx,Ib", kSse), E("pshufhw", "Vx,Wx,Ib", kSse),
            E("pshuflw", "Vx,Wx,Ib", kSse));
        grp12 = {Entry{}, Entry{}, E("psrlw", "Hx,Ux,Ib", kSse), Entry{}, E("psraw", "Hx,Ux,Ib", kSse), Entry{},
                 E("psllw", "Hx,Ux,Ib", kSse), Entry{}};
        grp13 = {Entry{}, Entry{}, E("psrld", "Hx,Ux,Ib", kSse), Entry{}, E("psrad", "Hx,Ux,Ib", kSse), Entry{},
                 E("pslld", "Hx,Ux,Ib", kSse), Entry{}};
        grp14 = {Entry{}, Entry{}, E("psrlq", "Hx,Ux,Ib", kSse), E("psrldq", "Hx,Ux,Ib", kSse), Entry{}, Entry{},
                 E("psllq", "Hx,Ux,Ib", kSse), E("pslldq", "Hx,Ux,Ib", kSse)};
        grp12mmx = {Entry{}, Entry{}, E("psrlw", "Nq,Ib"), Entry{}, E("psraw", "Nq,Ib"), Entry{}, E("psllw", "Nq,Ib"), Entry{}};
        grp13mmx = {Entry{}, Entry{}, E("psrld", "Nq,Ib"), Entry{}, E("psrad", "Nq,Ib"), Entry{}, E("pslld", "Nq,Ib"), Entry{}};
        grp14mmx = {Entry{}, Entry{}, E("psrlq", "Nq,Ib"), Entry{}, Entry{}, Entry{}, E("psllq", "Nq,Ib"), Entry{}};
        sse(0x71, G(&grp12mmx), G(&grp12, kSse));
        sse(0x72, G(&grp13mmx), G(&grp13, kSse));
        sse(0x73, G(&grp14mmx), G(&grp14, kSse));
        two[0x77][0] = E("emms");
        two[0x78][0] = E("vmread", "Eq,Gq");
        two[0x79][0] = E("vmwrite", "Gq,Eq");
        sse(0x7c, {}, E("haddpd", "Vx,Hx,Wx", kSse), {}, E("haddps", "Vx,Hx,Wx", kSse));
        sse(0x7d, {}, E("hsubpd", "Vx,Hx,Wx", kSse), {}, E("hsubps", "Vx,Hx,Wx", kSse));
        sse(0x7e, E("movd|movq", "Ey,Pq"), E("movd|movq", "Ey,Vdq", kSse), E("movq", "Vdq,Wq", kSse));
        sse(0x7f, E("movq", "Qq,Pq"), E("movdqa", "Wx,Vx", kSse), E("movdqu", "Wx,Vx", kSse));
        for (int c = 0; c < 16; ++c) {
            two[0x80 + c][0] = E(nullptr, "Jz", kF64);  // jcc
            two[0x90 + c][0] = E(nullptr, "Eb");        // setcc
        }
        two[0xa0][0] = E("push", "FS", kD64);
        two[0xa1][0] = E("pop", "FS", kD64);
        two[0xa2][0] = E("cpuid");
        two[0xa3][0] = E("bt", "Ev,Gv");
        two[0xa4][0] = E("shld", "Ev,Gv,Ib");
        two[0xa5][0] = E("shld", "Ev,Gv,CL");
        two[0xa8][0] = E("push", "GS", kD64);
        two[0xa9][0] = E("pop", "GS", kD64);
        two[0xaa][0] = E("rsm");
        two[0xab][0] = E("bts", "Ev,Gv");
        two[0xac][0] = E("shrd", "Ev,Gv,Ib");
        two[0xad][0] = E("shrd", "Ev,Gv,CL");
        grp15mem = {E("fxsave", "M"), E("fxrstor", "M"), E("ldmxcsr", "Md"), E("stmxcsr", "Md"),
                    E("xsave", "M"),  E("xrstor", "M"),  E("xsaveopt", "M"), E("clflush", "Mb")};
        grp15reg = {Entry{}, Entry{}, Entry{}, Entry{}, Entry{}, E("lfence", "", kModrm), E("mfence", "", kModrm),
                    E("sfence", "", kModrm)};
        two[0xae][0] = G(&grp15mem);
        two[0xaf][0] = E("imul", "Gv,Ev");
        two[0xb0][0] = E("cmpxchg", "Eb,Gb");
        two[0xb1][0] = E("cmpxchg", "Ev,Gv");
        two[0xb2][0] = E("lss", "Gv,Mp");
        two[0xb3][0] = E("btr", "Ev,Gv");
        two[0xb4][0] = E("lfs", "Gv,Mp");
        two[0xb5][0] = E("lgs", "Gv,Mp");
        two[0xb6][0] = E("movzx", "Gv,Eb");
        two[0xb7][0] = E("movzx", "Gv,Ew");
        sse(0xb8, {}, {}, E("popcnt", "Gv,Ev"));
        two[0xb9][0] = E("ud1", "Gv,Ev");
        grp8 = {Entry{}, Entry{}, Entry{}, Entry{}, E("bt", "Ev,Ib"), E("bts", "Ev,Ib"), E("btr", "Ev,Ib"),
                E("btc", "Ev,Ib")};
        two[0xba][0] = G(&grp8);
        two[0xbb][0] = E("btc", "Ev,Gv");
        sse(0xbc, E("bsf", "Gv,Ev"), {}, E("tzcnt", "Gv,Ev"));
        sse(0xbd, E("bsr", "Gv,Ev"), {}, E("lzcnt", "Gv,Ev"));
        two[0xbe][0] = E("movsx", "Gv,Eb");
        two[0xbf][0] = E("movsx", "Gv,Ew");
        two[0xc0][0] = E("xadd", "Eb,Gb");
        two[0xc1][0] = E("xadd", "Ev,Gv");
        sse(0xc2, E("cmpps", "Vx,Hx,Wx,Ib", kSse | kCmpPseudo), E("cmppd", "Vx,Hx,Wx,Ib", kSse | kCmpPseudo),
            E("cmpss", "Vss,Hss,Wss,Ib", kSse | kCmpPseudo), E("cmpsd", "Vsd,Hsd,Wsd,Ib", kSse | kCmpPseudo));
        two[0xc3][0] = E("movnti", "My,Gy");
        sse(0xc4, E("pinsrw", "Pq,Ed/w,Ib"), E("pinsrw", "Vdq,Hdq,Ed/w,Ib", kSse));
        sse(0xc5, E("pextrw", "Gd,Nq,Ib"), E("pextrw", "Gd,Udq,Ib", kSse));
        sse(0xc6, E("shufps", "Vx,Hx,Wx,Ib", kSse), E("shufpd", "Vx,Hx,Wx,Ib", kSse));
        grp9mem = {Entry{}, E("cmpxchg8b|cmpxchg16b", "Mq|Mdq"), Entry{}, E("xrstors", "M"), E("xsavec", "M"),
                   E("xsaves", "M"), E("vmptrld", "Mq"), E("vmptrst", "Mq")};
        grp9reg = {Entry{}, Entry{}, Entry{}, Entry{}, Entry{}, Entry{}, E("rdrand", "Rv"), E("rdseed", "Rv")};
        two[0xc7][0] = G(&grp9mem);
        for (int r = 0; r < 8; ++r) two[0xc8 + r][0] = E("bswap", "Zy");
        sse(0xd0, {}, E("addsubpd", "Vx,Hx,Wx", kSse), {}, E("addsubps", "Vx,Hx,Wx", kSse));
        sse(0xd6, {}, E("movq", "Wq,Vdq", kSse), E("movq2dq", "Vdq,Nq"), E("movdq2q", "Pq,Udq"));
        sse(0xd7, E("pmovmskb", "Gd,Nq"), E("pmovmskb", "Gd,Ux", kSse));
        sse(0xe6, {}, E("cvttpd2dq", "Vdq,Wx", kSse), E("cvtdq2pd", "Vx,Wh", kSse), E("cvtpd2dq", "Vdq,Wx", kSse));
        sse(0xe7, E("movntq", "Mq,Pq"), E("movntdq", "Mx,Vx", kSse));
        sse(0xf0, {}, {}, {}, E("lddqu", "Vx,Mx", kSse));
        sse(0xf7, E("maskmovq", "Pq,Nq"), E("maskmovdqu", "Vdq,Udq", kSse));
        two[0xff][0] = E("ud0", "Gd,Ed");
    }

    void build_38() {
        const std::pair<int, const char*> ssse3[] = {
            {0x00, "pshufb"},  {0x01, "phaddw"}, {0x02, "phaddd"}, {0x03, "phaddsw"}, {0x04, "pmaddubsw"},
            {0x05, "phsubw"},  {0x06, "phsubd"}, {0x07, "phsubsw"}, {0x08, "psignb"}, {0x09, "psignw"},
            {0x0a, "psignd"},  {0x0b, "pmulhrsw"}};
        for (auto [op, name] : ssse3) m38[op] = {E(name, "Pq,Qq"), E(name, "Vx,Hx,Wx", kSse)};
        for (auto [op, name] : {std::pair{0x1c, "pabsb"}, std::pair{0x1d, "pabsw"}, std::pair{0x1e, "pabsd"}})
            m38[op] = {E(name, "Pq,Qq"), E(name, "Vx,Wx", kSse)};
        m38[0x10][1] = E("pblendvb", "Vdq,Wdq,XMM0");
        m38[0x14][1] = E("blendvps", "Vdq,Wdq,XMM0");
        m38[0x15][1] = E("blendvpd", "Vdq,Wdq,XMM0");
        m38[0x17][1] = E("ptest", "Vx,Wx", kSse);
        const char* ext[6] = {"bw", "bd", "bq", "wd", "wq", "dq"};
        const char* ext_src[6] = {"Wh", "WQ", "WO", "Wh", "WQ", "Wh"};
        for (int i = 0; i < 6; ++i) {
            auto* sx = new std::string(std::string("pmovsx") + ext[i]);
            auto* zx = new std::string(std::string("pmovzx") + ext[i]);
            auto* ops = new std::string(std::string("Vx,") + ext_src[i]);
            m38[0x20 + i][1] = E(sx->c_str(), ops->c_str(), kSse);
            m38[0x30 + i][1] = E(zx->c_str(), ops->c_str(), kSse);
        }
        const std::pair<int, const char*> sse41[] = {
            {0x28, "pmuldq"}, {0x29, "pcmpeqq"}, {0x2b, "packusdw"}, {0x37, "pcmpgtq"}, {0x38, "pminsb"},
            {0x39, "pminsd"}, {0x3a, "pminuw"},  {0x3b, "pminud"},   {0x3c, "pmaxsb"},  {0x3d, "pmaxsd"},
            {0x3e, "pmaxuw"}, {0x3f, "pmaxud"},  {0x40, "pmulld"},   {0xdc, "aesenc"},  {0xdd, "aesenclast"},
            {0xde, "aesdec"}, {0xdf, "aesdeclast"}};
        for (auto [op, name] : sse41) m38[op][1] = E(name, "Vx,Hx,Wx", kSse);
        m38[0x2a][1] = E("movntdqa", "Vx,Mx", kSse);
        m38[0x41][1] = E("phminposuw", "Vdq,Wdq", kSse);
        m38[0xdb][1] = E("aesimc", "Vdq,Wdq", kSse);
        m38[0xf0][0] = E("movbe", "Gv,Mv");
        m38[0xf1][0] = E("movbe", "Mv,Gv");
        m38[0xf0][3] = E("crc32", "Gy,Eb");
        m38[0xf1][3] = E("crc32", "Gy,Ev");
        m38[0xf6][1] = E("adcx", "Gy,Ey");
        m38[0xf6][2] = E("adox", "Gy,Ey");
        m38[0xc8][0] = E("sha1nexte", "Vdq,Wdq");
        m38[0xc9][0] = E("sha1msg1", "Vdq,Wdq");
        m38[0xca][0] = E("sha1msg2", "Vdq,Wdq");
        m38[0xcb][0] = E("sha256rnds2", "Vdq,Wdq,XMM0");
        m38[0xcc][0] = E("sha256msg1", "Vdq,Wdq");
        m38[0xcd][0] = E("sha256msg2", "Vdq,Wdq");
    }

    void build_3a() {
        m3a[0x08][1] = E("roundps", "Vx,Wx,Ib", kSse);
        m3a[0x09][1] = E("roundpd", "Vx,Wx,Ib", kSse);
        m3a[0x0a][1] = E("roundss", "Vss,Hss,Wss,Ib", kSse);
        m3a[0x0b][1] = E("roundsd", "Vsd,Hsd,Wsd,Ib", kSse);
        m3a[0x0c][1] = E("blendps", "Vx,Hx,Wx,Ib", kSse);
        m3a[0x0d][1] = E("blendpd", "Vx,Hx,Wx,Ib", kSse);
        m3a[0x0e][1] = E("pblendw", "Vx,Hx,Wx,Ib", kSse);
        m3a[0x0f] = {E("palignr", "Pq,Qq,Ib"), E("palignr", "Vx,Hx,Wx,Ib", kSse)};
        m3a[0x14][1] = E("pextrb", "Ed/b,Vdq,Ib", kSse);
        m3a[0x15][1] = E("pextrw", "Ed/w,Vdq,Ib", kSse);
        m3a[0x16][1] = E("pextrd|pextrq", "Ey,Vdq,Ib", kSse);
        m3a[0x17][1] = E("extractps", "Ed,Vdq,Ib", kSse);
        m3a[0x20][1] = E("pinsrb", "Vdq,Hdq,Ed/b,Ib", kSse);
        m3a[0x21][1] = E("insertps", "Vdq,Hdq,Wd,Ib", kSse);
        m3a[0x22][1] = E("pinsrd|pinsrq", "Vdq,Hdq,Ey,Ib", kSse);
        m3a[0x40][1] = E("dpps", "Vx,Hx,Wx,Ib", kSse);
        m3a[0x41][1] = E("dppd", "Vdq,Hdq,Wdq,Ib", kSse);
        m3a[0x42][1] = E("mpsadbw", "Vx,Hx,Wx,Ib", kSse);
        m3a[0x44][1] = E("pclmulqdq", "Vdq,Hdq,Wdq,Ib", kSse);
        m3a[0x60][1] = E("pcmpestrm", "Vdq,Wdq,Ib", kSse);
        m3a[0x61][1] = E("pcmpestri", "Vdq,Wdq,Ib", kSse);
        m3a[0x62][1] = E("pcmpistrm", "Vdq,Wdq,Ib", kSse);
        m3a[0x63][1] = E("pcmpistri", "Vdq,Wdq,Ib", kSse);
        m3a[0xdf][1] = E("aeskeygenassist", "Vdq,Wdq,Ib", kSse);
        m3a[0xcc][0] = E("sha1rnds4", "Vdq,Wdq,Ib");
    }

    void build_vex() {
        auto& v2 = vex[2];
        auto& v3 = vex[3];
        v2[0x0c][1] = E("vpermilps", "Vx,Hx,Wx");
        v2[0x0d][1] = E("vpermilpd", "Vx,Hx,Wx");
        v2[0x0e][1] = E("vtestps", "Vx,Wx");
        v2[0x0f][1] = E("vtestpd", "Vx,Wx");
        v2[0x13][1] = E("vcvtph2ps", "Vx,Wh");
        v2[0x16][1] = E("vpermps", "Vqq,Hqq,Wqq");
        v2[0x18][1] = E("vbroadcastss", "Vx,Wd");
        v2[0x19][1] = E("vbroadcastsd", "Vqq,Wq");
        v2[0x1a][1] = E("vbroadcastf128", "Vqq,Mdq");
        v2[0x2c][1] = E("vmaskmovps", "Vx,Hx,Mx");
        v2[0x2d][1] = E("vmaskmovpd", "Vx,Hx,Mx");
        v2[0x2e][1] = E("vmaskmovps", "Mx,Hx,Vx");
        v2[0x2f][1] = E("vmaskmovpd", "Mx,Hx,Vx");
        v2[0x36][1] = E("vpermd", "Vqq,Hqq,Wqq");
        v2[0x45][1] = E("vpsrlvd|vpsrlvq", "Vx,Hx,Wx");
        v2[0x46][1] = E("vpsravd", "Vx,Hx,Wx");
        v2[0x47][1] = E("vpsllvd|vpsllvq", "Vx,Hx,Wx");
        v2[0x58][1] = E("vpbroadcastd", "Vx,Wd");
        v2[0x59][1] = E("vpbroadcastq", "Vx,Wq");
        v2[0x5a][1] = E("vbroadcasti128", "Vqq,Mdq");
        v2[0x78][1] = E("vpbroadcastb", "Vx,Wb");
        v2[0x79][1] = E("vpbroadcastw", "Vx,Ww");
        v2[0x8c][1] = E("vpmaskmovd|vpmaskmovq", "Vx,Hx,Mx");
        v2[0x8e][1] = E("vpmaskmovd|vpmaskmovq", "Mx,Hx,Vx");
        v2[0x90][1] = E("vpgatherdd|vpgatherdq", "Vx,Mx,Hx");
        v2[0x91][1] = E("vpgatherqd|vpgatherqq", "Vx,Mx,Hx");
        v2[0x92][1] = E("vgatherdps|vgatherdpd", "Vx,Mx,Hx");
        v2[0x93][1] = E("vgatherqps|vgatherqpd", "Vx,Mx,Hx");
        static const char* fma_packed[] = {"fmaddsub", "fmsubadd", "fmadd", nullptr, "fmsub", nullptr, "fnmadd",
                                           nullptr,    "fnmsub"};
        static const char* fma_scalar[] = {nullptr, nullptr, nullptr, "fmadd", nullptr, "fmsub", nullptr,
                                           "fnmadd", nullptr, "fnmsub"};
        const std::pair<int, const char*> orders[] = {{0x96, "132"}, {0xa6, "213"}, {0xb6, "231"}};
        for (auto [base, order] : orders) {
            for (int i = 0; i < 10; ++i) {
                int op = base + i;
                if (i < 9 && fma_packed[i]) {
                    auto* n = new std::string(std::string("v") + fma_packed[i] + order + "ps|v" + fma_packed[i] +
                                              order + "pd");
                    v2[op][1] = E(n->c_str(), "Vx,Hx,Wx");
                } else if (fma_scalar[i]) {
                    auto* n = new std::string(std::string("v") + fma_scalar[i] + order + "ss|v" + fma_scalar[i] +
                                              order + "sd");
                    v2[op][1] = E(n->c_str(), "Vdq,Hdq,Wsw");
                }
            }
        }
        v2[0xf2][0] = E("andn", "Gy,By,Ey");
        grp17 = {Entry{}, E("blsr", "By,Ey"), E("blsmsk", "By,Ey"), E("blsi", "By,Ey"), Entry{}, Entry{}, Entry{},
                 Entry{}};
        v2[0xf3][0] = G(&grp17);
        v2[0xf5][0] = E("bzhi", "Gy,Ey,By");
        v2[0xf5][2] = E("pext", "Gy,By,Ey");
        v2[0xf5][3] = E("pdep", "Gy,By,Ey");
        v2[0xf6][3] = E("mulx", "Gy,By,Ey");
        v2[0xf7][0] = E("bextr", "Gy,Ey,By");
        v2[0xf7][1] = E("shlx", "Gy,Ey,By");
        v2[0xf7][2] = E("sarx", "Gy,Ey,By");
        v2[0xf7][3] = E("shrx", "Gy,Ey,By");

        v3[0x00][1] = E("vpermq", "Vqq,Wqq,Ib");
        v3[0x01][1] = E("vpermpd", "Vqq,Wqq,Ib");
        v3[0x02][1] = E("vpblendd", "Vx,Hx,Wx,Ib");
        v3[0x04][1] = E("vpermilps", "Vx,Wx,Ib");
        v3[0x05][1] = E("vpermilpd", "Vx,Wx,Ib");
        v3[0x06][1] = E("vperm2f128", "Vqq,Hqq,Wqq,Ib");
        v3[0x18][1] = E("vinsertf128", "Vqq,Hqq,Wdq,Ib");
        v3[0x19][1] = E("vextractf128", "Wdq,Vqq,Ib");
        v3[0x1d][1] = E("vcvtps2ph", "Wh,Vx,Ib");
        v3[0x38][1] = E("vinserti128", "Vqq,Hqq,Wdq,Ib");
        v3[0x39][1] = E("vextracti128", "Wdq,Vqq,Ib");
        v3[0x46][1] = E("vperm2i128", "Vqq,Hqq,Wqq,Ib");
        v3[0x4a][1] = E("vblendvps", "Vx,Hx,Wx,Lx");
        v3[0x4b][1] = E("vblendvpd", "Vx,Hx,Wx,Lx");
        v3[0x4c][1] = E("vpblendvb", "Vx,Hx,Wx,Lx");
        v3[0xf0][3] = E("rorx", "Gy,Ey,Ib");
    }
};

const Tables& tables() {
    static const Tables t;
    return t;
}

// ---------------------------------------------------------------------------

std::string hex(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t mask_to(std::uint64_t v, int bytes) {
    return bytes >= 8 ? v : (v & ((std::uint64_t{1} << (bytes * 8)) - 1));
}

const char* size_keyword(int bytes) {
    switch (bytes) {
    case 1: return "byte";
    case 2: return "word";
    case 4: return "dword";
    case 6: return "fword";
    case 8: return "qword";
    case 10: return "tbyte";
    case 16: return "xmmword";
    case 32: return "ymmword";
    case 64: return "zmmword";
    default: return "";
    }
}

class Decoder {
public:
    Decoder(std::span<const std::uint8_t> bytes, Address address) : bytes_(bytes), address_(address) {}

    Instruction run();

private:
    struct Bad {};

    std::span<const std::uint8_t> bytes_;
    Address address_;
    std::size_t pos_ = 0;

    // prefixes
    bool p66_ = false, p67_ = false, lock_ = false;
    int rep_ = 0;  // 0xf2 / 0xf3 (last one wins)
    int seg_ = -1;
    std::uint8_t rex_ = 0;
    bool rex_w_ = false, rex_r_ = false, rex_x_ = false, rex_b_ = false;
    // vex / evex
    bool vex_ = false, evex_ = false;
    int vmap_ = 0, vlen_ = 0, vvvv_ = 0, pp_ = 0;
    bool evex_r2_ = false, evex_v2_ = false, evex_z_ = false, evex_bcst_ = false;
    int evex_mask_ = 0;
    // modrm
    bool has_modrm_ = false;
    int mod_ = 0, reg_ = 0, rm_ = 0;  // reg and rm include REX extension
    int raw_reg_ = 0;
    bool has_sib_ = false;
    int base_ = -1, index_ = -1, scale_ = 1;
    bool rip_ = false;
    std::int64_t disp_ = 0;
    int disp_bytes_ = 0;
    int opsize_ = 32;
    std::uint32_t flags_ = 0;

    Instruction out_;
    std::size_t vex_opcode_end_ = 0;
    std::uint8_t vex_opcode_ = 0;
    int pending_rip_operand_ = -1;
    int mem_operand_bytes_ = 0;  // for EVEX disp8 scaling

    std::uint8_t next() {
        if (pos_ >= bytes_.size() || pos_ >= 15) throw Bad{};
        return bytes_[pos_++];
    }
    std::uint8_t peek() const {
        if (pos_ >= bytes_.size()) throw Bad{};
        return bytes_[pos_];
    }
    std::uint64_t read_le(int n) {
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) v |= std::uint64_t{next()} << (8 * i);
        return v;
    }
    std::int64_t read_signed(int n) {
        std::uint64_t v = read_le(n);
        if (n < 8) {
            std::uint64_t sign = std::uint64_t{1} << (n * 8 - 1);
            if (v & sign) v |= ~((sign << 1) - 1);
        }
        return static_cast<std::int64_t>(v);
    }

    void read_modrm();
    std::optional<std::uint32_t> vex_fallback_length();
    void decode_x87(std::uint8_t op);
    void decode_group7_reg();
    bool needs_modrm(std::string_view ops) const;
    void emit_operands(std::string_view ops);
    void emit_operand(std::string_view tok);
    int vector_bytes() const { return 16 << vlen_; }
    int size_of(std::string_view code, bool for_register) const;
    std::string gpr(int n, int bytes) const;
    std::string vreg(int n, int bytes) const;
    std::string memory_text(int bytes);
    void push_register(const std::string& name);
    void push_memory(int bytes);
    void push_immediate(std::uint64_t value, int print_bytes);
    void push_address(Address target);
    std::string select_name(const Entry& e) const;
    void classify();
};

void Decoder::read_modrm() {
    if (has_modrm_) return;
    has_modrm_ = true;
    std::uint8_t m = next();
    mod_ = m >> 6;
    raw_reg_ = (m >> 3) & 7;
    reg_ = raw_reg_ | (rex_r_ ? 8 : 0) | (evex_r2_ ? 16 : 0);
    int rm = m & 7;
    rm_ = rm | (rex_b_ ? 8 : 0);
    if (mod_ == 3) return;
    if (rm == 4) {
        has_sib_ = true;
        std::uint8_t sib = next();
        scale_ = 1 << (sib >> 6);
        int idx = ((sib >> 3) & 7) | (rex_x_ ? 8 : 0);
        index_ = idx == 4 ? -1 : idx;
        int base = sib & 7;
        if (base == 5 && mod_ == 0) {
            base_ = -1;
            disp_bytes_ = 4;
        } else {
            base_ = base | (rex_b_ ? 8 : 0);
        }
    } else if (rm == 5 && mod_ == 0) {
        rip_ = true;
        disp_bytes_ = 4;
    } else {
        base_ = rm_;
    }
    if (mod_ == 1) disp_bytes_ = 1;
    if (mod_ == 2) disp_bytes_ = 4;
    if (disp_bytes_) disp_ = read_signed(disp_bytes_);
}

std::optional<std::uint32_t> Decoder::vex_fallback_length() {
    try {
        pos_ = vex_opcode_end_;
        has_modrm_ = false;
        disp_bytes_ = 0;
        if (!(vmap_ == 1 && vex_opcode_ == 0x77)) read_modrm();
        std::uint8_t op = vex_opcode_;
        bool imm = vmap_ == 3 ||
                   (vmap_ == 1 && ((op >= 0x70 && op <= 0x73) || (op >= 0xc2 && op <= 0xc6)));
        if (imm) next();
        return static_cast<std::uint32_t>(pos_);
    } catch (const Bad&) {
        return std::nullopt;
    }
}

std::string Decoder::gpr(int n, int bytes) const {
    n &= 15;
    switch (bytes) {
    case 1: return (rex_ || n >= 8 || vex_) ? kGpr8[n] : kGpr8Legacy[n & 7];
    case 2: return kGpr16[n];
    case 4: return kGpr32[n];
    default: return kGpr64[n];
    }
}

std::string Decoder::vreg(int n, int bytes) const {
    const char* prefix = bytes >= 64 ? "zmm" : bytes >= 32 ? "ymm" : "xmm";
    return prefix + std::to_string(n);
}

int Decoder::size_of(std::string_view code, bool for_register) const {
    if (auto slash = code.find('/'); slash != std::string_view::npos)
        return size_of(for_register ? code.substr(0, slash) : code.substr(slash + 1), for_register);
    if (code == "b") return 1;
    if (code == "w") return 2;
    if (code == "d" || code == "ss") return 4;
    if (code == "q" || code == "sd") return 8;
    if (code == "dq") return 16;
    if (code == "qq") return 32;
    if (code == "t") return 10;
    if (code == "p") return rex_w_ ? 10 : 6;
    if (code == "v") return opsize_ / 8;
    if (code == "z") return opsize_ == 16 ? 2 : 4;
    if (code == "y") return rex_w_ ? 8 : 4;
    if (code == "x") return vector_bytes();
    if (code == "h") return vector_bytes() / 2;
    if (code == "Q") return vector_bytes() / 4;
    if (code == "O") return vector_bytes() / 8;
    if (code == "m") return vlen_ == 0 ? 8 : vector_bytes();
    if (code == "sw") return rex_w_ ? 8 : 4;
    return 0;
}

std::string Decoder::memory_text(int bytes) {
    std::string s;
    if (const char* kw = size_keyword(bytes); *kw) {
        s += kw;
        s += " ptr ";
    }
    std::string seg;
    if (seg_ == 4 || seg_ == 5) seg = std::string(kSeg[seg_]) + ":";
    const auto& names = p67_ ? kGpr32 : kGpr64;
    if (rip_) {
        s += seg + "[" + (p67_ ? "eip" : "rip");
        s += "+" + hex(static_cast<std::uint64_t>(disp_));
        return s + "]";
    }
    if (base_ < 0 && index_ < 0) {
        return s + (seg.empty() ? "ds:" : seg) + hex(p67_ ? mask_to(disp_, 4) : static_cast<std::uint64_t>(disp_));
    }
    s += seg + "[";
    bool first = true;
    if (base_ >= 0) {
        s += names[base_];
        first = false;
    }
    if (index_ >= 0) {
        if (!first) s += "+";
        s += names[index_];
        s += "*" + std::to_string(scale_);
        first = false;
    }
    if (disp_bytes_) {
        if (disp_ < 0) s += "-" + hex(static_cast<std::uint64_t>(-disp_));
        else s += "+" + hex(static_cast<std::uint64_t>(disp_));
    }
    return s + "]";
}

void Decoder::push_register(const std::string& name) {
    OperandText op;
    op.text = name;
    op.kind = OperandKind::Register;
    op.register_name = name;
    out_.operands.push_back(std::move(op));
}

void Decoder::push_memory(int bytes) {
    if (mod_ == 3) throw Bad{};
    if (evex_ && disp_bytes_ == 1) {
        // disp8*N compression; N is the memory operand width (element width when broadcasting)
        int n = evex_bcst_ ? (rex_w_ ? 8 : 4) : (bytes ? bytes : 1);
        disp_ *= n;
    }
    OperandText op;
    op.kind = OperandKind::Memory;
    MemoryRef mem;
    if (seg_ == 4 || seg_ == 5) mem.segment = kSeg[seg_];
    const auto& names = kGpr64;
    if (rip_) mem.base = "rip";
    else if (base_ >= 0) mem.base = names[base_];
    if (index_ >= 0) mem.index = names[index_];
    mem.scale = scale_;
    mem.displacement = disp_;
    if (base_ < 0 && index_ < 0 && !rip_) mem.absolute = static_cast<Address>(disp_);
    int print_bytes = (evex_ && evex_bcst_) ? (rex_w_ ? 8 : 4) : bytes;
    op.text = memory_text(print_bytes);
    if (evex_ && evex_bcst_ && bytes) op.text += "{1to" + std::to_string(bytes / (rex_w_ ? 8 : 4)) + "}";
    op.memory = std::move(mem);
    if (rip_) pending_rip_operand_ = static_cast<int>(out_.operands.size());
    out_.operands.push_back(std::move(op));
}

void Decoder::push_immediate(std::uint64_t value, int print_bytes) {
    OperandText op;
    op.kind = OperandKind::Immediate;
    op.text = hex(mask_to(value, print_bytes));
    out_.operands.push_back(std::move(op));
}

void Decoder::push_address(Address target) {
    OperandText op;
    op.kind = OperandKind::Address;
    op.text = hex(target);
    out_.transfer_target = target;
    out_.operands.push_back(std::move(op));
}

bool Decoder::needs_modrm(std::string_view ops) const {
    std::size_t i = 0;
    while (i < ops.size()) {
        std::size_t j = ops.find(',', i);
        if (j == std::string_view::npos) j = ops.size();
        std::string_view tok = ops.substr(i, j - i);
        i = j + 1;
        if (tok.empty()) continue;
        char c = tok[0];
        if (tok == "XMM0" || tok == "FS" || tok == "GS" || tok == "DX" || tok == "CL" || tok == "AL" ||
            tok == "Xlat")
            continue;
        if (std::string_view("EGMRSVWUPQNCD").find(c) != std::string_view::npos) return true;
    }
    return false;
}

void Decoder::emit_operands(std::string_view ops) {
    std::size_t i = 0;
    while (i < ops.size()) {
        std::size_t j = ops.find(',', i);
        if (j == std::string_view::npos) j = ops.size();
        std::string_view tok = ops.substr(i, j - i);
        i = j + 1;
        if (!tok.empty()) emit_operand(tok);
    }
}

void Decoder::emit_operand(std::string_view tok) {
    // literal operands
    if (tok == "AL") return push_register("al");
    if (tok == "CL") return push_register("cl");
    if (tok == "DX") return push_register("dx");
    if (tok == "XMM0") return push_register("xmm0");
    if (tok == "FS") return push_register("fs");
    if (tok == "GS") return push_register("gs");
    if (tok == "rAX") return push_register(gpr(0, opsize_ / 8));
    if (tok == "eAX") return push_register(p66_ ? "ax" : "eax");
    if (tok == "1") {
        OperandText op;
        op.kind = OperandKind::Immediate;
        op.text = "1";
        out_.operands.push_back(std::move(op));
        return;
    }
    if (tok == "Xlat") {
        OperandText op;
        op.kind = OperandKind::Memory;
        op.text = "byte ptr ds:[rbx]";
        op.memory = MemoryRef{"", "rbx", "", 1, 0, std::nullopt};
        out_.operands.push_back(std::move(op));
        return;
    }

    char method = tok[0];
    std::string_view code = tok.substr(1);
    switch (method) {
    case 'E':
    case 'W':
    case 'Q': {
        bool is_reg = mod_ == 3;
        int bytes = size_of(code, is_reg);
        if (is_reg) {
            if (method == 'E') return push_register(gpr(rm_, bytes));
            if (method == 'Q') return push_register("mm" + std::to_string(rm_ & 7));
            int n = rm_ | (evex_ && rex_x_ ? 16 : 0);
            return push_register(vreg(n, std::max(bytes, 16)));
        }
        mem_operand_bytes_ = bytes;
        return push_memory(bytes);
    }
    case 'M': {
        int bytes = size_of(code, false);
        mem_operand_bytes_ = bytes;
        return push_memory(bytes);
    }
    case 'G': return push_register(gpr(reg_, size_of(code, true)));
    case 'R': return push_register(gpr(rm_, size_of(code, true)));
    case 'B': return push_register(gpr(vvvv_, size_of(code, true)));
    case 'V': return push_register(vreg(reg_, std::max(size_of(code, true), 16)));
    case 'U': {
        if (mod_ != 3) throw Bad{};
        int n = rm_ | (evex_ && rex_x_ ? 16 : 0);
        return push_register(vreg(n, std::max(size_of(code, true), 16)));
    }
    case 'H': return push_register(vreg(vvvv_ | (evex_v2_ ? 16 : 0), std::max(size_of(code, true), 16)));
    case 'L': {
        std::uint8_t imm = next();
        return push_register(vreg(imm >> 4, std::max(size_of(code, true), 16)));
    }
    case 'P': return push_register("mm" + std::to_string(raw_reg_));
    case 'N':
        if (mod_ != 3) throw Bad{};
        return push_register("mm" + std::to_string(rm_ & 7));
    case 'S':
        if (raw_reg_ > 5) throw Bad{};
        return push_register(kSeg[raw_reg_]);
    case 'C': return push_register("cr" + std::to_string(reg_));
    case 'D': return push_register("db" + std::to_string(reg_));
    case 'Z': {
        int n = (bytes_[pos_ - 1] & 7) | (rex_b_ ? 8 : 0);
        int bytes = code == "q" ? (p66_ ? 2 : 8) : size_of(code, true);
        return push_register(gpr(n, bytes));
    }
    case 'I': {
        int osz = opsize_ / 8;
        if (code == "b") return push_immediate(read_le(1), 1);
        if (code == "w") return push_immediate(read_le(2), 2);
        if (code == "s") return push_immediate(static_cast<std::uint64_t>(read_signed(1)), osz);
        if (code == "z") return push_immediate(static_cast<std::uint64_t>(read_signed(osz == 2 ? 2 : 4)), osz);
        if (code == "v") return push_immediate(read_le(osz), osz);
        throw Bad{};
    }
    case 'J': {
        std::int64_t rel = read_signed(code == "b" ? 1 : 4);
        return push_address(address_ + pos_ + static_cast<std::uint64_t>(rel));
    }
    case 'O': {
        std::uint64_t off = read_le(p67_ ? 4 : 8);
        OperandText op;
        op.kind = OperandKind::Memory;
        op.text = std::string(seg_ == 4 || seg_ == 5 ? kSeg[seg_] : "ds") + ":" + hex(off);
        op.memory = MemoryRef{seg_ == 4 || seg_ == 5 ? kSeg[seg_] : "", "", "", 1, static_cast<std::int64_t>(off),
                              off};
        out_.operands.push_back(std::move(op));
        return;
    }
    case 'X':
    case 'Y': {
        int bytes = size_of(code, false);
        const char* reg = method == 'X' ? (p67_ ? "esi" : "rsi") : (p67_ ? "edi" : "rdi");
        const char* seg = method == 'X' ? "ds" : "es";
        OperandText op;
        op.kind = OperandKind::Memory;
        op.text = std::string(size_keyword(bytes)) + " ptr " + seg + ":[" + reg + "]";
        op.memory = MemoryRef{"", method == 'X' ? "rsi" : "rdi", "", 1, 0, std::nullopt};
        out_.operands.push_back(std::move(op));
        return;
    }
    default: throw Bad{};
    }
}

std::string Decoder::select_name(const Entry& e) const {
    std::string name = e.mnem ? e.mnem : "";
    if (auto bar = name.find('|'); bar != std::string::npos)
        name = rex_w_ ? name.substr(bar + 1) : name.substr(0, bar);
    if (e.flags & kOszNames) {
        std::size_t a = name.find('/');
        std::size_t b = name.find('/', a + 1);
        if (opsize_ == 16) name = name.substr(0, a);
        else if (opsize_ == 32) name = name.substr(a + 1, b - a - 1);
        else name = name.substr(b + 1);
    }
    return name;
}

void Decoder::decode_group7_reg() {
    std::uint8_t m = bytes_[pos_ - 1];
    if (rep_ == 0xf3 && (m == 0xe8 || m == 0xea)) {
        out_.mnemonic = m == 0xe8 ? "setssbsy" : "saveprevssp";
        return;
    }
    static const std::map<int, const char*> names = {
        {0xc1, "vmcall"}, {0xc2, "vmlaunch"}, {0xc3, "vmresume"}, {0xc4, "vmxoff"}, {0xc8, "monitor"},
        {0xc9, "mwait"},  {0xca, "clac"},     {0xcb, "stac"},     {0xcf, "encls"},  {0xd0, "xgetbv"},
        {0xd1, "xsetbv"}, {0xd4, "vmfunc"},   {0xd5, "xend"},     {0xd6, "xtest"},  {0xd7, "enclu"},
        {0xd8, "vmrun"},  {0xd9, "vmmcall"},  {0xda, "vmload"},   {0xdb, "vmsave"}, {0xdc, "stgi"},
        {0xdd, "clgi"},   {0xde, "skinit"},   {0xdf, "invlpga"},  {0xee, "rdpkru"}, {0xef, "wrpkru"},
        {0xf8, "swapgs"}, {0xf9, "rdtscp"},   {0xfa, "monitorx"}, {0xfb, "mwaitx"}, {0xfc, "clzero"}};
    if (auto it = names.find(m); it != names.end()) {
        out_.mnemonic = it->second;
        return;
    }
    if (raw_reg_ == 4) {
        out_.mnemonic = "smsw";
        emit_operand("Ev");
        return;
    }
    if (raw_reg_ == 6) {
        out_.mnemonic = "lmsw";
        emit_operand("Ew");
        return;
    }
    throw Bad{};
}

void Decoder::decode_x87(std::uint8_t op) {
    read_modrm();
    int r = raw_reg_;
    int i = rm_ & 7;
    auto sti = [&](int n) { return "st(" + std::to_string(n) + ")"; };
    auto two_regs = [&](const char* name, bool st_first) {
        out_.mnemonic = name;
        push_register(st_first ? "st" : sti(i));
        push_register(st_first ? sti(i) : "st");
    };
    auto one_reg = [&](const char* name) {
        out_.mnemonic = name;
        push_register(sti(i));
    };
    if (mod_ != 3) {
        static const char* mem[8][8] = {
            {"fadd", "fmul", "fcom", "fcomp", "fsub", "fsubr", "fdiv", "fdivr"},
            {"fld", nullptr, "fst", "fstp", "fldenv", "fldcw", "fnstenv", "fnstcw"},
            {"fiadd", "fimul", "ficom", "ficomp", "fisub", "fisubr", "fidiv", "fidivr"},
            {"fild", "fisttp", "fist", "fistp", nullptr, "fld", nullptr, "fstp"},
            {"fadd", "fmul", "fcom", "fcomp", "fsub", "fsubr", "fdiv", "fdivr"},
            {"fld", "fisttp", "fst", "fstp", "frstor", nullptr, "fnsave", "fnstsw"},
            {"fiadd", "fimul", "ficom", "ficomp", "fisub", "fisubr", "fidiv", "fidivr"},
            {"fild", "fisttp", "fist", "fistp", "fbld", "fild", "fbstp", "fistp"}};
        static const int sizes[8][8] = {{4, 4, 4, 4, 4, 4, 4, 4}, {4, 0, 4, 4, 0, 2, 0, 2},
                                        {4, 4, 4, 4, 4, 4, 4, 4}, {4, 4, 4, 4, 0, 10, 0, 10},
                                        {8, 8, 8, 8, 8, 8, 8, 8}, {8, 8, 8, 8, 0, 0, 0, 2},
                                        {2, 2, 2, 2, 2, 2, 2, 2}, {2, 2, 2, 2, 10, 8, 10, 8}};
        int row = op - 0xd8;
        if (!mem[row][r]) throw Bad{};
        out_.mnemonic = mem[row][r];
        push_memory(sizes[row][r]);
        return;
    }
    std::uint8_t m = bytes_[pos_ - 1];
    switch (op) {
    case 0xd8: {
        static const char* n[8] = {"fadd", "fmul", "fcom", "fcomp", "fsub", "fsubr", "fdiv", "fdivr"};
        if (r == 2 || r == 3) return one_reg(n[r]);
        return two_regs(n[r], true);
    }
    case 0xd9: {
        if (r == 0) return one_reg("fld");
        if (r == 1) return one_reg("fxch");
        static const std::map<int, const char*> named = {
            {0xd0, "fnop"},   {0xe0, "fchs"},    {0xe1, "fabs"},    {0xe4, "ftst"},   {0xe5, "fxam"},
            {0xe8, "fld1"},   {0xe9, "fldl2t"},  {0xea, "fldl2e"},  {0xeb, "fldpi"},  {0xec, "fldlg2"},
            {0xed, "fldln2"}, {0xee, "fldz"},    {0xf0, "f2xm1"},   {0xf1, "fyl2x"},  {0xf2, "fptan"},
            {0xf3, "fpatan"}, {0xf4, "fxtract"}, {0xf5, "fprem1"},  {0xf6, "fdecstp"}, {0xf7, "fincstp"},
            {0xf8, "fprem"},  {0xf9, "fyl2xp1"}, {0xfa, "fsqrt"},   {0xfb, "fsincos"}, {0xfc, "frndint"},
            {0xfd, "fscale"}, {0xfe, "fsin"},    {0xff, "fcos"}};
        if (auto it = named.find(m); it != named.end()) {
            out_.mnemonic = it->second;
            return;
        }
        throw Bad{};
    }
    case 0xda: {
        static const char* n[4] = {"fcmovb", "fcmove", "fcmovbe", "fcmovu"};
        if (r < 4) return two_regs(n[r], true);
        if (m == 0xe9) {
            out_.mnemonic = "fucompp";
            return;
        }
        throw Bad{};
    }
    case 0xdb: {
        static const char* n[8] = {"fcmovnb", "fcmovne", "fcmovnbe", "fcmovnu", nullptr, "fucomi", "fcomi", nullptr};
        if (m == 0xe2) { out_.mnemonic = "fnclex"; return; }
        if (m == 0xe3) { out_.mnemonic = "fninit"; return; }
        if (!n[r]) throw Bad{};
        return two_regs(n[r], true);
    }
    case 0xdc: {
        // register forms follow the GNU spelling, which swaps the reversed variants
        static const char* n[8] = {"fadd", "fmul", "fcom", "fcomp", "fsubr", "fsub", "fdivr", "fdiv"};
        if (r == 2 || r == 3) return one_reg(n[r]);
        return two_regs(n[r], false);
    }
    case 0xdd: {
        static const char* n[8] = {"ffree", nullptr, "fst", "fstp", "fucom", "fucomp", nullptr, nullptr};
        if (!n[r]) throw Bad{};
        return one_reg(n[r]);
    }
    case 0xde: {
        static const char* n[8] = {"faddp", "fmulp", nullptr, nullptr, "fsubrp", "fsubp", "fdivrp", "fdivp"};
        if (m == 0xd9) { out_.mnemonic = "fcompp"; return; }
        if (!n[r]) throw Bad{};
        return two_regs(n[r], false);
    }
    case 0xdf: {
        if (m == 0xe0) {
            out_.mnemonic = "fnstsw";
            return push_register("ax");
        }
        if (r == 0) return one_reg("ffreep");
        if (r == 5) return two_regs("fucomip", true);
        if (r == 6) return two_regs("fcomip", true);
        throw Bad{};
    }
    }
    throw Bad{};
}

void Decoder::classify() {
    const std::string& m = out_.mnemonic;
    bool has_target = out_.transfer_target.has_value();
    if (m == "jmp") {
        out_.is_control_transfer = true;
    } else if (m == "call") {
        out_.is_control_transfer = true;
        out_.is_call = true;
    } else if (m == "ret" || m == "retf" || m == "iret" || m == "iretd" || m == "iretq" || m == "sysret") {
        out_.is_control_transfer = true;
        out_.is_return = true;
    } else if ((m.size() >= 2 && m[0] == 'j') || m.rfind("loop", 0) == 0) {
        out_.is_control_transfer = true;
        out_.is_conditional = true;
    } else if (m == "hlt" || m == "ud2" || m == "ud0" || m == "ud1") {
        out_.is_terminator = true;
    }
    if (!out_.is_control_transfer || out_.is_return) out_.transfer_target.reset();
    (void)has_target;
}

Instruction Decoder::run() {
    out_.address = address_;
    try {
        // Legacy prefixes and REX.
        for (;;) {
            std::uint8_t b = peek();
            if (b == 0x66) p66_ = true;
            else if (b == 0x67) p67_ = true;
            else if (b == 0xf0) lock_ = true;
            else if (b == 0xf2 || b == 0xf3) rep_ = b;
            else if (b == 0x2e) seg_ = 1;
            else if (b == 0x36) seg_ = 2;
            else if (b == 0x3e) seg_ = 3;
            else if (b == 0x26) seg_ = 0;
            else if (b == 0x64) seg_ = 4;
            else if (b == 0x65) seg_ = 5;
            else break;
            ++pos_;
            rex_ = 0;
        }
        if ((peek() & 0xf0) == 0x40) {
            rex_ = next();
            rex_w_ = rex_ & 8;
            rex_r_ = rex_ & 4;
            rex_x_ = rex_ & 2;
            rex_b_ = rex_ & 1;
        }
        std::uint8_t op = next();
        const Tables& t = tables();
        Entry entry;
        int map = 0;  // 0 one-byte, 1 0F, 2 0F38, 3 0F3A
        int prefix_slot = 0;
        bool consumed_mandatory = false;

        auto pick = [&](const std::array<Entry, 4>& variants) -> Entry {
            int slot = rep_ == 0xf3 ? 2 : rep_ == 0xf2 ? 3 : p66_ ? 1 : 0;
            if (slot != 0 && variants[slot].valid()) {
                prefix_slot = slot;
                consumed_mandatory = true;
                return variants[slot];
            }
            if (rep_ && p66_ && variants[1].valid() && !variants[0].valid()) {
                prefix_slot = 1;
                consumed_mandatory = true;
                return variants[1];
            }
            return variants[0];
        };

        if (op == 0xc4 || op == 0xc5 || op == 0x62) {
            if (rex_ || p66_ || rep_) throw Bad{};
            std::uint8_t p0 = next();
            if (op == 0xc5) {
                vex_ = true;
                rex_r_ = !(p0 & 0x80);
                vvvv_ = (~p0 >> 3) & 15;
                vlen_ = (p0 >> 2) & 1;
                pp_ = p0 & 3;
                vmap_ = 1;
            } else if (op == 0xc4) {
                vex_ = true;
                std::uint8_t p1 = next();
                rex_r_ = !(p0 & 0x80);
                rex_x_ = !(p0 & 0x40);
                rex_b_ = !(p0 & 0x20);
                vmap_ = p0 & 0x1f;
                rex_w_ = p1 & 0x80;
                vvvv_ = (~p1 >> 3) & 15;
                vlen_ = (p1 >> 2) & 1;
                pp_ = p1 & 3;
            } else {
                evex_ = vex_ = true;
                std::uint8_t p1 = next();
                std::uint8_t p2 = next();
                rex_r_ = !(p0 & 0x80);
                rex_x_ = !(p0 & 0x40);
                rex_b_ = !(p0 & 0x20);
                evex_r2_ = !(p0 & 0x10);
                vmap_ = p0 & 7;
                rex_w_ = p1 & 0x80;
                vvvv_ = (~p1 >> 3) & 15;
                pp_ = p1 & 3;
                evex_z_ = p2 & 0x80;
                vlen_ = (p2 >> 5) & 3;
                evex_bcst_ = p2 & 0x10;
                evex_v2_ = !(p2 & 0x08);
                evex_mask_ = p2 & 7;
            }
            if (vmap_ < 1 || vmap_ > 3) {
                if (!evex_) throw Bad{};
            }
            rex_ = 0x40;
            op = next();
            vex_opcode_end_ = pos_;
            vex_opcode_ = op;
            p66_ = pp_ == 1;
            rep_ = pp_ == 2 ? 0xf3 : pp_ == 3 ? 0xf2 : 0;
            map = vmap_;
            prefix_slot = pp_ == 1 ? 1 : pp_ == 2 ? 2 : pp_ == 3 ? 3 : 0;
            consumed_mandatory = true;
            const std::array<Entry, 4>* legacy = nullptr;
            if (map == 1) legacy = &t.two[op];
            else if (map == 2) legacy = &t.m38[op];
            else if (map == 3) legacy = &t.m3a[op];
            if (map >= 1 && map <= 3 && t.vex[map][op][prefix_slot].valid()) {
                entry = t.vex[map][op][prefix_slot];
            } else if (legacy && (*legacy)[prefix_slot].valid() &&
                       (((*legacy)[prefix_slot].flags & kSse) || (map == 1 && op == 0x77))) {
                entry = (*legacy)[prefix_slot];
            } else if (map == 1 && op == 0x77 && prefix_slot == 0 && !evex_) {
                out_.mnemonic = vlen_ ? "vzeroall" : "vzeroupper";
                out_.byte_length = static_cast<std::uint32_t>(pos_);
                return out_;
            } else if (map == 1 && op == 0xae && prefix_slot == 0 && !evex_) {
                read_modrm();
                if (raw_reg_ == 2) entry = E("vldmxcsr", "Md");
                else if (raw_reg_ == 3) entry = E("vstmxcsr", "Md");
                else throw Bad{};
            } else {
                // Unknown but well-formed: keep the length right.
                read_modrm();
                bool imm = map == 3 || (map == 1 && ((op >= 0x70 && op <= 0x73) || (op >= 0xc2 && op <= 0xc6)));
                if (imm) next();
                out_.mnemonic = "(unk)";
                out_.byte_length = static_cast<std::uint32_t>(pos_);
                return out_;
            }
            if (map == 1 && op == 0x77) {
                out_.mnemonic = vlen_ ? "vzeroall" : "vzeroupper";
                out_.byte_length = static_cast<std::uint32_t>(pos_);
                return out_;
            }
        } else if (op == 0x0f) {
            op = next();
            if (op == 0x38) {
                map = 2;
                op = next();
                entry = pick(t.m38[op]);
            } else if (op == 0x3a) {
                map = 3;
                op = next();
                entry = pick(t.m3a[op]);
            } else if (op == 0x0f) {
                // 3DNow!: ModRM, then an opcode suffix byte.
                read_modrm();
                next();
                out_.mnemonic = "(unk)";
                out_.byte_length = static_cast<std::uint32_t>(pos_);
                return out_;
            } else {
                map = 1;
                entry = pick(t.two[op]);
            }
        } else {
            entry = t.one[op];
        }

        // Operand size.
        if (vex_) opsize_ = rex_w_ ? 64 : 32;
        else if (rex_w_) opsize_ = 64;
        else if (p66_ && !(consumed_mandatory && prefix_slot == 1)) opsize_ = 16;
        else opsize_ = 32;

        // Special one-byte cases.
        if (map == 0) {
            if (op >= 0xd8 && op <= 0xdf) {
                decode_x87(op);
                out_.byte_length = static_cast<std::uint32_t>(pos_);
                classify();
                return out_;
            }
            if (op == 0x90) {
                if (rex_b_) entry = E("xchg", "Zv,rAX");
                else if (rep_ == 0xf3) entry = E("pause");
                else if (p66_) entry = E("xchg", "AX,AX2");
            }
            if (op == 0x8f && (peek() & 0x38) != 0) {
                // XOP prefix (AMD): treat like a three-byte VEX with unknown opcode.
                std::uint8_t p0 = next();
                next();
                int xmap = p0 & 0x1f;
                next();  // opcode
                read_modrm();
                if (xmap == 8) next();
                if (xmap == 0xa) read_le(4);
                out_.mnemonic = "(unk)";
                out_.byte_length = static_cast<std::uint32_t>(pos_);
                return out_;
            }
            if ((op == 0xc6 || op == 0xc7) && peek() == 0xf8) {
                next();
                has_modrm_ = true;
                mod_ = 3;
                if (op == 0xc6) {
                    out_.mnemonic = "xabort";
                    emit_operand("Ib");
                } else {
                    out_.mnemonic = "xbegin";
                    emit_operand("Jz");
                }
                out_.byte_length = static_cast<std::uint32_t>(pos_);
                return out_;
            }
        }
        if (map == 1 && op == 0x1e && rep_ == 0xf3 && !vex_ && (peek() == 0xfa || peek() == 0xfb)) {
            out_.mnemonic = next() == 0xfa ? "endbr64" : "endbr32";
            out_.byte_length = static_cast<std::uint32_t>(pos_);
            return out_;
        }
        if (map == 1 && op == 0x1e && rep_ == 0xf3 && !vex_ && (peek() & 0xf8) == 0xc8) {
            read_modrm();
            out_.mnemonic = rex_w_ ? "rdsspq" : "rdsspd";
            emit_operand("Ry");
            out_.byte_length = static_cast<std::uint32_t>(pos_);
            return out_;
        }

        if (!entry.valid() && !*entry.ops) throw Bad{};

        // Groups select by ModRM.reg.
        if (entry.group) {
            read_modrm();
            const Group* g = entry.group;
            if (map == 1 && op == 0x01 && mod_ != 3 && raw_reg_ == 5 && rep_ == 0xf3) {
                out_.mnemonic = "rstorssp";
                emit_operand("Mq");
                out_.byte_length = static_cast<std::uint32_t>(pos_);
                return out_;
            }
            if (map == 1 && op == 0x01 && mod_ == 3) {
                decode_group7_reg();
                out_.byte_length = static_cast<std::uint32_t>(pos_);
                return out_;
            }
            if (map == 1 && op == 0xae && mod_ == 3) {
                if (rep_ == 0xf3 && raw_reg_ < 4) {
                    static const char* n[4] = {"rdfsbase", "rdgsbase", "wrfsbase", "wrgsbase"};
                    out_.mnemonic = n[raw_reg_];
                    emit_operand("Ry");
                    out_.byte_length = static_cast<std::uint32_t>(pos_);
                    return out_;
                }
                g = &t.grp15reg;
            }
            if (map == 1 && op == 0xc7 && mod_ == 3) g = &t.grp9reg;
            if (map == 1 && op == 0x18 && mod_ == 3) {
                entry = E("nop", "Ev");
                g = nullptr;
            }
            if (g) {
                Entry sub = (*g)[raw_reg_];
                if (!sub.valid()) throw Bad{};
                std::uint32_t f = sub.flags | entry.flags;
                // Operands come from the group entry, or from the parent for grp1/grp2/etc.
                if (sub.ops[0] == '\0' && !(f & kModrm)) {
                    // parent-defined operand forms
                    const char* ops = "";
                    switch (op) {
                    case 0x80: ops = "Eb,Ib"; break;
                    case 0x81: ops = "Ev,Iz"; break;
                    case 0x83: ops = "Ev,Is"; break;
                    case 0xc0: ops = "Eb,Ib"; break;
                    case 0xc1: ops = "Ev,Ib"; break;
                    case 0xd0: ops = "Eb,1"; break;
                    case 0xd1: ops = "Ev,1"; break;
                    case 0xd2: ops = "Eb,CL"; break;
                    case 0xd3: ops = "Ev,CL"; break;
                    default: break;
                    }
                    if (map != 0) ops = "";
                    sub.ops = ops;
                }
                sub.flags = f;
                entry = sub;
            }
        }
        if (map == 1 && has_modrm_ && mod_ == 3) {
            if (auto it = t.two_mod3.find({op, prefix_slot}); it != t.two_mod3.end()) entry = it->second;
        } else if (map == 1 && !has_modrm_ && t.two_mod3.count({op, prefix_slot})) {
            read_modrm();
            if (mod_ == 3) entry = t.two_mod3.at({op, prefix_slot});
        }
        if (!vex_ && (entry.flags & kVexOnly)) throw Bad{};

        flags_ = entry.flags;
        if ((flags_ & kD64) && !p66_) opsize_ = 64;
        if (flags_ & kF64) opsize_ = 64;

        std::string ops = entry.ops;
        if (ops.find('|') != std::string::npos) {
            auto bar = ops.find('|');
            ops = rex_w_ ? ops.substr(bar + 1) : ops.substr(0, bar);
        }
        if (ops == "AX,AX2") ops = "rAX,rAX";
        if (vex_ && map == 1 && (flags_ & kNoHMem)) {
            read_modrm();
            if (mod_ != 3) {
                // vmovss/vmovsd memory forms have no vvvv operand.
                std::string filtered;
                std::size_t i = 0;
                while (i < ops.size()) {
                    std::size_t j = ops.find(',', i);
                    if (j == std::string::npos) j = ops.size();
                    std::string tok = ops.substr(i, j - i);
                    if (tok[0] != 'H') filtered += (filtered.empty() ? "" : ",") + tok;
                    i = j + 1;
                }
                ops = filtered;
            }
        }
        if (!vex_) {
            // Legacy encodings have no vvvv operand.
            std::string filtered;
            std::size_t i = 0;
            while (i < ops.size()) {
                std::size_t j = ops.find(',', i);
                if (j == std::string::npos) j = ops.size();
                std::string tok = ops.substr(i, j - i);
                if (tok[0] != 'H') filtered += (filtered.empty() ? "" : ",") + tok;
                else if (tok.size() > 1 && tok[1] == 'x' && ops.find('U') != std::string::npos) {
                    // grp12-14 shift-by-immediate: the register operand is U.
                }
                i = j + 1;
            }
            ops = filtered;
        }

        if (needs_modrm(ops) || (flags_ & kModrm) || map == 2 || map == 3) read_modrm();

        // Name.
        std::string name;
        if (map == 0 && op >= 0x70 && op <= 0x7f) name = std::string("j") + kCond[op & 15];
        else if (map == 1 && op >= 0x80 && op <= 0x8f) name = std::string("j") + kCond[op & 15];
        else if (map == 1 && op >= 0x90 && op <= 0x9f) name = std::string("set") + kCond[op & 15];
        else if (map == 1 && op >= 0x40 && op <= 0x4f) name = std::string("cmov") + kCond[op & 15];
        else name = select_name(entry);
        if (map == 0 && op == 0xe3 && p67_) name = "jecxz";
        if (map == 0 && op >= 0xb8 && op <= 0xbf && rex_w_) name = "movabs";
        if (vex_ && (flags_ & kSse) && !(name.size() > 0 && name[0] == 'v')) name = "v" + name;
        if (name.empty()) throw Bad{};
        out_.mnemonic = name;

        emit_operands(ops);

        if (flags_ & kCmpPseudo) {
            static const char* preds[32] = {"eq",       "lt",       "le",       "unord",    "neq",      "nlt",
                                            "nle",      "ord",      "eq_uq",    "nge",      "ngt",      "false",
                                            "neq_oq",   "ge",       "gt",       "true",     "eq_os",    "lt_oq",
                                            "le_oq",    "unord_s",  "neq_us",   "nlt_uq",   "nle_uq",   "ord_s",
                                            "eq_us",    "nge_uq",   "ngt_uq",   "false_os", "neq_os",   "ge_oq",
                                            "gt_oq",    "true_us"};
            std::uint8_t imm = bytes_[pos_ - 1];
            int limit = vex_ ? 32 : 8;
            if (imm < limit) {
                std::string base = out_.mnemonic;  // "cmpps" / "vcmpps"
                std::size_t at = base.find("cmp") + 3;
                out_.mnemonic = base.substr(0, at) + preds[imm] + base.substr(at);
                out_.operands.pop_back();
            }
        }

        if (evex_ && !out_.operands.empty()) {
            if (evex_mask_) out_.operands[0].text += "{k" + std::to_string(evex_mask_) + "}";
            if (evex_z_) out_.operands[0].text += "{z}";
        }

        // String instruction prefixes.
        if ((flags_ & kString) && rep_) {
            const char* p = (flags_ & kStringZ) ? (rep_ == 0xf3 ? "repz " : "repnz ") : "rep ";
            out_.mnemonic = p + out_.mnemonic;
        }
        if (lock_) out_.mnemonic = "lock " + out_.mnemonic;

        out_.byte_length = static_cast<std::uint32_t>(pos_);
        if (pending_rip_operand_ >= 0) {
            auto& m = *out_.operands[pending_rip_operand_].memory;
            m.absolute = address_ + pos_ + static_cast<std::uint64_t>(m.displacement);
        }
        classify();
        return out_;
    } catch (const Bad&) {
        if (vex_opcode_end_) {
            // Well-formed VEX/EVEX prefix with an operand form we do not name: keep the length right.
            if (auto len = vex_fallback_length()) {
                Instruction unk;
                unk.address = address_;
                unk.mnemonic = "(unk)";
                unk.byte_length = *len;
                return unk;
            }
        }
        Instruction bad;
        bad.address = address_;
        bad.mnemonic = "(bad)";
        bad.byte_length = 1;
        return bad;
    }
}

}  // namespace

Instruction decode(std::span<const std::uint8_t> bytes, Address address) {
    if (bytes.empty()) {
        Instruction bad;
        bad.address = address;
        bad.mnemonic = "(bad)";
        return bad;
    }
    return Decoder(bytes, address).run();
}

std::vector<Instruction> sweep(std::span<const std::uint8_t> bytes, Address base) {
    std::vector<Instruction> out;
    std::size_t off = 0;
    while (off < bytes.size()) {
        Instruction insn = decode(bytes.subspan(off), base + off);
        off += insn.byte_length;
        out.push_back(std::move(insn));
    }
    return out;
}

std::string register_family(const std::string& name) {
    for (int i = 0; i < 16; ++i) {
        if (name == kGpr64[i] || name == kGpr32[i] || name == kGpr16[i] || name == kGpr8[i]) return kGpr64[i];
        if (i < 8 && name == kGpr8Legacy[i]) return i < 4 ? kGpr64[i] : kGpr64[i - 4];
    }
    if (name.size() > 3 && (name.rfind("ymm", 0) == 0 || name.rfind("zmm", 0) == 0)) return "xmm" + name.substr(3);
    return name;
}

}  // namespace asmlens::x86
