#include "asmlens/elf.hpp"

#include <fstream>
#include <iterator>

#include "asmlens/error.hpp"
#include "byte_reader.hpp"

namespace asmlens::elf {
namespace {

constexpr std::uint32_t kShtSymtab = 2;
constexpr std::uint32_t kShtNobits = 8;
constexpr std::uint32_t kShtDynsym = 11;
constexpr std::uint32_t kRX8664JumpSlot = 7;

[[noreturn]] void not_exe(const std::string& why) { throw Error(ErrorKind::NotAnExecutable, why); }

}  // namespace

ElfFile ElfFile::open(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::UnreadableFile, "cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(ErrorKind::UnreadableFile, "cannot read " + path);
    return from_bytes(std::move(bytes));
}

ElfFile ElfFile::from_bytes(std::vector<std::uint8_t> bytes) {
    ElfFile f;
    f.bytes_ = std::move(bytes);
    f.parse();
    return f;
}

void ElfFile::parse() {
    if (bytes_.size() < 64 || bytes_[0] != 0x7f || bytes_[1] != 'E' || bytes_[2] != 'L' || bytes_[3] != 'F')
        not_exe("bad ELF magic");
    if (bytes_[4] != 2) not_exe("not a 64-bit ELF file");
    if (bytes_[5] != 1) not_exe("not a little-endian ELF file");
    try {
        ByteReader r(bytes_);
        r.seek(16);
        std::uint16_t type = r.u16();
        std::uint16_t machine = r.u16();
        if (type != 2 && type != 3) not_exe("ELF file is not an executable or shared object");
        if (machine != 62) not_exe("ELF machine is not x86-64");
        r.u32();
        entry_ = r.u64();
        r.u64();  // phoff
        std::uint64_t shoff = r.u64();
        r.u32();
        r.u16();
        r.u16();
        r.u16();
        std::uint16_t shentsize = r.u16();
        std::uint16_t shnum = r.u16();
        std::uint16_t shstrndx = r.u16();
        if (shoff == 0 || shnum == 0) return;
        if (shentsize < 64) not_exe("bad section header size");
        for (std::uint16_t i = 0; i < shnum; ++i) {
            ByteReader h(bytes_, shoff + std::uint64_t{i} * shentsize);
            Section s;
            std::uint32_t name_off = h.u32();
            s.name = std::to_string(name_off);  // resolved below
            s.type = h.u32();
            s.flags = h.u64();
            s.addr = h.u64();
            s.offset = h.u64();
            s.size = h.u64();
            s.link = h.u32();
            s.info = h.u32();
            h.u64();
            s.entsize = h.u64();
            if (s.type != kShtNobits && s.size > 0) {
                if (s.offset + s.size > bytes_.size() || s.offset + s.size < s.offset) not_exe("section out of range");
                s.data = std::span<const std::uint8_t>(bytes_.data() + s.offset, s.size);
            }
            sections_.push_back(std::move(s));
        }
        if (shstrndx < sections_.size()) {
            auto strtab = sections_[shstrndx].data;
            for (auto& s : sections_) {
                std::uint64_t off = std::stoull(s.name);
                s.name = off < strtab.size() ? string_at(strtab, off) : "";
            }
        }
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::MalformedDebugInfo) not_exe("truncated ELF file");
        throw;
    }
}

const Section* ElfFile::section(std::string_view name) const {
    for (const auto& s : sections_)
        if (s.name == name) return &s;
    return nullptr;
}

std::span<const std::uint8_t> ElfFile::section_data(std::string_view name) const {
    const Section* s = section(name);
    return s ? s->data : std::span<const std::uint8_t>{};
}

std::vector<Symbol> ElfFile::read_symtab(const Section& sec) const {
    std::vector<Symbol> out;
    if (sec.link >= sections_.size() || sec.entsize < 24) return out;
    auto strtab = sections_[sec.link].data;
    std::size_t n = sec.data.size() / sec.entsize;
    for (std::size_t i = 1; i < n; ++i) {
        ByteReader r(sec.data, i * sec.entsize);
        Symbol s;
        std::uint32_t name = r.u32();
        std::uint8_t info = r.u8();
        r.u8();
        s.shndx = r.u16();
        s.value = r.u64();
        s.size = r.u64();
        s.type = info & 0xf;
        s.bind = info >> 4;
        if (name < strtab.size()) s.name = string_at(strtab, name);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Symbol> ElfFile::symbols() const {
    std::vector<Symbol> out;
    for (std::uint32_t want : {kShtSymtab, kShtDynsym})
        for (const auto& s : sections_)
            if (s.type == want) {
                auto syms = read_symtab(s);
                out.insert(out.end(), syms.begin(), syms.end());
            }
    return out;
}

std::map<Address, std::string> ElfFile::plt_stubs() const {
    std::map<Address, std::string> out;
    const Section* rela = section(".rela.plt");
    if (!rela || rela->link >= sections_.size() || rela->entsize < 24) return out;
    auto dynsyms = read_symtab(sections_[rela->link]);
    std::vector<std::string> names;
    std::size_t n = rela->data.size() / rela->entsize;
    for (std::size_t i = 0; i < n; ++i) {
        ByteReader r(rela->data, i * rela->entsize);
        r.u64();
        std::uint64_t info = r.u64();
        if ((info & 0xffffffff) != kRX8664JumpSlot) continue;
        std::uint64_t sym = info >> 32;
        names.push_back(sym >= 1 && sym - 1 < dynsyms.size() ? dynsyms[sym - 1].name : "");
    }
    // With IBT the callable stubs live in .plt.sec (one per slot); otherwise
    // .plt has a 16-byte header entry followed by one 16-byte stub per slot.
    if (const Section* sec = section(".plt.sec")) {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (!names[i].empty()) out[sec->addr + 16 * i] = names[i] + "@plt";
    } else if (const Section* plt = section(".plt")) {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (!names[i].empty()) out[plt->addr + 16 * (i + 1)] = names[i] + "@plt";
    }
    return out;
}

}  // namespace asmlens::elf
