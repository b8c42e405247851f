#pragma once

// Minimal ELF64 little-endian reader: sections, symbols and PLT stub names.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asmlens/model.hpp"

namespace asmlens::elf {

struct Section {
    std::string name;
    std::uint32_t type = 0;
    std::uint64_t flags = 0;
    Address addr = 0;
    std::uint64_t offset = 0;
    std::uint64_t size = 0;
    std::uint32_t link = 0;
    std::uint32_t info = 0;
    std::uint64_t entsize = 0;
    std::span<const std::uint8_t> data;  // empty for SHT_NOBITS

    bool executable() const { return flags & 0x4; }
};

struct Symbol {
    std::string name;
    Address value = 0;
    std::uint64_t size = 0;
    std::uint8_t type = 0;  // STT_*
    std::uint8_t bind = 0;  // STB_*
    std::uint16_t shndx = 0;
};

inline constexpr std::uint8_t kSymFunc = 2;

class ElfFile {
public:
    // Throws Error{UnreadableFile} or Error{NotAnExecutable}.
    static ElfFile open(const std::string& path);
    static ElfFile from_bytes(std::vector<std::uint8_t> bytes);

    const std::vector<Section>& sections() const { return sections_; }
    const Section* section(std::string_view name) const;
    std::span<const std::uint8_t> section_data(std::string_view name) const;

    // .symtab followed by .dynsym.
    std::vector<Symbol> symbols() const;
    // Stub address -> "name@plt".
    std::map<Address, std::string> plt_stubs() const;

    Address entry() const { return entry_; }

private:
    std::vector<std::uint8_t> bytes_;
    std::vector<Section> sections_;
    Address entry_ = 0;

    void parse();
    std::vector<Symbol> read_symtab(const Section& sec) const;
};

}  // namespace asmlens::elf
