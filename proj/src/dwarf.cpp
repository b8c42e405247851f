#include "asmlens/dwarf.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <unordered_map>

#include "asmlens/error.hpp"
#include "byte_reader.hpp"

namespace asmlens::dwarf {
namespace {

// Forms.
enum : std::uint64_t {
    FORM_addr = 0x01, FORM_block2 = 0x03, FORM_block4 = 0x04, FORM_data2 = 0x05, FORM_data4 = 0x06,
    FORM_data8 = 0x07, FORM_string = 0x08, FORM_block = 0x09, FORM_block1 = 0x0a, FORM_data1 = 0x0b,
    FORM_flag = 0x0c, FORM_sdata = 0x0d, FORM_strp = 0x0e, FORM_udata = 0x0f, FORM_ref_addr = 0x10,
    FORM_ref1 = 0x11, FORM_ref2 = 0x12, FORM_ref4 = 0x13, FORM_ref8 = 0x14, FORM_ref_udata = 0x15,
    FORM_indirect = 0x16, FORM_sec_offset = 0x17, FORM_exprloc = 0x18, FORM_flag_present = 0x19,
    FORM_strx = 0x1a, FORM_addrx = 0x1b, FORM_ref_sup4 = 0x1c, FORM_strp_sup = 0x1d, FORM_data16 = 0x1e,
    FORM_line_strp = 0x1f, FORM_ref_sig8 = 0x20, FORM_implicit_const = 0x21, FORM_loclistx = 0x22,
    FORM_rnglistx = 0x23, FORM_ref_sup8 = 0x24, FORM_strx1 = 0x25, FORM_strx2 = 0x26, FORM_strx3 = 0x27,
    FORM_strx4 = 0x28, FORM_addrx1 = 0x29, FORM_addrx2 = 0x2a, FORM_addrx3 = 0x2b, FORM_addrx4 = 0x2c,
    FORM_GNU_addr_index = 0x1f01, FORM_GNU_str_index = 0x1f02, FORM_GNU_ref_alt = 0x1f20,
    FORM_GNU_strp_alt = 0x1f21,
};

// Attributes.
enum : std::uint64_t {
    AT_location = 0x02, AT_name = 0x03, AT_stmt_list = 0x10, AT_low_pc = 0x11, AT_high_pc = 0x12,
    AT_comp_dir = 0x1b, AT_abstract_origin = 0x31, AT_frame_base = 0x40, AT_specification = 0x47,
    AT_ranges = 0x55, AT_str_offsets_base = 0x72, AT_addr_base = 0x73, AT_rnglists_base = 0x74,
    AT_loclists_base = 0x8c, AT_GNU_addr_base = 0x2133, AT_GNU_ranges_base = 0x2132,
};

// Tags.
enum : std::uint64_t {
    TAG_formal_parameter = 0x05, TAG_lexical_block = 0x0b, TAG_compile_unit = 0x11, TAG_inlined_subroutine = 0x1d,
    TAG_subprogram = 0x2e, TAG_variable = 0x34, TAG_partial_unit = 0x3c, TAG_skeleton_unit = 0x4a,
};

struct Sections {
    std::span<const std::uint8_t> info, abbrev, str, line_str, str_offsets, addr, rnglists, ranges, loclists, loc,
        line;

    explicit Sections(const elf::ElfFile& f)
        : info(f.section_data(".debug_info")),
          abbrev(f.section_data(".debug_abbrev")),
          str(f.section_data(".debug_str")),
          line_str(f.section_data(".debug_line_str")),
          str_offsets(f.section_data(".debug_str_offsets")),
          addr(f.section_data(".debug_addr")),
          rnglists(f.section_data(".debug_rnglists")),
          ranges(f.section_data(".debug_ranges")),
          loclists(f.section_data(".debug_loclists")),
          loc(f.section_data(".debug_loc")),
          line(f.section_data(".debug_line")) {}
};

struct AttrSpec {
    std::uint64_t at = 0;
    std::uint64_t form = 0;
    std::int64_t implicit = 0;
};

struct Abbrev {
    std::uint64_t tag = 0;
    bool children = false;
    std::vector<AttrSpec> attrs;
};

using AbbrevTable = std::unordered_map<std::uint64_t, Abbrev>;

AbbrevTable parse_abbrevs(std::span<const std::uint8_t> sec, std::uint64_t offset) {
    AbbrevTable table;
    ByteReader r(sec, offset);
    for (;;) {
        std::uint64_t code = r.uleb();
        if (code == 0) break;
        Abbrev a;
        a.tag = r.uleb();
        a.children = r.u8() != 0;
        for (;;) {
            AttrSpec s;
            s.at = r.uleb();
            s.form = r.uleb();
            if (s.at == 0 && s.form == 0) break;
            if (s.form == FORM_implicit_const) s.implicit = r.sleb();
            a.attrs.push_back(s);
        }
        table.emplace(code, std::move(a));
    }
    return table;
}

struct Unit {
    std::uint64_t offset = 0;
    std::uint64_t end = 0;
    int version = 0;
    int addr_size = 8;
    int offset_size = 4;
    std::uint64_t abbrev_offset = 0;
    std::uint64_t die_start = 0;
    std::uint64_t str_offsets_base = 0;
    std::uint64_t addr_base = 0;
    std::uint64_t rnglists_base = 0;
    std::uint64_t loclists_base = 0;
    Address base_address = 0;
    std::string comp_dir;
    std::string name;
    std::optional<std::uint64_t> stmt_list;
};

enum class Cls { Const, Signed, Addr, AddrIndex, Ref, String, Strp, LineStrp, StrIndex, Block, SecOffset, LocIndex,
                 RngIndex, Flag, Other };

struct Value {
    Cls cls = Cls::Other;
    std::uint64_t form = 0;
    std::uint64_t u = 0;
    std::int64_t s = 0;
    std::string str;
    std::span<const std::uint8_t> block;
};

Value read_form(ByteReader& r, std::uint64_t form, const Unit& u, std::int64_t implicit) {
    Value v;
    v.form = form;
    switch (form) {
    case FORM_addr: v.cls = Cls::Addr; v.u = r.uint(u.addr_size); break;
    case FORM_block2: v.cls = Cls::Block; v.block = r.bytes(r.u16()); break;
    case FORM_block4: v.cls = Cls::Block; v.block = r.bytes(r.u32()); break;
    case FORM_data2: v.cls = Cls::Const; v.u = r.u16(); break;
    case FORM_data4: v.cls = Cls::Const; v.u = r.u32(); break;
    case FORM_data8: v.cls = Cls::Const; v.u = r.u64(); break;
    case FORM_data16: v.cls = Cls::Other; r.skip(16); break;
    case FORM_string: v.cls = Cls::String; v.str = r.cstr(); break;
    case FORM_block:
    case FORM_exprloc: v.cls = Cls::Block; v.block = r.bytes(r.uleb()); break;
    case FORM_block1: v.cls = Cls::Block; v.block = r.bytes(r.u8()); break;
    case FORM_data1: v.cls = Cls::Const; v.u = r.u8(); break;
    case FORM_flag: v.cls = Cls::Flag; v.u = r.u8(); break;
    case FORM_flag_present: v.cls = Cls::Flag; v.u = 1; break;
    case FORM_sdata: v.cls = Cls::Signed; v.s = r.sleb(); v.u = static_cast<std::uint64_t>(v.s); break;
    case FORM_udata: v.cls = Cls::Const; v.u = r.uleb(); break;
    case FORM_strp: v.cls = Cls::Strp; v.u = r.uint(u.offset_size); break;
    case FORM_line_strp: v.cls = Cls::LineStrp; v.u = r.uint(u.offset_size); break;
    case FORM_strp_sup:
    case FORM_GNU_strp_alt: v.cls = Cls::Other; r.uint(u.offset_size); break;
    case FORM_ref_addr: v.cls = Cls::Ref; v.u = r.uint(u.version <= 2 ? u.addr_size : u.offset_size); break;
    case FORM_ref1: v.cls = Cls::Ref; v.u = u.offset + r.u8(); break;
    case FORM_ref2: v.cls = Cls::Ref; v.u = u.offset + r.u16(); break;
    case FORM_ref4: v.cls = Cls::Ref; v.u = u.offset + r.u32(); break;
    case FORM_ref8: v.cls = Cls::Ref; v.u = u.offset + r.u64(); break;
    case FORM_ref_udata: v.cls = Cls::Ref; v.u = u.offset + r.uleb(); break;
    case FORM_ref_sup4: v.cls = Cls::Other; r.u32(); break;
    case FORM_ref_sup8:
    case FORM_ref_sig8: v.cls = Cls::Other; r.u64(); break;
    case FORM_GNU_ref_alt: v.cls = Cls::Other; r.uint(u.offset_size); break;
    case FORM_indirect: return read_form(r, r.uleb(), u, implicit);
    case FORM_sec_offset: v.cls = Cls::SecOffset; v.u = r.uint(u.offset_size); break;
    case FORM_strx:
    case FORM_GNU_str_index: v.cls = Cls::StrIndex; v.u = r.uleb(); break;
    case FORM_strx1: v.cls = Cls::StrIndex; v.u = r.u8(); break;
    case FORM_strx2: v.cls = Cls::StrIndex; v.u = r.u16(); break;
    case FORM_strx3: v.cls = Cls::StrIndex; v.u = r.uint(3); break;
    case FORM_strx4: v.cls = Cls::StrIndex; v.u = r.u32(); break;
    case FORM_addrx:
    case FORM_GNU_addr_index: v.cls = Cls::AddrIndex; v.u = r.uleb(); break;
    case FORM_addrx1: v.cls = Cls::AddrIndex; v.u = r.u8(); break;
    case FORM_addrx2: v.cls = Cls::AddrIndex; v.u = r.u16(); break;
    case FORM_addrx3: v.cls = Cls::AddrIndex; v.u = r.uint(3); break;
    case FORM_addrx4: v.cls = Cls::AddrIndex; v.u = r.u32(); break;
    case FORM_implicit_const: v.cls = Cls::Signed; v.s = implicit; v.u = static_cast<std::uint64_t>(implicit); break;
    case FORM_loclistx: v.cls = Cls::LocIndex; v.u = r.uleb(); break;
    case FORM_rnglistx: v.cls = Cls::RngIndex; v.u = r.uleb(); break;
    default: throw Error(ErrorKind::MalformedDebugInfo, "unknown DWARF form " + std::to_string(form));
    }
    return v;
}

class UnitContext {
public:
    UnitContext(const Sections& s, Unit& u) : s_(s), u_(u) {}

    std::optional<std::string> string(const Value& v) const {
        switch (v.cls) {
        case Cls::String: return v.str;
        case Cls::Strp: return string_at(s_.str, v.u);
        case Cls::LineStrp: return string_at(s_.line_str, v.u);
        case Cls::StrIndex: {
            std::uint64_t base = u_.str_offsets_base ? u_.str_offsets_base : 8;
            ByteReader r(s_.str_offsets, base + v.u * u_.offset_size);
            return string_at(s_.str, r.uint(u_.offset_size));
        }
        default: return std::nullopt;
        }
    }

    Address address_index(std::uint64_t index) const {
        std::uint64_t base = u_.addr_base ? u_.addr_base : 8;
        ByteReader r(s_.addr, base + index * u_.addr_size);
        return r.uint(u_.addr_size);
    }

    std::optional<Address> address(const Value& v) const {
        if (v.cls == Cls::Addr) return v.u;
        if (v.cls == Cls::AddrIndex) return address_index(v.u);
        return std::nullopt;
    }

    std::vector<AddressRange> ranges(const Value& v) const {
        std::vector<AddressRange> out;
        if (u_.version >= 5 || v.cls == Cls::RngIndex) {
            std::uint64_t off = v.u;
            if (v.cls == Cls::RngIndex) {
                ByteReader idx(s_.rnglists, u_.rnglists_base + v.u * u_.offset_size);
                off = u_.rnglists_base + idx.uint(u_.offset_size);
            }
            read_rnglist(off, out);
        } else {
            ByteReader r(s_.ranges, v.u);
            Address base = u_.base_address;
            const std::uint64_t max = u_.addr_size == 8 ? ~std::uint64_t{0} : 0xffffffffu;
            for (;;) {
                std::uint64_t a = r.uint(u_.addr_size);
                std::uint64_t b = r.uint(u_.addr_size);
                if (a == 0 && b == 0) break;
                if (a == max) {
                    base = b;
                    continue;
                }
                if (b > a) out.push_back({base + a, base + b});
            }
        }
        return out;
    }

    // (range, expression) pairs of a location list.
    std::vector<std::pair<AddressRange, std::span<const std::uint8_t>>> location_list(const Value& v) const {
        std::vector<std::pair<AddressRange, std::span<const std::uint8_t>>> out;
        if (u_.version >= 5 || v.cls == Cls::LocIndex) {
            std::uint64_t off = v.u;
            if (v.cls == Cls::LocIndex) {
                ByteReader idx(s_.loclists, u_.loclists_base + v.u * u_.offset_size);
                off = u_.loclists_base + idx.uint(u_.offset_size);
            }
            ByteReader r(s_.loclists, off);
            Address base = u_.base_address;
            for (;;) {
                std::uint8_t kind = r.u8();
                if (kind == 0) break;
                std::optional<AddressRange> range;
                switch (kind) {
                case 1: base = address_index(r.uleb()); continue;
                case 2: {
                    Address a = address_index(r.uleb());
                    range = AddressRange{a, address_index(r.uleb())};
                    break;
                }
                case 3: {
                    Address a = address_index(r.uleb());
                    range = AddressRange{a, a + r.uleb()};
                    break;
                }
                case 4: {
                    std::uint64_t a = r.uleb();
                    range = AddressRange{base + a, base + r.uleb()};
                    break;
                }
                case 5: range = std::nullopt; break;  // default location
                case 6: base = r.uint(u_.addr_size); continue;
                case 7: {
                    Address a = r.uint(u_.addr_size);
                    range = AddressRange{a, r.uint(u_.addr_size)};
                    break;
                }
                case 8: {
                    Address a = r.uint(u_.addr_size);
                    range = AddressRange{a, a + r.uleb()};
                    break;
                }
                default: throw Error(ErrorKind::MalformedDebugInfo, "bad location list entry");
                }
                auto expr = r.bytes(r.uleb());
                if (range && range->end > range->start) out.emplace_back(*range, expr);
            }
        } else {
            ByteReader r(s_.loc, v.u);
            Address base = u_.base_address;
            for (;;) {
                std::uint64_t a = r.uint(u_.addr_size);
                std::uint64_t b = r.uint(u_.addr_size);
                if (a == 0 && b == 0) break;
                if (a == ~std::uint64_t{0}) {
                    base = b;
                    continue;
                }
                auto expr = r.bytes(r.u16());
                if (b > a) out.emplace_back(AddressRange{base + a, base + b}, expr);
            }
        }
        return out;
    }

private:
    const Sections& s_;
    Unit& u_;

    void read_rnglist(std::uint64_t off, std::vector<AddressRange>& out) const {
        ByteReader r(s_.rnglists, off);
        Address base = u_.base_address;
        for (;;) {
            std::uint8_t kind = r.u8();
            AddressRange range;
            switch (kind) {
            case 0: return;
            case 1: base = address_index(r.uleb()); continue;
            case 2: {
                Address a = address_index(r.uleb());
                range = {a, address_index(r.uleb())};
                break;
            }
            case 3: {
                Address a = address_index(r.uleb());
                range = {a, a + r.uleb()};
                break;
            }
            case 4: {
                std::uint64_t a = r.uleb();
                range = {base + a, base + r.uleb()};
                break;
            }
            case 5: base = r.uint(u_.addr_size); continue;
            case 6: {
                Address a = r.uint(u_.addr_size);
                range = {a, r.uint(u_.addr_size)};
                break;
            }
            case 7: {
                Address a = r.uint(u_.addr_size);
                range = {a, a + r.uleb()};
                break;
            }
            default: throw Error(ErrorKind::MalformedDebugInfo, "bad range list entry");
            }
            if (range.end > range.start) out.push_back(range);
        }
    }
};

using Attrs = std::vector<std::pair<std::uint64_t, Value>>;

const Value* find(const Attrs& attrs, std::uint64_t at) {
    for (const auto& [a, v] : attrs)
        if (a == at) return &v;
    return nullptr;
}

// Reads the unit header at `offset`; returns false at the end of the section.
bool read_unit_header(std::span<const std::uint8_t> info, std::uint64_t offset, Unit& u) {
    if (offset >= info.size()) return false;
    ByteReader r(info, offset);
    u = Unit{};
    u.offset = offset;
    std::uint64_t len = r.u32();
    if (len == 0xffffffff) {
        u.offset_size = 8;
        len = r.u64();
    }
    u.end = r.pos() + len;
    if (u.end > info.size()) throw Error(ErrorKind::MalformedDebugInfo, "unit extends past .debug_info");
    u.version = r.u16();
    if (u.version < 2 || u.version > 5) throw Error(ErrorKind::MalformedDebugInfo, "unsupported DWARF version");
    std::uint8_t unit_type = 1;
    if (u.version >= 5) {
        unit_type = r.u8();
        u.addr_size = r.u8();
        u.abbrev_offset = r.uint(u.offset_size);
        if (unit_type == 4 || unit_type == 5) r.u64();  // skeleton / split_compile dwo id
        if (unit_type == 2 || unit_type == 6) {         // type units
            r.u64();
            r.uint(u.offset_size);
        }
    } else {
        u.abbrev_offset = r.uint(u.offset_size);
        u.addr_size = r.u8();
    }
    u.die_start = r.pos();
    return true;
}

struct Die {
    std::uint64_t offset = 0;
    std::uint64_t tag = 0;
    bool children = false;
    Attrs attrs;
};

// Visits every DIE of every unit. `visit(unit, ctx, die, depth)`.
template <class F>
void walk(const Sections& s, F&& visit) {
    std::unordered_map<std::uint64_t, AbbrevTable> abbrev_cache;
    std::uint64_t off = 0;
    Unit u;
    while (read_unit_header(s.info, off, u)) {
        auto it = abbrev_cache.find(u.abbrev_offset);
        if (it == abbrev_cache.end()) it = abbrev_cache.emplace(u.abbrev_offset, parse_abbrevs(s.abbrev, u.abbrev_offset)).first;
        const AbbrevTable& abbrevs = it->second;
        UnitContext ctx(s, u);
        ByteReader r(s.info.first(u.end), u.die_start);
        int depth = 0;
        bool first = true;
        while (!r.at_end()) {
            Die die;
            die.offset = r.pos();
            std::uint64_t code = r.uleb();
            if (code == 0) {
                if (--depth <= 0) break;
                continue;
            }
            auto a = abbrevs.find(code);
            if (a == abbrevs.end()) throw Error(ErrorKind::MalformedDebugInfo, "unknown abbreviation code");
            die.tag = a->second.tag;
            die.children = a->second.children;
            for (const auto& spec : a->second.attrs) die.attrs.emplace_back(spec.at, read_form(r, spec.form, u, spec.implicit));
            if (first) {
                first = false;
                for (const auto& [at, v] : die.attrs) {
                    if (at == AT_str_offsets_base) u.str_offsets_base = v.u;
                    else if (at == AT_addr_base || at == AT_GNU_addr_base) u.addr_base = v.u;
                    else if (at == AT_rnglists_base) u.rnglists_base = v.u;
                    else if (at == AT_loclists_base) u.loclists_base = v.u;
                    else if (at == AT_stmt_list) u.stmt_list = v.u;
                }
                if (const Value* lp = find(die.attrs, AT_low_pc))
                    if (auto a2 = ctx.address(*lp)) u.base_address = *a2;
                if (const Value* cd = find(die.attrs, AT_comp_dir)) u.comp_dir = ctx.string(*cd).value_or("");
                if (const Value* nm = find(die.attrs, AT_name)) u.name = ctx.string(*nm).value_or("");
            }
            visit(u, ctx, die, depth);
            if (die.children) ++depth;
            else if (depth == 0) break;
        }
        off = u.end;
    }
}

std::string join_path(const std::string& dir, const std::string& name) {
    namespace fs = std::filesystem;
    fs::path p(name);
    if (!p.is_absolute() && !dir.empty()) p = fs::path(dir) / p;
    return p.lexically_normal().string();
}

// ---------------------------------------------------------------------------
// Line program

struct EntryFormat {
    std::uint64_t content = 0;
    std::uint64_t form = 0;
};

std::vector<LineSequence> read_line_program(const Sections& s, const Unit& cu, std::uint64_t offset,
                                            std::vector<std::string>& all_files) {
    std::vector<LineSequence> out;
    ByteReader r(s.line, offset);
    Unit u = cu;  // form reading uses offset size / address size
    std::uint64_t len = r.u32();
    u.offset_size = 4;
    if (len == 0xffffffff) {
        u.offset_size = 8;
        len = r.u64();
    }
    std::uint64_t end = r.pos() + len;
    if (end > s.line.size()) throw Error(ErrorKind::MalformedDebugInfo, "line program past end of section");
    int version = r.u16();
    if (version < 2 || version > 5) throw Error(ErrorKind::MalformedDebugInfo, "unsupported line table version");
    if (version >= 5) {
        u.addr_size = r.u8();
        r.u8();  // segment selector size
    }
    std::uint64_t header_len = r.uint(u.offset_size);
    std::uint64_t program_start = r.pos() + header_len;
    int min_inst = r.u8();
    if (version >= 4) r.u8();  // max ops per instruction
    bool default_is_stmt = r.u8() != 0;
    (void)default_is_stmt;
    int line_base = r.s8();
    int line_range = r.u8();
    int opcode_base = r.u8();
    if (line_range == 0) throw Error(ErrorKind::MalformedDebugInfo, "line_range is zero");
    std::vector<int> std_lengths(opcode_base > 0 ? opcode_base : 1, 0);
    for (int i = 1; i < opcode_base; ++i) std_lengths[i] = r.u8();

    std::vector<std::string> dirs;
    std::vector<std::string> files;  // already joined
    UnitContext ctx(s, u);
    if (version >= 5) {
        auto read_formats = [&] {
            std::vector<EntryFormat> f(r.u8());
            for (auto& e : f) {
                e.content = r.uleb();
                e.form = r.uleb();
            }
            return f;
        };
        auto dir_formats = read_formats();
        std::uint64_t ndirs = r.uleb();
        for (std::uint64_t i = 0; i < ndirs; ++i) {
            std::string path;
            for (const auto& f : dir_formats) {
                Value v = read_form(r, f.form, u, 0);
                if (f.content == 1) path = ctx.string(v).value_or("");
            }
            dirs.push_back(i == 0 ? join_path(cu.comp_dir, path) : join_path(dirs.empty() ? cu.comp_dir : dirs[0], path));
        }
        auto file_formats = read_formats();
        std::uint64_t nfiles = r.uleb();
        for (std::uint64_t i = 0; i < nfiles; ++i) {
            std::string name;
            std::uint64_t dir = 0;
            for (const auto& f : file_formats) {
                Value v = read_form(r, f.form, u, 0);
                if (f.content == 1) name = ctx.string(v).value_or("");
                else if (f.content == 2) dir = v.u;
            }
            files.push_back(join_path(dir < dirs.size() ? dirs[dir] : cu.comp_dir, name));
        }
    } else {
        dirs.push_back(cu.comp_dir);
        for (;;) {
            std::string d = r.cstr();
            if (d.empty()) break;
            dirs.push_back(join_path(cu.comp_dir, d));
        }
        files.emplace_back();  // index 0 unused before v5
        for (;;) {
            std::string name = r.cstr();
            if (name.empty()) break;
            std::uint64_t dir = r.uleb();
            r.uleb();
            r.uleb();
            files.push_back(join_path(dir < dirs.size() ? dirs[dir] : cu.comp_dir, name));
        }
    }

    for (const auto& f : files)
        if (!f.empty()) all_files.push_back(f);
    r.seek(program_start);
    ByteReader p(s.line.first(end), program_start);
    Address address = 0;
    std::uint64_t file = 1;
    std::int64_t line = 1;
    LineSequence seq;
    auto emit = [&] {
        if (line > 0 && file < files.size())
            seq.rows.push_back({address, files[file], static_cast<std::uint32_t>(line)});
    };
    auto reset = [&] {
        address = 0;
        file = 1;
        line = 1;
        seq = LineSequence{};
    };
    while (!p.at_end()) {
        int op = p.u8();
        if (op >= opcode_base) {
            int adj = op - opcode_base;
            address += static_cast<Address>((adj / line_range) * min_inst);
            line += line_base + adj % line_range;
            emit();
            continue;
        }
        switch (op) {
        case 0: {
            std::uint64_t n = p.uleb();
            std::size_t next = p.pos() + n;
            if (n == 0) break;
            int sub = p.u8();
            if (sub == 1) {
                seq.end = address;
                if (!seq.rows.empty()) out.push_back(std::move(seq));
                reset();
            } else if (sub == 2) {
                address = p.uint(n - 1);
            } else if (sub == 3) {
                std::string name = p.cstr();
                std::uint64_t dir = p.uleb();
                files.push_back(join_path(dir < dirs.size() ? dirs[dir] : cu.comp_dir, name));
                all_files.push_back(files.back());
            }
            p.seek(next);
            break;
        }
        case 1: emit(); break;
        case 2: address += p.uleb() * min_inst; break;
        case 3: line += p.sleb(); break;
        case 4: file = p.uleb(); break;
        case 5: p.uleb(); break;
        case 6:
        case 7:
        case 10:
        case 11: break;
        case 8: address += static_cast<Address>(((255 - opcode_base) / line_range) * min_inst); break;
        case 9: address += p.u16(); break;
        case 12: p.uleb(); break;
        default:
            for (int i = 0; i < std_lengths[op]; ++i) p.uleb();
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Variables

struct Location {
    VariableLocation::Kind kind = VariableLocation::Kind::Register;
    std::string reg;
    std::int64_t offset = 0;
    Address global = 0;
    bool frame_relative = false;  // DW_OP_fbreg; offset still needs the frame base
};

// Decodes an expression consisting of exactly one simple location operation.
std::optional<Location> simple_location(std::span<const std::uint8_t> expr, const UnitContext& ctx, int addr_size) {
    if (expr.empty()) return std::nullopt;
    try {
        ByteReader r(expr);
        std::uint8_t op = r.u8();
        Location loc;
        if (op >= 0x50 && op <= 0x6f) {
            loc.kind = VariableLocation::Kind::Register;
            loc.reg = register_name(op - 0x50);
        } else if (op == 0x90) {
            loc.kind = VariableLocation::Kind::Register;
            loc.reg = register_name(static_cast<unsigned>(r.uleb()));
        } else if (op >= 0x70 && op <= 0x8f) {
            loc.kind = VariableLocation::Kind::FrameSlot;
            loc.reg = register_name(op - 0x70);
            loc.offset = r.sleb();
        } else if (op == 0x92) {
            loc.kind = VariableLocation::Kind::FrameSlot;
            loc.reg = register_name(static_cast<unsigned>(r.uleb()));
            loc.offset = r.sleb();
        } else if (op == 0x91) {
            loc.kind = VariableLocation::Kind::FrameSlot;
            loc.frame_relative = true;
            loc.offset = r.sleb();
        } else if (op == 0x03) {
            loc.kind = VariableLocation::Kind::Global;
            loc.global = r.uint(addr_size);
        } else if (op == 0xa1 || op == 0xfb) {
            loc.kind = VariableLocation::Kind::Global;
            loc.global = ctx.address_index(r.uleb());
        } else {
            return std::nullopt;
        }
        if (!r.at_end()) return std::nullopt;
        if (loc.kind != VariableLocation::Kind::Global && !loc.frame_relative && loc.reg.empty()) return std::nullopt;
        return loc;
    } catch (const Error&) {
        return std::nullopt;
    }
}

struct FrameBase {
    enum class Kind { None, Register, Cfa } kind = Kind::None;
    std::string reg;
    std::int64_t offset = 0;
};

FrameBase frame_base_of(const Value* v, const UnitContext& ctx, int addr_size) {
    FrameBase fb;
    if (!v || v->cls != Cls::Block || v->block.empty()) return fb;
    if (v->block.size() == 1 && v->block[0] == 0x9c) {
        fb.kind = FrameBase::Kind::Cfa;
        return fb;
    }
    if (auto loc = simple_location(v->block, ctx, addr_size)) {
        if (loc->kind == VariableLocation::Kind::Register) {
            fb.kind = FrameBase::Kind::Register;
            fb.reg = loc->reg;
        } else if (loc->kind == VariableLocation::Kind::FrameSlot && !loc->frame_relative) {
            // base register plus constant: the frame base value is reg+offset
            fb.kind = FrameBase::Kind::Register;
            fb.reg = loc->reg;
            fb.offset = loc->offset;
        }
    }
    return fb;
}

struct Scope {
    int depth = 0;
    std::uint64_t tag = 0;
    std::vector<AddressRange> ranges;
    FrameBase frame_base;
    Address entry = 0;
};

struct PendingVariable {
    std::optional<std::string> name;
    std::optional<std::uint64_t> origin;
    std::vector<std::pair<AddressRange, Location>> pieces;
    FrameBase frame_base;
    Address function_entry = 0;
};

std::vector<AddressRange> intersect(const std::vector<AddressRange>& a, const AddressRange& b) {
    std::vector<AddressRange> out;
    for (const auto& r : a) {
        Address lo = std::max(r.start, b.start);
        Address hi = std::min(r.end, b.end);
        if (lo < hi) out.push_back({lo, hi});
    }
    return out;
}

}  // namespace

std::string register_name(unsigned n) {
    static const char* names[17] = {"rax", "rdx", "rcx", "rbx", "rsi", "rdi", "rbp", "rsp", "r8",
                                    "r9",  "r10", "r11", "r12", "r13", "r14", "r15", "rip"};
    if (n < 17) return names[n];
    if (n >= 17 && n <= 32) return "xmm" + std::to_string(n - 17);
    return "";
}

LineTables read_line_tables(const elf::ElfFile& elf) {
    Sections s(elf);
    LineTables out;
    if (s.line.empty()) return out;
    out.present = true;
    auto append = [&](std::vector<LineSequence>&& seqs) {
        out.sequences.insert(out.sequences.end(), std::make_move_iterator(seqs.begin()),
                             std::make_move_iterator(seqs.end()));
    };
    if (!s.info.empty()) {
        std::vector<std::pair<Unit, std::uint64_t>> units;
        std::vector<std::uint64_t> seen;
        walk(s, [&](const Unit& u, const UnitContext&, const Die&, int depth) {
            if (depth == 0 && u.stmt_list && std::find(seen.begin(), seen.end(), *u.stmt_list) == seen.end()) {
                seen.push_back(*u.stmt_list);
                units.emplace_back(u, *u.stmt_list);
            }
        });
        for (const auto& [u, off] : units) append(read_line_program(s, u, off, out.files));
    } else {
        // No .debug_info: walk the line programs back to back.
        Unit u;
        std::uint64_t off = 0;
        while (off < s.line.size()) {
            ByteReader r(s.line, off);
            std::uint64_t len = r.u32();
            if (len == 0xffffffff) len = r.u64();
            std::uint64_t next = r.pos() + len;
            append(read_line_program(s, u, off, out.files));
            off = next;
        }
    }
    std::sort(out.files.begin(), out.files.end());
    out.files.erase(std::unique(out.files.begin(), out.files.end()), out.files.end());
    return out;
}

std::vector<VariableLocation> read_variables(const elf::ElfFile& elf, const FramePointerQuery& has_frame_pointer) {
    Sections s(elf);
    std::vector<VariableLocation> out;
    if (s.info.empty() || s.abbrev.empty()) return out;

    std::unordered_map<std::uint64_t, std::string> names;
    std::unordered_map<std::uint64_t, std::uint64_t> origins;
    std::vector<PendingVariable> pending;
    std::vector<Scope> scopes;

    walk(s, [&](const Unit& u, const UnitContext& ctx, const Die& die, int depth) {
        while (!scopes.empty() && scopes.back().depth >= depth) scopes.pop_back();
        if (const Value* n = find(die.attrs, AT_name)) {
            if (auto str = ctx.string(*n)) names[die.offset] = *str;
        }
        const Value* origin = find(die.attrs, AT_abstract_origin);
        if (!origin) origin = find(die.attrs, AT_specification);
        if (origin && origin->cls == Cls::Ref) origins[die.offset] = origin->u;

        if (die.tag == TAG_subprogram || die.tag == TAG_lexical_block || die.tag == TAG_inlined_subroutine) {
            Scope sc;
            sc.depth = depth;
            sc.tag = die.tag;
            if (const Value* r = find(die.attrs, AT_ranges)) {
                sc.ranges = ctx.ranges(*r);
            } else if (const Value* lo = find(die.attrs, AT_low_pc)) {
                if (auto a = ctx.address(*lo)) {
                    const Value* hi = find(die.attrs, AT_high_pc);
                    if (hi) {
                        Address end = (hi->cls == Cls::Const || hi->cls == Cls::Signed) ? *a + hi->u
                                                                                          : ctx.address(*hi).value_or(*a);
                        if (end > *a) sc.ranges.push_back({*a, end});
                    }
                }
            }
            if (die.tag == TAG_subprogram) {
                sc.frame_base = frame_base_of(find(die.attrs, AT_frame_base), ctx, u.addr_size);
                sc.entry = sc.ranges.empty() ? 0 : sc.ranges.front().start;
                if (const Value* lo = find(die.attrs, AT_low_pc))
                    if (auto a = ctx.address(*lo)) sc.entry = *a;
            } else if (!scopes.empty()) {
                sc.frame_base = scopes.back().frame_base;
                sc.entry = scopes.back().entry;
            }
            if (die.children) scopes.push_back(std::move(sc));
            return;
        }
        if (die.tag != TAG_variable && die.tag != TAG_formal_parameter) return;
        const Value* loc = find(die.attrs, AT_location);
        if (!loc) return;

        PendingVariable pv;
        if (const Value* n = find(die.attrs, AT_name)) pv.name = ctx.string(*n);
        if (origin && origin->cls == Cls::Ref) pv.origin = origin->u;

        // Innermost enclosing scope that has address ranges.
        const Scope* scope = nullptr;
        for (auto it = scopes.rbegin(); it != scopes.rend(); ++it)
            if (!it->ranges.empty()) {
                scope = &*it;
                break;
            }
        if (!scopes.empty()) {
            pv.frame_base = scopes.back().frame_base;
            pv.function_entry = scopes.back().entry;
        }

        bool is_list = loc->cls == Cls::SecOffset || loc->cls == Cls::LocIndex ||
                       (u.version < 4 && loc->cls == Cls::Const && (loc->form == FORM_data4 || loc->form == FORM_data8));
        if (loc->cls == Cls::Block) {
            auto l = simple_location(loc->block, ctx, u.addr_size);
            if (!l) return;
            if (scope) {
                for (const auto& r : scope->ranges) pv.pieces.emplace_back(r, *l);
            } else if (l->kind == VariableLocation::Kind::Global) {
                pv.pieces.emplace_back(AddressRange{0, ~Address{0}}, *l);
            }
        } else if (is_list) {
            try {
                for (const auto& [range, expr] : ctx.location_list(*loc)) {
                    auto l = simple_location(expr, ctx, u.addr_size);
                    if (!l) continue;
                    if (scope) {
                        for (const auto& r : intersect(scope->ranges, range)) pv.pieces.emplace_back(r, *l);
                    } else {
                        pv.pieces.emplace_back(range, *l);
                    }
                }
            } catch (const Error&) {
                return;
            }
        }
        if (!pv.pieces.empty()) pending.push_back(std::move(pv));
    });

    auto resolve_name = [&](const PendingVariable& pv) -> std::optional<std::string> {
        if (pv.name) return pv.name;
        std::optional<std::uint64_t> cur = pv.origin;
        for (int hops = 0; cur && hops < 8; ++hops) {
            if (auto it = names.find(*cur); it != names.end()) return it->second;
            auto o = origins.find(*cur);
            cur = o == origins.end() ? std::nullopt : std::optional<std::uint64_t>(o->second);
        }
        return std::nullopt;
    };

    for (const auto& pv : pending) {
        auto name = resolve_name(pv);
        if (!name || name->empty()) continue;
        for (const auto& [range, l] : pv.pieces) {
            VariableLocation v;
            v.name = *name;
            v.range = range;
            v.kind = l.kind;
            if (l.kind == VariableLocation::Kind::Register) {
                v.register_name = l.reg;
            } else if (l.kind == VariableLocation::Kind::Global) {
                v.global_address = l.global;
            } else if (!l.frame_relative) {
                v.register_name = l.reg;
                v.offset = l.offset;
            } else {
                switch (pv.frame_base.kind) {
                case FrameBase::Kind::None: continue;
                case FrameBase::Kind::Register:
                    v.register_name = pv.frame_base.reg;
                    v.offset = pv.frame_base.offset + l.offset;
                    break;
                case FrameBase::Kind::Cfa:
                    // With a push rbp / mov rbp,rsp prologue the CFA is rbp+16 in the body.
                    if (!has_frame_pointer || !has_frame_pointer(pv.function_entry)) continue;
                    v.register_name = "rbp";
                    v.offset = 16 + l.offset;
                    break;
                }
            }
            out.push_back(std::move(v));
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace asmlens::dwarf
