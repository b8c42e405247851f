#include "asmlens/ingest.hpp"

#include <cxxabi.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "asmlens/cfg.hpp"
#include "asmlens/error.hpp"
#include "asmlens/loops.hpp"
#include "asmlens/x86_decoder.hpp"

namespace asmlens::ingest {
namespace fs = std::filesystem;

namespace {

std::string demangle(const std::string& name) {
    if (name.size() < 2 || name[0] != '_' || name[1] != 'Z') return name;
    int status = 0;
    char* out = abi::__cxa_demangle(name.c_str(), nullptr, nullptr, &status);
    if (status != 0 || !out) return name;
    std::string s(out);
    std::free(out);
    return s;
}

// "foo.cold" / "foo.cold.12" -> "foo"
std::optional<std::string> cold_parent(const std::string& name) {
    auto pos = name.find(".cold");
    if (pos == std::string::npos || pos == 0) return std::nullopt;
    std::string rest = name.substr(pos + 5);
    if (!rest.empty() && (rest[0] != '.' || rest.find_first_not_of("0123456789", 1) != std::string::npos))
        return std::nullopt;
    return name.substr(0, pos);
}

struct Candidate {
    std::string raw;  // mangled
    Address entry = 0;
    std::uint64_t size = 0;
    int rank = 0;  // binding preference, lower is better
    std::vector<AddressRange> ranges;
};

int binding_rank(std::uint8_t bind) {
    switch (bind) {
    case 1: return 0;  // GLOBAL
    case 2: return 1;  // WEAK
    default: return 2;
    }
}

}  // namespace

std::vector<FunctionRecord> discover_functions(const elf::ElfFile& elf) {
    std::vector<const elf::Section*> exec;
    for (const auto& s : elf.sections())
        if (s.executable() && s.size > 0 && !s.data.empty()) exec.push_back(&s);
    auto section_of = [&](Address a) -> const elf::Section* {
        for (auto* s : exec)
            if (a >= s->addr && a < s->addr + s->size) return s;
        return nullptr;
    };

    // One candidate per entry address; aliases collapse to the preferred name.
    std::map<Address, Candidate> by_entry;
    std::vector<elf::Symbol> cold;
    for (const auto& sym : elf.symbols()) {
        if (sym.type != elf::kSymFunc || sym.size == 0 || sym.name.empty()) continue;
        const auto* sec = section_of(sym.value);
        if (!sec) continue;
        if (cold_parent(sym.name)) {
            cold.push_back(sym);
            continue;
        }
        Candidate c{sym.name, sym.value, sym.size, binding_rank(sym.bind), {}};
        auto [it, inserted] = by_entry.emplace(sym.value, c);
        if (!inserted) {
            auto& cur = it->second;
            cur.size = std::max(cur.size, sym.size);
            if (std::tie(c.rank, c.raw) < std::tie(cur.rank, cur.raw)) {
                cur.rank = c.rank;
                cur.raw = c.raw;
            }
        }
    }
    for (auto& [entry, c] : by_entry) {
        const auto* sec = section_of(entry);
        Address end = std::min<Address>(entry + c.size, sec->addr + sec->size);
        c.ranges.push_back({entry, end});
    }
    for (const auto& [addr, name] : elf.plt_stubs()) {
        const auto* sec = section_of(addr);
        if (!sec || by_entry.count(addr)) continue;
        Candidate c{name, addr, 16, 3, {}};
        c.ranges.push_back({addr, std::min<Address>(addr + 16, sec->addr + sec->size)});
        by_entry.emplace(addr, std::move(c));
    }
    std::unordered_map<std::string, Address> entry_of;
    for (const auto& [entry, c] : by_entry) entry_of.emplace(c.raw, entry);
    for (const auto& sym : cold) {
        auto parent = entry_of.find(*cold_parent(sym.name));
        const auto* sec = section_of(sym.value);
        AddressRange r{sym.value, std::min<Address>(sym.value + sym.size, sec->addr + sec->size)};
        if (parent != entry_of.end()) {
            by_entry[parent->second].ranges.push_back(r);
        } else if (!by_entry.count(sym.value)) {
            by_entry.emplace(sym.value, Candidate{sym.name, sym.value, sym.size, 2, {r}});
        }
    }

    // Executable sections without any function symbol become one function each.
    for (auto* s : exec) {
        bool covered = std::any_of(by_entry.begin(), by_entry.end(), [&](const auto& kv) {
            return std::any_of(kv.second.ranges.begin(), kv.second.ranges.end(),
                               [&](const AddressRange& r) { return r.start >= s->addr && r.start < s->addr + s->size; });
        });
        if (!covered && !by_entry.count(s->addr))
            by_entry.emplace(s->addr, Candidate{s->name, s->addr, s->size, 0, {{s->addr, s->addr + s->size}}});
    }

    // Clip overlaps: earlier ranges win.
    struct Piece {
        AddressRange range;
        Address owner;
    };
    std::vector<Piece> pieces;
    for (const auto& [entry, c] : by_entry)
        for (const auto& r : c.ranges) pieces.push_back({r, entry});
    std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) {
        return std::tie(a.range.start, a.range.end, a.owner) < std::tie(b.range.start, b.range.end, b.owner);
    });
    std::map<Address, std::vector<AddressRange>> clipped;
    Address covered = 0;
    for (auto p : pieces) {
        if (p.range.start < covered) p.range.start = covered;
        if (p.range.start >= p.range.end) continue;
        covered = p.range.end;
        clipped[p.owner].push_back(p.range);
    }

    std::vector<FunctionRecord> out;
    for (auto& [entry, c] : by_entry) {
        auto it = clipped.find(entry);
        if (it == clipped.end()) continue;
        auto& ranges = it->second;
        bool entry_kept = std::any_of(ranges.begin(), ranges.end(), [&](const AddressRange& r) { return r.contains(entry); });
        if (!entry_kept) continue;
        FunctionRecord f;
        f.function_id = FunctionId{static_cast<std::uint32_t>(out.size())};
        f.name = demangle(c.raw);
        f.entry_address = entry;
        f.address_ranges = ranges;
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<Instruction> disassemble_ranges(const std::vector<CodeSection>& sections,
                                            const std::vector<FunctionRecord>& functions) {
    std::vector<AddressRange> ranges;
    for (const auto& f : functions) ranges.insert(ranges.end(), f.address_ranges.begin(), f.address_ranges.end());
    std::sort(ranges.begin(), ranges.end());

    std::vector<Instruction> out;
    for (const auto& r : ranges) {
        const CodeSection* sec = nullptr;
        for (const auto& s : sections)
            if (r.start >= s.base && r.end <= s.base + s.bytes.size()) sec = &s;
        if (!sec) continue;
        Address a = r.start;
        while (a < r.end) {
            auto bytes = sec->bytes.subspan(a - sec->base, r.end - a);
            Instruction insn = x86::decode(bytes, a);
            if (insn.end() > r.end) {
                insn = Instruction{};
                insn.address = a;
                insn.mnemonic = "(bad)";
                insn.byte_length = 1;
            }
            a = insn.end();
            out.push_back(std::move(insn));
        }
    }
    return out;
}

std::vector<LineMapping> extract_line_map(const dwarf::LineTables& tables, const std::vector<Instruction>& instructions,
                                          const std::vector<SourceFile>& files) {
    std::unordered_map<std::string, FileId> file_of;
    for (const auto& f : files) file_of.emplace(f.path, f.file_id);

    std::vector<LineMapping> out;
    for (const auto& seq : tables.sequences) {
        const auto& rows = seq.rows;
        for (std::size_t i = 0; i < rows.size();) {
            std::size_t j = i;
            while (j < rows.size() && rows[j].address == rows[i].address) ++j;
            Address lo = rows[i].address;
            Address hi = j < rows.size() ? rows[j].address : seq.end;
            if (hi > lo) {
                auto it = std::lower_bound(instructions.begin(), instructions.end(), lo,
                                           [](const Instruction& x, Address a) { return x.address < a; });
                for (; it != instructions.end() && it->address < hi; ++it) {
                    for (std::size_t k = i; k < j; ++k) {
                        if (rows[k].line == 0) continue;
                        auto f = file_of.find(rows[k].path);
                        if (f == file_of.end()) continue;
                        out.push_back({it->address, f->second, rows[k].line});
                    }
                }
            }
            i = j;
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<SourceFile> collect_files(const std::vector<std::string>& paths,
                                      const std::vector<std::string>& source_roots) {
    std::vector<std::string> sorted = paths;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::vector<fs::path> roots;
    for (const auto& r : source_roots) {
        std::error_code ec;
        auto c = fs::weakly_canonical(r, ec);
        if (!ec) roots.push_back(c);
    }
    auto under = [](const fs::path& p, const fs::path& root) {
        auto [a, b] = std::mismatch(root.begin(), root.end(), p.begin(), p.end());
        return a == root.end() || (a->empty() && std::next(a) == root.end());
    };

    std::vector<SourceFile> out;
    for (const auto& path : sorted) {
        SourceFile f;
        f.file_id = FileId{static_cast<std::uint32_t>(out.size())};
        f.path = path;
        for (const auto& root : roots) {
            std::error_code ec;
            fs::path candidate = fs::path(path).is_absolute() ? fs::path(path) : root / path;
            candidate = fs::weakly_canonical(candidate, ec);
            if (ec || !under(candidate, root) || !fs::is_regular_file(candidate, ec)) continue;
            std::ifstream in(candidate, std::ios::binary);
            if (!in) continue;
            std::ostringstream ss;
            ss << in.rdbuf();
            f.content = ss.str();
            f.is_application_code = true;
            break;
        }
        out.push_back(std::move(f));
    }
    return out;
}

bool has_frame_pointer(const std::vector<Instruction>& instructions, Address entry) {
    auto it = std::lower_bound(instructions.begin(), instructions.end(), entry,
                               [](const Instruction& x, Address a) { return x.address < a; });
    if (it != instructions.end() && it->address == entry && it->mnemonic == "endbr64") ++it;
    if (it == instructions.end() || it->mnemonic != "push" || it->operands.size() != 1 || it->operands[0].text != "rbp")
        return false;
    ++it;
    return it != instructions.end() && it->mnemonic == "mov" && it->operands.size() == 2 &&
           it->operands[0].text == "rbp" && it->operands[1].text == "rsp";
}

void resolve_operands(std::vector<Instruction>& instructions, const std::vector<VariableLocation>& variables) {
    if (variables.empty()) return;
    std::vector<VariableLocation> sorted = variables;
    std::sort(sorted.begin(), sorted.end());

    using Kind = VariableLocation::Kind;
    // Index by register family / global address to keep the scan short.
    std::unordered_map<std::string, std::vector<const VariableLocation*>> by_register, by_slot_base;
    std::unordered_map<Address, std::vector<const VariableLocation*>> by_global;
    for (const auto& v : sorted) {
        switch (v.kind) {
        case Kind::Register: by_register[v.register_name].push_back(&v); break;
        case Kind::FrameSlot: by_slot_base[v.register_name].push_back(&v); break;
        case Kind::Global: by_global[v.global_address].push_back(&v); break;
        }
    }
    auto first_live = [](const std::vector<const VariableLocation*>* list, Address at, auto&& match)
        -> const VariableLocation* {
        if (!list) return nullptr;
        for (const auto* v : *list)
            if (v->range.contains(at) && match(*v)) return v;
        return nullptr;
    };
    auto lookup = [](auto& map, const auto& key) { auto it = map.find(key); return it == map.end() ? nullptr : &it->second; };

    for (auto& insn : instructions) {
        for (auto& op : insn.operands) {
            const VariableLocation* hit = nullptr;
            if (op.kind == OperandKind::Register && !op.register_name.empty()) {
                hit = first_live(lookup(by_register, x86::register_family(op.register_name)), insn.address,
                                 [](const VariableLocation&) { return true; });
            } else if (op.kind == OperandKind::Memory && op.memory) {
                const MemoryRef& m = *op.memory;
                if (m.absolute) {
                    hit = first_live(lookup(by_global, *m.absolute), insn.address, [](const VariableLocation&) { return true; });
                } else if (!m.base.empty() && m.index.empty()) {
                    hit = first_live(lookup(by_slot_base, m.base), insn.address,
                                     [&](const VariableLocation& v) { return v.offset == m.displacement; });
                }
            }
            if (hit) op.resolved_variable = hit->name;
        }
    }
}

namespace {

void insert_path(FileTreeNode& root, const SourceFile& file) {
    fs::path p(file.path);
    FileTreeNode* node = &root;
    std::string prefix;
    std::vector<std::string> parts;
    for (const auto& c : p) {
        std::string s = c.string();
        if (s.empty()) continue;
        parts.push_back(s);
    }
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const std::string& part = parts[i];
        if (part == "/")
            prefix = "/";
        else
            prefix = prefix.empty() || prefix == "/" ? prefix + part : prefix + "/" + part;
        if (part == "/") continue;
        auto it = std::find_if(node->children.begin(), node->children.end(),
                               [&](const FileTreeNode& n) { return n.name == part && n.file.has_value() == (i + 1 == parts.size()); });
        if (it == node->children.end()) {
            FileTreeNode n;
            n.name = part;
            n.path = prefix;
            node->children.push_back(std::move(n));
            it = std::prev(node->children.end());
        }
        node = &*it;
        if (i + 1 == parts.size()) node->file = file.file_id;
    }
}

void sort_tree(FileTreeNode& n) {
    std::sort(n.children.begin(), n.children.end(), [](const FileTreeNode& a, const FileTreeNode& b) {
        // directories first, then by name
        bool da = !a.file, db = !b.file;
        return std::tie(db, a.name) < std::tie(da, b.name);
    });
    for (auto& c : n.children) sort_tree(c);
}

}  // namespace

void assemble(ProgramModel& model) {
    std::sort(model.instructions.begin(), model.instructions.end(),
              [](const Instruction& a, const Instruction& b) { return a.address < b.address; });
    resolve_operands(model.instructions, model.variables);

    model.blocks = cfg::build_basic_blocks(model.instructions, model.functions);
    model.edges = cfg::build_edges(model.blocks, model.instructions, model.diagnostics);

    std::vector<std::vector<BlockId>> per_function(model.functions.size());
    for (const auto& b : model.blocks) per_function.at(b.function_id.value).push_back(b.block_id);
    std::vector<std::vector<ControlFlowEdge>> edges_of(model.functions.size());
    for (const auto& e : model.edges) {
        auto f = model.blocks[e.source.value].function_id;
        if (model.blocks[e.target.value].function_id == f) edges_of[f.value].push_back(e);
    }
    model.loop_forests.clear();
    for (const auto& f : model.functions) {
        auto forest = loops::analyze_function(f, model.blocks, per_function[f.function_id.value], edges_of[f.function_id.value]);
        for (const auto& d : forest.diagnostics) model.diagnostics.push_back({"loops", f.name + ": " + d});
        model.loop_forests.push_back(std::move(forest));
    }

    model.file_tree = FileTreeNode{};
    for (const auto& f : model.files) insert_path(model.file_tree, f);
    sort_tree(model.file_tree);

    model.finalize();
}

std::shared_ptr<ProgramModel> load_binary(const std::string& path, const std::vector<std::string>& source_roots) {
    auto elf = elf::ElfFile::open(path);
    auto model = std::make_shared<ProgramModel>();
    {
        std::error_code ec;
        auto canon = fs::weakly_canonical(path, ec);
        model->binary_path = ec ? path : canon.string();
    }

    model->functions = discover_functions(elf);
    std::vector<CodeSection> code;
    for (const auto& s : elf.sections())
        if (s.executable() && !s.data.empty()) code.push_back({s.addr, s.data});
    model->instructions = disassemble_ranges(code, model->functions);

    dwarf::LineTables tables;
    try {
        tables = dwarf::read_line_tables(elf);
    } catch (const Error& e) {
        model->diagnostics.push_back({"ingest", std::string("line table unreadable: ") + e.what()});
        tables = {};
    }
    if (!tables.present) {
        model->no_debug_info = true;
        model->diagnostics.push_back({"ingest", "no DWARF line table; line map is empty"});
    }
    model->files = collect_files(tables.files, source_roots);
    model->line_map = extract_line_map(tables, model->instructions, model->files);

    try {
        const auto& insns = model->instructions;
        model->variables = dwarf::read_variables(elf, [&](Address entry) { return has_frame_pointer(insns, entry); });
    } catch (const Error& e) {
        model->diagnostics.push_back({"ingest", std::string("variable locations unreadable: ") + e.what()});
        model->variables.clear();
    }
    std::sort(model->variables.begin(), model->variables.end());
    model->variables.erase(std::unique(model->variables.begin(), model->variables.end()), model->variables.end());

    assemble(*model);
    return model;
}

}  // namespace asmlens::ingest
