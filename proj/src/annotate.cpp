#include "asmlens/annotate.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "asmlens/error.hpp"

#ifndef ASMLENS_DATA_DIR
#define ASMLENS_DATA_DIR "data"
#endif

namespace asmlens::annotate {

std::optional<JumpTargetLabel> jump_label(const ProgramModel& model, const Instruction& insn) {
    if (!insn.is_control_transfer || !insn.transfer_target) return std::nullopt;
    const BasicBlock* b = model.block_at(*insn.transfer_target);
    if (!b) return std::nullopt;
    return JumpTargetLabel{insn.address, model.function(b->function_id).name, b->block_id, *insn.transfer_target};
}

std::vector<VariableBadge> variable_badges(const Instruction& insn) {
    std::vector<VariableBadge> out;
    for (std::size_t i = 0; i < insn.operands.size(); ++i)
        if (insn.operands[i].resolved_variable) out.push_back({insn.address, i, *insn.operands[i].resolved_variable});
    return out;
}

namespace {

std::string unescape(const std::string& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\' || i + 1 == s.size()) {
            out += s[i];
            continue;
        }
        char c = s[++i];
        out += c == 't' ? '\t' : c == 'n' ? '\n' : c;
    }
    return out;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '\t') out += "\\t";
        else if (c == '\n') out += "\\n";
        else if (c == '\\') out += "\\\\";
        else out += c;
    }
    return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> parts(1);
    for (char c : line) {
        if (c == '\t') parts.emplace_back();
        else parts.back() += c;
    }
    return parts;
}

}  // namespace

TooltipTable TooltipTable::parse(const std::string& text) {
    TooltipTable t;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string tag = "# asmlens-tooltips v";
            if (line.rfind(tag, 0) == 0) t.version_ = std::atoi(line.c_str() + tag.size());
            continue;
        }
        auto f = split_tabs(line);
        if (f.size() != 5 || f[0].empty())
            throw Error(ErrorKind::BadRequest, "tooltip table line " + std::to_string(lineno) + ": expected 5 fields");
        TooltipEntry e{unescape(f[0]), unescape(f[1]), unescape(f[2]), unescape(f[3]), unescape(f[4])};
        if (!t.entries_.emplace(e.mnemonic, e).second)
            throw Error(ErrorKind::BadRequest, "tooltip table line " + std::to_string(lineno) + ": duplicate " + e.mnemonic);
    }
    return t;
}

TooltipTable TooltipTable::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::UnreadableFile, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string TooltipTable::serialize() const {
    std::string out = "# asmlens-tooltips v" + std::to_string(version_) + "\n";
    out += "# mnemonic\tinstruction\tmeaning\tnotes\topcode\n";
    for (const auto& [m, e] : entries_)
        out += escape(e.mnemonic) + "\t" + escape(e.instruction_name) + "\t" + escape(e.meaning) + "\t" +
               escape(e.notes) + "\t" + escape(e.opcode) + "\n";
    return out;
}

std::optional<TooltipEntry> TooltipTable::lookup(const std::string& mnemonic) const {
    if (auto it = entries_.find(mnemonic); it != entries_.end()) return it->second;
    auto space = mnemonic.rfind(' ');
    if (space != std::string::npos) return lookup(mnemonic.substr(space + 1));
    return std::nullopt;
}

std::string data_dir() {
    if (const char* env = std::getenv("ASMLENS_DATA_DIR"); env && *env) return env;
    return ASMLENS_DATA_DIR;
}

const TooltipTable& TooltipTable::bundled() {
    static const TooltipTable table = [] {
        try {
            return load(data_dir() + "/tooltips.tsv");
        } catch (const Error&) {
            return TooltipTable{};
        }
    }();
    return table;
}

std::optional<TooltipEntry> tooltip(const std::string& mnemonic) { return TooltipTable::bundled().lookup(mnemonic); }

}  // namespace asmlens::annotate
