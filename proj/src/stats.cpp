#include "asmlens/stats.hpp"

#include <set>

#include "asmlens/layout.hpp"

namespace asmlens::stats {

Fraction disparate_loop_fraction(const ProgramModel& model) {
    Fraction f;
    for (const auto& fn : model.functions) {
        const auto& forest = model.loops(fn.function_id);
        if (forest.loops.empty()) continue;
        auto view = layout::function_view(model, fn.function_id);
        for (const auto& loop : forest.loops) {
            ++f.denominator;
            if (layout::is_disparate(view, loop)) ++f.numerator;
        }
    }
    return f;
}

MultiFileResult multi_file_instruction_fraction(const ProgramModel& model) {
    MultiFileResult r;
    r.of_all.denominator = model.instructions.size();
    for (const auto& insn : model.instructions) {
        auto maps = model.mappings_for(insn.address);
        if (maps.empty()) continue;
        ++r.of_mapped.denominator;
        std::set<FileId> files;
        for (const auto& m : maps) files.insert(m.file_id);
        r.max_files_per_instruction = std::max(r.max_files_per_instruction, files.size());
        if (files.size() >= 2) {
            ++r.of_mapped.numerator;
            ++r.of_all.numerator;
        }
    }
    return r;
}

std::map<std::size_t, std::size_t> block_size_histogram(const ProgramModel& model) {
    std::map<std::size_t, std::size_t> h;
    for (const auto& b : model.blocks) ++h[b.instruction_addresses.size()];
    return h;
}

CorpusReport corpus_report(const ProgramModel& model) {
    return {disparate_loop_fraction(model), multi_file_instruction_fraction(model), block_size_histogram(model)};
}

std::string histogram_csv(const std::map<std::size_t, std::size_t>& histogram) {
    std::string out = "instructions_per_block,blocks\n";
    for (const auto& [size, count] : histogram) out += std::to_string(size) + "," + std::to_string(count) + "\n";
    return out;
}

}  // namespace asmlens::stats
