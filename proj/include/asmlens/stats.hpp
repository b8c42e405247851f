#pragma once

// Corpus characterization: disparate loops, multi-file instructions, block sizes.

#include <cstddef>
#include <map>
#include <string>

#include "asmlens/model.hpp"

namespace asmlens::stats {

struct Fraction {
    std::size_t numerator = 0;
    std::size_t denominator = 0;
    double value() const { return denominator ? static_cast<double>(numerator) / static_cast<double>(denominator) : 0.0; }
};

// Loops whose member blocks are not contiguous in address order.
Fraction disparate_loop_fraction(const ProgramModel& model);

struct MultiFileResult {
    Fraction of_mapped;  // denominator: instructions with at least one mapping
    Fraction of_all;     // denominator: every instruction
    std::size_t max_files_per_instruction = 0;
};
MultiFileResult multi_file_instruction_fraction(const ProgramModel& model);

// Instruction count -> number of blocks.
std::map<std::size_t, std::size_t> block_size_histogram(const ProgramModel& model);

struct CorpusReport {
    Fraction disparate_loops;
    MultiFileResult multi_file;
    std::map<std::size_t, std::size_t> block_size_histogram;
};
CorpusReport corpus_report(const ProgramModel& model);

std::string histogram_csv(const std::map<std::size_t, std::size_t>& histogram);

}  // namespace asmlens::stats
