#pragma once

// Table-driven x86-64 instruction decoder producing Intel-syntax text.
//
// Coverage: the one-byte and 0F/0F38/0F3A maps (general purpose, x87,
// MMX, SSE1-4.2, AES/SHA/CLMUL), VEX-encoded AVX/AVX2/FMA/BMI and EVEX
// length decoding. Operand text follows the GNU objdump "-M intel" spelling
// in lower case, e.g. "dword ptr [rbp-0x4]".

#include <cstdint>
#include <span>
#include <vector>

#include "asmlens/model.hpp"

namespace asmlens::x86 {

// Decodes one instruction at `address` from `bytes`. Never throws: an
// undecodable byte yields a one-byte "(bad)" instruction.
Instruction decode(std::span<const std::uint8_t> bytes, Address address);

// Linear sweep over [base, base + bytes.size()).
std::vector<Instruction> sweep(std::span<const std::uint8_t> bytes, Address base);

// Canonical 64-bit family name for any general-purpose register spelling
// ("eax" -> "rax", "r9b" -> "r9"); vector and other registers map to themselves.
std::string register_family(const std::string& name);

}  // namespace asmlens::x86
