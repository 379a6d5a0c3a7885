#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rpw/chemistry.hpp"
#include "rpw/translator.hpp"

namespace rpw {

struct AsmError : std::runtime_error {
  int line;
  std::string msg;
  AsmError(int line_, const std::string& msg_)
      : std::runtime_error(
            line_ > 0 ? "line " + std::to_string(line_) + ": " + msg_ : msg_),
        line(line_),
        msg(msg_) {}
};

struct AsmOptions {
  size_t max_addnumber_codons = 96;
};

// BC1 += v as a codon sequence. Values with a short add/sub form get the
// greedy expansion (largest immediates first, trailing sub0001s); anything
// longer switches to a build-and-add form that parks BC1 on the stack,
// assembles v from two 16-bit halves with a shift, then adds it back.
// Either way the executed sequence leaves BC1 incremented by exactly v and
// every other effect confined to BC2, RegD, ZF and one transient stack slot.
// Throws AsmError when the result would exceed opt.max_addnumber_codons.
std::vector<Mn> addnumber_expansion(uint32_t v, const AsmOptions& opt = {});

// one source construct: a mnemonic, "addnumber N", or ".db HH [HH ...]"
std::vector<uint8_t> assemble_line(std::string_view line,
                                   const AsmOptions& opt = {});

// full listing; comments start with ';'
std::vector<uint8_t> assemble(std::string_view src, const AsmOptions& opt = {});

// one line per codon; entries matching a canonical mnemonic print its name,
// everything else prints as .db
std::string disassemble(std::span<const uint8_t> codons, const Alphabet& alpha);

// listing -> complete genome: program padded to kMetaSize with unassigned
// codons, default alphabet, data as given (zeroes by default)
Genome assemble_genome(std::string_view src, const AsmOptions& opt = {},
                       std::span<const uint8_t> data = {});

inline constexpr uint8_t kPadCodon = 0xFF;  // unassigned; translates to NOPs

// the self-replicator
Genome build_ancestor();
std::string ancestor_source();

}  // namespace rpw
