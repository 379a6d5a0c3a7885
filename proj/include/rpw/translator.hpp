#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpw/chemistry.hpp"

namespace rpw {

// On-disk genome: fixed 6144-byte container with a strict header. All offsets
// are canonical; any deviation is a parse error, which makes the header a
// genuinely lethal mutation target.
inline constexpr size_t kGenomeSize = 6144;
inline constexpr size_t kHeaderSize = 32;
inline constexpr size_t kMetaSize = 2100;   // codons
inline constexpr size_t kDataSize = 256;
inline constexpr size_t kPaddingSize =
    kGenomeSize - kHeaderSize - kMetaSize - kAlphabetSize - kDataSize;  // 1708

inline constexpr size_t kMetaOff = kHeaderSize;                  // 32
inline constexpr size_t kAlphaOff = kMetaOff + kMetaSize;        // 2132
inline constexpr size_t kDataOff = kAlphaOff + kAlphabetSize;    // 4180
inline constexpr size_t kPaddingOff = kDataOff + kDataSize;      // 4436

inline constexpr char kMagic[4] = {'R', 'P', 'W', '1'};
inline constexpr uint32_t kFormatVersion = 1;

inline constexpr size_t kProgramSize = kMetaSize * kEntrySize;   // 16800

struct GenomeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Genome {
  std::array<uint8_t, kMetaSize> meta{};
  Alphabet alphabet{};
  std::array<uint8_t, kDataSize> data{};
  std::array<uint8_t, kPaddingSize> padding{};

  bool operator==(const Genome&) const = default;
};

Genome parse_genome(std::span<const uint8_t> bytes);  // throws GenomeError
std::vector<uint8_t> emit_genome(const Genome& g);    // always kGenomeSize

struct MicroProgram {
  std::vector<uint8_t> code;  // kProgramSize
  std::vector<uint8_t> data;  // kDataSize
};

// slot i of the program is the alphabet entry for codon meta[i]
std::vector<uint8_t> translate_codons(std::span<const uint8_t> codons,
                                      const Alphabet& alpha);
MicroProgram translate(const Genome& g);

}  // namespace rpw
