#include "rpw/translator.hpp"

#include <algorithm>
#include <cstring>

namespace rpw {

namespace {

uint32_t rd32(std::span<const uint8_t> b, size_t off) {
  return static_cast<uint32_t>(b[off]) | (static_cast<uint32_t>(b[off + 1]) << 8) |
         (static_cast<uint32_t>(b[off + 2]) << 16) |
         (static_cast<uint32_t>(b[off + 3]) << 24);
}

void wr32(std::vector<uint8_t>& b, size_t off, uint32_t v) {
  b[off] = static_cast<uint8_t>(v);
  b[off + 1] = static_cast<uint8_t>(v >> 8);
  b[off + 2] = static_cast<uint8_t>(v >> 16);
  b[off + 3] = static_cast<uint8_t>(v >> 24);
}

void check(bool ok, const char* what) {
  if (!ok) throw GenomeError(what);
}

}  // namespace

Genome parse_genome(std::span<const uint8_t> bytes) {
  check(bytes.size() == kGenomeSize, "genome: wrong size");
  check(std::memcmp(bytes.data(), kMagic, 4) == 0, "genome: bad magic");
  check(rd32(bytes, 4) == kFormatVersion, "genome: unsupported version");
  check(rd32(bytes, 8) == kMetaOff, "genome: meta offset");
  check(rd32(bytes, 12) == kMetaSize, "genome: meta length");
  check(rd32(bytes, 16) == kAlphaOff, "genome: alphabet offset");
  check(rd32(bytes, 20) == kAlphabetSize, "genome: alphabet length");
  check(rd32(bytes, 24) == kDataOff, "genome: data offset");
  check(rd32(bytes, 28) == kDataSize, "genome: data length");

  Genome g;
  std::copy_n(bytes.begin() + kMetaOff, kMetaSize, g.meta.begin());
  std::copy_n(bytes.begin() + kAlphaOff, kAlphabetSize, g.alphabet.bytes.begin());
  std::copy_n(bytes.begin() + kDataOff, kDataSize, g.data.begin());
  std::copy_n(bytes.begin() + kPaddingOff, kPaddingSize, g.padding.begin());
  return g;
}

std::vector<uint8_t> emit_genome(const Genome& g) {
  std::vector<uint8_t> out(kGenomeSize, 0);
  std::memcpy(out.data(), kMagic, 4);
  wr32(out, 4, kFormatVersion);
  wr32(out, 8, kMetaOff);
  wr32(out, 12, kMetaSize);
  wr32(out, 16, kAlphaOff);
  wr32(out, 20, kAlphabetSize);
  wr32(out, 24, kDataOff);
  wr32(out, 28, kDataSize);
  std::copy(g.meta.begin(), g.meta.end(), out.begin() + kMetaOff);
  std::copy(g.alphabet.bytes.begin(), g.alphabet.bytes.end(),
            out.begin() + kAlphaOff);
  std::copy(g.data.begin(), g.data.end(), out.begin() + kDataOff);
  std::copy(g.padding.begin(), g.padding.end(), out.begin() + kPaddingOff);
  return out;
}

std::vector<uint8_t> translate_codons(std::span<const uint8_t> codons,
                                      const Alphabet& alpha) {
  std::vector<uint8_t> code(codons.size() * kEntrySize);
  for (size_t i = 0; i < codons.size(); ++i) {
    auto e = alpha.entry(codons[i]);
    std::copy(e.begin(), e.end(), code.begin() + i * kEntrySize);
  }
  return code;
}

MicroProgram translate(const Genome& g) {
  MicroProgram p;
  p.code = translate_codons(g.meta, g.alphabet);
  p.data.assign(g.data.begin(), g.data.end());
  return p;
}

}  // namespace rpw
