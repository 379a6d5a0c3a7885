#include <doctest.h>

#include <rpw/rng.hpp>
#include <rpw/translator.hpp>

#include <cstring>
#include <vector>

using namespace rpw;

namespace {

Genome random_genome(uint64_t seed) {
  SplitMix64 rng{seed};
  Genome g;
  for (auto& b : g.meta) b = static_cast<uint8_t>(rng.below(256));
  g.alphabet = default_alphabet();
  for (auto& b : g.data) b = static_cast<uint8_t>(rng.below(256));
  for (auto& b : g.padding) b = static_cast<uint8_t>(rng.below(256));
  return g;
}

}  // namespace

TEST_CASE("layout constants line up with the container") {
  CHECK(kGenomeSize == 6144);
  CHECK(kHeaderSize + kMetaSize + kAlphabetSize + kDataSize + kPaddingSize ==
        kGenomeSize);
  CHECK(kMetaOff == 32);
  CHECK(kAlphaOff == 2132);
  CHECK(kDataOff == 4180);
  CHECK(kPaddingOff == 4436);
  CHECK(kPaddingSize == 1708);
  CHECK(kProgramSize == 16800);
}

TEST_CASE("emit and parse round trip") {
  Genome g = random_genome(7);
  auto bytes = emit_genome(g);
  REQUIRE(bytes.size() == kGenomeSize);
  Genome back = parse_genome(bytes);
  CHECK(back == g);
  CHECK(emit_genome(back) == bytes);
}

TEST_CASE("parse rejects wrong container size") {
  Genome g = random_genome(9);
  auto bytes = emit_genome(g);
  bytes.pop_back();
  CHECK_THROWS_AS(parse_genome(bytes), GenomeError);
  bytes.push_back(0);
  bytes.push_back(0);
  CHECK_THROWS_AS(parse_genome(bytes), GenomeError);
}

TEST_CASE("any header bit flip is lethal at parse time") {
  Genome g = random_genome(11);
  const auto clean = emit_genome(g);
  for (size_t off = 0; off < kHeaderSize; ++off) {
    for (int bit = 0; bit < 8; ++bit) {
      auto bytes = clean;
      bytes[off] ^= static_cast<uint8_t>(1u << bit);
      CHECK_THROWS_AS(parse_genome(bytes), GenomeError);
    }
  }
}

TEST_CASE("header errors name the offending field") {
  Genome g = random_genome(13);
  auto flip = [&](size_t off) {
    auto bytes = emit_genome(g);
    bytes[off] ^= 0xFF;
    try {
      parse_genome(bytes);
      return std::string("no error");
    } catch (const GenomeError& e) {
      return std::string(e.what());
    }
  };
  CHECK(flip(0).find("magic") != std::string::npos);
  CHECK(flip(4).find("version") != std::string::npos);
  CHECK(flip(8).find("meta offset") != std::string::npos);
  CHECK(flip(12).find("meta length") != std::string::npos);
  CHECK(flip(16).find("alphabet offset") != std::string::npos);
  CHECK(flip(20).find("alphabet length") != std::string::npos);
  CHECK(flip(24).find("data offset") != std::string::npos);
  CHECK(flip(28).find("data length") != std::string::npos);
}

TEST_CASE("body bytes flow into the right fields") {
  Genome g = random_genome(17);
  auto bytes = emit_genome(g);
  CHECK(bytes[kMetaOff] == g.meta[0]);
  CHECK(bytes[kAlphaOff + 5] == g.alphabet.bytes[5]);
  CHECK(bytes[kDataOff + 100] == g.data[100]);
  CHECK(bytes[kPaddingOff + kPaddingSize - 1] == g.padding.back());
}

TEST_CASE("translation emits one fixed-width slot per codon") {
  Genome g = random_genome(19);
  MicroProgram p = translate(g);
  REQUIRE(p.code.size() == kProgramSize);
  REQUIRE(p.data.size() == kDataSize);
  CHECK(std::memcmp(p.data.data(), g.data.data(), kDataSize) == 0);
  for (size_t i = 0; i < kMetaSize; ++i) {
    auto e = g.alphabet.entry(g.meta[i]);
    CHECK(std::memcmp(p.code.data() + i * kEntrySize, e.data(), kEntrySize) ==
          0);
  }
}

TEST_CASE("codon substitution only rewrites its own slot") {
  SplitMix64 rng{23};
  Genome g = random_genome(29);
  const auto base = translate(g).code;
  for (int trial = 0; trial < 64; ++trial) {
    Genome m = g;
    const size_t at = rng.below(kMetaSize);
    m.meta[at] ^= static_cast<uint8_t>(1 + rng.below(255));
    const auto code = translate(m).code;
    for (size_t i = 0; i < kMetaSize; ++i) {
      const uint8_t* slot = code.data() + i * kEntrySize;
      if (i == at) {
        // slot now spells the substituted codon (may equal the old bytes when
        // both codons are neutral filler)
        auto e = m.alphabet.entry(m.meta[at]);
        CHECK(std::memcmp(slot, e.data(), kEntrySize) == 0);
      } else {
        CHECK(std::memcmp(slot, base.data() + i * kEntrySize, kEntrySize) == 0);
      }
    }
  }
}

TEST_CASE("alphabet edit rewrites exactly the slots using that codon") {
  Genome g = random_genome(31);
  const auto base = translate(g).code;
  const uint8_t codon = g.meta[0];
  Genome m = g;
  m.alphabet.entry(codon)[3] ^= 0x40;
  const auto code = translate(m).code;
  for (size_t i = 0; i < kMetaSize; ++i) {
    const bool same = std::memcmp(code.data() + i * kEntrySize,
                                  base.data() + i * kEntrySize,
                                  kEntrySize) == 0;
    CHECK(same == (g.meta[i] != codon));
  }
}

TEST_CASE("translate_codons handles arbitrary lengths") {
  std::vector<uint8_t> codons = {0, 1, 255};
  auto code = translate_codons(codons, default_alphabet());
  CHECK(code.size() == 3 * kEntrySize);
  CHECK(translate_codons({}, default_alphabet()).empty());
}
