// the files under fixtures/ are build products of the rpw tool; these checks
// keep them in lockstep with the library so a stale regeneration cannot slip
// through review

#include <doctest.h>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rpw/assembler.hpp"
#include "rpw/chemistry.hpp"
#include "rpw/translator.hpp"
#include "rpw/vm.hpp"

using namespace rpw;

namespace {

std::string fixture_path(const char* name) {
  return std::string(RPW_SOURCE_DIR) + "/fixtures/" + name;
}

std::vector<uint8_t> read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing fixture ", path);
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
}

std::string read_text(const std::string& path) {
  auto b = read_binary(path);
  return std::string(b.begin(), b.end());
}

}  // namespace

TEST_CASE("ancestor.rpw is the built-in replicator, byte for byte") {
  auto bytes = read_binary(fixture_path("ancestor.rpw"));
  CHECK(bytes == emit_genome(build_ancestor()));
}

TEST_CASE("ancestor_listing.s matches the generator and reassembles") {
  std::string listing = read_text(fixture_path("ancestor_listing.s"));
  CHECK(listing == ancestor_source());
  // the listing carries only code; the data block is poked in separately
  Genome g = assemble_genome(listing);
  CHECK(g.meta == build_ancestor().meta);
}

TEST_CASE("default_alphabet.bin carries the stock translation table") {
  auto bytes = read_binary(fixture_path("default_alphabet.bin"));
  const Alphabet& alpha = default_alphabet();
  REQUIRE(bytes.size() == alpha.bytes.size());
  CHECK(std::equal(bytes.begin(), bytes.end(), alpha.bytes.begin()));
}

TEST_CASE("lcg.s assembles and steps the generator once") {
  Genome g = assemble_genome(read_text(fixture_path("lcg.s")));
  MicroProgram prog = translate(g);
  ProcessState p = make_process(prog.code, prog.data, "lcg.rpw");
  NullEnv env;
  RunOut out = run(p, env, 100'000, nullptr);
  CHECK(out.kind == RunOut::Kind::Exited);
  // x1 = (1103515245 * 0 + 12345) mod 2^32
  CHECK(p.load32(kDataBase + 4) == 12345u);
}

TEST_CASE("codon_table.txt agrees with the assembler, entry by entry") {
  std::istringstream table(read_text(fixture_path("codon_table.txt")));
  std::string line;
  uint32_t entries = 0;
  while (std::getline(table, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string codon_hex, mnemonic;
    row >> codon_hex >> mnemonic;
    unsigned codon = std::stoul(codon_hex, nullptr, 16);
    auto codons = assemble(mnemonic);
    REQUIRE(codons.size() == 1);
    CHECK(codons[0] == codon);
    ++entries;
  }
  CHECK(entries == 49);
}
