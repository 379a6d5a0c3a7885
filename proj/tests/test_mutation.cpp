#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <set>
#include <string>
#include <vector>

#include "rpw/assembler.hpp"
#include "rpw/mutation.hpp"
#include "rpw/translator.hpp"

using namespace rpw;

namespace {

// smallest organism that counts as viable: copy self once, exit.
// the child's name sits at the front of the data section.
Genome copier_genome() {
  static const Genome g = [] {
    const char* name = "kid.rpw";
    std::vector<uint8_t> data(name, name + std::strlen(name) + 1);
    return assemble_genome(
        "getDO\n"                   // bc1 = data base: the dst name
        "push\n"
        "CallAPIGetCommandLine\n"   // bc1 = own name
        "push\n"
        "CallAPICopyFile\n"
        "ret\n",
        {}, data);
  }();
  return g;
}

}  // namespace

TEST_CASE("chance of at least one flip matches the closed form") {
  // expected values from evaluating 1-(1-p)^n in extended precision
  struct Row {
    uint64_t n;
    double p;
    double expect;
  };
  const Row rows[] = {
      {2100, 1.0 / 900, 0.9031537481697561},
      {4200, 1.0 / 1800, 0.9030908872458143},
      {6150, 1.0 / 2666, 0.9004663452247974},
      {2100, 1.0 / 1500, 0.7535181389418366},
      {2100, 1.0 / 1820, 0.6846787317548706},
  };
  for (const Row& r : rows)
    CHECK(at_least_one_probability(r.n, r.p) ==
          doctest::Approx(r.expect).epsilon(1e-12));

  CHECK(at_least_one_probability(0, 0.5) == 0.0);
  CHECK(at_least_one_probability(1000, 0.0) == 0.0);
  CHECK(at_least_one_probability(1000, 1.0) == 1.0);
}

TEST_CASE("mutation is deterministic, interval-bound and self-inverse") {
  std::vector<uint8_t> base(4096);
  for (size_t i = 0; i < base.size(); ++i)
    base[i] = static_cast<uint8_t>(i * 37);

  auto run = [&](uint64_t seed) {
    std::vector<uint8_t> buf = base;
    SplitMix64 rng(seed);
    auto recs = mutate(buf, 1000, 3000, 0.02, rng);
    return std::pair{buf, recs};
  };

  auto [buf1, recs1] = run(7);
  auto [buf2, recs2] = run(7);
  CHECK(buf1 == buf2);
  CHECK(recs1 == recs2);
  CHECK_FALSE(recs1.empty());

  uint32_t prev_offset = 0;
  for (const auto& r : recs1) {
    CHECK(r.offset >= 1000);
    CHECK(r.offset < 3000);
    if (&r != &recs1.front()) CHECK(r.offset > prev_offset);
    prev_offset = r.offset;
    CHECK(r.bit < 8);
    CHECK((buf1[r.offset] ^ base[r.offset]) == (1u << r.bit));
  }
  // bytes outside the interval are untouched
  for (size_t i = 0; i < base.size(); ++i)
    if (i < 1000 || i >= 3000) CHECK(buf1[i] == base[i]);

  // XOR makes the record list its own undo
  apply_records(buf1, recs1);
  CHECK(buf1 == base);
}

TEST_CASE("mutation edge rates and bad intervals") {
  std::vector<uint8_t> buf(256, 0);
  SplitMix64 rng(1);

  CHECK(mutate(buf, 0, 256, 0.0, rng).empty());
  CHECK(buf == std::vector<uint8_t>(256, 0));

  auto all = mutate(buf, 0, 256, 1.0, rng);
  CHECK(all.size() == 256);  // one flip per byte, never more

  CHECK_THROWS_AS(mutate(buf, 0, 257, 0.5, rng), std::invalid_argument);
  CHECK_THROWS_AS(mutate(buf, 10, 5, 0.5, rng), std::invalid_argument);
}

TEST_CASE("flip count over a megabyte stays within three sigma") {
  std::vector<uint8_t> buf(1'000'000, 0);
  SplitMix64 rng(2024);
  auto recs = mutate(buf, 0, static_cast<uint32_t>(buf.size()), 1.0 / 900, rng);
  // mean 1111.1, sigma 33.3
  CHECK(recs.size() >= 1011);
  CHECK(recs.size() <= 1211);

  // all eight bit positions occur
  std::set<uint8_t> bits;
  for (const auto& r : recs) bits.insert(r.bit);
  CHECK(bits.size() == 8);
}

TEST_CASE("genome regions have fixed bounds and names") {
  CHECK(region_interval(Region::MetaCode) ==
        std::pair<uint32_t, uint32_t>{32, 2132});
  CHECK(region_interval(Region::Alphabet) ==
        std::pair<uint32_t, uint32_t>{2132, 4180});
  CHECK(region_interval(Region::Data) ==
        std::pair<uint32_t, uint32_t>{4180, 4436});
  CHECK(region_interval(Region::Padding) ==
        std::pair<uint32_t, uint32_t>{4436, 6144});
  CHECK(region_interval(Region::Whole) ==
        std::pair<uint32_t, uint32_t>{0, kGenomeSize});

  CHECK(region_name(Region::MetaCode) == "meta-code");
  CHECK(region_name(Region::Alphabet) == "alphabet");
  CHECK(region_name(Region::Data) == "data");
  CHECK(region_name(Region::Padding) == "padding");
  CHECK(region_name(Region::Whole) == "whole");
}

TEST_CASE("padding survives every single-bit flip") {
  ScanOptions opt;
  opt.viability_budget = 20'000;
  opt.max_ticks = 50;
  ScanResult r = robustness_scan(copier_genome(), Region::Padding, opt);

  CHECK(r.rows.size() == 1708 * 8);
  CHECK(r.viable == r.rows.size());
  CHECK(r.robustness == 1.0);
}

TEST_CASE("codon-region flips only hurt inside the live codons") {
  ScanOptions opt;
  opt.viability_budget = 20'000;
  opt.max_ticks = 50;
  ScanResult r = robustness_scan(copier_genome(), Region::MetaCode, opt);

  CHECK(r.rows.size() == 2100 * 8);
  CHECK(r.viable < r.rows.size());   // the program is mutable
  CHECK(r.robustness > 0.99);        // but almost all of the region is inert

  // the copier is six codons; the trailing one is the exit, so any flip
  // past the first five arrives after the copy and cannot take it back
  for (const ScanRow& row : r.rows) {
    if (row.outcome == "viable") continue;
    CHECK(row.offset >= 32);
    CHECK(row.offset < 32 + 5);
  }
}

TEST_CASE("translated-code flips only hurt on the executed path") {
  ScanOptions opt;
  opt.viability_budget = 20'000;
  opt.max_ticks = 50;
  opt.exhaustive_bits = false;  // one bit per byte: same row count as a
                                // full codon-region scan
  ScanResult r = micro_control_scan(copier_genome(), opt);

  CHECK(r.rows.size() == 16800);
  for (const ScanRow& row : r.rows) {
    CHECK(row.bit == row.offset % 8);
    CHECK(row.region == "micro");
    // the copy lands before byte 48 of the translated program; nothing
    // after that can prevent it
    if (row.outcome != "viable") CHECK(row.offset < 48);
  }
  CHECK(r.viable < r.rows.size());
}

TEST_CASE("scan reports come out as csv") {
  ScanResult r;
  r.rows.push_back({40, 3, "meta-code", "viable", 2});
  r.rows.push_back({41, 0, "meta-code", "fault:invalid_opcode", 0});
  r.viable = 1;
  r.robustness = 0.5;
  CHECK(scan_csv(r) ==
        "offset,bit,region,outcome,offspring\n"
        "40,3,meta-code,viable,2\n"
        "41,0,meta-code,fault:invalid_opcode,0\n");
}
