#include <doctest.h>

#include <stdexcept>
#include <string>
#include <vector>

#include "rpw/analysis.hpp"
#include "rpw/rng.hpp"

using namespace rpw;

TEST_CASE("hamming counts bytes or bits") {
  std::vector<uint8_t> a = {0x00, 0xFF, 0x0F};
  std::vector<uint8_t> b = {0x01, 0xFF, 0xF0};
  CHECK(hamming(a, b) == 2);
  CHECK(hamming(a, b, true) == 9);  // 1 + 0 + 8
  CHECK(hamming(a, a) == 0);
  CHECK(hamming({}, {}) == 0);
  CHECK(hamming({}, {}, true) == 0);

  std::vector<uint8_t> shorter = {0x00};
  CHECK_THROWS_AS(hamming(a, shorter), std::invalid_argument);
}

TEST_CASE("hamming behaves like a distance") {
  SplitMix64 rng(99);
  auto random_bytes = [&] {
    std::vector<uint8_t> v(64);
    for (auto& x : v) x = static_cast<uint8_t>(rng.next());
    return v;
  };
  for (int i = 0; i < 200; ++i) {
    auto a = random_bytes(), b = random_bytes(), c = random_bytes();
    uint64_t ab = hamming(a, b), ba = hamming(b, a);
    CHECK(ab == ba);
    CHECK(hamming(a, b) <= hamming(a, c) + hamming(c, b));
    uint64_t bits = hamming(a, b, true);
    CHECK(bits >= ab);
    CHECK(bits <= ab * 8);
  }
}

TEST_CASE("kinship matrix against a tiny hand computation") {
  std::vector<uint8_t> anc = {0, 0, 0, 0};
  std::vector<NamedBytes> pop = {
      {"a.rpw", {0, 0, 0, 1}},
      {"b.rpw", {1, 1, 0, 1}},
  };
  Kinship k = kinship_matrix(pop, anc);
  REQUIRE(k.names.size() == 2);
  CHECK(k.to_ancestor == std::vector<uint64_t>{1, 3});
  CHECK(k.pairwise[0][0] == 0);
  CHECK(k.pairwise[0][1] == 2);
  CHECK(k.pairwise[1][0] == 2);
  CHECK(k.pairwise[1][1] == 0);

  CHECK(kinship_csv(k) ==
        "name,ancestor,\"a.rpw\",\"b.rpw\"\n"
        "\"a.rpw\",1,0,2\n"
        "\"b.rpw\",3,2,0\n");

  // bit mode weighs each differing byte by its flipped bits
  Kinship kb = kinship_matrix(pop, anc, true);
  CHECK(kb.to_ancestor == std::vector<uint64_t>{1, 3});
  CHECK(kb.pairwise[0][1] == 2);
}

TEST_CASE("kinship csv doubles embedded quotes") {
  Kinship k;
  k.names = {"we\"ird"};
  k.to_ancestor = {0};
  k.pairwise = {{0}};
  CHECK(kinship_csv(k) ==
        "name,ancestor,\"we\"\"ird\"\n"
        "\"we\"\"ird\",0,0\n");
}

TEST_CASE("mutation sites sort by popularity then position") {
  std::vector<uint8_t> anc = {9, 9, 9, 9, 9, 9, 9, 9};
  std::vector<NamedBytes> pop = {
      {"x", {9, 9, 0, 9, 9, 0, 9, 9}},
      {"y", {9, 9, 1, 9, 9, 1, 9, 0}},
      {"z", {9, 9, 2, 9, 9, 2, 9, 9}},
  };
  auto sites = mutation_distribution(pop, anc);
  REQUIRE(sites.size() == 3);
  CHECK(sites[0] == SiteCount{2, 3});
  CHECK(sites[1] == SiteCount{5, 3});
  CHECK(sites[2] == SiteCount{7, 1});

  CHECK(distribution_csv(sites) ==
        "offset,files\n"
        "0x0002,3\n"
        "0x0005,3\n"
        "0x0007,1\n");

  CHECK(mutation_distribution({}, anc).empty());
  std::vector<NamedBytes> bad = {{"w", {9, 9}}};
  CHECK_THROWS_AS(mutation_distribution(bad, anc), std::invalid_argument);
}

TEST_CASE("count moments use the sample deviation") {
  std::vector<uint64_t> two = {190, 194};
  Moments m = count_moments(two);
  CHECK(m.mean == 192.0);
  CHECK(m.stddev == doctest::Approx(2.8284271247461903).epsilon(1e-12));

  std::vector<uint64_t> flat = {5, 5, 5};
  Moments f = count_moments(flat);
  CHECK(f.mean == 5.0);
  CHECK(f.stddev == 0.0);

  std::vector<uint64_t> one = {42};
  CHECK_THROWS_AS(count_moments(one), std::invalid_argument);
  CHECK_THROWS_AS(count_moments({}), std::invalid_argument);
}

TEST_CASE("region density and the padding-relative ratio") {
  CHECK(region_density(291, 6144) == 0.04736328125);
  CHECK(region_density(151, 2427) ==
        doctest::Approx(0.06221672847136382).epsilon(1e-15));
  CHECK(region_density(0, 100) == 0.0);
  CHECK_THROWS_AS(region_density(1, 0), std::invalid_argument);

  CHECK(region_robustness(10.0 / 683, 284.0 / 2229) ==
        doctest::Approx(0.11491349266904502).epsilon(1e-15));
  CHECK(region_robustness(0.25, 0.25) == 1.0);
  CHECK_THROWS_AS(region_robustness(0.5, 0.0), std::invalid_argument);
}

TEST_CASE("interval site counting is half-open and threshold-strict") {
  std::vector<SiteCount> sites = {{2, 3}, {5, 3}, {7, 1}};
  CHECK(sites_in_interval(sites, 0, 8, 0) == 3);
  CHECK(sites_in_interval(sites, 0, 8, 1) == 2);   // strictly more than 1
  CHECK(sites_in_interval(sites, 0, 8, 3) == 0);
  CHECK(sites_in_interval(sites, 0, 7, 0) == 2);   // end excluded
  CHECK(sites_in_interval(sites, 5, 8, 0) == 2);
  CHECK(sites_in_interval(sites, 3, 5, 0) == 0);
}
