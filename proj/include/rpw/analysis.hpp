#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rpw {

// population: named byte strings, usually genomes pulled from a world
using NamedBytes = std::pair<std::string, std::vector<uint8_t>>;

// positions (bytes) or set bits (bit mode) where a and b differ;
// throws std::invalid_argument on length mismatch
uint64_t hamming(std::span<const uint8_t> a, std::span<const uint8_t> b,
                 bool bits = false);

struct Kinship {
  std::vector<std::string> names;
  std::vector<uint64_t> to_ancestor;
  std::vector<std::vector<uint64_t>> pairwise;  // square, symmetric
};

Kinship kinship_matrix(const std::vector<NamedBytes>& pop,
                       std::span<const uint8_t> ancestor, bool bits = false);
std::string kinship_csv(const Kinship& k);

// per genome offset: how many population files differ from the ancestor there
struct SiteCount {
  uint32_t offset = 0;
  uint32_t files = 0;
  bool operator==(const SiteCount&) const = default;
};

// sites with files > 0, ordered by count desc then offset asc
std::vector<SiteCount> mutation_distribution(const std::vector<NamedBytes>& pop,
                                             std::span<const uint8_t> ancestor);
std::string distribution_csv(std::span<const SiteCount> sites);

struct Moments {
  double mean = 0.0;
  double stddev = 0.0;  // sample, n-1
};
// throws std::invalid_argument when fewer than two counts
Moments count_moments(std::span<const uint64_t> counts);

// mutated sites per byte of region; throws on empty region
double region_density(uint64_t sites, uint64_t region_size);

// density relative to the padding baseline; throws when the baseline is zero
double region_robustness(double density, double padding_density);

// sites with files > min_files falling in [begin, end)
uint64_t sites_in_interval(std::span<const SiteCount> sites, uint32_t begin,
                           uint32_t end, uint32_t min_files);

}  // namespace rpw
