#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rpw/rng.hpp"
#include "rpw/translator.hpp"

namespace rpw {

// chance that at least one byte mutates: 1 - (1-p)^n
double at_least_one_probability(uint64_t n, double p);

struct MutationRecord {
  uint32_t offset;  // absolute byte offset
  uint8_t bit;
  bool operator==(const MutationRecord&) const = default;
};

// host-side mutator, same family as the replicator's: per byte in
// [begin, end) an independent chance to flip one uniformly chosen bit.
// Applying the returned records again undoes the mutation.
std::vector<MutationRecord> mutate(std::vector<uint8_t>& bytes, uint32_t begin,
                                   uint32_t end, double p_bit, SplitMix64& rng);
void apply_records(std::vector<uint8_t>& bytes,
                   std::span<const MutationRecord> records);

enum class Region { MetaCode, Alphabet, Data, Padding, Whole };
std::string_view region_name(Region r);
// [begin, end) in genome bytes
std::pair<uint32_t, uint32_t> region_interval(Region r);

struct ScanRow {
  uint32_t offset = 0;
  uint8_t bit = 0;
  std::string region;
  std::string outcome;  // viable | exit | budget | fault:<kind>
  uint32_t offspring = 0;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  uint64_t viable = 0;
  double robustness = 0.0;  // viable / rows
};

struct ScanOptions {
  uint64_t viability_budget = 200'000;  // micro-ops for the mutant's world
  uint64_t max_ticks = 50'000;          // stops sleep-forever mutants
  unsigned threads = 0;                 // 0: hardware concurrency
  uint64_t base_seed = 1;
  bool exhaustive_bits = true;  // false: one bit per byte (offset % 8)
};

// flip every bit of every byte in the region of the emitted genome, run each
// mutant alone in a fresh world, call it viable once it copies a file
ScanResult robustness_scan(const Genome& base, Region region,
                           const ScanOptions& opt = {});

// control: flip bits of the translated program instead; the backing file
// stays the pristine genome. Pass exhaustive_bits=false to sample one bit per
// byte, which keeps the mutant count equal to a full codon-region scan.
ScanResult micro_control_scan(const Genome& base, const ScanOptions& opt = {});

std::string scan_csv(const ScanResult& r);

}  // namespace rpw
