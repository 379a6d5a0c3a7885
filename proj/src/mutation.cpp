#include "rpw/mutation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "rpw/world.hpp"

namespace rpw {

double at_least_one_probability(uint64_t n, double p) {
  return 1.0 - std::pow(1.0 - p, static_cast<double>(n));
}

std::vector<MutationRecord> mutate(std::vector<uint8_t>& bytes, uint32_t begin,
                                   uint32_t end, double p_bit, SplitMix64& rng) {
  if (end > bytes.size() || begin > end)
    throw std::invalid_argument("mutate: bad interval");
  std::vector<MutationRecord> records;
  for (uint32_t o = begin; o < end; ++o) {
    if (!rng.bernoulli(p_bit)) continue;
    uint8_t bit = static_cast<uint8_t>(rng.below(8));
    bytes[o] ^= static_cast<uint8_t>(1u << bit);
    records.push_back({o, bit});
  }
  return records;
}

void apply_records(std::vector<uint8_t>& bytes,
                   std::span<const MutationRecord> records) {
  for (const MutationRecord& r : records)
    bytes.at(r.offset) ^= static_cast<uint8_t>(1u << r.bit);
}

std::string_view region_name(Region r) {
  switch (r) {
    case Region::MetaCode: return "meta-code";
    case Region::Alphabet: return "alphabet";
    case Region::Data: return "data";
    case Region::Padding: return "padding";
    case Region::Whole: return "whole";
  }
  return "?";
}

std::pair<uint32_t, uint32_t> region_interval(Region r) {
  switch (r) {
    case Region::MetaCode: return {kMetaOff, kMetaOff + kMetaSize};
    case Region::Alphabet: return {kAlphaOff, kAlphaOff + kAlphabetSize};
    case Region::Data: return {kDataOff, kDataOff + kDataSize};
    case Region::Padding: return {kPaddingOff, kPaddingOff + kPaddingSize};
    case Region::Whole: return {0, kGenomeSize};
  }
  return {0, 0};
}

namespace {

// one mutant, one world. Viable means it copied a file before the budget.
void eval_mutant_world(World& w, const ScanOptions& opt, ScanRow& row) {
  for (uint64_t t = 0; t < opt.max_ticks; ++t) {
    w.tick();
    if (w.files_created() > 0) {
      row.outcome = "viable";
      row.offspring = static_cast<uint32_t>(w.files_created());
      return;
    }
    if (w.processes().empty()) {
      const std::string& cause = w.last_death_cause();
      if (cause == "exit")
        row.outcome = "exit";
      else if (cause == "fault:budget_exhausted")
        row.outcome = "budget";
      else if (cause.empty())
        row.outcome = "fault:genome";  // never spawned: unparseable
      else
        row.outcome = cause;
      return;
    }
  }
  row.outcome = "budget";  // slept past the tick cap
}

GuardConfig scan_config(const ScanOptions& opt) {
  GuardConfig cfg;
  cfg.instruction_budget = opt.viability_budget;
  cfg.quantum = 1000;
  cfg.extinction_floor = 0;  // let lone mutants die
  return cfg;
}

void eval_genome_mutant(const std::vector<uint8_t>& genome_bytes,
                        const ScanOptions& opt, ScanRow& row) {
  std::vector<uint8_t> mutant = genome_bytes;
  mutant[row.offset] ^= static_cast<uint8_t>(1u << row.bit);
  World w(scan_config(opt),
          opt.base_seed + row.offset * 8ull + row.bit);
  w.add_file("m.rpw", std::move(mutant));
  w.queue_spawn_at("m.rpw", 1, 0);
  eval_mutant_world(w, opt, row);
}

void eval_micro_mutant(const std::vector<uint8_t>& genome_bytes,
                       const MicroProgram& prog, const ScanOptions& opt,
                       ScanRow& row) {
  MicroProgram mutant = prog;
  mutant.code[row.offset] ^= static_cast<uint8_t>(1u << row.bit);
  World w(scan_config(opt),
          opt.base_seed + row.offset * 8ull + row.bit);
  w.add_file("m.rpw", genome_bytes);
  w.spawn_program(mutant, "m.rpw");
  eval_mutant_world(w, opt, row);
}

template <typename EvalFn>
ScanResult run_scan(size_t byte_count, uint32_t byte_base, std::string region,
                    const ScanOptions& opt, EvalFn&& eval) {
  ScanResult result;
  for (size_t i = 0; i < byte_count; ++i) {
    uint32_t offset = byte_base + static_cast<uint32_t>(i);
    if (opt.exhaustive_bits) {
      for (uint8_t bit = 0; bit < 8; ++bit)
        result.rows.push_back({offset, bit, region, "", 0});
    } else {
      result.rows.push_back(
          {offset, static_cast<uint8_t>(offset % 8), region, "", 0});
    }
  }

  unsigned nthreads = opt.threads ? opt.threads
                                  : std::max(1u, std::thread::hardware_concurrency());
  nthreads = std::min<unsigned>(nthreads,
                                static_cast<unsigned>(result.rows.size()) + 1);
  default_alphabet();  // settle shared tables before going parallel
  if (nthreads <= 1) {
    for (ScanRow& row : result.rows) eval(row);
  } else {
    std::atomic<size_t> cursor{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t)
      pool.emplace_back([&] {
        for (;;) {
          size_t i = cursor.fetch_add(1);
          if (i >= result.rows.size()) return;
          eval(result.rows[i]);
        }
      });
    for (auto& th : pool) th.join();
  }

  for (const ScanRow& row : result.rows)
    if (row.outcome == "viable") ++result.viable;
  result.robustness = result.rows.empty()
                          ? 0.0
                          : static_cast<double>(result.viable) /
                                static_cast<double>(result.rows.size());
  return result;
}

}  // namespace

ScanResult robustness_scan(const Genome& base, Region region,
                           const ScanOptions& opt) {
  const std::vector<uint8_t> genome_bytes = emit_genome(base);
  auto [begin, end] = region_interval(region);
  return run_scan(end - begin, begin, std::string(region_name(region)), opt,
                  [&](ScanRow& row) { eval_genome_mutant(genome_bytes, opt, row); });
}

ScanResult micro_control_scan(const Genome& base, const ScanOptions& opt) {
  const std::vector<uint8_t> genome_bytes = emit_genome(base);
  const MicroProgram prog = translate(base);
  return run_scan(prog.code.size(), 0, "micro", opt, [&](ScanRow& row) {
    eval_micro_mutant(genome_bytes, prog, opt, row);
  });
}

std::string scan_csv(const ScanResult& r) {
  std::string out = "offset,bit,region,outcome,offspring\n";
  for (const ScanRow& row : r.rows) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%u,%u,%s,%s,%u\n", row.offset, row.bit,
                  row.region.c_str(), row.outcome.c_str(), row.offspring);
    out += buf;
  }
  return out;
}

}  // namespace rpw
