// rpw: command line front end. asm/disasm move between listings and genome
// files, run executes one organism with host services but no scheduler,
// evolve drives a full world, scan and analyze produce CSV reports.
//
// Machine output (genomes, listings, CSV, event logs) goes to stdout or the
// requested file; progress and diagnostics go to stderr. Exit codes: 0 on
// success, 1 when the target organism faults or starves, 2 on usage, parse,
// or input errors.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpw/analysis.hpp"
#include "rpw/assembler.hpp"
#include "rpw/mutation.hpp"
#include "rpw/translator.hpp"
#include "rpw/vm.hpp"
#include "rpw/world.hpp"

namespace fs = std::filesystem;
using namespace rpw;

namespace {

bool log_enabled() {
  const char* v = std::getenv("RPW_LOG");
  return v && *v && std::strcmp(v, "0") != 0;
}

std::vector<uint8_t> read_binary(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return bytes;
}

std::string read_text(const fs::path& p) {
  auto b = read_binary(p);
  return std::string(b.begin(), b.end());
}

void write_binary(const fs::path& p, std::span<const uint8_t> bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + p.string());
}

// stdout when no file was requested, so reports stay pipeable
void write_report(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  out << text;
  if (!out) throw std::runtime_error("short write to " + out_path);
}

Genome load_genome(const fs::path& p) {
  auto bytes = read_binary(p);
  try {
    return parse_genome(bytes);
  } catch (const GenomeError& e) {
    throw std::runtime_error(p.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------- asm

int cmd_asm(const std::string& in, const std::string& out) {
  Genome g;
  try {
    g = assemble_genome(read_text(in));
  } catch (const AsmError& e) {
    std::cerr << in << ": " << e.what() << "\n";
    return 2;
  }
  write_binary(out, emit_genome(g));
  if (log_enabled()) std::cerr << "asm: wrote " << out << "\n";
  return 0;
}

// ---------------------------------------------------------------- disasm

int cmd_disasm(const std::string& in, const std::string& out) {
  Genome g = load_genome(in);
  // trailing pad codons carry no program; stop after the last real one
  size_t n = g.meta.size();
  while (n > 0 && g.meta[n - 1] == kPadCodon) --n;
  std::string text = disassemble({g.meta.data(), n}, g.alphabet);
  write_report(out, text);
  return 0;
}

// ---------------------------------------------------------------- run

int cmd_run(const std::string& in, uint64_t budget, bool trace) {
  auto bytes = read_binary(in);
  Genome g;
  try {
    g = parse_genome(bytes);
  } catch (const GenomeError& e) {
    std::cerr << in << ": " << e.what() << "\n";
    return 2;
  }
  MicroProgram prog = translate(g);

  GuardConfig cfg;
  cfg.instruction_budget = budget;
  World w(cfg, 0);
  std::string name = fs::path(in).filename().string();
  w.add_file(name, bytes);

  ProcessState p = make_process(prog.code, prog.data, name);
  std::string outcome;
  for (;;) {
    RunOut ro = run(p, w, budget - p.ops, trace ? &std::cerr : nullptr);
    if (ro.kind == RunOut::Kind::Yielded) {
      // the world clock never advances here, so a real sleep parks forever
      if (p.sleep_until_ms > w.clock_ms()) {
        outcome = "sleeping";
        break;
      }
      continue;
    }
    if (ro.kind == RunOut::Kind::Exited) {
      outcome = "exited";
    } else if (ro.kind == RunOut::Kind::Faulted) {
      outcome = std::string("fault:") + std::string(fault_name(ro.fault));
    } else {
      outcome = "budget";
    }
    break;
  }

  std::ostringstream rep;
  rep << "outcome: " << outcome << "\n";
  rep << "steps: " << p.ops << "\n";
  rep << "offspring: " << w.files_created() << "\n";
  rep << "syscalls:";
  bool any = false;
  for (int s = 0; s < kSysCount; ++s) {
    if (p.sys_counts[s] == 0) continue;
    rep << " " << sys_name(static_cast<Sys>(s)) << "=" << p.sys_counts[s];
    any = true;
  }
  if (!any) rep << " none";
  rep << "\n";
  char buf[64];
  rep << "data:";
  for (uint32_t off = 0; off < 16; off += 4) {
    std::snprintf(buf, sizeof buf, " [+%u]=0x%08x", off,
                  p.load32(kDataBase + off));
    rep << buf;
  }
  rep << "\n";
  std::cout << rep.str();

  return (outcome == "exited" || outcome == "sleeping") ? 0 : 1;
}

// ---------------------------------------------------------------- evolve

// population files keep their in-world names where the filesystem allows;
// anything else is escaped byte-wise, and collisions get a numeric suffix
std::string host_name(const std::string& name, std::map<std::string, int>& seen) {
  std::string s;
  for (unsigned char c : name) {
    if (std::isalnum(c) || c == '.' || c == '_' || c == '-') {
      s += static_cast<char>(c);
    } else {
      char b[4];
      std::snprintf(b, sizeof b, "%%%02X", c);
      s += b;
    }
  }
  if (s.empty()) s = "unnamed";
  int n = seen[s]++;
  if (n > 0) s += "~" + std::to_string(n);
  return s;
}

int cmd_evolve(uint64_t seed, const std::string& cfg_path, uint64_t ticks,
               const std::string& out_dir, uint32_t bootstrap_k,
               const std::string& genome_path, uint64_t snap_every) {
  GuardConfig cfg;
  if (!cfg_path.empty()) {
    try {
      cfg = parse_guard_config(read_text(cfg_path));
    } catch (const std::exception& e) {
      std::cerr << cfg_path << ": " << e.what() << "\n";
      return 2;
    }
  }
  std::vector<uint8_t> seed_bytes;
  if (genome_path.empty()) {
    seed_bytes = emit_genome(build_ancestor());
  } else {
    seed_bytes = read_binary(genome_path);
    try {
      parse_genome(seed_bytes);
    } catch (const GenomeError& e) {
      std::cerr << genome_path << ": " << e.what() << "\n";
      return 2;
    }
  }

  fs::create_directories(out_dir);
  World w(cfg, seed);
  w.bootstrap(seed_bytes, bootstrap_k);

  std::ofstream events(fs::path(out_dir) / "events.jsonl",
                       std::ios::binary | std::ios::trunc);
  if (!events) throw std::runtime_error("cannot write event log in " + out_dir);

  std::string chunk;
  for (uint64_t t = 1; t <= ticks; ++t) {
    w.tick();
    chunk.clear();
    w.drain_log(chunk);
    events << chunk;
    if (snap_every > 0 && t % snap_every == 0) {
      w.snapshot(fs::path(out_dir) / ("snap_" + std::to_string(w.ticks())));
    }
    if (log_enabled() && t % 10000 == 0) {
      std::cerr << "evolve: tick " << w.ticks() << " procs "
                << w.processes().size() << " files " << w.files().size()
                << " ops " << w.total_ops() << "\n";
    }
  }
  events.flush();
  if (!events) throw std::runtime_error("short write to event log");

  w.snapshot(fs::path(out_dir) / "final");

  fs::path pop_dir = fs::path(out_dir) / "population";
  fs::create_directories(pop_dir);
  std::map<std::string, int> seen;
  for (const auto& [name, file] : w.files()) {
    write_binary(pop_dir / host_name(name, seen), file.bytes);
  }

  std::cerr << "evolve: " << w.ticks() << " ticks, " << w.processes().size()
            << " processes, " << w.files().size() << " files ("
            << w.files_created() << " created), " << w.total_ops()
            << " micro-ops\n";
  return 0;
}

// ---------------------------------------------------------------- scan

int cmd_scan(const std::string& region_str, bool control,
             const std::string& genome_path, const std::string& out_path,
             uint64_t budget, uint64_t seed, unsigned threads,
             bool sample_bits) {
  Region region;
  if (region_str == "meta-code") {
    region = Region::MetaCode;
  } else if (region_str == "alphabet") {
    region = Region::Alphabet;
  } else if (region_str == "data") {
    region = Region::Data;
  } else if (region_str == "padding") {
    region = Region::Padding;
  } else if (region_str == "whole") {
    region = Region::Whole;
  } else {
    std::cerr << "scan: unknown region '" << region_str << "'\n";
    return 2;
  }
  Genome g = genome_path.empty() ? build_ancestor() : load_genome(genome_path);

  ScanOptions opt;
  opt.viability_budget = budget;
  opt.threads = threads;
  opt.base_seed = seed;
  opt.exhaustive_bits = !sample_bits;

  ScanResult res = robustness_scan(g, region, opt);
  std::string csv = scan_csv(res);
  char line[128];
  std::snprintf(line, sizeof line, "R(%s) = %.6f (%zu mutants, %llu viable)\n",
                region_str.c_str(), res.robustness, res.rows.size(),
                static_cast<unsigned long long>(res.viable));
  std::cerr << line;

  if (control) {
    ScanOptions copt = opt;
    copt.exhaustive_bits = false;  // one bit per byte matches the region count
    ScanResult micro = micro_control_scan(g, copt);
    std::string mcsv = scan_csv(micro);
    csv += mcsv.substr(mcsv.find('\n') + 1);  // shared header
    std::snprintf(line, sizeof line, "R(micro) = %.6f (%zu mutants, %llu viable)\n",
                  micro.robustness, micro.rows.size(),
                  static_cast<unsigned long long>(micro.viable));
    std::cerr << line;
  }
  write_report(out_path, csv);
  return 0;
}

// ---------------------------------------------------------------- analyze

std::vector<NamedBytes> load_population(const std::string& dir,
                                        size_t want_size) {
  std::vector<NamedBytes> pop;
  size_t skipped = 0;
  std::vector<fs::path> paths;
  for (const auto& ent : fs::directory_iterator(dir)) {
    if (ent.is_regular_file()) paths.push_back(ent.path());
  }
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) {
    auto bytes = read_binary(p);
    if (bytes.size() != want_size) {
      ++skipped;
      continue;
    }
    pop.emplace_back(p.filename().string(), std::move(bytes));
  }
  if (skipped > 0) {
    std::cerr << "analyze: skipped " << skipped
              << " file(s) whose size differs from the ancestor\n";
  }
  return pop;
}

int cmd_analyze(const std::string& report, const std::string& pop_dir,
                const std::string& ancestor_path, const std::string& out_path,
                bool bits) {
  auto anc = read_binary(ancestor_path);
  auto pop = load_population(pop_dir, anc.size());
  if (pop.empty()) {
    std::cerr << "analyze: no population files of size " << anc.size()
              << " in " << pop_dir << "\n";
    return 2;
  }

  if (report == "hamming") {
    write_report(out_path, kinship_csv(kinship_matrix(pop, anc, bits)));
    return 0;
  }

  auto sites = mutation_distribution(pop, anc);
  if (report == "dist") {
    write_report(out_path, distribution_csv(sites));
    return 0;
  }

  static constexpr Region kRegions[] = {Region::MetaCode, Region::Alphabet,
                                        Region::Data, Region::Padding,
                                        Region::Whole};
  char row[128];
  if (report == "density") {
    std::string csv = "region,sites,bytes,density\n";
    for (Region r : kRegions) {
      auto [lo, hi] = region_interval(r);
      uint64_t n = sites_in_interval(sites, lo, hi, 0);
      std::snprintf(row, sizeof row, "%s,%llu,%u,%.9g\n",
                    std::string(region_name(r)).c_str(),
                    static_cast<unsigned long long>(n), hi - lo,
                    region_density(n, hi - lo));
      csv += row;
    }
    write_report(out_path, csv);
    return 0;
  }

  // robustness: mutation density of each region relative to padding, whose
  // bits never execute and so accumulate flips at the raw mutator rate
  auto [plo, phi] = region_interval(Region::Padding);
  double pad_density =
      region_density(sites_in_interval(sites, plo, phi, 0), phi - plo);
  if (pad_density == 0.0) {
    std::cerr << "analyze: padding carries no mutations yet; "
                 "no baseline for robustness\n";
    return 1;
  }
  std::string csv = "region,density,robustness\n";
  for (Region r : kRegions) {
    auto [lo, hi] = region_interval(r);
    double d = region_density(sites_in_interval(sites, lo, hi, 0), hi - lo);
    std::snprintf(row, sizeof row, "%s,%.9g,%.9g\n",
                  std::string(region_name(r)).c_str(), d,
                  region_robustness(d, pad_density));
    csv += row;
  }
  write_report(out_path, csv);
  return 0;
}

// ---------------------------------------------------------------- ancestor

int cmd_ancestor(const std::string& out_path, bool source) {
  if (source) {
    write_report(out_path, ancestor_source());
    return 0;
  }
  if (out_path.empty()) {
    std::cerr << "ancestor: -o FILE is required for the binary genome "
                 "(use --source for the listing)\n";
    return 2;
  }
  write_binary(out_path, emit_genome(build_ancestor()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rpw: genome assembler, organism runner, and world driver"};
  app.require_subcommand(1);
  int rc = 0;

  auto* c_asm = app.add_subcommand("asm", "assemble a listing into a genome");
  std::string asm_in, asm_out;
  c_asm->add_option("input", asm_in, "source listing")->required();
  c_asm->add_option("-o,--out", asm_out, "output genome file")->required();
  c_asm->callback([&] { rc = cmd_asm(asm_in, asm_out); });

  auto* c_dis = app.add_subcommand("disasm", "print a genome as a listing");
  std::string dis_in, dis_out;
  c_dis->add_option("input", dis_in, "genome file")->required();
  c_dis->add_option("-o,--out", dis_out, "output listing (default stdout)");
  c_dis->callback([&] { rc = cmd_disasm(dis_in, dis_out); });

  auto* c_run = app.add_subcommand("run", "execute one organism in isolation");
  std::string run_in;
  uint64_t run_budget = 10'000'000;  // a full replicator brood fits
  bool run_trace = false;
  c_run->add_option("genome", run_in, "genome file")->required();
  c_run->add_option("--budget", run_budget, "micro-op budget");
  c_run->add_flag("--trace", run_trace, "instruction trace to stderr");
  c_run->callback([&] { rc = cmd_run(run_in, run_budget, run_trace); });

  auto* c_evo = app.add_subcommand("evolve", "drive a world and record it");
  uint64_t evo_seed = 0, evo_ticks = 0, evo_snap = 0;
  uint32_t evo_k = 10;
  std::string evo_cfg, evo_out, evo_genome;
  c_evo->add_option("--seed", evo_seed, "world RNG seed")->required();
  c_evo->add_option("--ticks", evo_ticks, "ticks to run")->required();
  c_evo->add_option("--out", evo_out, "output directory")->required();
  c_evo->add_option("--config", evo_cfg, "guard config file (key=value)");
  c_evo->add_option("--bootstrap", evo_k, "seed population size");
  c_evo->add_option("--genome", evo_genome,
                    "seed genome (default: built-in replicator)");
  c_evo->add_option("--snapshot-every", evo_snap,
                    "snapshot period in ticks (0: final only)");
  c_evo->callback([&] {
    rc = cmd_evolve(evo_seed, evo_cfg, evo_ticks, evo_out, evo_k, evo_genome,
                    evo_snap);
  });

  auto* c_scan = app.add_subcommand("scan", "single-bit mutation viability scan");
  std::string scan_region, scan_genome, scan_out, scan_control;
  uint64_t scan_budget = 200'000, scan_seed = 1;
  unsigned scan_threads = 0;
  bool scan_sample = false;
  c_scan->add_option("--region", scan_region,
                     "meta-code|alphabet|data|padding|whole")
      ->required();
  c_scan->add_option("--control", scan_control,
                     "also scan a control target (only: micro)")
      ->check(CLI::IsMember({"micro"}));
  c_scan->add_option("--genome", scan_genome,
                     "genome file (default: built-in replicator)");
  c_scan->add_option("--out", scan_out, "CSV output file (default stdout)");
  c_scan->add_option("--budget", scan_budget, "per-mutant micro-op budget");
  c_scan->add_option("--seed", scan_seed, "base RNG seed for mutant worlds");
  c_scan->add_option("--threads", scan_threads, "worker threads (0: all cores)");
  c_scan->add_flag("--sample-bits", scan_sample,
                   "flip one bit per byte instead of all eight");
  c_scan->callback([&] {
    rc = cmd_scan(scan_region, !scan_control.empty(), scan_genome, scan_out,
                  scan_budget, scan_seed, scan_threads, scan_sample);
  });

  auto* c_ana = app.add_subcommand("analyze", "population CSV reports");
  std::string ana_report, ana_pop, ana_anc, ana_out;
  bool ana_bits = false;
  c_ana->add_option("report", ana_report, "hamming|dist|density|robustness")
      ->required()
      ->check(CLI::IsMember({"hamming", "dist", "density", "robustness"}));
  c_ana->add_option("--population", ana_pop, "directory of genome files")
      ->required();
  c_ana->add_option("--ancestor", ana_anc, "reference genome file")->required();
  c_ana->add_option("--out", ana_out, "CSV output file (default stdout)");
  c_ana->add_flag("--bits", ana_bits, "hamming distance in bits, not bytes");
  c_ana->callback(
      [&] { rc = cmd_analyze(ana_report, ana_pop, ana_anc, ana_out, ana_bits); });

  auto* c_anc = app.add_subcommand("ancestor", "emit the built-in replicator");
  std::string anc_out;
  bool anc_src = false;
  c_anc->add_option("-o,--out", anc_out, "output file");
  c_anc->add_flag("--source", anc_src, "emit the listing instead of the genome");
  c_anc->callback([&] { rc = cmd_ancestor(anc_out, anc_src); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int r = app.exit(e);
    return r == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "rpw: " << e.what() << "\n";
    return 2;
  }
  return rc;
}
