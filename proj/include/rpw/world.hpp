#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rpw/rng.hpp"
#include "rpw/translator.hpp"
#include "rpw/vm.hpp"

namespace rpw {

struct GuardConfig {
  uint32_t max_processes = 350;
  double overflow_kill_fraction = 0.75;
  double clone_check_probability = 1.0 / 59.0;
  uint64_t corpse_age_limit_ms = 30'000;   // non-executing files
  uint64_t process_age_limit_ms = 100'000;
  uint64_t instruction_budget = 5'000'000;  // lifetime micro-ops per process
  uint32_t quantum = 1000;                  // micro-ops per process per tick
  uint32_t ms_per_tick = 1;
  uint32_t extinction_floor = 1;  // guards never cull below this; faults ignore it

  bool operator==(const GuardConfig&) const = default;
};

// flat key=value text, '#' comments; unknown keys are errors
GuardConfig parse_guard_config(std::string_view text);
std::string guard_config_text(const GuardConfig& cfg);

struct VFile {
  std::vector<uint8_t> bytes;
  uint64_t created_ms = 0;
  uint32_t exec_count = 0;  // running instances; nonzero means write-protected
};

class World final : public HostEnv {
 public:
  World(GuardConfig cfg, uint64_t seed);

  void add_file(const std::string& name, std::vector<uint8_t> bytes);
  bool queue_spawn_at(const std::string& name, uint64_t tick, uint32_t parent);
  // K copies under distinct names, one spawn per tick starting at tick 1
  void bootstrap(std::span<const uint8_t> genome, uint32_t k);
  void tick();

  // scans: run raw micro-code as a process owned by an existing file
  uint32_t spawn_program(const MicroProgram& prog, const std::string& owner);

  uint64_t ticks() const { return tick_no_; }
  uint64_t total_ops() const { return total_ops_; }
  uint64_t files_created() const { return files_created_; }
  const std::map<std::string, VFile>& files() const { return files_; }
  const std::map<uint32_t, ProcessState>& processes() const { return procs_; }
  const GuardConfig& config() const { return cfg_; }
  const std::string& log() const { return log_; }
  void drain_log(std::string& out);  // append and clear
  const std::string& last_death_cause() const { return last_death_cause_; }

  void snapshot(const std::filesystem::path& dir) const;
  static World restore(const std::filesystem::path& dir);

  // HostEnv
  uint64_t clock_ms() override { return clock_ms_; }
  bool file_exists(const std::string& name) override;
  bool file_executing(const std::string& name) override;
  uint32_t file_size(const std::string& name) override;
  const std::vector<uint8_t>* file_bytes(const std::string& name) override;
  bool copy_file(const std::string& src, const std::string& dst,
                 uint32_t creator_pid) override;
  void write_back(const std::string& name,
                  std::span<const uint8_t> bytes) override;
  bool queue_spawn(const std::string& name, uint32_t parent_pid) override;

 private:
  struct SpawnReq {
    std::string file;
    uint64_t at_tick = 0;
    uint32_t parent = 0;
  };

  void apply_spawns();
  void run_quanta();
  void guard_multiple_instances();
  void guard_clones();
  void guard_reapers();
  void spawn_from_file(const SpawnReq& req);
  void kill(uint32_t pid, const std::string& cause);
  void delete_file(const std::string& name, const std::string& cause);
  bool may_cull() const;  // respects the extinction floor
  void log_event(const char* ev,
                 std::initializer_list<std::pair<const char*, std::string>> strs,
                 std::initializer_list<std::pair<const char*, uint64_t>> ints);

  GuardConfig cfg_;
  SplitMix64 rng_;
  uint64_t clock_ms_ = 0;
  uint64_t tick_no_ = 0;
  uint32_t next_pid_ = 1;
  uint64_t total_ops_ = 0;
  uint64_t files_created_ = 0;
  std::map<std::string, VFile> files_;
  std::map<uint32_t, ProcessState> procs_;
  std::deque<SpawnReq> spawn_queue_;
  std::string log_;
  std::string last_death_cause_;
};

}  // namespace rpw
