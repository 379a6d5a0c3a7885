#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rpw/chemistry.hpp"
#include "rpw/translator.hpp"

namespace rpw {

enum class FaultKind : uint8_t {
  None = 0,
  InvalidOpcode,
  MemoryOutOfBounds,
  DivideByZero,
  StackOverflow,
  StackUnderflow,
  BadSyscallArgs,
  BudgetExhausted,
};

std::string_view fault_name(FaultKind f);

// World-side services the syscall layer needs. Organism code never touches
// the host directly; every call routes through one of these.
class HostEnv {
 public:
  virtual ~HostEnv() = default;
  virtual uint64_t clock_ms() = 0;
  virtual bool file_exists(const std::string& name) = 0;
  virtual bool file_executing(const std::string& name) = 0;
  virtual uint32_t file_size(const std::string& name) = 0;
  virtual const std::vector<uint8_t>* file_bytes(const std::string& name) = 0;
  virtual bool copy_file(const std::string& src, const std::string& dst,
                         uint32_t creator_pid) = 0;
  // view flush; silently skipped for executing or vanished files
  virtual void write_back(const std::string& name,
                          std::span<const uint8_t> bytes) = 0;
  virtual bool queue_spawn(const std::string& name, uint32_t parent_pid) = 0;
};

struct HandleEntry {
  enum class Kind : uint8_t { File, Mapping };
  Kind kind = Kind::File;
  std::string file;
  bool operator==(const HandleEntry&) const = default;
};

struct ViewState {
  bool active = false;
  std::string file;
  uint32_t size = 0;
  bool operator==(const ViewState&) const = default;
};

struct ProcessState {
  std::array<uint8_t, kMemSize> mem{};
  RegisterFile regs;
  uint32_t ip = 0;
  uint32_t sp = kStackTop;
  uint32_t program_size = 0;
  uint64_t ops = 0;  // lifetime micro-ops executed
  std::array<uint64_t, kSysCount> sys_counts{};

  uint32_t pid = 0;
  std::string owning_file;
  uint64_t birth_ms = 0;
  uint64_t sleep_until_ms = 0;
  bool yielded = false;  // Sleep ends the current quantum

  std::map<uint32_t, HandleEntry> handles;
  uint32_t next_handle = 8;
  ViewState view;

  uint32_t load32(uint32_t addr) const;
  void store32(uint32_t addr, uint32_t v);
};

// image layout: code at 0, data at kDataBase, own name at kNameBase,
// exit sentinel under the initial stack pointer. A single RET byte is placed
// just past a short image so falling off the end returns instead of decoding
// zeroes. Throws std::invalid_argument when code/data exceed their caps.
ProcessState make_process(std::span<const uint8_t> code,
                          std::span<const uint8_t> data,
                          const std::string& own_name);

struct StepOut {
  enum class Kind : uint8_t { Ran, Exited, Faulted } kind = Kind::Ran;
  FaultKind fault = FaultKind::None;
};

StepOut step(ProcessState& s, HostEnv& env);

struct RunOut {
  enum class Kind : uint8_t { Budget, Exited, Faulted, Yielded } kind;
  FaultKind fault = FaultKind::None;
  uint64_t steps = 0;
};

RunOut run(ProcessState& s, HostEnv& env, uint64_t max_steps,
           std::ostream* trace = nullptr);

// minimal env for isolated runs: no files, clock pinned at 0
class NullEnv : public HostEnv {
 public:
  uint64_t clock_ms() override { return 0; }
  bool file_exists(const std::string&) override { return false; }
  bool file_executing(const std::string&) override { return false; }
  uint32_t file_size(const std::string&) override { return 0; }
  const std::vector<uint8_t>* file_bytes(const std::string&) override {
    return nullptr;
  }
  bool copy_file(const std::string&, const std::string&, uint32_t) override {
    return false;
  }
  void write_back(const std::string&, std::span<const uint8_t>) override {}
  bool queue_spawn(const std::string&, uint32_t) override { return false; }
};

}  // namespace rpw
