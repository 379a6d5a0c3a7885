#include "rpw/vm.hpp"

#include <cinttypes>
#include <cstdio>
#include <stdexcept>

namespace rpw {

std::string_view fault_name(FaultKind f) {
  switch (f) {
    case FaultKind::None: return "none";
    case FaultKind::InvalidOpcode: return "invalid_opcode";
    case FaultKind::MemoryOutOfBounds: return "memory_out_of_bounds";
    case FaultKind::DivideByZero: return "divide_by_zero";
    case FaultKind::StackOverflow: return "stack_overflow";
    case FaultKind::StackUnderflow: return "stack_underflow";
    case FaultKind::BadSyscallArgs: return "bad_syscall_args";
    case FaultKind::BudgetExhausted: return "budget_exhausted";
  }
  return "?";
}

uint32_t ProcessState::load32(uint32_t addr) const {
  return static_cast<uint32_t>(mem[addr]) |
         (static_cast<uint32_t>(mem[addr + 1]) << 8) |
         (static_cast<uint32_t>(mem[addr + 2]) << 16) |
         (static_cast<uint32_t>(mem[addr + 3]) << 24);
}

void ProcessState::store32(uint32_t addr, uint32_t v) {
  mem[addr] = static_cast<uint8_t>(v);
  mem[addr + 1] = static_cast<uint8_t>(v >> 8);
  mem[addr + 2] = static_cast<uint8_t>(v >> 16);
  mem[addr + 3] = static_cast<uint8_t>(v >> 24);
}

ProcessState make_process(std::span<const uint8_t> code,
                          std::span<const uint8_t> data,
                          const std::string& own_name) {
  if (code.size() > kCodeCap) throw std::invalid_argument("code exceeds 0x5000");
  if (data.size() > kDataCap) throw std::invalid_argument("data exceeds 0x1000");

  ProcessState s;
  std::copy(code.begin(), code.end(), s.mem.begin());
  s.program_size = static_cast<uint32_t>(code.size());
  if (s.program_size < kCodeCap)
    s.mem[s.program_size] = static_cast<uint8_t>(Op::Ret);  // end-of-image return
  std::copy(data.begin(), data.end(), s.mem.begin() + kDataBase);

  size_t n = std::min(own_name.size(), static_cast<size_t>(kNameCap - 1));
  std::copy_n(own_name.begin(), n, s.mem.begin() + kNameBase);
  s.mem[kNameBase + n] = 0;

  s.sp = kStackTop;
  s.store32(s.sp, kExitSentinel);
  s.ip = 0;
  return s;
}

namespace {

bool push32(ProcessState& s, uint32_t v) {
  if (s.sp < kStackFloor + 4) return false;
  s.sp -= 4;
  s.store32(s.sp, v);
  return true;
}

bool pop32(ProcessState& s, uint32_t& v) {
  if (s.sp > kStackTop) return false;
  v = s.load32(s.sp);
  s.sp += 4;
  return true;
}

// NUL-terminated name at addr: 1..kMaxFileName bytes, fully in memory
bool read_name(const ProcessState& s, uint32_t addr, std::string& out) {
  out.clear();
  for (uint32_t i = 0; i <= kMaxFileName; ++i) {
    uint64_t a = static_cast<uint64_t>(addr) + i;
    if (a >= kMemSize) return false;
    uint8_t b = s.mem[a];
    if (b == 0) return !out.empty();
    out.push_back(static_cast<char>(b));
  }
  return false;  // unterminated within the limit
}

StepOut fault(FaultKind f) { return {StepOut::Kind::Faulted, f}; }

StepOut do_syscall(ProcessState& s, HostEnv& env, uint8_t n) {
  if (n >= kSysCount) return fault(FaultKind::BadSyscallArgs);
  const Sys call = static_cast<Sys>(n);
  s.sys_counts[n]++;

  // callee pops its arguments; first pop is the first argument
  uint32_t arg0 = 0, arg1 = 0;
  const int argc = sys_arg_count(call);
  if (argc >= 1 && !pop32(s, arg0)) return fault(FaultKind::BadSyscallArgs);
  if (argc >= 2 && !pop32(s, arg1)) return fault(FaultKind::BadSyscallArgs);

  uint32_t& ret = s.regs.bc1;
  std::string nm, nm2;
  switch (call) {
    case Sys::GetTickCount:
      ret = static_cast<uint32_t>(env.clock_ms());
      break;
    case Sys::GetCommandLine:
      ret = kNameBase;
      break;
    case Sys::CopyFile:
      // arg0 = source name ptr, arg1 = destination name ptr
      ret = (read_name(s, arg0, nm) && read_name(s, arg1, nm2) &&
             env.copy_file(nm, nm2, s.pid))
                ? 1
                : 0;
      break;
    case Sys::CreateFile:
      // open-existing only
      if (read_name(s, arg0, nm) && env.file_exists(nm)) {
        uint32_t h = s.next_handle;
        s.next_handle += 4;
        s.handles[h] = {HandleEntry::Kind::File, nm};
        ret = h;
      } else {
        ret = 0;
      }
      break;
    case Sys::GetFileSize: {
      auto it = s.handles.find(arg0);
      if (it != s.handles.end() && it->second.kind == HandleEntry::Kind::File &&
          env.file_exists(it->second.file))
        ret = env.file_size(it->second.file);
      else
        ret = 0xFFFFFFFF;
      break;
    }
    case Sys::CreateFileMapping: {
      auto it = s.handles.find(arg0);
      if (it != s.handles.end() && it->second.kind == HandleEntry::Kind::File &&
          env.file_exists(it->second.file)) {
        uint32_t h = s.next_handle;
        s.next_handle += 4;
        s.handles[h] = {HandleEntry::Kind::Mapping, it->second.file};
        ret = h;
      } else {
        ret = 0;
      }
      break;
    }
    case Sys::MapViewOfFile: {
      auto it = s.handles.find(arg0);
      ret = 0;
      if (it != s.handles.end() && it->second.kind == HandleEntry::Kind::Mapping &&
          !s.view.active) {
        const std::vector<uint8_t>* bytes = env.file_bytes(it->second.file);
        if (bytes && bytes->size() <= kViewCap) {
          std::copy(bytes->begin(), bytes->end(), s.mem.begin() + kViewBase);
          s.view = {true, it->second.file, static_cast<uint32_t>(bytes->size())};
          ret = kViewBase;
        }
      }
      break;
    }
    case Sys::CreateProcess:
      ret = (read_name(s, arg0, nm) && env.file_exists(nm) &&
             env.queue_spawn(nm, s.pid))
                ? 1
                : 0;
      break;
    case Sys::UnmapViewOfFile:
      if (arg0 == kViewBase && s.view.active) {
        env.write_back(s.view.file,
                       std::span<const uint8_t>(s.mem.data() + kViewBase,
                                                s.view.size));
        s.view = {};
        ret = 1;
      } else {
        ret = 0;
      }
      break;
    case Sys::CloseHandle:
      ret = s.handles.erase(arg0) ? 1 : 0;
      break;
    case Sys::Sleep:
      if (arg0 > 0) {
        s.sleep_until_ms = env.clock_ms() + arg0;
        s.yielded = true;
      }
      ret = 0;
      break;
  }
  return {StepOut::Kind::Ran, FaultKind::None};
}

}  // namespace

StepOut step(ProcessState& s, HostEnv& env) {
  MicroOp mo = decode_one(std::span<const uint8_t>(s.mem.data(), kMemSize), s.ip);
  if (!mo.valid) {
    const int len = op_length(s.mem[s.ip]);
    if (len == 0) return fault(FaultKind::InvalidOpcode);  // junk byte
    if (s.ip + static_cast<uint32_t>(len) > kMemSize)
      return fault(FaultKind::MemoryOutOfBounds);  // operand past memory end
    return fault(FaultKind::InvalidOpcode);        // bad MovRR register nibble
  }

  RegisterFile& r = s.regs;
  uint32_t next_ip = s.ip + mo.size;
  auto set_zf = [&](uint32_t v) { r.zf = (v == 0); };

  switch (mo.op) {
    case Op::Nop:
      break;
    case Op::MovRR:
      r.set(mo.dst, r.get(mo.src));
      break;
    case Op::MovImm:
      r.bc1 = mo.imm;
      break;
    case Op::AddImm:
      r.bc1 += mo.imm;
      set_zf(r.bc1);
      break;
    case Op::SubImm:
      r.bc1 -= mo.imm;
      set_zf(r.bc1);
      break;
    case Op::Add:
      r.bc1 += r.bc2;
      set_zf(r.bc1);
      break;
    case Op::Sub:
      r.bc1 -= r.bc2;
      set_zf(r.bc1);
      break;
    case Op::And:
      r.bc1 &= r.bc2;
      set_zf(r.bc1);
      break;
    case Op::Xor:
      r.bc1 ^= r.bc2;
      set_zf(r.bc1);
      break;
    case Op::Shl:
      r.bc1 <<= (r.bc2 & 31);
      set_zf(r.bc1);
      break;
    case Op::Shr:
      r.bc1 >>= (r.bc2 & 31);
      set_zf(r.bc1);
      break;
    case Op::Mul: {
      uint64_t p = static_cast<uint64_t>(r.a) * r.bc1;
      r.a = static_cast<uint32_t>(p);
      r.d = static_cast<uint32_t>(p >> 32);
      break;
    }
    case Op::Div: {
      if (r.bc1 == 0) return fault(FaultKind::DivideByZero);
      uint64_t dividend = (static_cast<uint64_t>(r.d) << 32) | r.a;
      uint64_t q = dividend / r.bc1;
      if (q > 0xFFFFFFFFull) return fault(FaultKind::DivideByZero);
      r.d = static_cast<uint32_t>(dividend % r.bc1);
      r.a = static_cast<uint32_t>(q);
      break;
    }
    case Op::Push:
      if (!push32(s, r.bc1)) return fault(FaultKind::StackOverflow);
      break;
    case Op::Pop: {
      uint32_t v;
      if (!pop32(s, v)) return fault(FaultKind::StackUnderflow);
      r.bc1 = v;
      break;
    }
    case Op::StoreB:
      if (r.ba1 >= kMemSize) return fault(FaultKind::MemoryOutOfBounds);
      s.mem[r.ba1] = static_cast<uint8_t>(r.bc1);
      break;
    case Op::StoreD:
      if (r.ba1 > kMemSize - 4) return fault(FaultKind::MemoryOutOfBounds);
      s.store32(r.ba1, r.bc1);
      break;
    case Op::LoadD:
      if (r.bc1 > kMemSize - 4) return fault(FaultKind::MemoryOutOfBounds);
      r.bc1 = s.load32(r.bc1);
      break;
    case Op::Jz:
    case Op::Jnz: {
      bool take = (mo.op == Op::Jz) ? r.zf : !r.zf;
      if (take) {
        int64_t t = static_cast<int64_t>(next_ip) + mo.rel;
        if (t < 0 || t >= kMemSize) return fault(FaultKind::MemoryOutOfBounds);
        next_ip = static_cast<uint32_t>(t);
      }
      break;
    }
    case Op::JmpInd:
      if (r.ba2 >= kMemSize) return fault(FaultKind::MemoryOutOfBounds);
      next_ip = r.ba2;
      break;
    case Op::Ret: {
      uint32_t target;
      if (!pop32(s, target)) return fault(FaultKind::StackUnderflow);
      if (target == kExitSentinel) return {StepOut::Kind::Exited, FaultKind::None};
      if (target >= kMemSize) return fault(FaultKind::MemoryOutOfBounds);
      next_ip = target;
      break;
    }
    case Op::GetIp:
      r.bc1 = s.ip + 1;
      break;
    case Op::Sys: {
      StepOut so = do_syscall(s, env, mo.sys);
      if (so.kind != StepOut::Kind::Ran) return so;
      break;
    }
  }

  if (next_ip >= kMemSize) return fault(FaultKind::MemoryOutOfBounds);
  s.ip = next_ip;
  return {StepOut::Kind::Ran, FaultKind::None};
}

RunOut run(ProcessState& s, HostEnv& env, uint64_t max_steps, std::ostream* trace) {
  RunOut out{RunOut::Kind::Budget, FaultKind::None, 0};
  while (out.steps < max_steps) {
    if (trace) {
      MicroOp mo =
          decode_one(std::span<const uint8_t>(s.mem.data(), kMemSize), s.ip);
      char line[160];
      std::snprintf(line, sizeof line,
                    "%06x  %-16s a=%08x b=%08x d=%08x bc1=%08x bc2=%08x "
                    "ba1=%08x ba2=%08x zf=%d sp=%04x\n",
                    s.ip, to_string(mo).c_str(), s.regs.a, s.regs.b, s.regs.d,
                    s.regs.bc1, s.regs.bc2, s.regs.ba1, s.regs.ba2,
                    s.regs.zf ? 1 : 0, s.sp);
      *trace << line;
    }
    StepOut so = step(s, env);
    ++out.steps;
    ++s.ops;
    if (so.kind == StepOut::Kind::Exited) {
      out.kind = RunOut::Kind::Exited;
      return out;
    }
    if (so.kind == StepOut::Kind::Faulted) {
      out.kind = RunOut::Kind::Faulted;
      out.fault = so.fault;
      return out;
    }
    if (s.yielded) {
      s.yielded = false;
      out.kind = RunOut::Kind::Yielded;
      return out;
    }
  }
  out.kind = RunOut::Kind::Budget;
  return out;
}

}  // namespace rpw
