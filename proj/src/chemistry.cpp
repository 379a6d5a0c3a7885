#include "rpw/chemistry.hpp"

#include <cstdio>
#include <map>
#include <stdexcept>

namespace rpw {

std::string_view reg_name(Reg r) {
  switch (r) {
    case Reg::A: return "a";
    case Reg::B: return "b";
    case Reg::D: return "d";
    case Reg::BC1: return "bc1";
    case Reg::BC2: return "bc2";
    case Reg::BA1: return "ba1";
    case Reg::BA2: return "ba2";
  }
  return "?";
}

uint32_t RegisterFile::get(Reg r) const {
  switch (r) {
    case Reg::A: return a;
    case Reg::B: return b;
    case Reg::D: return d;
    case Reg::BC1: return bc1;
    case Reg::BC2: return bc2;
    case Reg::BA1: return ba1;
    case Reg::BA2: return ba2;
  }
  return 0;
}

void RegisterFile::set(Reg r, uint32_t v) {
  switch (r) {
    case Reg::A: a = v; break;
    case Reg::B: b = v; break;
    case Reg::D: d = v; break;
    case Reg::BC1: bc1 = v; break;
    case Reg::BC2: bc2 = v; break;
    case Reg::BA1: ba1 = v; break;
    case Reg::BA2: ba2 = v; break;
  }
}

// ---- decode / encode -------------------------------------------------------

int op_length(uint8_t b) {
  switch (static_cast<Op>(b)) {
    case Op::Nop: case Op::Add: case Op::Sub: case Op::And: case Op::Xor:
    case Op::Shl: case Op::Shr: case Op::Mul: case Op::Div:
    case Op::Push: case Op::Pop:
    case Op::StoreB: case Op::StoreD: case Op::LoadD:
    case Op::JmpInd: case Op::Ret: case Op::GetIp:
      return 1;
    case Op::MovRR: case Op::Jz: case Op::Jnz: case Op::Sys:
      return 2;
    case Op::MovImm: case Op::AddImm: case Op::SubImm:
      return 5;
  }
  return 0;
}

namespace {

MicroOp invalid_at(std::span<const uint8_t> code, size_t pos, size_t span_len) {
  MicroOp mo;
  mo.valid = false;
  mo.raw = code[pos];
  mo.size = static_cast<uint8_t>(span_len);
  return mo;
}

}  // namespace

MicroOp decode_one(std::span<const uint8_t> code, size_t pos) {
  const size_t avail = code.size() - pos;
  const uint8_t b = code[pos];
  const int len = op_length(b);
  if (len == 0) return invalid_at(code, pos, 1);
  if (static_cast<size_t>(len) > avail)
    return invalid_at(code, pos, avail);  // truncated operand swallows the tail

  MicroOp mo;
  mo.op = static_cast<Op>(b);
  mo.size = static_cast<uint8_t>(len);
  switch (mo.op) {
    case Op::MovRR: {
      const uint8_t operand = code[pos + 1];
      const uint8_t dst = operand >> 4, src = operand & 0x0F;
      if (dst >= kRegCount || src >= kRegCount) return invalid_at(code, pos, 2);
      mo.dst = static_cast<Reg>(dst);
      mo.src = static_cast<Reg>(src);
      break;
    }
    case Op::MovImm: case Op::AddImm: case Op::SubImm:
      mo.imm = static_cast<uint32_t>(code[pos + 1]) |
               (static_cast<uint32_t>(code[pos + 2]) << 8) |
               (static_cast<uint32_t>(code[pos + 3]) << 16) |
               (static_cast<uint32_t>(code[pos + 4]) << 24);
      break;
    case Op::Jz: case Op::Jnz:
      mo.rel = static_cast<int8_t>(code[pos + 1]);
      break;
    case Op::Sys:
      mo.sys = code[pos + 1];
      break;
    default:
      break;
  }
  return mo;
}

std::vector<MicroOp> decode_all(std::span<const uint8_t> code) {
  std::vector<MicroOp> out;
  size_t pos = 0;
  while (pos < code.size()) {
    MicroOp mo = decode_one(code, pos);
    pos += mo.size;
    out.push_back(mo);
  }
  return out;
}

void encode(const MicroOp& mo, std::vector<uint8_t>& out) {
  if (!mo.valid) {
    out.push_back(mo.raw);
    return;
  }
  out.push_back(static_cast<uint8_t>(mo.op));
  switch (mo.op) {
    case Op::MovRR:
      out.push_back(static_cast<uint8_t>(
          (static_cast<uint8_t>(mo.dst) << 4) | static_cast<uint8_t>(mo.src)));
      break;
    case Op::MovImm: case Op::AddImm: case Op::SubImm:
      out.push_back(static_cast<uint8_t>(mo.imm));
      out.push_back(static_cast<uint8_t>(mo.imm >> 8));
      out.push_back(static_cast<uint8_t>(mo.imm >> 16));
      out.push_back(static_cast<uint8_t>(mo.imm >> 24));
      break;
    case Op::Jz: case Op::Jnz:
      out.push_back(static_cast<uint8_t>(mo.rel));
      break;
    case Op::Sys:
      out.push_back(mo.sys);
      break;
    default:
      break;
  }
}

std::string to_string(const MicroOp& mo) {
  char buf[48];
  if (!mo.valid) {
    std::snprintf(buf, sizeof buf, "(bad %02x)", mo.raw);
    return buf;
  }
  switch (mo.op) {
    case Op::Nop: return "nop";
    case Op::MovRR:
      std::snprintf(buf, sizeof buf, "mov %s, %s",
                    std::string(reg_name(mo.dst)).c_str(),
                    std::string(reg_name(mo.src)).c_str());
      return buf;
    case Op::MovImm:
      std::snprintf(buf, sizeof buf, "movi 0x%08x", mo.imm); return buf;
    case Op::AddImm:
      std::snprintf(buf, sizeof buf, "addi 0x%08x", mo.imm); return buf;
    case Op::SubImm:
      std::snprintf(buf, sizeof buf, "subi 0x%08x", mo.imm); return buf;
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::And: return "and";
    case Op::Xor: return "xor";
    case Op::Shl: return "shl";
    case Op::Shr: return "shr";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Push: return "push";
    case Op::Pop: return "pop";
    case Op::StoreB: return "stb";
    case Op::StoreD: return "std";
    case Op::LoadD: return "ldd";
    case Op::Jz:
      std::snprintf(buf, sizeof buf, "jz %+d", mo.rel); return buf;
    case Op::Jnz:
      std::snprintf(buf, sizeof buf, "jnz %+d", mo.rel); return buf;
    case Op::JmpInd: return "jmpi";
    case Op::Ret: return "ret";
    case Op::GetIp: return "getip";
    case Op::Sys:
      std::snprintf(buf, sizeof buf, "sys %u", mo.sys); return buf;
  }
  return "?";
}

// ---- syscalls ---------------------------------------------------------------

std::string_view sys_name(Sys s) {
  switch (s) {
    case Sys::GetTickCount: return "GetTickCount";
    case Sys::GetCommandLine: return "GetCommandLine";
    case Sys::CopyFile: return "CopyFile";
    case Sys::CreateFile: return "CreateFile";
    case Sys::GetFileSize: return "GetFileSize";
    case Sys::CreateFileMapping: return "CreateFileMapping";
    case Sys::MapViewOfFile: return "MapViewOfFile";
    case Sys::CreateProcess: return "CreateProcess";
    case Sys::UnmapViewOfFile: return "UnmapViewOfFile";
    case Sys::CloseHandle: return "CloseHandle";
    case Sys::Sleep: return "Sleep";
  }
  return "?";
}

int sys_arg_count(Sys s) {
  switch (s) {
    case Sys::GetTickCount:
    case Sys::GetCommandLine:
      return 0;
    case Sys::CopyFile:
      return 2;
    default:
      return 1;
  }
}

// ---- mnemonic table ---------------------------------------------------------

namespace {

struct MnInfo {
  Mn m;
  const char* name;
  std::vector<uint8_t> micro;
};

std::vector<uint8_t> imm_op(Op op, uint32_t v) {
  std::vector<uint8_t> out;
  MicroOp mo;
  mo.op = op;
  mo.imm = v;
  encode(mo, out);
  return out;
}

std::vector<uint8_t> mov(Reg dst, Reg src) {
  return {static_cast<uint8_t>(Op::MovRR),
          static_cast<uint8_t>((static_cast<uint8_t>(dst) << 4) |
                               static_cast<uint8_t>(src))};
}

std::vector<uint8_t> api(uint8_t n) {
  return {static_cast<uint8_t>(Op::Sys), n};
}

// listing order; this order drives the codon assignment
const std::vector<MnInfo>& table() {
  static const std::vector<MnInfo> t = [] {
    using enum Mn;
    using enum Reg;
    std::vector<MnInfo> v;
    auto row = [&](Mn m, const char* n, std::vector<uint8_t> micro) {
      v.push_back({m, n, std::move(micro)});
    };
    row(NopsA, "nopsA", mov(BC1, A));
    row(NopsB, "nopsB", mov(BC1, B));
    row(NopsD, "nopsD", mov(BC1, D));
    row(NopdA, "nopdA", mov(A, BC1));
    row(NopdB, "nopdB", mov(B, BC1));
    row(NopdD, "nopdD", mov(D, BC1));
    row(SaveWrtOff, "saveWrtOff", mov(BA1, BC1));
    row(SaveJmpOff, "saveJmpOff", mov(BA2, BC1));
    row(WriteByte, "writeByte", {static_cast<uint8_t>(Op::StoreB)});
    row(WriteDWord, "writeDWord", {static_cast<uint8_t>(Op::StoreD)});
    row(Save, "save", mov(BC2, BC1));
    row(AddSaved, "addsaved", {static_cast<uint8_t>(Op::Add)});
    row(SubSaved, "subsaved", {static_cast<uint8_t>(Op::Sub)});
    row(GetDO, "getDO", imm_op(Op::MovImm, kDataBase));
    row(GetData, "getdata", {static_cast<uint8_t>(Op::LoadD)});
    row(GetEIP, "getEIP", {static_cast<uint8_t>(Op::GetIp)});
    row(Zer0, "zer0", imm_op(Op::MovImm, 0));
    row(Push, "push", {static_cast<uint8_t>(Op::Push)});
    row(Pop, "pop", {static_cast<uint8_t>(Op::Pop)});
    row(Mul, "mul", {static_cast<uint8_t>(Op::Mul)});
    row(Div, "div", {static_cast<uint8_t>(Op::Div)});
    row(Shl, "shl", {static_cast<uint8_t>(Op::Shl)});
    row(Shr, "shr", {static_cast<uint8_t>(Op::Shr)});
    row(And, "and", {static_cast<uint8_t>(Op::And)});
    row(Xor, "xor", {static_cast<uint8_t>(Op::Xor)});
    row(Add0001, "add0001", imm_op(Op::AddImm, 0x0001));
    row(Add0004, "add0004", imm_op(Op::AddImm, 0x0004));
    row(Add0010, "add0010", imm_op(Op::AddImm, 0x0010));
    row(Add0040, "add0040", imm_op(Op::AddImm, 0x0040));
    row(Add0100, "add0100", imm_op(Op::AddImm, 0x0100));
    row(Add0400, "add0400", imm_op(Op::AddImm, 0x0400));
    row(Add1000, "add1000", imm_op(Op::AddImm, 0x1000));
    row(Add4000, "add4000", imm_op(Op::AddImm, 0x4000));
    row(Sub0001, "sub0001", imm_op(Op::SubImm, 0x0001));
    // JnzUp: when ZF=1 skip the indirect jump, else land on it
    row(JnzUp, "JnzUp",
        {static_cast<uint8_t>(Op::Jz), 0x01, static_cast<uint8_t>(Op::JmpInd)});
    // down-jumps displace to the start of the slot five entries ahead:
    // rel8 = 38 measured from the byte after the branch
    row(JnzDown, "JnzDown", {static_cast<uint8_t>(Op::Jnz), 38});
    row(JzDown, "JzDown", {static_cast<uint8_t>(Op::Jz), 38});
    row(Ret, "ret", {static_cast<uint8_t>(Op::Ret)});
    row(ApiGetTickCounter, "CallAPIGetTickCounter", api(0));
    row(ApiGetCommandLine, "CallAPIGetCommandLine", api(1));
    row(ApiCopyFile, "CallAPICopyFile", api(2));
    row(ApiCreateFile, "CallAPICreateFile", api(3));
    row(ApiGetFileSize, "CallAPIGetFileSize", api(4));
    row(ApiCreateFileMapping, "CallAPICreateFileMapping", api(5));
    row(ApiMapViewOfFile, "CallAPIMapViewOfFile", api(6));
    row(ApiCreateProcess, "CallAPICreateProcess", api(7));
    row(ApiUnMapViewOfFile, "CallAPIUnMapViewOfFile", api(8));
    row(ApiCloseHandle, "CallAPICloseHandle", api(9));
    row(ApiSleep, "CallAPISleep", api(10));
    return v;
  }();
  return t;
}

struct CodonMaps {
  std::array<uint8_t, kMnCount> codon_of{};
  std::array<int16_t, kAlphabetEntries> mn_at{};  // -1 = unassigned

  CodonMaps() {
    mn_at.fill(-1);
    int next = 0;
    for (const MnInfo& info : table()) {
      int c;
      if (info.m == Mn::GetEIP) {
        c = 24;
      } else if (info.m == Mn::JnzUp) {
        c = 25;
      } else {
        while (next == 24 || next == 25) ++next;
        c = next++;
      }
      codon_of[static_cast<size_t>(info.m)] = static_cast<uint8_t>(c);
      mn_at[static_cast<size_t>(c)] = static_cast<int16_t>(info.m);
    }
  }
};

const CodonMaps& maps() {
  static const CodonMaps m;
  return m;
}

}  // namespace

std::string_view name(Mn m) {
  return table()[static_cast<size_t>(m)].name;
}

std::optional<Mn> mnemonic_from_name(std::string_view s) {
  for (const MnInfo& info : table())
    if (s == info.name) return info.m;
  return std::nullopt;
}

uint8_t codon_of(Mn m) { return maps().codon_of[static_cast<size_t>(m)]; }

std::optional<Mn> mnemonic_at(uint8_t codon) {
  int16_t m = maps().mn_at[codon];
  if (m < 0) return std::nullopt;
  return static_cast<Mn>(m);
}

std::span<const uint8_t> semantics_of(Mn m) {
  return table()[static_cast<size_t>(m)].micro;
}

const Alphabet& default_alphabet() {
  static const Alphabet a = [] {
    Alphabet alpha;
    alpha.bytes.fill(static_cast<uint8_t>(Op::Nop));
    for (const MnInfo& info : table()) {
      auto e = alpha.entry(codon_of(info.m));
      if (info.micro.size() > kEntrySize)
        throw std::logic_error("mnemonic micro-code exceeds entry size");
      std::copy(info.micro.begin(), info.micro.end(), e.begin());
    }
    return alpha;
  }();
  return a;
}

std::string codon_table_text() {
  std::string out = "# codon  mnemonic                micro-code (nop-padded to 8)\n";
  const Alphabet& alpha = default_alphabet();
  for (int c = 0; c < static_cast<int>(kAlphabetEntries); ++c) {
    auto m = mnemonic_at(static_cast<uint8_t>(c));
    if (!m) continue;
    char line[96];
    auto e = alpha.entry(static_cast<uint8_t>(c));
    std::snprintf(line, sizeof line,
                  "0x%02x     %-22s  %02x %02x %02x %02x %02x %02x %02x %02x\n",
                  c, std::string(name(*m)).c_str(), e[0], e[1], e[2], e[3], e[4],
                  e[5], e[6], e[7]);
    out += line;
  }
  return out;
}

}  // namespace rpw
