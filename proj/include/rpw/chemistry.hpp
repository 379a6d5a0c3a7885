#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rpw {

// ---- machine geometry ------------------------------------------------------

inline constexpr uint32_t kMemSize = 0x10000;      // 64 KiB flat per process
inline constexpr uint32_t kCodeCap = 0x5000;       // program image limit
inline constexpr uint32_t kDataBase = 0x5000;      // data region
inline constexpr uint32_t kDataCap = 0x1000;
inline constexpr uint32_t kNameBase = 0x5F00;      // own filename, NUL-terminated
inline constexpr uint32_t kNameCap = 0x100;
inline constexpr uint32_t kViewBase = 0x6000;      // file mapping window
inline constexpr uint32_t kViewCap = 0x2000;
inline constexpr uint32_t kStackFloor = 0x8000;    // sp may not descend past this
inline constexpr uint32_t kStackTop = 0xFFFC;      // initial sp; sentinel lives here
inline constexpr uint32_t kExitSentinel = 0xFFFFFFFF;
inline constexpr uint32_t kMaxFileName = 64;

// ---- micro instruction set -------------------------------------------------

enum class Op : uint8_t {
  Nop = 0x90,
  MovRR = 0x10,   // +1 operand byte, dst nibble | src nibble
  MovImm = 0x20,  // BC1 = imm32
  AddImm = 0x21,  // BC1 += imm32, sets ZF
  SubImm = 0x22,  // BC1 -= imm32, sets ZF
  Add = 0x30,     // BC1 += BC2, sets ZF
  Sub = 0x31,
  And = 0x32,
  Xor = 0x33,
  Shl = 0x34,     // BC1 <<= (BC2 & 31), sets ZF
  Shr = 0x35,
  Mul = 0x36,     // RegD:RegA = RegA * BC1, flags untouched
  Div = 0x37,     // RegA = RegD:RegA / BC1, RegD = remainder; faults on 0 or overflow
  Push = 0x40,    // BC1
  Pop = 0x41,     // BC1
  StoreB = 0x50,  // mem8[BA1] = BC1 & 0xFF
  StoreD = 0x51,  // mem32[BA1] = BC1
  LoadD = 0x52,   // BC1 = mem32[BC1]
  Jz = 0x60,      // +rel8, relative to following instruction
  Jnz = 0x61,
  JmpInd = 0x62,  // ip = BA2
  Ret = 0x63,     // pop target; sentinel exits
  GetIp = 0x65,   // BC1 = address after this instruction
  Sys = 0x70,     // +1 call-number byte
};

enum class Reg : uint8_t { A = 0, B = 1, D = 2, BC1 = 3, BC2 = 4, BA1 = 5, BA2 = 6 };
inline constexpr int kRegCount = 7;

std::string_view reg_name(Reg r);

struct RegisterFile {
  uint32_t a = 0, b = 0, d = 0, bc1 = 0, bc2 = 0, ba1 = 0, ba2 = 0;
  bool zf = false;

  uint32_t get(Reg r) const;
  void set(Reg r, uint32_t v);
  bool operator==(const RegisterFile&) const = default;
};

// Decoded form of one micro instruction. Decode is total: unknown opcodes,
// bad MovRR operands and truncated immediates come back with valid=false and
// size covering the offending bytes, so every byte sequence decodes.
struct MicroOp {
  Op op = Op::Nop;
  Reg dst = Reg::A;
  Reg src = Reg::A;
  uint32_t imm = 0;
  int8_t rel = 0;
  uint8_t sys = 0;
  uint8_t size = 1;
  bool valid = true;
  uint8_t raw = 0;  // first byte when invalid
  bool operator==(const MicroOp&) const = default;
};

// encoded length for a known opcode byte, 0 for bytes outside the set
int op_length(uint8_t b);

MicroOp decode_one(std::span<const uint8_t> code, size_t pos);
std::vector<MicroOp> decode_all(std::span<const uint8_t> code);
void encode(const MicroOp& mo, std::vector<uint8_t>& out);
std::string to_string(const MicroOp& mo);

// ---- syscall surface -------------------------------------------------------

enum class Sys : uint8_t {
  GetTickCount = 0,
  GetCommandLine = 1,
  CopyFile = 2,
  CreateFile = 3,
  GetFileSize = 4,
  CreateFileMapping = 5,
  MapViewOfFile = 6,
  CreateProcess = 7,
  UnmapViewOfFile = 8,
  CloseHandle = 9,
  Sleep = 10,
};
inline constexpr int kSysCount = 11;

std::string_view sys_name(Sys s);
int sys_arg_count(Sys s);

// ---- mnemonic layer --------------------------------------------------------

inline constexpr size_t kEntrySize = 8;        // alphabet slot width, bytes
inline constexpr size_t kAlphabetEntries = 256;
inline constexpr size_t kAlphabetSize = kEntrySize * kAlphabetEntries;

enum class Mn : uint8_t {
  NopsA, NopsB, NopsD, NopdA, NopdB, NopdD,
  SaveWrtOff, SaveJmpOff, WriteByte, WriteDWord,
  Save, AddSaved, SubSaved, GetDO, GetData, GetEIP,
  Zer0, Push, Pop, Mul, Div, Shl, Shr, And, Xor,
  Add0001, Add0004, Add0010, Add0040, Add0100, Add0400, Add1000, Add4000,
  Sub0001,
  JnzUp, JnzDown, JzDown, Ret,
  ApiGetTickCounter, ApiGetCommandLine, ApiCopyFile, ApiCreateFile,
  ApiGetFileSize, ApiCreateFileMapping, ApiMapViewOfFile, ApiCreateProcess,
  ApiUnMapViewOfFile, ApiCloseHandle, ApiSleep,
};
inline constexpr int kMnCount = 49;

std::string_view name(Mn m);
std::optional<Mn> mnemonic_from_name(std::string_view s);

// codon assignment is fixed: listing order, ascending from 0, with getEIP and
// JnzUp pinned at 24 and 25
uint8_t codon_of(Mn m);
std::optional<Mn> mnemonic_at(uint8_t codon);

// unpadded micro-code bytes for a mnemonic (1..5 bytes)
std::span<const uint8_t> semantics_of(Mn m);

struct Alphabet {
  std::array<uint8_t, kAlphabetSize> bytes{};

  std::span<const uint8_t, kEntrySize> entry(uint8_t codon) const {
    return std::span<const uint8_t, kEntrySize>(bytes.data() + codon * kEntrySize,
                                                kEntrySize);
  }
  std::span<uint8_t, kEntrySize> entry(uint8_t codon) {
    return std::span<uint8_t, kEntrySize>(bytes.data() + codon * kEntrySize,
                                          kEntrySize);
  }
  bool operator==(const Alphabet&) const = default;
};

const Alphabet& default_alphabet();

// human-readable codon table, one line per assigned codon
std::string codon_table_text();

}  // namespace rpw
