// The ancestor: copies its own file under a fresh random name five times,
// maps each copy, sprays single-bit flips over one byte interval per child at
// that child's own rate, unmaps, and schedules it. State lives in the data
// region (heritable constants) and in scratch memory above it (per-run).
//
// Control flow has only the codon-level jumps to work with, so loop heads are
// parked in BA2 via getEIP arithmetic, and long-range jumps go through
// addresses computed once in the prologue and stored in scratch: push the
// target, ret into it.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpw/assembler.hpp"

namespace rpw {

namespace {

// data region layout (byte offsets)
//   +0   reserved
//   +4   RandomNumber: LCG state
//   +8   LCG multiplier
//   +12  LCG increment
//   +16  five (start, len, threshold) interval rows, 12 bytes each, end +76
// scratch (never part of the genome)
//   +0x100 threshold of the row in flight   +0x104 interval end (absolute)
//   +0x108 row cursor                        +0x10C file handle
//   +0x110 mapping handle                    +0x114 view base
//   +0x118 interval start (absolute)
//   +0x200 child name (8 chars), +0x208 ".rpw" and NUL
//   +0x400 flip-block address  +0x404 outer-loop address  +0x408 pass address
constexpr uint32_t kRowsOff = 0x10;
constexpr uint32_t kRowsEnd = 0x4C;
constexpr uint32_t kNameOff = 0x200;   // 0x5200 absolute
constexpr uint32_t kNameAbs = 0x5200;

struct Gen {
  const std::map<std::string, int>& prev;
  std::map<int, int>& widths;  // per addr_of site, survives layout passes
  std::vector<std::string> lines;
  std::map<std::string, int> labels;
  int pos = 0;
  int site = 0;
  AsmOptions opt;

  Gen(const std::map<std::string, int>& p, std::map<int, int>& w)
      : prev(p), widths(w) {}

  void raw(std::string line) {
    pos += static_cast<int>(assemble_line(line, opt).size());
    lines.push_back(std::move(line));
  }
  void note(const std::string& text) { raw("; " + text); }
  void m(std::string_view s) { raw(std::string(s)); }
  void addn(uint32_t v) { raw("addnumber " + std::to_string(v)); }
  void label(const std::string& n) { labels[n] = pos; }

  // BC1 = 0x5000 + off
  void data_ptr(uint32_t off) {
    m("getDO");
    if (off) addn(off);
  }
  void load_data(uint32_t off) { data_ptr(off); m("getdata"); }
  void set_ba1(uint32_t off) { data_ptr(off); m("saveWrtOff"); }

  // BC1 = absolute address of `target`'s slot. Distances come from the
  // previous layout pass; the caller iterates to a fixpoint. Every site is
  // padded with neutral codons out to the widest expansion it has needed so
  // far, so site widths only grow and the iteration cannot oscillate.
  void addr_of(const std::string& target) {
    const int my_site = site++;
    const int self = pos;  // getEIP slot
    auto it = prev.find(target);
    int64_t delta =
        it == prev.end() ? 0 : int64_t{it->second} * 8 - (int64_t{self} * 8 + 1);
    m("getEIP");
    int used = 0;
    if (delta > 0) {
      used = static_cast<int>(
          addnumber_expansion(static_cast<uint32_t>(delta), opt).size());
      addn(static_cast<uint32_t>(delta));
    }
    int& width = widths[my_site];
    width = std::max(width, used);
    for (int i = used; i < width; ++i) m(".db ff");
  }

  // store mem32[0x5000+off] = BC1, preserving BC1
  void store_bc1(uint32_t off) {
    m("push");
    set_ba1(off);
    m("pop");
    m("writeDWord");
  }
};

void emit_program(Gen& g) {
  g.note("reseed: RandomNumber ^= tick counter");
  g.m("CallAPIGetTickCounter");
  g.m("save");
  g.load_data(4);
  g.m("xor");
  g.store_bc1(4);

  g.note("static name suffix");
  const uint8_t suffix[5] = {'.', 'r', 'p', 'w', 0};
  for (uint32_t i = 0; i < 5; ++i) {
    g.set_ba1(kNameOff + 8 + i);
    g.m("zer0");
    if (suffix[i]) g.addn(suffix[i]);
    g.m("writeByte");
  }

  g.note("precompute jump targets");
  g.set_ba1(0x400);
  g.addr_of("flip");
  g.m("writeDWord");
  g.set_ba1(0x404);
  g.addr_of("outer");
  g.m("writeDWord");
  g.set_ba1(0x408);
  g.addr_of("pass");
  g.m("writeDWord");

  g.note("row cursor = first interval row");
  g.set_ba1(0x108);
  g.data_ptr(kRowsOff);
  g.m("writeDWord");

  // ---- one child per interval row -------------------------------------
  g.label("outer");
  g.note("stash this row's flip threshold");
  g.load_data(0x108);
  g.addn(8);
  g.m("getdata");
  g.store_bc1(0x100);

  g.note("interval start and end, file-relative");
  g.load_data(0x108);
  g.m("getdata");
  g.m("push");
  g.m("push");
  g.load_data(0x108);
  g.addn(4);
  g.m("getdata");
  g.m("save");
  g.m("pop");
  g.m("addsaved");
  g.m("push");  // stack: start, start+len

  g.note("random 8-letter name");
  g.data_ptr(kNameOff);
  g.m("nopdB");
  g.addr_of("chead");
  g.m("saveJmpOff");
  g.label("chead");
  g.load_data(4);
  g.m("nopdA");
  g.load_data(8);
  g.m("mul");
  g.load_data(12);
  g.m("save");
  g.m("nopsA");
  g.m("addsaved");
  g.store_bc1(4);
  g.m("nopdA");
  g.m("zer0");
  g.m("nopdD");
  g.addn(26);
  g.m("div");
  g.m("nopsD");
  g.addn(97);
  g.m("save");
  g.m("nopsB");
  g.m("saveWrtOff");
  g.m("zer0");
  g.m("addsaved");
  g.m("writeByte");
  g.m("nopsB");
  g.m("add0001");
  g.m("nopdB");
  g.m("save");
  g.data_ptr(kNameOff + 8);
  g.m("subsaved");
  g.m("JnzUp");

  g.note("copy self to the new name");
  g.m("zer0");
  g.addn(kNameAbs);
  g.m("push");
  g.m("CallAPIGetCommandLine");
  g.m("push");
  g.m("CallAPICopyFile");

  g.note("open, map");
  g.m("zer0");
  g.addn(kNameAbs);
  g.m("push");
  g.m("CallAPICreateFile");
  g.store_bc1(0x10C);
  g.load_data(0x10C);
  g.m("push");
  g.m("CallAPIGetFileSize");
  g.load_data(0x10C);
  g.m("push");
  g.m("CallAPICreateFileMapping");
  g.store_bc1(0x110);
  g.load_data(0x110);
  g.m("push");
  g.m("CallAPIMapViewOfFile");
  g.store_bc1(0x114);

  g.note("absolute interval bounds inside the view");
  g.m("save");      // BC2 = view base
  g.m("pop");       // BC1 = start+len
  g.m("addsaved");
  g.store_bc1(0x104);
  g.m("pop");       // BC1 = start
  g.m("addsaved");  // BC2 still the view base
  g.store_bc1(0x118);

  g.note("mutate the child");
  g.addr_of("after_call");
  g.m("push");
  g.load_data(0x408);
  g.m("push");
  g.m("ret");
  g.label("after_call");

  g.note("flush, close, hatch");
  g.load_data(0x114);
  g.m("push");
  g.m("CallAPIUnMapViewOfFile");
  g.load_data(0x110);
  g.m("push");
  g.m("CallAPICloseHandle");
  g.load_data(0x10C);
  g.m("push");
  g.m("CallAPICloseHandle");
  g.m("zer0");
  g.addn(kNameAbs);
  g.m("push");
  g.m("CallAPICreateProcess");

  g.note("next row; sleep out after the last");
  g.set_ba1(0x108);
  g.m("getdata");
  g.addn(12);
  g.m("writeDWord");
  g.m("save");
  g.data_ptr(kRowsEnd);
  g.m("subsaved");
  g.m("JnzDown");
  g.m("push");  // BC1 is 0 when the rows ran out
  g.m("CallAPISleep");
  g.m("ret");   // sentinel: exit
  g.m("ret");
  g.load_data(0x404);
  g.m("push");
  g.m("ret");  // back to outer

  // ---- pass: flip bits over [start, end) ------------------------------
  g.label("pass");
  g.note("p walks the interval; drawn bits flip mem[p]");
  g.load_data(0x118);
  g.m("sub0001");
  g.m("nopdB");
  g.addr_of("phead");
  g.m("saveJmpOff");
  g.label("phead");
  g.m("nopsB");
  g.m("add0001");
  g.m("nopdB");
  g.m("save");
  g.load_data(0x104);
  g.m("subsaved");
  g.m("JnzDown");
  g.m("ret");  // interval done: back to caller
  g.m("ret");
  g.m("ret");
  g.m("ret");

  g.note("per byte: draw, store, decide by hi16 / threshold");
  g.load_data(0x400);
  g.m("push");
  g.load_data(4);
  g.m("nopdA");
  g.load_data(8);
  g.m("mul");
  g.load_data(12);
  g.m("save");
  g.m("nopsA");
  g.m("addsaved");
  g.m("push");
  g.m("push");
  g.m("push");
  g.set_ba1(4);
  g.m("pop");
  g.m("writeDWord");
  g.m("zer0");
  g.m("add0010");
  g.m("save");
  g.m("pop");
  g.m("shr");
  g.m("nopdA");
  g.m("zer0");
  g.m("nopdD");
  g.load_data(0x100);
  g.m("div");
  g.m("nopsA");
  g.m("save");
  g.m("and");
  g.m("JnzDown");
  g.m("pop");  // flip path: the draw comes back
  g.m("ret");  // into the flip block
  g.m("ret");
  g.m("ret");
  g.m("pop");  // no flip: discard draw and flip address
  g.m("pop");
  g.m("JnzUp");

  g.label("flip");
  g.note("flip bit (draw & 7) of mem[p]");
  g.m("save");
  g.m("zer0");
  g.addn(7);
  g.m("and");
  g.m("save");
  g.m("zer0");
  g.m("add0001");
  g.m("shl");
  g.m("save");
  g.m("nopsB");
  g.m("saveWrtOff");
  g.m("getdata");
  g.m("xor");
  g.m("writeByte");
  g.m("zer0");
  g.m("add0001");
  g.m("JnzUp");
}

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

const std::vector<std::string>& fixed_lines() {
  static const std::vector<std::string> lines = [] {
    std::map<std::string, int> labels;
    std::map<int, int> widths;
    std::vector<std::string> prev_lines;
    for (int pass = 0; pass < 64; ++pass) {
      Gen g(labels, widths);
      emit_program(g);
      if (g.lines == prev_lines && g.labels == labels) return g.lines;
      prev_lines = std::move(g.lines);
      labels = std::move(g.labels);
    }
    throw std::logic_error("ancestor layout did not converge");
  }();
  return lines;
}

void wr32(std::array<uint8_t, kDataSize>& d, size_t off, uint32_t v) {
  d[off] = static_cast<uint8_t>(v);
  d[off + 1] = static_cast<uint8_t>(v >> 8);
  d[off + 2] = static_cast<uint8_t>(v >> 16);
  d[off + 3] = static_cast<uint8_t>(v >> 24);
}

}  // namespace

std::string ancestor_source() { return join(fixed_lines()); }

Genome build_ancestor() {
  // thresholds are round(2^16 * bit rate); rates follow the five children:
  // 1/900, 1/1800, 1/2666 over the whole file, 1/1500, 1/1820
  struct Row {
    uint32_t start, len, threshold;
  };
  constexpr Row rows[5] = {
      {kMetaOff, kMetaSize, 73},
      {kMetaOff, kMetaSize + kAlphabetSize, 36},
      {0, kGenomeSize, 25},
      {kMetaOff, kMetaSize, 44},
      {kMetaOff, kMetaSize, 36},
  };

  std::array<uint8_t, kDataSize> data{};
  wr32(data, 4, 0);           // RandomNumber
  wr32(data, 8, 1103515245);  // multiplier
  wr32(data, 12, 12345);      // increment
  for (size_t i = 0; i < 5; ++i) {
    wr32(data, kRowsOff + i * 12 + 0, rows[i].start);
    wr32(data, kRowsOff + i * 12 + 4, rows[i].len);
    wr32(data, kRowsOff + i * 12 + 8, rows[i].threshold);
  }

  return assemble_genome(ancestor_source(), {}, data);
}

}  // namespace rpw
