#include "rpw/assembler.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

namespace rpw {

namespace {

// add immediates are 4^0..4^7; greedy digit decomposition is minimal
constexpr uint32_t kTopDenom = 0x4000;
constexpr Mn kAddMn[8] = {Mn::Add4000, Mn::Add1000, Mn::Add0400, Mn::Add0100,
                          Mn::Add0040, Mn::Add0010, Mn::Add0004, Mn::Add0001};
constexpr uint32_t kAddVal[8] = {0x4000, 0x1000, 0x400, 0x100,
                                 0x40,   0x10,   4,     1};

uint64_t greedy_count(uint64_t t) {
  uint64_t n = t / kTopDenom;
  t %= kTopDenom;
  while (t) {
    n += t & 3;
    t >>= 2;
  }
  return n;
}

void emit_adds(uint64_t t, std::vector<Mn>& out) {
  for (int i = 0; i < 8; ++i) {
    while (t >= kAddVal[i]) {
      out.push_back(kAddMn[i]);
      t -= kAddVal[i];
    }
  }
}

// minimal greedy-adds-plus-subs plan; targets just above v often round a
// digit up and pay for it in sub0001s
struct SmallPlan {
  uint64_t target = 0;
  uint64_t subs = 0;
  uint64_t cost = ~0ull;
};

SmallPlan best_small(uint32_t v) {
  SmallPlan best;
  for (uint64_t t = v; t <= static_cast<uint64_t>(v) + 64; ++t) {
    uint64_t cost = greedy_count(t) + (t - v);
    if (cost < best.cost) best = {t, t - v, cost};
  }
  // wrap: count down from zero
  uint64_t down = (1ull << 32) - v;
  if (v != 0 && down <= 64 && down < best.cost) best = {0, down, down};
  return best;
}

}  // namespace

std::vector<Mn> addnumber_expansion(uint32_t v, const AsmOptions& opt) {
  SmallPlan plan = best_small(v);
  std::vector<Mn> out;
  if (plan.cost <= 24) {
    emit_adds(plan.target, out);
    out.insert(out.end(), plan.subs, Mn::Sub0001);
  } else {
    const uint32_t hi = v >> 16, lo = v & 0xFFFF;
    out.push_back(Mn::Push);
    out.push_back(Mn::Save);
    out.push_back(Mn::Xor);  // BC1 = 0
    emit_adds(hi, out);
    out.push_back(Mn::NopdD);  // RegD holds the high half
    out.push_back(Mn::Save);
    out.push_back(Mn::Xor);
    out.push_back(Mn::Add0010);
    out.push_back(Mn::Save);  // BC2 = 16
    out.push_back(Mn::NopsD);
    out.push_back(Mn::Shl);
    emit_adds(lo, out);
    out.push_back(Mn::Save);  // BC2 = v
    out.push_back(Mn::Pop);
    out.push_back(Mn::AddSaved);
  }
  if (out.size() > opt.max_addnumber_codons)
    throw AsmError(0, "addnumber expansion exceeds " +
                          std::to_string(opt.max_addnumber_codons) + " codons");
  return out;
}

namespace {

std::vector<std::string> tokens_of(std::string_view line) {
  if (auto sc = line.find(';'); sc != std::string_view::npos)
    line = line.substr(0, sc);
  std::vector<std::string> toks;
  std::istringstream is{std::string(line)};
  std::string t;
  while (is >> t) toks.push_back(t);
  return toks;
}

uint64_t parse_number(const std::string& s, int line) {
  size_t pos = 0;
  uint64_t v = 0;
  try {
    v = std::stoull(s, &pos, 0);
  } catch (...) {
    throw AsmError(line, "bad number '" + s + "'");
  }
  if (pos != s.size()) throw AsmError(line, "bad number '" + s + "'");
  return v;
}

std::vector<uint8_t> assemble_tokens(const std::vector<std::string>& toks,
                                     int line, const AsmOptions& opt) {
  std::vector<uint8_t> out;
  if (toks.empty()) return out;

  if (toks[0] == ".db") {
    if (toks.size() < 2) throw AsmError(line, ".db needs at least one byte");
    for (size_t i = 1; i < toks.size(); ++i) {
      uint64_t v = parse_number(toks[i].starts_with("0x") ? toks[i]
                                                          : "0x" + toks[i],
                                line);
      if (v > 0xFF) throw AsmError(line, ".db byte out of range");
      out.push_back(static_cast<uint8_t>(v));
    }
    return out;
  }

  if (toks[0] == "addnumber") {
    if (toks.size() != 2) throw AsmError(line, "addnumber needs one value");
    uint64_t v = parse_number(toks[1], line);
    if (v > 0xFFFFFFFFull) throw AsmError(line, "addnumber value out of range");
    std::vector<Mn> mns;
    try {
      mns = addnumber_expansion(static_cast<uint32_t>(v), opt);
    } catch (const AsmError& e) {
      throw AsmError(line, e.msg);
    }
    for (Mn m : mns) out.push_back(codon_of(m));
    return out;
  }

  if (toks.size() != 1)
    throw AsmError(line, "unexpected token '" + toks[1] + "'");
  auto m = mnemonic_from_name(toks[0]);
  if (!m) throw AsmError(line, "unknown mnemonic '" + toks[0] + "'");
  out.push_back(codon_of(*m));
  return out;
}

}  // namespace

std::vector<uint8_t> assemble_line(std::string_view line, const AsmOptions& opt) {
  return assemble_tokens(tokens_of(line), 0, opt);
}

std::vector<uint8_t> assemble(std::string_view src, const AsmOptions& opt) {
  std::vector<uint8_t> out;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= src.size()) {
    size_t nl = src.find('\n', pos);
    std::string_view line =
        src.substr(pos, nl == std::string_view::npos ? src.size() - pos
                                                     : nl - pos);
    ++line_no;
    auto codons = assemble_tokens(tokens_of(line), line_no, opt);
    out.insert(out.end(), codons.begin(), codons.end());
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

std::string disassemble(std::span<const uint8_t> codons, const Alphabet& alpha) {
  // canonical padded entries -> mnemonic
  static const std::map<std::array<uint8_t, kEntrySize>, Mn> canon = [] {
    std::map<std::array<uint8_t, kEntrySize>, Mn> m;
    const Alphabet& d = default_alphabet();
    for (int c = 0; c < static_cast<int>(kAlphabetEntries); ++c) {
      auto mn = mnemonic_at(static_cast<uint8_t>(c));
      if (!mn) continue;
      std::array<uint8_t, kEntrySize> key{};
      auto e = d.entry(static_cast<uint8_t>(c));
      std::copy(e.begin(), e.end(), key.begin());
      m[key] = *mn;
    }
    return m;
  }();

  std::string out;
  for (uint8_t c : codons) {
    std::array<uint8_t, kEntrySize> key{};
    auto e = alpha.entry(c);
    std::copy(e.begin(), e.end(), key.begin());
    auto it = canon.find(key);
    if (it != canon.end()) {
      out += name(it->second);
    } else {
      char buf[16];
      std::snprintf(buf, sizeof buf, ".db %02x", c);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

Genome assemble_genome(std::string_view src, const AsmOptions& opt,
                       std::span<const uint8_t> data) {
  std::vector<uint8_t> codons = assemble(src, opt);
  if (codons.size() > kMetaSize)
    throw AsmError(0, "program of " + std::to_string(codons.size()) +
                          " codons exceeds " + std::to_string(kMetaSize));
  if (data.size() > kDataSize) throw AsmError(0, "data exceeds region");

  Genome g;
  std::copy(codons.begin(), codons.end(), g.meta.begin());
  std::fill(g.meta.begin() + codons.size(), g.meta.end(), kPadCodon);
  g.alphabet = default_alphabet();
  std::copy(data.begin(), data.end(), g.data.begin());
  return g;
}

}  // namespace rpw
