#include <doctest.h>

#include <json.hpp>
#include <rpw/assembler.hpp>
#include <rpw/world.hpp>

#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace rpw;
using nlohmann::json;

namespace {

uint32_t rd32(const std::array<uint8_t, kDataSize>& d, size_t off) {
  return static_cast<uint32_t>(d[off]) | (static_cast<uint32_t>(d[off + 1]) << 8) |
         (static_cast<uint32_t>(d[off + 2]) << 16) |
         (static_cast<uint32_t>(d[off + 3]) << 24);
}

struct Interval {
  uint32_t start, len, threshold;
};

// independently derived: thresholds are round(65536 * rate) for the five
// per-child bit-flip rates 1/900, 1/1800, 1/2666, 1/1500, 1/1820
const Interval kRows[5] = {
    {32, 2100, 73},
    {32, 4148, 36},
    {0, 6144, 25},
    {32, 2100, 44},
    {32, 2100, 36},
};

std::vector<json> parse_events(const std::string& log) {
  std::vector<json> out;
  std::istringstream is(log);
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) out.push_back(json::parse(line));
  return out;
}

}  // namespace

TEST_CASE("replicator source assembles within the program region") {
  const std::string src = ancestor_source();
  auto codons = assemble(src);
  CHECK(codons.size() <= kMetaSize);
  CHECK(codons.size() > 300);  // nontrivial program
  MESSAGE("replicator codons: ", codons.size());

  Genome g = build_ancestor();
  for (size_t i = 0; i < codons.size(); ++i) REQUIRE(g.meta[i] == codons[i]);
  for (size_t i = codons.size(); i < kMetaSize; ++i)
    REQUIRE(g.meta[i] == kPadCodon);

  auto bytes = emit_genome(g);
  CHECK(parse_genome(bytes) == g);
}

TEST_CASE("replicator data block carries the heritable constants") {
  Genome g = build_ancestor();
  CHECK(rd32(g.data, 4) == 0);            // random state, reseeded at birth
  CHECK(rd32(g.data, 8) == 1103515245);   // multiplier
  CHECK(rd32(g.data, 12) == 12345);       // increment
  for (size_t k = 0; k < 5; ++k) {
    CHECK(rd32(g.data, 16 + k * 12 + 0) == kRows[k].start);
    CHECK(rd32(g.data, 16 + k * 12 + 4) == kRows[k].len);
    CHECK(rd32(g.data, 16 + k * 12 + 8) == kRows[k].threshold);
  }
  // row list ends where the program expects it
  CHECK(16 + 5 * 12 == 0x4C);
}

TEST_CASE("replicator spawns five mutated children and exits") {
  GuardConfig cfg;
  cfg.instruction_budget = 10'000'000;
  World w(cfg, 42);
  const auto seed_bytes = emit_genome(build_ancestor());
  w.add_file("seed_00.rpw", seed_bytes);
  w.queue_spawn_at("seed_00.rpw", 1, 0);

  std::vector<std::string> child_order;                    // creation order
  std::map<std::string, std::vector<uint8_t>> birth_bytes;  // at first spawn
  std::string death_cause;
  bool ancestor_alive = true;

  std::string chunk;
  int grace = 3;  // the last hatchling spawns on the tick after the exit
  for (int t = 0; t < 25'000 && (ancestor_alive || grace-- > 0); ++t) {
    w.tick();
    chunk.clear();
    w.drain_log(chunk);
    for (const auto& ev : parse_events(chunk)) {
      const std::string kind = ev.at("ev");
      if (kind == "file_created" && ev.at("creator") == 1) {
        child_order.push_back(ev.at("file"));
      } else if (kind == "spawn" && ev.value("parent", 0) == 1) {
        const std::string f = ev.at("file");
        if (!birth_bytes.contains(f)) {
          auto it = w.files().find(f);
          REQUIRE(it != w.files().end());
          birth_bytes[f] = it->second.bytes;
        }
      } else if (kind == "death" && ev.at("pid") == 1) {
        death_cause = ev.at("cause");
        ancestor_alive = false;
      }
    }
  }

  REQUIRE_FALSE(ancestor_alive);
  CHECK(death_cause == "exit");
  REQUIRE(child_order.size() == 5);
  REQUIRE(birth_bytes.size() == 5);

  std::set<std::string> names(child_order.begin(), child_order.end());
  CHECK(names.size() == 5);
  for (const auto& n : child_order) {
    REQUIRE(n.size() == 12);
    CHECK(n.substr(8) == ".rpw");
    for (size_t i = 0; i < 8; ++i) {
      CHECK(n[i] >= 'a');
      CHECK(n[i] <= 'z');
    }
  }

  // each child differs from the parent only by single-bit flips inside its row
  size_t total_flips = 0;
  for (size_t k = 0; k < 5; ++k) {
    const auto& child = birth_bytes.at(child_order[k]);
    REQUIRE(child.size() == seed_bytes.size());
    const uint32_t lo = kRows[k].start;
    const uint32_t hi = kRows[k].start + kRows[k].len;
    for (size_t i = 0; i < child.size(); ++i) {
      uint8_t diff = child[i] ^ seed_bytes[i];
      if (diff == 0) continue;
      ++total_flips;
      CAPTURE(k);
      CAPTURE(i);
      CHECK((diff & (diff - 1)) == 0);  // exactly one bit
      CHECK(i >= lo);
      CHECK(i < hi);
    }
  }
  CHECK(total_flips > 0);
  MESSAGE("total flips across the brood: ", total_flips);
}

TEST_CASE("identical worlds replay identical logs") {
  auto run_world = [](int ticks) {
    GuardConfig cfg;
    cfg.instruction_budget = 2'000'000;
    World w(cfg, 7);
    w.bootstrap(emit_genome(build_ancestor()), 2);
    for (int t = 0; t < ticks; ++t) w.tick();
    return w.log();
  };
  const std::string a = run_world(600);
  const std::string b = run_world(600);
  CHECK(a == b);
  CHECK(a.find("file_created") != std::string::npos);
}
