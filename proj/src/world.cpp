#include "rpw/world.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rpw {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string trim(std::string s) {
  size_t b = s.find_first_not_of(" \t\r");
  size_t e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

std::string to_hex(const std::string& s) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(s.size() * 2);
  for (unsigned char c : s) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 15]);
  }
  return out;
}

std::string from_hex(const std::string& s) {
  auto nib = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::runtime_error("bad hex");
  };
  if (s.size() % 2) throw std::runtime_error("bad hex");
  std::string out;
  out.reserve(s.size() / 2);
  for (size_t i = 0; i < s.size(); i += 2)
    out.push_back(static_cast<char>((nib(s[i]) << 4) | nib(s[i + 1])));
  return out;
}

void write_blob(const std::filesystem::path& p, std::span<const uint8_t> bytes) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
}

std::vector<uint8_t> read_blob(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + p.string());
  std::vector<uint8_t> out((std::istreambuf_iterator<char>(f)),
                           std::istreambuf_iterator<char>());
  return out;
}

}  // namespace

GuardConfig parse_guard_config(std::string_view text) {
  GuardConfig cfg;
  std::istringstream is{std::string(text)};
  std::string line;
  int ln = 0;
  while (std::getline(is, line)) {
    ++ln;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(ln) +
                               ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    try {
      if (key == "max_processes")
        cfg.max_processes = static_cast<uint32_t>(std::stoul(val));
      else if (key == "overflow_kill_fraction")
        cfg.overflow_kill_fraction = std::stod(val);
      else if (key == "clone_check_probability")
        cfg.clone_check_probability = std::stod(val);
      else if (key == "corpse_age_limit_ms")
        cfg.corpse_age_limit_ms = std::stoull(val);
      else if (key == "process_age_limit_ms")
        cfg.process_age_limit_ms = std::stoull(val);
      else if (key == "instruction_budget")
        cfg.instruction_budget = std::stoull(val);
      else if (key == "quantum")
        cfg.quantum = static_cast<uint32_t>(std::stoul(val));
      else if (key == "ms_per_tick")
        cfg.ms_per_tick = static_cast<uint32_t>(std::stoul(val));
      else if (key == "extinction_floor")
        cfg.extinction_floor = static_cast<uint32_t>(std::stoul(val));
      else
        throw std::runtime_error("config line " + std::to_string(ln) +
                                 ": unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw std::runtime_error("config line " + std::to_string(ln) +
                               ": bad value for '" + key + "'");
    }
  }
  return cfg;
}

std::string guard_config_text(const GuardConfig& cfg) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "max_processes=%u\n"
                "overflow_kill_fraction=%.17g\n"
                "clone_check_probability=%.17g\n"
                "corpse_age_limit_ms=%llu\n"
                "process_age_limit_ms=%llu\n"
                "instruction_budget=%llu\n"
                "quantum=%u\n"
                "ms_per_tick=%u\n"
                "extinction_floor=%u\n",
                cfg.max_processes, cfg.overflow_kill_fraction,
                cfg.clone_check_probability,
                static_cast<unsigned long long>(cfg.corpse_age_limit_ms),
                static_cast<unsigned long long>(cfg.process_age_limit_ms),
                static_cast<unsigned long long>(cfg.instruction_budget),
                cfg.quantum, cfg.ms_per_tick, cfg.extinction_floor);
  return buf;
}

World::World(GuardConfig cfg, uint64_t seed) : cfg_(cfg), rng_(seed) {}

void World::log_event(
    const char* ev,
    std::initializer_list<std::pair<const char*, std::string>> strs,
    std::initializer_list<std::pair<const char*, uint64_t>> ints) {
  ordered_json j;
  j["t"] = tick_no_;
  j["ev"] = ev;
  for (const auto& [k, v] : strs) j[k] = v;
  for (const auto& [k, v] : ints) j[k] = v;
  log_ += j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
  log_ += '\n';
}

void World::add_file(const std::string& name, std::vector<uint8_t> bytes) {
  VFile& f = files_[name];
  f.bytes = std::move(bytes);
  f.created_ms = clock_ms_;
}

bool World::queue_spawn_at(const std::string& name, uint64_t tick,
                           uint32_t parent) {
  spawn_queue_.push_back({name, tick, parent});
  return true;
}

void World::bootstrap(std::span<const uint8_t> genome, uint32_t k) {
  for (uint32_t i = 0; i < k; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "seed_%02u.rpw", i);
    add_file(name, std::vector<uint8_t>(genome.begin(), genome.end()));
    queue_spawn_at(name, i + 1, 0);
  }
}

uint32_t World::spawn_program(const MicroProgram& prog, const std::string& owner) {
  ProcessState ps = make_process(prog.code, prog.data, owner);
  ps.pid = next_pid_++;
  ps.owning_file = owner;
  ps.birth_ms = clock_ms_;
  if (auto it = files_.find(owner); it != files_.end()) it->second.exec_count++;
  uint32_t pid = ps.pid;
  log_event("spawn", {{"file", owner}}, {{"pid", pid}, {"parent", 0}});
  procs_.emplace(pid, std::move(ps));
  return pid;
}

void World::spawn_from_file(const SpawnReq& req) {
  auto it = files_.find(req.file);
  if (it == files_.end()) {
    log_event("spawn_failed", {{"file", req.file}, {"cause", "missing"}}, {});
    return;
  }
  Genome g;
  try {
    g = parse_genome(it->second.bytes);
  } catch (const GenomeError&) {
    log_event("spawn_failed", {{"file", req.file}, {"cause", "genome"}}, {});
    return;
  }
  MicroProgram prog = translate(g);
  ProcessState ps = make_process(prog.code, prog.data, req.file);
  ps.pid = next_pid_++;
  ps.owning_file = req.file;
  ps.birth_ms = clock_ms_;
  it->second.exec_count++;
  log_event("spawn", {{"file", req.file}},
            {{"pid", ps.pid}, {"parent", req.parent}});
  procs_.emplace(ps.pid, std::move(ps));
}

void World::apply_spawns() {
  // queued during tick N, eligible from tick N+1; FIFO
  while (!spawn_queue_.empty() && spawn_queue_.front().at_tick <= tick_no_) {
    SpawnReq req = spawn_queue_.front();
    spawn_queue_.pop_front();
    spawn_from_file(req);
  }
}

void World::run_quanta() {
  std::vector<uint32_t> order;
  order.reserve(procs_.size());
  for (const auto& [pid, p] : procs_) order.push_back(pid);
  for (uint32_t pid : order) {
    auto it = procs_.find(pid);
    if (it == procs_.end()) continue;
    ProcessState& p = it->second;
    if (p.sleep_until_ms > clock_ms_) continue;
    if (p.ops >= cfg_.instruction_budget) continue;  // reaper's problem
    uint64_t q = std::min<uint64_t>(cfg_.quantum, cfg_.instruction_budget - p.ops);
    RunOut ro = run(p, *this, q, nullptr);
    total_ops_ += ro.steps;
    if (ro.kind == RunOut::Kind::Exited)
      kill(pid, "exit");
    else if (ro.kind == RunOut::Kind::Faulted)
      kill(pid, "fault:" + std::string(fault_name(ro.fault)));
  }
}

bool World::may_cull() const { return procs_.size() > cfg_.extinction_floor; }

void World::kill(uint32_t pid, const std::string& cause) {
  auto it = procs_.find(pid);
  if (it == procs_.end()) return;
  log_event("death", {{"file", it->second.owning_file}, {"cause", cause}},
            {{"pid", pid}});
  if (auto f = files_.find(it->second.owning_file);
      f != files_.end() && f->second.exec_count > 0)
    f->second.exec_count--;
  last_death_cause_ = cause;
  procs_.erase(it);
}

void World::delete_file(const std::string& name, const std::string& cause) {
  auto it = files_.find(name);
  if (it == files_.end()) return;
  log_event("file_deleted", {{"file", name}, {"cause", cause}}, {});
  files_.erase(it);
}

void World::guard_multiple_instances() {
  std::map<std::string, std::vector<uint32_t>> by_file;
  for (const auto& [pid, p] : procs_) by_file[p.owning_file].push_back(pid);
  for (const auto& [file, pids] : by_file) {
    if (pids.size() < 2) continue;
    uint32_t keep = pids[0];
    uint64_t keep_birth = procs_.at(keep).birth_ms;
    for (uint32_t pid : pids) {
      uint64_t b = procs_.at(pid).birth_ms;
      if (b < keep_birth || (b == keep_birth && pid < keep)) {
        keep = pid;
        keep_birth = b;
      }
    }
    for (uint32_t pid : pids)
      if (pid != keep) kill(pid, "guard:multiple_instances");
  }
}

void World::guard_clones() {
  std::vector<uint32_t> order;
  order.reserve(procs_.size());
  for (const auto& [pid, p] : procs_) order.push_back(pid);
  for (uint32_t pid : order) {
    auto it = procs_.find(pid);
    if (it == procs_.end()) continue;  // already culled this sweep
    if (!rng_.bernoulli(cfg_.clone_check_probability)) continue;
    const std::string mine = it->second.owning_file;
    auto mf = files_.find(mine);
    if (mf == files_.end()) continue;

    // only running files are candidates; an unhatched copy is not yet a clone
    std::vector<std::string> victims;
    for (const auto& [name, vf] : files_)
      if (name != mine && vf.exec_count > 0 && vf.bytes == mf->second.bytes)
        victims.push_back(name);
    for (const std::string& v : victims) {
      std::vector<uint32_t> vpids;
      for (const auto& [qpid, qp] : procs_)
        if (qp.owning_file == v) vpids.push_back(qpid);
      for (uint32_t qpid : vpids)
        if (may_cull()) kill(qpid, "guard:clones");
      if (auto f = files_.find(v); f != files_.end() && f->second.exec_count == 0)
        delete_file(v, "guard:clones");
    }
  }
}

void World::guard_reapers() {
  // stale corpses first
  std::vector<std::string> corpses;
  for (const auto& [name, vf] : files_)
    if (vf.exec_count == 0 && clock_ms_ - vf.created_ms > cfg_.corpse_age_limit_ms)
      corpses.push_back(name);
  for (const std::string& n : corpses) delete_file(n, "guard:corpse");

  std::vector<uint32_t> order;
  order.reserve(procs_.size());
  for (const auto& [pid, p] : procs_) order.push_back(pid);

  for (uint32_t pid : order) {
    auto it = procs_.find(pid);
    if (it != procs_.end() &&
        clock_ms_ - it->second.birth_ms > cfg_.process_age_limit_ms && may_cull())
      kill(pid, "guard:age");
  }
  // a starved process can never progress; the floor does not protect it
  for (uint32_t pid : order) {
    auto it = procs_.find(pid);
    if (it != procs_.end() && it->second.ops >= cfg_.instruction_budget)
      kill(pid, "fault:budget_exhausted");
  }

  if (procs_.size() > cfg_.max_processes) {
    uint64_t kill_count = static_cast<uint64_t>(
        std::llround(static_cast<double>(procs_.size()) *
                     cfg_.overflow_kill_fraction));
    std::vector<uint32_t> pids;
    pids.reserve(procs_.size());
    for (const auto& [pid, p] : procs_) pids.push_back(pid);
    for (uint64_t i = 0; i < kill_count && i < pids.size(); ++i) {
      size_t j = static_cast<size_t>(i + rng_.below(pids.size() - i));
      std::swap(pids[i], pids[j]);
    }
    for (uint64_t i = 0; i < kill_count && i < pids.size(); ++i)
      if (may_cull()) kill(pids[i], "guard:overflow");
  }
}

void World::tick() {
  ++tick_no_;
  clock_ms_ += cfg_.ms_per_tick;
  apply_spawns();
  run_quanta();
  guard_multiple_instances();
  guard_clones();
  guard_reapers();
}

void World::drain_log(std::string& out) {
  out += log_;
  log_.clear();
}

// ---- syscall backend --------------------------------------------------------

bool World::file_exists(const std::string& name) { return files_.count(name); }

bool World::file_executing(const std::string& name) {
  auto it = files_.find(name);
  return it != files_.end() && it->second.exec_count > 0;
}

uint32_t World::file_size(const std::string& name) {
  auto it = files_.find(name);
  return it == files_.end() ? 0 : static_cast<uint32_t>(it->second.bytes.size());
}

const std::vector<uint8_t>* World::file_bytes(const std::string& name) {
  auto it = files_.find(name);
  return it == files_.end() ? nullptr : &it->second.bytes;
}

bool World::copy_file(const std::string& src, const std::string& dst,
                      uint32_t creator_pid) {
  auto s = files_.find(src);
  if (s == files_.end()) return false;
  auto d = files_.find(dst);
  if (d != files_.end() && d->second.exec_count > 0) return false;
  bool fresh = (d == files_.end());
  VFile& f = files_[dst];
  f.bytes = s->second.bytes;
  f.created_ms = clock_ms_;
  f.exec_count = 0;
  ++files_created_;
  log_event("file_created", {{"file", dst}},
            {{"creator", creator_pid}, {"fresh", fresh ? 1u : 0u}});
  return true;
}

void World::write_back(const std::string& name, std::span<const uint8_t> bytes) {
  auto it = files_.find(name);
  if (it == files_.end()) return;        // vanished while mapped
  if (it->second.exec_count > 0) return;  // write-protected
  it->second.bytes.assign(bytes.begin(), bytes.end());
}

bool World::queue_spawn(const std::string& name, uint32_t parent_pid) {
  spawn_queue_.push_back({name, tick_no_ + 1, parent_pid});
  return true;
}

// ---- snapshot ---------------------------------------------------------------

void World::snapshot(const std::filesystem::path& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "files");
  fs::create_directories(dir / "mem");

  ordered_json m;
  m["version"] = 1;
  m["tick"] = tick_no_;
  m["clock_ms"] = clock_ms_;
  m["next_pid"] = next_pid_;
  m["total_ops"] = total_ops_;
  m["files_created"] = files_created_;
  m["rng_state"] = rng_.state;
  m["config"] = guard_config_text(cfg_);

  ordered_json jfiles = ordered_json::array();
  size_t idx = 0;
  for (const auto& [name, vf] : files_) {
    char blob[32];
    std::snprintf(blob, sizeof blob, "files/f_%zu.bin", idx);
    write_blob(dir / blob, vf.bytes);
    ordered_json jf;
    jf["name_hex"] = to_hex(name);
    jf["created_ms"] = vf.created_ms;
    jf["blob"] = blob;
    jfiles.push_back(std::move(jf));
    ++idx;
  }
  m["files"] = std::move(jfiles);

  ordered_json jprocs = ordered_json::array();
  for (const auto& [pid, p] : procs_) {
    char blob[32];
    std::snprintf(blob, sizeof blob, "mem/p_%u.bin", pid);
    write_blob(dir / blob, p.mem);
    ordered_json jp;
    jp["pid"] = pid;
    jp["file_hex"] = to_hex(p.owning_file);
    jp["birth_ms"] = p.birth_ms;
    jp["sleep_until_ms"] = p.sleep_until_ms;
    jp["ops"] = p.ops;
    jp["ip"] = p.ip;
    jp["sp"] = p.sp;
    jp["program_size"] = p.program_size;
    jp["regs"] = {p.regs.a,   p.regs.b,   p.regs.d,   p.regs.bc1,
                  p.regs.bc2, p.regs.ba1, p.regs.ba2, p.regs.zf ? 1 : 0};
    jp["sys_counts"] = p.sys_counts;
    jp["next_handle"] = p.next_handle;
    ordered_json jh = ordered_json::array();
    for (const auto& [h, e] : p.handles)
      jh.push_back({h, e.kind == HandleEntry::Kind::File ? 0 : 1,
                    to_hex(e.file)});
    jp["handles"] = std::move(jh);
    jp["view_active"] = p.view.active ? 1 : 0;
    jp["view_file_hex"] = to_hex(p.view.file);
    jp["view_size"] = p.view.size;
    jp["mem"] = blob;
    jprocs.push_back(std::move(jp));
  }
  m["processes"] = std::move(jprocs);

  ordered_json jq = ordered_json::array();
  for (const auto& req : spawn_queue_)
    jq.push_back({to_hex(req.file), req.at_tick, req.parent});
  m["spawn_queue"] = std::move(jq);

  std::ofstream f(dir / "manifest.json");
  if (!f) throw std::runtime_error("cannot write manifest");
  f << m.dump(1) << '\n';
}

World World::restore(const std::filesystem::path& dir) {
  std::ifstream f(dir / "manifest.json");
  if (!f) throw std::runtime_error("cannot read manifest");
  ordered_json m = ordered_json::parse(f);
  if (m.at("version").get<int>() != 1)
    throw std::runtime_error("unsupported snapshot version");

  World w(parse_guard_config(m.at("config").get<std::string>()), 0);
  w.tick_no_ = m.at("tick").get<uint64_t>();
  w.clock_ms_ = m.at("clock_ms").get<uint64_t>();
  w.next_pid_ = m.at("next_pid").get<uint32_t>();
  w.total_ops_ = m.at("total_ops").get<uint64_t>();
  w.files_created_ = m.at("files_created").get<uint64_t>();
  w.rng_.state = m.at("rng_state").get<uint64_t>();

  for (const auto& jf : m.at("files")) {
    VFile vf;
    vf.bytes = read_blob(dir / jf.at("blob").get<std::string>());
    vf.created_ms = jf.at("created_ms").get<uint64_t>();
    w.files_[from_hex(jf.at("name_hex").get<std::string>())] = std::move(vf);
  }

  for (const auto& jp : m.at("processes")) {
    ProcessState p;
    p.pid = jp.at("pid").get<uint32_t>();
    p.owning_file = from_hex(jp.at("file_hex").get<std::string>());
    p.birth_ms = jp.at("birth_ms").get<uint64_t>();
    p.sleep_until_ms = jp.at("sleep_until_ms").get<uint64_t>();
    p.ops = jp.at("ops").get<uint64_t>();
    p.ip = jp.at("ip").get<uint32_t>();
    p.sp = jp.at("sp").get<uint32_t>();
    p.program_size = jp.at("program_size").get<uint32_t>();
    const auto& r = jp.at("regs");
    p.regs.a = r.at(0).get<uint32_t>();
    p.regs.b = r.at(1).get<uint32_t>();
    p.regs.d = r.at(2).get<uint32_t>();
    p.regs.bc1 = r.at(3).get<uint32_t>();
    p.regs.bc2 = r.at(4).get<uint32_t>();
    p.regs.ba1 = r.at(5).get<uint32_t>();
    p.regs.ba2 = r.at(6).get<uint32_t>();
    p.regs.zf = r.at(7).get<int>() != 0;
    for (size_t i = 0; i < kSysCount; ++i)
      p.sys_counts[i] = jp.at("sys_counts").at(i).get<uint64_t>();
    p.next_handle = jp.at("next_handle").get<uint32_t>();
    for (const auto& jh : jp.at("handles")) {
      HandleEntry e;
      e.kind = jh.at(1).get<int>() == 0 ? HandleEntry::Kind::File
                                        : HandleEntry::Kind::Mapping;
      e.file = from_hex(jh.at(2).get<std::string>());
      p.handles[jh.at(0).get<uint32_t>()] = std::move(e);
    }
    p.view.active = jp.at("view_active").get<int>() != 0;
    p.view.file = from_hex(jp.at("view_file_hex").get<std::string>());
    p.view.size = jp.at("view_size").get<uint32_t>();
    auto mem = read_blob(dir / jp.at("mem").get<std::string>());
    if (mem.size() != kMemSize) throw std::runtime_error("bad memory blob");
    std::copy(mem.begin(), mem.end(), p.mem.begin());
    uint32_t pid = p.pid;
    w.procs_.emplace(pid, std::move(p));
  }

  for (const auto& jq : m.at("spawn_queue"))
    w.spawn_queue_.push_back({from_hex(jq.at(0).get<std::string>()),
                              jq.at(1).get<uint64_t>(),
                              jq.at(2).get<uint32_t>()});

  // executing refcounts are derived state
  for (const auto& [pid, p] : w.procs_)
    if (auto it = w.files_.find(p.owning_file); it != w.files_.end())
      it->second.exec_count++;
  return w;
}

}  // namespace rpw
