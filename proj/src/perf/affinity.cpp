#include "sp2bench/perf/affinity.hpp"

#include <sched.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <thread>

#include "sp2bench/error.hpp"

namespace sp2bench::perf {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

int read_sysfs_int(int cpu, const char* leaf) {
  std::ifstream in("/sys/devices/system/cpu/cpu" + std::to_string(cpu) + "/topology/" + leaf);
  int v = -1;
  if (!(in >> v)) return -1;
  return v;
}

// Placement-ordered slot for worker i of a subset.
CpuSlot place(Placement placement, const HwSubset& s, const Topology& topo, std::size_t i) {
  const auto per_socket = static_cast<std::size_t>(s.threads_per_core * s.cores_per_socket);
  const auto sockets = static_cast<std::size_t>(s.sockets);
  const auto cores = static_cast<std::size_t>(s.cores_per_socket);
  std::size_t socket = 0;
  std::size_t local = 0;
  if (placement == Placement::compact) {
    socket = i / per_socket;
    local = i % per_socket;
  } else {
    socket = i % sockets;
    local = i / sockets;
  }
  const std::size_t thread = local / cores;
  const std::size_t core = local % cores;
  return topo.at(static_cast<int>(socket), static_cast<int>(core), static_cast<int>(thread));
}

}  // namespace

HwSubset parse_subset(std::string_view text) {
  HwSubset out;
  bool seen_s = false, seen_t = false, seen_c = false;
  if (trim(text).empty()) throw ParseError("empty hardware subset", std::string(text));
  while (true) {
    const auto comma = text.find(',');
    const std::string_view token = trim(text.substr(0, comma));
    if (token.size() < 2) throw ParseError("bad subset token", std::string(token));
    const char unit = token.back();
    const std::string_view digits = token.substr(0, token.size() - 1);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || value < 1)
      throw ParseError("bad subset count", std::string(token));
    bool* seen = nullptr;
    int* slot = nullptr;
    switch (unit) {
      case 's': seen = &seen_s; slot = &out.sockets; break;
      case 't': seen = &seen_t; slot = &out.threads_per_core; break;
      case 'c': seen = &seen_c; slot = &out.cores_per_socket; break;
      default: throw ParseError("unknown subset unit", std::string(token));
    }
    if (*seen) throw ParseError("repeated subset unit", std::string(token));
    *seen = true;
    *slot = value;
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

std::string format_subset(const HwSubset& s) {
  return std::to_string(s.sockets) + "s," + std::to_string(s.threads_per_core) + "t," +
         std::to_string(s.cores_per_socket) + "c";
}

Placement parse_placement(std::string_view name) {
  if (name == "compact") return Placement::compact;
  if (name == "scatter") return Placement::scatter;
  throw ParseError("unknown placement", std::string(name));
}

std::string_view to_string(Placement p) noexcept {
  return p == Placement::compact ? "compact" : "scatter";
}

const CpuSlot& Topology::at(int socket, int core, int thread) const {
  if (socket < 0 || socket >= sockets || core < 0 || core >= cores_per_socket || thread < 0 ||
      thread >= threads_per_core)
    throw TopologyExceeded("no CPU at socket " + std::to_string(socket) + " core " +
                           std::to_string(core) + " thread " + std::to_string(thread));
  return slots[static_cast<std::size_t>((socket * cores_per_socket + core) * threads_per_core +
                                        thread)];
}

Topology Topology::synthetic(int sockets, int cores_per_socket, int threads_per_core) {
  if (sockets < 1 || cores_per_socket < 1 || threads_per_core < 1)
    throw InvalidArgument("topology dimensions must be >= 1");
  Topology t{sockets, cores_per_socket, threads_per_core, {}};
  t.slots.reserve(static_cast<std::size_t>(t.logical_cpus()));
  for (int s = 0; s < sockets; ++s)
    for (int c = 0; c < cores_per_socket; ++c)
      for (int h = 0; h < threads_per_core; ++h)
        t.slots.push_back({h * sockets * cores_per_socket + s * cores_per_socket + c, s, c, h});
  return t;
}

Topology detect_topology() {
  std::vector<int> allowed;
  cpu_set_t set;
  CPU_ZERO(&set);
  if (sched_getaffinity(0, sizeof(set), &set) == 0) {
    for (int cpu = 0; cpu < CPU_SETSIZE; ++cpu)
      if (CPU_ISSET(cpu, &set)) allowed.push_back(cpu);
  }
  if (allowed.empty()) {
    const unsigned hc = std::max(1u, std::thread::hardware_concurrency());
    for (unsigned i = 0; i < hc; ++i) allowed.push_back(static_cast<int>(i));
  }

  // package id -> core id -> sibling cpus
  std::map<int, std::map<int, std::vector<int>>> tree;
  bool have_ids = true;
  for (int cpu : allowed) {
    const int pkg = read_sysfs_int(cpu, "physical_package_id");
    const int core = read_sysfs_int(cpu, "core_id");
    if (pkg < 0 || core < 0) {
      have_ids = false;
      break;
    }
    tree[pkg][core].push_back(cpu);
  }
  if (!have_ids) {
    Topology t{1, static_cast<int>(allowed.size()), 1, {}};
    for (std::size_t i = 0; i < allowed.size(); ++i)
      t.slots.push_back({allowed[i], 0, static_cast<int>(i), 0});
    return t;
  }

  int cores = std::numeric_limits<int>::max();
  int threads = std::numeric_limits<int>::max();
  for (auto& [pkg, core_map] : tree) {
    cores = std::min(cores, static_cast<int>(core_map.size()));
    for (auto& [core, cpus] : core_map) {
      std::sort(cpus.begin(), cpus.end());
      threads = std::min(threads, static_cast<int>(cpus.size()));
    }
  }
  Topology t{static_cast<int>(tree.size()), cores, threads, {}};
  int s = 0;
  for (auto& [pkg, core_map] : tree) {
    int c = 0;
    for (auto& [core, cpus] : core_map) {
      if (c == cores) break;
      for (int h = 0; h < threads; ++h) t.slots.push_back({cpus[static_cast<std::size_t>(h)], s, c, h});
      ++c;
    }
    ++s;
  }
  return t;
}

std::vector<PinAssignment> resolve_pin_map(const AffinityPolicy& policy, const Topology& topo) {
  const HwSubset& s = policy.subset;
  if (s.sockets < 1 || s.cores_per_socket < 1 || s.threads_per_core < 1)
    throw InvalidArgument("hardware subset counts must be >= 1");
  if (s.sockets > topo.sockets || s.cores_per_socket > topo.cores_per_socket ||
      s.threads_per_core > topo.threads_per_core)
    throw TopologyExceeded("subset " + format_subset(s) + " exceeds topology " +
                           format_subset({topo.sockets, topo.threads_per_core,
                                          topo.cores_per_socket}));
  const auto n = static_cast<std::size_t>(s.workers());
  std::vector<PinAssignment> map;
  map.reserve(n);
  for (std::size_t i = 0; i < n; ++i) map.push_back({i, place(policy.placement, s, topo, i)});
  return map;
}

std::vector<PinAssignment> pin_map_for_count(Placement placement, const Topology& topo,
                                             std::size_t workers) {
  const HwSubset whole{topo.sockets, topo.threads_per_core, topo.cores_per_socket};
  const auto total = static_cast<std::size_t>(whole.workers());
  std::vector<PinAssignment> map;
  map.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i)
    map.push_back({i, place(placement, whole, topo, i % total)});
  return map;
}

std::vector<int> cpus_of(const std::vector<PinAssignment>& map) {
  std::vector<int> out;
  out.reserve(map.size());
  for (const auto& a : map) out.push_back(a.slot.cpu);
  return out;
}

AffinityPolicy compute_bound_preset(const Topology& topo) {
  return {Placement::compact, {topo.sockets, topo.threads_per_core, topo.cores_per_socket}, true};
}

AffinityPolicy memory_bound_preset(const Topology& topo) {
  HwSubset s{topo.sockets, topo.threads_per_core, topo.cores_per_socket};
  if (s.threads_per_core >= 2)
    s.threads_per_core /= 2;
  else
    s.cores_per_socket = std::max(1, s.cores_per_socket / 2);
  return {Placement::scatter, s, true};
}

}  // namespace sp2bench::perf
