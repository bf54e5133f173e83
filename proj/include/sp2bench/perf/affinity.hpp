#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sp2bench::perf {

/// Hardware subset in the `<n>s,<n>t,<n>c` grammar: active sockets, hardware
/// threads per core, cores per socket.
struct HwSubset {
  int sockets = 1;
  int threads_per_core = 1;
  int cores_per_socket = 1;

  int workers() const noexcept { return sockets * threads_per_core * cores_per_socket; }
  friend bool operator==(const HwSubset&, const HwSubset&) = default;
};

/// Comma-separated `<int><unit>` tokens, unit in {s,t,c}, any order, each unit
/// at most once, counts >= 1. Missing units default to 1. Throws ParseError
/// naming the offending token.
HwSubset parse_subset(std::string_view text);
/// Canonical "<s>s,<t>t,<c>c".
std::string format_subset(const HwSubset& subset);

enum class Placement { compact, scatter };

Placement parse_placement(std::string_view name);
std::string_view to_string(Placement p) noexcept;

struct AffinityPolicy {
  Placement placement = Placement::scatter;
  HwSubset subset{};
  /// When set, workers are bound to their CPU for the lifetime of the pool.
  bool migration_locked = true;
};

/// One logical CPU with dense socket/core/thread coordinates.
struct CpuSlot {
  int cpu = 0;
  int socket = 0;
  int core = 0;
  int thread = 0;
  friend bool operator==(const CpuSlot&, const CpuSlot&) = default;
};

/// Regular sockets x cores x threads grid of logical CPUs.
struct Topology {
  int sockets = 1;
  int cores_per_socket = 1;
  int threads_per_core = 1;
  /// Indexed by ((socket * cores_per_socket) + core) * threads_per_core + thread.
  std::vector<CpuSlot> slots;

  int logical_cpus() const noexcept { return sockets * cores_per_socket * threads_per_core; }
  const CpuSlot& at(int socket, int core, int thread) const;

  /// Linux-style numbering: logical id = thread * (sockets * cores) +
  /// socket * cores + core.
  static Topology synthetic(int sockets, int cores_per_socket, int threads_per_core = 1);
};

/// Reads the CPUs this process may run on and their package/core ids from
/// sysfs. Without socket information the machine is one socket.
Topology detect_topology();

struct PinAssignment {
  std::size_t worker = 0;
  CpuSlot slot;
  friend bool operator==(const PinAssignment&, const PinAssignment&) = default;
};

/// Exactly subset.workers() assignments.
///
/// compact: socket 0 first; within a socket consecutive workers take
/// consecutive cores, and a core's second hardware thread is used only after
/// every active core on that socket has one worker.
/// scatter: worker i goes to socket (i mod sockets); the workers of one socket
/// are laid out like compact within it.
///
/// Throws TopologyExceeded when the subset asks for more than exists.
std::vector<PinAssignment> resolve_pin_map(const AffinityPolicy& policy, const Topology& topo);

/// Pin map for an arbitrary worker count over the whole topology. Counts above
/// the number of logical CPUs wrap around (oversubscription).
std::vector<PinAssignment> pin_map_for_count(Placement placement, const Topology& topo,
                                             std::size_t workers);

std::vector<int> cpus_of(const std::vector<PinAssignment>& map);

/// Compute-bound preset: compact over every hardware thread.
AffinityPolicy compute_bound_preset(const Topology& topo);
/// Memory-bound preset: scatter over half the hardware threads of each socket
/// (one thread per core on SMT machines, otherwise half the cores).
AffinityPolicy memory_bound_preset(const Topology& topo);

}  // namespace sp2bench::perf
