#pragma once

// Round-synchronous simulation of the decentralized solver. Every station is
// an agent that only knows the region-files it can serve and learns the rest
// through messages from stations sharing one of those region-files.
//
// One inner round: each agent solves its bucket-fill subproblem against the
// shares it last received, relaxes its own slice, and sends the new shares to
// its neighbors; the sup-norm of the change is then combined by an all-reduce
// through the lowest-id agent. One outer round: the owner of each region-file
// (lowest eligible id) updates its price and sends it to the other eligible
// stations, followed by a control all-reduce for the stopping test.
//
// Arithmetic is performed in the same order as solve_crp, so both produce the
// same iterates bit for bit.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <vector>

#include "cachefair/instance.hpp"
#include "cachefair/solver.hpp"

namespace cachefair {

struct Topology {
  std::map<StationId, std::vector<StationId>> neighbors;  // sorted, symmetric
  std::vector<StationId> owner;                           // by region-file id

  bool adjacent(StationId a, StationId b) const;
};

Topology build_topology(const CrpInstance& instance);

enum class MessageKind { PrimalShare, PriceUpdate, InnerNorm, Control };
inline constexpr std::size_t kMessageKinds = 4;

const char* to_string(MessageKind kind);

struct Message {
  StationId sender = 0;
  StationId receiver = 0;
  std::int64_t round = 0;
  MessageKind kind = MessageKind::PrimalShare;
  int region_file = -1;  // -1 unless PrimalShare or PriceUpdate
  double value = 0.0;
  double aux = 0.0;      // second scalar of Control messages
};

enum class RoundPhase { Setup, Inner, Outer };

const char* to_string(RoundPhase phase);

struct RoundStats {
  std::int64_t round = 0;
  RoundPhase phase = RoundPhase::Inner;
  std::array<std::int64_t, kMessageKinds> counts{};
};

struct MessageStats {
  std::array<std::int64_t, kMessageKinds> totals{};
  std::vector<RoundStats> rounds;

  std::int64_t total(MessageKind kind) const { return totals[static_cast<std::size_t>(kind)]; }
};

/// Messages a single inner round sends as PrimalShare:
/// sum over region-files of |eligible| * (|eligible| - 1).
std::int64_t primal_shares_per_round(const CrpInstance& instance);

struct DistributedReport {
  SolveReport report;
  MessageStats messages;
};

/// Runs the message-passing solver. When trace is set, every delivered
/// message is written to it as one JSON object per line.
DistributedReport run_distributed(const CrpInstance& instance, const SolverConfig& config,
                                  std::ostream* trace = nullptr);

}  // namespace cachefair
