#include "cachefair/agents.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "cachefair/bucket_fill.hpp"
#include "cachefair/parallel.hpp"

namespace cachefair {

bool Topology::adjacent(StationId a, StationId b) const {
  auto it = neighbors.find(a);
  if (it == neighbors.end()) return false;
  return std::binary_search(it->second.begin(), it->second.end(), b);
}

Topology build_topology(const CrpInstance& instance) {
  Topology topo;
  for (const StationUtility& s : instance.stations()) topo.neighbors[s.id];
  topo.owner.reserve(instance.region_file_count());
  for (const RegionFile& rf : instance.region_files()) {
    topo.owner.push_back(rf.eligible.front());
    for (StationId a : rf.eligible) {
      for (StationId b : rf.eligible) {
        if (a != b) topo.neighbors[a].push_back(b);
      }
    }
  }
  for (auto& [id, list] : topo.neighbors) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return topo;
}

const char* to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::PrimalShare: return "primal_share";
    case MessageKind::PriceUpdate: return "price_update";
    case MessageKind::InnerNorm: return "inner_norm";
    case MessageKind::Control: return "control";
  }
  return "unknown";
}

std::int64_t primal_shares_per_round(const CrpInstance& instance) {
  std::int64_t n = 0;
  for (const RegionFile& rf : instance.region_files()) {
    const auto k = static_cast<std::int64_t>(rf.eligible.size());
    n += k * (k - 1);
  }
  return n;
}

const char* to_string(RoundPhase phase) {
  switch (phase) {
    case RoundPhase::Setup: return "setup";
    case RoundPhase::Inner: return "inner";
    case RoundPhase::Outer: return "outer";
  }
  return "unknown";
}

namespace {

// What a station knows about one region-file it can serve.
struct LocalEntry {
  int q = 0;
  double demand = 0.0;
  std::vector<StationId> eligible;
  std::size_t own = 0;          // position of this station in eligible
  std::vector<double> shares;   // latest y_{m', q} per eligible station
  double known_price = 0.0;     // last price received (or set, if owned)
  std::optional<double> owned_price;
};

class Agent {
 public:
  Agent(StationId id, UtilitySpec utility, std::vector<LocalEntry> entries)
      : id_(id), utility_(utility), entries_(std::move(entries)) {}

  StationId id() const { return id_; }
  const std::vector<LocalEntry>& entries() const { return entries_; }
  std::vector<Message>& outbox() { return outbox_; }

  void setup(const SolverConfig& config, std::int64_t round) {
    for (LocalEntry& e : entries_) {
      e.known_price = config.initial_price;
      if (e.own == 0) e.owned_price = config.initial_price;
      e.shares[e.own] = initial_share(config.seed, e.q, e.own, e.demand);
    }
    send_shares(round);
  }

  // Bucket fill on the cached shares, relax, and publish. Returns the local
  // sup-norm of the change.
  double inner_step(const SolverConfig& config, std::int64_t round) {
    buckets_.clear();
    for (const LocalEntry& e : entries_) {
      double others = 0.0;
      for (std::size_t k = 0; k < e.shares.size(); ++k) {
        if (k != e.own) others += e.shares[k];
      }
      const double unclaimed = e.demand - others;
      buckets_.push_back({e.q, e.known_price + config.rho * unclaimed, e.demand});
    }
    double step = 0.0;
    if (!entries_.empty()) {
      const BucketFillResult& fill = filler_.solve(buckets_, utility_, config.rho);
      for (std::size_t i = 0; i < entries_.size(); ++i) {
        LocalEntry& e = entries_[i];
        const double y = e.shares[e.own];
        const double next = y + config.alpha * (fill.allocation[i] - y);
        step = std::max(step, std::abs(next - y));
        e.shares[e.own] = next;
      }
    }
    send_shares(round);
    return step;
  }

  // Price update for owned region-files. Returns (max price change, max |residual|).
  std::pair<double, double> price_step(double rho, std::int64_t round) {
    double change = 0.0;
    double residual = 0.0;
    for (LocalEntry& e : entries_) {
      if (!e.owned_price) continue;
      double routed = 0.0;
      for (double s : e.shares) routed += s;
      const double r = e.demand - routed;
      const double next = *e.owned_price + rho * r;
      change = std::max(change, std::abs(next - *e.owned_price));
      residual = std::max(residual, std::abs(r));
      e.owned_price = next;
      e.known_price = next;
      for (std::size_t k = 0; k < e.eligible.size(); ++k) {
        if (k == e.own) continue;
        outbox_.push_back({id_, e.eligible[k], round, MessageKind::PriceUpdate, e.q, next, 0.0});
      }
    }
    return {change, residual};
  }

  void receive(const Message& m) {
    LocalEntry& e = entry(m.region_file);
    switch (m.kind) {
      case MessageKind::PrimalShare: {
        auto it = std::lower_bound(e.eligible.begin(), e.eligible.end(), m.sender);
        e.shares[static_cast<std::size_t>(it - e.eligible.begin())] = m.value;
        break;
      }
      case MessageKind::PriceUpdate:
        e.known_price = m.value;
        break;
      default:
        throw std::logic_error("agent received a collective message");
    }
  }

 private:
  void send_shares(std::int64_t round) {
    for (const LocalEntry& e : entries_) {
      for (std::size_t k = 0; k < e.eligible.size(); ++k) {
        if (k == e.own) continue;
        outbox_.push_back(
            {id_, e.eligible[k], round, MessageKind::PrimalShare, e.q, e.shares[e.own], 0.0});
      }
    }
  }

  LocalEntry& entry(int q) {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), q,
                               [](const LocalEntry& e, int v) { return e.q < v; });
    if (it == entries_.end() || it->q != q) {
      throw std::logic_error("message for a region-file the agent does not serve");
    }
    return *it;
  }

  StationId id_;
  UtilitySpec utility_;
  std::vector<LocalEntry> entries_;
  std::vector<Message> outbox_;
  std::vector<Bucket> buckets_;
  BucketFiller filler_;
};

// Validates, orders, counts and delivers messages. Collective messages
// (InnerNorm, Control) travel between the root and every other agent.
class MessageBus {
 public:
  MessageBus(const CrpInstance& instance, const Topology& topology, std::ostream* trace)
      : instance_(instance), topology_(topology), trace_(trace) {}

  StationId root() const { return instance_.stations().front().id; }

  void post(const Message& m) {
    switch (m.kind) {
      case MessageKind::PrimalShare:
        if (m.sender == m.receiver || !eligible(m.region_file, m.sender) ||
            !eligible(m.region_file, m.receiver)) {
          throw std::logic_error("primal share between stations that do not share q");
        }
        break;
      case MessageKind::PriceUpdate:
        if (topology_.owner.at(m.region_file) != m.sender || !eligible(m.region_file, m.receiver)) {
          throw std::logic_error("price update not sent by the owner to an eligible station");
        }
        break;
      case MessageKind::InnerNorm:
      case MessageKind::Control:
        if (m.sender != root() && m.receiver != root()) {
          throw std::logic_error("collective message bypasses the root");
        }
        break;
    }
    pending_.push_back(m);
  }

  // Sorted by (sender, receiver, region-file); the caller hands each message
  // to its receiver in this order.
  std::vector<Message> deliver(std::int64_t round, RoundPhase phase, MessageStats& stats) {
    std::stable_sort(pending_.begin(), pending_.end(), [](const Message& a, const Message& b) {
      if (a.sender != b.sender) return a.sender < b.sender;
      if (a.receiver != b.receiver) return a.receiver < b.receiver;
      return a.region_file < b.region_file;
    });
    if (stats.rounds.empty() || stats.rounds.back().round != round) {
      stats.rounds.push_back({round, phase, {}});
    }
    RoundStats& rs = stats.rounds.back();
    for (const Message& m : pending_) {
      ++rs.counts[static_cast<std::size_t>(m.kind)];
      ++stats.totals[static_cast<std::size_t>(m.kind)];
      if (trace_) write(m);
    }
    std::vector<Message> out;
    out.swap(pending_);
    return out;
  }

 private:
  bool eligible(int q, StationId m) const {
    const auto& e = instance_.region_files().at(q).eligible;
    return std::binary_search(e.begin(), e.end(), m);
  }

  void write(const Message& m) {
    nlohmann::json line = {{"round", m.round},       {"kind", to_string(m.kind)},
                           {"sender", m.sender},     {"receiver", m.receiver},
                           {"region_file", m.region_file}, {"value", m.value}};
    if (m.kind == MessageKind::Control) line["aux"] = m.aux;
    *trace_ << line.dump() << '\n';
  }

  const CrpInstance& instance_;
  const Topology& topology_;
  std::ostream* trace_;
  std::vector<Message> pending_;
};

std::vector<Agent> make_agents(const CrpInstance& instance) {
  std::vector<Agent> agents;
  agents.reserve(instance.station_count());
  for (std::size_t m = 0; m < instance.station_count(); ++m) {
    const StationUtility& st = instance.stations()[m];
    std::vector<LocalEntry> entries;
    for (const ServedEntry& se : instance.served_by(m)) {
      const RegionFile& rf = instance.region_files()[se.region_file];
      LocalEntry e;
      e.q = rf.id;
      e.demand = rf.demand;
      e.eligible = rf.eligible;
      e.own = se.slot - instance.slot_begin(rf.id);
      e.shares.assign(rf.eligible.size(), 0.0);
      entries.push_back(std::move(e));
    }
    agents.emplace_back(st.id, st.utility, std::move(entries));
  }
  return agents;
}

}  // namespace

DistributedReport run_distributed(const CrpInstance& instance, const SolverConfig& config,
                                  std::ostream* trace) {
  config.validate();
  if (instance.region_file_count() == 0) {
    throw std::invalid_argument("run_distributed needs at least one region-file");
  }
  const Topology topology = build_topology(instance);
  std::vector<Agent> agents = make_agents(instance);
  std::unordered_map<StationId, std::size_t> index;
  for (std::size_t i = 0; i < agents.size(); ++i) index.emplace(agents[i].id(), i);

  MessageBus bus(instance, topology, trace);
  DistributedReport out;
  SolveReport& report = out.report;
  std::int64_t round = 0;
  const unsigned threads = std::max(1u, config.threads);

  auto exchange = [&](RoundPhase phase) {
    for (Agent& a : agents) {
      for (const Message& m : a.outbox()) bus.post(m);
      a.outbox().clear();
    }
    for (const Message& m : bus.deliver(round, phase, out.messages)) {
      agents[index.at(m.receiver)].receive(m);
    }
  };

  // Gathers one value per agent at the root and sends the combined maximum back.
  auto all_reduce = [&](MessageKind kind, const std::vector<std::pair<double, double>>& local,
                        RoundPhase phase) {
    const StationId root = bus.root();
    std::pair<double, double> combined{0.0, 0.0};
    for (std::size_t i = 0; i < agents.size(); ++i) {
      combined.first = std::max(combined.first, local[i].first);
      combined.second = std::max(combined.second, local[i].second);
      if (agents[i].id() != root) {
        bus.post({agents[i].id(), root, round, kind, -1, local[i].first, local[i].second});
      }
    }
    for (std::size_t i = 0; i < agents.size(); ++i) {
      if (agents[i].id() != root) {
        bus.post({root, agents[i].id(), round, kind, -1, combined.first, combined.second});
      }
    }
    bus.deliver(round, phase, out.messages);
    return combined;
  };

  for (Agent& a : agents) a.setup(config, round);
  exchange(RoundPhase::Setup);

  std::vector<std::pair<double, double>> local(agents.size());
  for (int t = 1; t <= config.max_outer; ++t) {
    bool inner_converged = false;
    for (int it = 1; it <= config.max_inner; ++it) {
      ++round;
      parallel_for(agents.size(), threads, [&](std::size_t i) {
        local[i] = {agents[i].inner_step(config, round), 0.0};
      });
      exchange(RoundPhase::Inner);
      const double step = all_reduce(MessageKind::InnerNorm, local, RoundPhase::Inner).first;
      ++report.inner_iterations_total;
      if (step <= config.eps_inner) {
        inner_converged = true;
        break;
      }
    }
    if (!inner_converged) ++report.inner_cap_hits;

    ++round;
    for (std::size_t i = 0; i < agents.size(); ++i) local[i] = agents[i].price_step(config.rho, round);
    exchange(RoundPhase::Outer);
    const auto [change, residual] = all_reduce(MessageKind::Control, local, RoundPhase::Outer);
    report.residual_history.push_back(residual);
    report.outer_iterations = t;
    if (change <= config.eps_outer) {
      report.converged = true;
      break;
    }
  }

  report.routing = RoutingVector::zeros(instance);
  report.duals = DualVector::zeros(instance);
  for (std::size_t m = 0; m < agents.size(); ++m) {
    for (const LocalEntry& e : agents[m].entries()) {
      report.routing[instance.slot_begin(e.q) + e.own] = e.shares[e.own];
      if (e.owned_price) report.duals[e.q] = *e.owned_price;
    }
  }
  report.objective = objective(instance, report.routing);
  return out;
}

}  // namespace cachefair
