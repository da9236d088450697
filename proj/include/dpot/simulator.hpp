// Copyright 2026 The dpot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPOT_SIMULATOR_HPP_
#define DPOT_SIMULATOR_HPP_

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dpot/admm.hpp"
#include "dpot/errors.hpp"
#include "dpot/local_solver.hpp"
#include "dpot/network.hpp"
#include "dpot/privacy.hpp"
#include "dpot/table.hpp"
#include "dpot/utility.hpp"

namespace dpot {

// One released proposal: the sender's perturbed value for one edge.
struct RoundMessage {
  NodeId from;
  std::size_t edge = 0;
  double payload = 0.0;
  std::size_t round = 0;

  bool operator==(const RoundMessage&) const = default;
};

// Everything a passive eavesdropper saw, in delivery order.
using TapLog = std::vector<RoundMessage>;

// A node running its side of the protocol. Its private utilities never leave
// the object except through private_parameters(), which only the tap auditor
// calls.
class NodeAgent {
 public:
  virtual ~NodeAgent() = default;

  virtual NodeId id() const = 0;
  virtual std::span<const std::size_t> edges() const = 0;

  // Solve the local subproblem, perturb, and emit one message per incident
  // edge for `round`.
  virtual std::vector<RoundMessage> propose(std::size_t round) = 0;

  // The counterpart's message for one incident edge. Updates the local copy
  // of that edge's consensus and dual.
  virtual void deliver(const RoundMessage& message) = 0;

  virtual double consensus(std::size_t edge) const = 0;
  virtual double dual(std::size_t edge) const = 0;

  virtual std::vector<double> private_parameters() const = 0;
};

// The protocol as specified: exact subproblem solve, then perturbation with
// the node's own noise stream.
class ProposalAgent : public NodeAgent {
 public:
  ProposalAgent(NodeId id, std::vector<std::size_t> edges,
                std::vector<UtilitySpec> utilities, Bounds bounds, BetaSchedule beta,
                double rho, double eta, std::uint64_t stream_seed)
      : id_(id),
        edges_(std::move(edges)),
        utilities_(std::move(utilities)),
        bounds_(bounds),
        beta_(std::move(beta)),
        rho_(rho),
        eta_(eta),
        rng_(stream_seed),
        consensus_(edges_.size(), 0.0),
        dual_(edges_.size(), 0.0),
        sent_(edges_.size(), 0.0) {
    if (utilities_.size() != edges_.size())
      throw ConfigError("agent utilities do not match its edges");
  }

  NodeId id() const override { return id_; }
  std::span<const std::size_t> edges() const override { return edges_; }

  std::vector<RoundMessage> propose(std::size_t round) override {
    LocalProblem p;
    p.side = id_.kind;
    p.utilities = utilities_;
    p.duals = dual_;
    p.consensus = consensus_;
    p.eta = eta_;
    p.sum_bounds = bounds_;
    LocalSolution sol = solve_subproblem(p);
    const double xi = xi_from_beta(rho_, eta_, beta_.at(round));
    const NoiseDraw draw = sample_noise(sol.plan.size(), xi, rng_);
    for (std::size_t i = 0; i < sol.plan.size(); ++i) sol.plan[i] += draw.values[i];
    return emit(round, sol.plan);
  }

  void deliver(const RoundMessage& message) override {
    const std::size_t i = local_index(message.edge);
    const bool target = id_.kind == NodeKind::kTarget;
    const double pt = target ? sent_[i] : message.payload;
    const double ps = target ? message.payload : sent_[i];
    consensus_update(pt, ps, eta_, consensus_[i], dual_[i]);
  }

  double consensus(std::size_t edge) const override { return consensus_[local_index(edge)]; }
  double dual(std::size_t edge) const override { return dual_[local_index(edge)]; }

  std::vector<double> private_parameters() const override {
    std::vector<double> out;
    for (const UtilitySpec& u : utilities_) {
      out.push_back(u.a);
      if (!u.is_linear()) out.push_back(u.b);
    }
    return out;
  }

 protected:
  std::vector<RoundMessage> emit(std::size_t round, std::span<const double> payloads) {
    std::vector<RoundMessage> out;
    out.reserve(edges_.size());
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      sent_[i] = payloads[i];
      out.push_back({id_, edges_[i], payloads[i], round});
    }
    return out;
  }

  const std::vector<UtilitySpec>& utilities() const { return utilities_; }

  std::size_t local_index(std::size_t edge) const {
    const auto it = std::lower_bound(edges_.begin(), edges_.end(), edge);
    if (it == edges_.end() || *it != edge)
      throw ConfigError("edge " + std::to_string(edge) + " is not incident to " +
                        to_string(id_));
    return static_cast<std::size_t>(it - edges_.begin());
  }

 private:
  NodeId id_;
  std::vector<std::size_t> edges_;
  std::vector<UtilitySpec> utilities_;
  Bounds bounds_;
  BetaSchedule beta_;
  double rho_;
  double eta_;
  NoiseEngine rng_;
  std::vector<double> consensus_;
  std::vector<double> dual_;
  std::vector<double> sent_;
};

// One agent per node in Network::nodes() order, with the same per-node noise
// streams dp_run derives from `seed`.
inline std::vector<std::unique_ptr<NodeAgent>> make_agents(const Network& net,
                                                           const UtilityTable& utilities,
                                                           const PrivacyConfig& privacy,
                                                           std::uint64_t seed) {
  privacy.validate(net);
  if (utilities.size() != net.n_edges())
    throw ConfigError("utility table does not match network");
  std::vector<std::unique_ptr<NodeAgent>> agents;
  for (const NodeId node : net.nodes()) {
    const auto incident = net.incident(node);
    std::vector<UtilitySpec> own;
    for (std::size_t e : incident) own.push_back(utilities.side(e, node.kind));
    agents.push_back(std::make_unique<ProposalAgent>(
        node, std::vector<std::size_t>(incident.begin(), incident.end()), std::move(own),
        net.bounds(node), privacy.schedule(net, node), privacy.rho, privacy.eta,
        node_stream_seed(seed, node)));
  }
  return agents;
}

struct SimulationOptions {
  std::size_t rounds = 1;
  bool tap = true;
  // Shuffle message delivery within each round with this seed.
  std::optional<std::uint64_t> shuffle_seed;
};

struct SimulationResult {
  std::vector<std::vector<double>> consensus;  // per round, canonical edge order
  std::vector<std::vector<double>> duals;
  TapLog tap;
};

// Barrier-synchronized rounds: every agent proposes, then every message is
// delivered to the other endpoint of its edge. Both endpoints reduce the
// same message pair, so their copies of (pi, alpha) must agree bitwise.
inline SimulationResult run_rounds(const Network& net,
                                   std::vector<std::unique_ptr<NodeAgent>>& agents,
                                   const SimulationOptions& opts) {
  if (agents.size() != net.n_nodes())
    throw ConfigError("need exactly one agent per node");
  const std::vector<NodeId> nodes = net.nodes();
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (!agents[i] || agents[i]->id() != nodes[i])
      throw ConfigError("agent order does not match the network's nodes");
    const auto want = net.incident(nodes[i]);
    const auto have = agents[i]->edges();
    if (!std::equal(want.begin(), want.end(), have.begin(), have.end()))
      throw ConfigError("agent " + to_string(nodes[i]) + " has the wrong edges");
  }

  std::optional<std::mt19937_64> shuffler;
  if (opts.shuffle_seed) shuffler.emplace(*opts.shuffle_seed);

  SimulationResult result;
  std::vector<RoundMessage> inbox;
  for (std::size_t k = 0; k < opts.rounds; ++k) {
    inbox.clear();
    for (auto& agent : agents) {
      std::vector<RoundMessage> sent = agent->propose(k);
      inbox.insert(inbox.end(), sent.begin(), sent.end());
    }
    if (shuffler) std::shuffle(inbox.begin(), inbox.end(), *shuffler);
    for (const RoundMessage& m : inbox) {
      if (m.edge >= net.n_edges()) throw ConfigError("message names an unknown edge");
      const EdgeId& e = net.edge(m.edge);
      const NodeId receiver = m.from.kind == NodeKind::kTarget ? NodeId::source(e.source)
                                                               : NodeId::target(e.target);
      agents[net.flat_index(receiver)]->deliver(m);
    }
    if (opts.tap) result.tap.insert(result.tap.end(), inbox.begin(), inbox.end());

    std::vector<double> pi(net.n_edges()), alpha(net.n_edges());
    for (std::size_t e = 0; e < net.n_edges(); ++e) {
      const NodeAgent& t = *agents[net.flat_index(NodeId::target(net.edge(e).target))];
      const NodeAgent& s = *agents[net.flat_index(NodeId::source(net.edge(e).source))];
      pi[e] = t.consensus(e);
      alpha[e] = t.dual(e);
      if (std::bit_cast<std::uint64_t>(pi[e]) !=
              std::bit_cast<std::uint64_t>(s.consensus(e)) ||
          std::bit_cast<std::uint64_t>(alpha[e]) != std::bit_cast<std::uint64_t>(s.dual(e)))
        throw std::logic_error("endpoints of edge " + std::to_string(e) + " disagree");
    }
    result.consensus.push_back(std::move(pi));
    result.duals.push_back(std::move(alpha));
  }
  return result;
}

struct TapAudit {
  bool clean = true;
  std::vector<std::string> findings;
};

// Structural scan of an eavesdropper's log: one message per incident edge per
// agent per round, finite payloads, and no payload bit-equal to one of the
// sender's private parameters. Not an information-theoretic check.
inline TapAudit audit_tap(const TapLog& log,
                          const std::vector<std::unique_ptr<NodeAgent>>& agents) {
  TapAudit audit;
  auto flag = [&](std::string what) {
    audit.clean = false;
    audit.findings.push_back(std::move(what));
  };

  std::map<NodeId, const NodeAgent*> by_id;
  std::map<NodeId, std::vector<std::uint64_t>> secrets;
  for (const auto& agent : agents) {
    by_id[agent->id()] = agent.get();
    for (double v : agent->private_parameters())
      secrets[agent->id()].push_back(std::bit_cast<std::uint64_t>(v));
  }

  std::map<std::pair<std::size_t, NodeId>, std::vector<std::size_t>> per_round;
  std::size_t max_round = 0;
  for (const RoundMessage& m : log) {
    const std::string where = "round " + std::to_string(m.round) + " " +
                              to_string(m.from) + " edge " + std::to_string(m.edge);
    max_round = std::max(max_round, m.round);
    const auto it = by_id.find(m.from);
    if (it == by_id.end()) {
      flag(where + ": sender is not a known agent");
      continue;
    }
    per_round[{m.round, m.from}].push_back(m.edge);
    if (!std::isfinite(m.payload)) flag(where + ": non-finite payload");
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(m.payload);
    for (std::uint64_t s : secrets[m.from])
      if (s == bits) {
        flag(where + ": payload equals a private parameter");
        break;
      }
  }
  if (!log.empty()) {
    for (std::size_t k = 0; k <= max_round; ++k)
      for (const auto& [id, agent] : by_id) {
        std::vector<std::size_t> got = per_round[{k, id}];
        std::sort(got.begin(), got.end());
        const auto want = agent->edges();
        if (!std::equal(got.begin(), got.end(), want.begin(), want.end()))
          flag("round " + std::to_string(k) + " " + to_string(id) +
               ": messages do not cover its edges exactly once");
      }
  }
  return audit;
}

inline Table tap_table(const TapLog& log) {
  Table t("tap", {"round", "from", "edge", "payload"});
  for (const RoundMessage& m : log)
    t.add_row({format_number(m.round), to_string(m.from), format_number(m.edge),
               format_number(m.payload)});
  return t;
}

}  // namespace dpot

#endif  // DPOT_SIMULATOR_HPP_
