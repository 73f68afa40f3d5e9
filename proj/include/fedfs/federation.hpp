#pragma once

// Federated feature selection: synchronous server loop and client round.
//
// Each communication round the server broadcasts p_G to every client, each
// client runs one CE round on its own partition and answers with an
// UpdateMessage, the server averages the delivered vectors with weights
// q_l = n_l / sum n_l and compares old and new p_G with a two-sample KS
// test. The loop ends once the p-value v satisfies v >= tau1 and
// |v - v_old| <= tau2, or after max_rounds.
//
// Faulty clients are simulated per round and per client with a Bernoulli(rho)
// draw; their messages are dropped before aggregation but they still receive
// the next broadcast.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedfs/ce_optimizer.hpp"
#include "fedfs/error.hpp"
#include "fedfs/info_core.hpp"
#include "fedfs/ks_test.hpp"
#include "fedfs/message.hpp"
#include "fedfs/parallel.hpp"
#include "fedfs/random.hpp"

namespace fedfs {

inline constexpr double kDefaultTau1 = 0.995;
inline constexpr double kDefaultTau2 = 1e-6;

struct ClientState {
  std::uint32_t id = 0;
  DiscreteDataset data;
  ProbabilityVector local_p;
  std::uint64_t seed = 0;
  /// Records drawn with replacement per round; unset (or equal to the
  /// partition size) means the whole partition is used as is.
  std::optional<std::size_t> draw_size;

  std::size_t records_per_round() const { return draw_size.value_or(data.rows()); }
};

/// One client per partition, client ids 0..L-1, seeds derived from `global_seed`.
inline std::vector<ClientState> make_clients(std::vector<DiscreteDataset> partitions,
                                             std::uint64_t global_seed,
                                             std::optional<std::size_t> draw_size = {}) {
  std::vector<ClientState> clients;
  clients.reserve(partitions.size());
  for (std::size_t l = 0; l < partitions.size(); ++l) {
    ClientState c;
    c.id = static_cast<std::uint32_t>(l);
    c.local_p = ProbabilityVector::uniform(partitions[l].features());
    c.data = std::move(partitions[l]);
    c.seed = derive_seed(global_seed, {l});
    c.draw_size = draw_size;
    clients.push_back(std::move(c));
  }
  return clients;
}

/// Client side of a round: adopt p_G, run one CE round on the local data (or a
/// bootstrap draw of it), and encode the new local vector.
inline UpdateMessage client_round(ClientState& client, const ProbabilityVector& p_global,
                                  const CEParams& params, std::size_t round) {
  if (p_global.size() != client.data.features())
    throw ProtocolError("client " + std::to_string(client.id) + ": global vector has " +
                        std::to_string(p_global.size()) + " entries, local data has " +
                        std::to_string(client.data.features()) + " features");
  client.local_p = p_global;

  CEParams local = params;
  local.seed = client.seed;

  const std::size_t n_local = client.data.rows();
  const std::size_t draw = client.records_per_round();
  if (draw != n_local) {
    detail::require(draw >= 1, "client_round: draw size must be >= 1");
    Rng rng(derive_seed(client.seed, {round, 0xd7a3}));
    std::vector<std::size_t> rows(draw);
    for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n_local));
    client.local_p = ce_round(client.data.select_rows(rows), client.local_p, local, round);
  } else {
    client.local_p = ce_round(client.data, client.local_p, local, round);
  }
  return encode_message(client.local_p, client.id, n_local, params.epsilon);
}

/// p_G = sum_l q_l p_l with q_l = n_l / sum n_l, then clamped to [eps, 1 - eps].
/// Returns nullopt when no message arrived (the caller keeps p_G).
inline std::optional<ProbabilityVector> aggregate(std::span<const UpdateMessage> messages,
                                                  std::size_t m,
                                                  double epsilon = kDefaultClamp) {
  if (messages.empty()) return std::nullopt;
  double total = 0.0;
  for (const auto& msg : messages) total += static_cast<double>(msg.sample_count);
  if (!(total > 0.0)) throw ProtocolError("aggregate: total sample count is zero");

  std::vector<double> acc(m, 0.0);
  for (const auto& msg : messages) {
    const auto p = decode_message(msg, m);
    const double q = static_cast<double>(msg.sample_count) / total;
    for (std::size_t i = 0; i < m; ++i) acc[i] += q * p[i];
  }
  for (double& v : acc) v = std::clamp(v, epsilon, 1.0 - epsilon);
  return ProbabilityVector(std::move(acc));
}

/// Convergence: v >= tau1 and |v - v_old| <= tau2.
inline bool check_convergence(double v, double v_old, double tau1 = kDefaultTau1,
                              double tau2 = kDefaultTau2) {
  return v >= tau1 && std::abs(v - v_old) <= tau2;
}

struct FaultModel {
  double rho = 0.0;
  std::uint64_t seed = 0;

  /// Independent Bernoulli(rho) draw per (client, round).
  bool is_faulty(std::uint32_t client_id, std::size_t round) const {
    if (rho <= 0.0) return false;
    return Rng(derive_seed(seed, {client_id, round})).bernoulli(rho);
  }
};

struct FederationSettings {
  double tau1 = kDefaultTau1;
  double tau2 = kDefaultTau2;
  std::size_t max_rounds = 200;
  double threshold = kDefaultSelectionThreshold;
  /// Worker threads for client rounds within one communication round.
  std::size_t threads = 1;
  /// Starting p_G; all 0.5 when unset.
  std::optional<ProbabilityVector> initial;
  /// Bytes per scalar slot in the overhead count.
  std::size_t unit_bytes = 4;
};

/// Bitmap size in scalar slots of `unit_bytes`, rounded up.
inline std::uint64_t bitmap_units(std::size_t m, std::size_t unit_bytes = 4) {
  return (bitmap_bytes(m) + unit_bytes - 1) / unit_bytes;
}

struct RoundRecord {
  std::size_t round = 0;
  std::vector<std::uint32_t> participants;
  ProbabilityVector global;
  double ks_p_value = 0.0;
  std::size_t selected_count = 0;
  /// Scalar slots exchanged this round: per client one broadcast and one
  /// update, each counted as z + 1 + b.
  std::uint64_t units = 0;
  std::uint64_t cumulative_units = 0;
  /// Records each client drew this round, indexed by client position.
  std::vector<std::size_t> draw_sizes;
};

struct FederationReport {
  std::vector<RoundRecord> rounds;
  ProbabilityVector final_global;
  std::vector<std::size_t> selected;
  bool converged = false;
  std::size_t unit_bytes = 4;

  std::size_t total_rounds() const noexcept { return rounds.size(); }
  std::uint64_t total_units() const noexcept {
    return rounds.empty() ? 0 : rounds.back().cumulative_units;
  }
  std::uint64_t total_bytes() const noexcept { return total_units() * unit_bytes; }
};

/// Default per-client work: `client_round`.
struct RunClientRound {
  UpdateMessage operator()(ClientState& client, const ProbabilityVector& p_global,
                           const CEParams& params, std::size_t round) const {
    return client_round(client, p_global, params, round);
  }
};

/// Server loop. `runner(client, p_G, params, round)` produces each client's
/// message; it is a parameter so tests can observe or replace client work.
template <typename Runner = RunClientRound>
FederationReport run_federation(std::vector<ClientState>& clients, const CEParams& params,
                                const FaultModel& fault, const FederationSettings& settings = {},
                                Runner runner = {}) {
  detail::require(!clients.empty(), "run_federation: need at least one client");
  detail::require(settings.max_rounds >= 1, "run_federation: max_rounds must be >= 1");
  detail::require(fault.rho >= 0.0 && fault.rho < 1.0, "run_federation: rho must lie in [0, 1)");
  params.validate();
  const std::size_t m = clients.front().data.features();
  for (const auto& c : clients)
    if (c.data.features() != m)
      throw ProtocolError("run_federation: client " + std::to_string(c.id) + " has " +
                          std::to_string(c.data.features()) + " features, expected " +
                          std::to_string(m));

  ProbabilityVector global = settings.initial.value_or(ProbabilityVector::uniform(m));
  detail::require(global.size() == m, "run_federation: initial vector length mismatch");

  CEParams client_params = params;
  if (settings.threads > 1) client_params.threads = 1;
  const std::uint64_t b = bitmap_units(m, settings.unit_bytes);

  FederationReport report;
  report.unit_bytes = settings.unit_bytes;
  double v = 0.0;
  double v_old = 0.0;
  std::uint64_t cumulative = 0;
  std::vector<UpdateMessage> outbox(clients.size());

  for (std::size_t r = 1; r <= settings.max_rounds; ++r) {
    const std::uint64_t broadcast_z = encode_message(global, 0, 0, params.epsilon).nonzero_probs.size();
    for (auto& c : clients) c.local_p = global;

    parallel_for(clients.size(), settings.threads, [&](std::size_t l) {
      outbox[l] = runner(clients[l], global, client_params, r);
    });

    RoundRecord rec;
    rec.round = r;
    std::vector<UpdateMessage> delivered;
    for (std::size_t l = 0; l < clients.size(); ++l) {
      rec.units += (broadcast_z + 1 + b) + (outbox[l].nonzero_probs.size() + 1 + b);
      rec.draw_sizes.push_back(clients[l].records_per_round());
      if (fault.is_faulty(clients[l].id, r)) continue;
      rec.participants.push_back(clients[l].id);
      delivered.push_back(outbox[l]);
    }

    const ProbabilityVector previous = global;
    if (auto next = aggregate(delivered, m, params.epsilon)) global = std::move(*next);
    v_old = v;
    v = ks_two_sample(previous.values(), global.values());

    cumulative += rec.units;
    rec.cumulative_units = cumulative;
    rec.global = global;
    rec.ks_p_value = v;
    rec.selected_count = select_features(global, settings.threshold).size();
    report.rounds.push_back(std::move(rec));

    if (check_convergence(v, v_old, settings.tau1, settings.tau2)) {
      report.converged = true;
      break;
    }
  }

  report.final_global = global;
  report.selected = select_features(global, settings.threshold);
  return report;
}

/// Centralized CE: one client holding the whole dataset, no faults.
inline FederationReport run_centralized(const DiscreteDataset& data, const CEParams& params,
                                        const FederationSettings& settings = {}) {
  std::vector<ClientState> clients(1);
  clients[0].data = data;
  clients[0].local_p = ProbabilityVector::uniform(data.features());
  clients[0].seed = params.seed;
  return run_federation(clients, params, FaultModel{}, settings);
}

}  // namespace fedfs
