#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "healsim/elevator.hpp"
#include "healsim/graph.hpp"
#include "healsim/protocols.hpp"
#include "healsim/rng.hpp"
#include "healsim/world.hpp"

using namespace healsim;

namespace {

/// Bare world over a static graph: planted models, empty shards (training is
/// a no-op), lr irrelevant.
World make_static_world(DirectedGraph g, const std::map<NodeId, std::vector<double>>& models) {
  World w;
  w.rep_seed = 123;
  w.dynamic = false;
  w.static_graph = std::move(g);
  for (const auto& [id, values] : models) {
    NodeState st;
    st.model.spec = {ModelKind::BinaryLogistic, values.size() - 1, 1};
    st.model.values = values;
    w.nodes.emplace(id, std::move(st));
  }
  w.refresh_graph();
  return w;
}

void run_cycles(World& w, Protocol& p, int cycles) {
  for (int t = 0; t < cycles; ++t) {
    w.cycle += 1;
    if (w.dynamic) {
      w.overlay.run_cycle();
    }
    w.refresh_graph();
    p.step(w);
  }
}

}  // namespace

TEST_CASE("role_assignment mirrors hub detection") {
  const DirectedGraph g = gen_star(6);
  CHECK(role_assignment(0, g) == Role::Hub);
  for (NodeId i = 1; i < 6; ++i) CHECK(role_assignment(i, g) == Role::Client);
}

TEST_CASE("hub-based learning on a star reproduces the hand-computed mean") {
  World w = make_static_world(gen_star(4), {{0, {0.0, 0.0}},
                                            {1, {3.0, 1.0}},
                                            {2, {6.0, 2.0}},
                                            {3, {9.0, 3.0}}});
  HealProtocol heal(HealOptions{1, false});

  run_cycles(w, heal, 1);
  // Hub 0 collected all three client models; with one hub the global is
  // exactly their running mean: (3+6+9)/3 = 6, (1+2+3)/3 = 2.
  REQUIRE(heal.last_globals().size() == 1);
  CHECK(heal.last_globals().at(0).values == std::vector<double>{6.0, 2.0});
  CHECK(w.nodes.at(0).model.values == std::vector<double>{6.0, 2.0});
  CHECK(w.bus.total_sent() == 6);  // 3 client sends + 3 global sends

  run_cycles(w, heal, 1);
  // Clients fold the global in at the start of the next cycle.
  for (NodeId i = 1; i < 4; ++i)
    CHECK(w.nodes.at(i).model.values == std::vector<double>{6.0, 2.0});
}

TEST_CASE("uneven hub assignment biases the global exactly as computed by hand") {
  // Two servers, three workers: 2 and 4 report to server 0, 3 to server 1.
  // Aggregates: ([0]+[2])/2 = [1] and [4]; global = ([1]+[4])/2 = [2.5] on
  // both servers, regardless of the 2:1 collection imbalance.
  World w = make_static_world(gen_multistar(5, 2), {{0, {9.0, 9.0}},
                                                    {1, {8.0, 8.0}},
                                                    {2, {0.0, 0.0}},
                                                    {3, {4.0, 4.0}},
                                                    {4, {2.0, 2.0}}});
  GaiaProtocol gaia({0, 1}, {{2, 0}, {3, 1}, {4, 0}});

  run_cycles(w, gaia, 1);
  CHECK(w.nodes.at(0).model.values == std::vector<double>{2.5, 2.5});
  CHECK(w.nodes.at(1).model.values == std::vector<double>{2.5, 2.5});
  CHECK(w.nodes.at(2).model.values == std::vector<double>{0.0, 0.0});

  run_cycles(w, gaia, 1);
  for (NodeId i = 2; i < 5; ++i)
    CHECK(w.nodes.at(i).model.values == std::vector<double>{2.5, 2.5});
}

TEST_CASE("epidemic on a 3-clique averages everything in one cycle") {
  Rng rng(8);
  for (int c = 0; c < 20; ++c) {
    std::map<NodeId, std::vector<double>> models;
    double sum0 = 0.0, sum1 = 0.0;
    for (NodeId i = 0; i < 3; ++i) {
      models[i] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
      sum0 += models[i][0];
      sum1 += models[i][1];
    }
    World w = make_static_world(gen_complete(3), models);
    EpidemicProtocol epidemic;
    run_cycles(w, epidemic, 1);
    CHECK(w.bus.total_sent() == 6);
    for (NodeId i = 0; i < 3; ++i) {
      CHECK(w.nodes.at(i).model.values[0] == doctest::Approx(sum0 / 3.0).epsilon(1e-12));
      CHECK(w.nodes.at(i).model.values[1] == doctest::Approx(sum1 / 3.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("gossip pushes exactly one message per node per cycle") {
  std::map<NodeId, std::vector<double>> models;
  for (NodeId i = 0; i < 6; ++i) models[i] = {static_cast<double>(i), 0.0};
  World w = make_static_world(gen_ring(6), models);
  GossipProtocol gossip;
  std::uint64_t prev = 0;
  for (int t = 0; t < 3; ++t) {
    run_cycles(w, gossip, 1);
    CHECK(w.bus.total_sent() - prev == 6);
    prev = w.bus.total_sent();
  }
}

TEST_CASE("a crashed server halts centralized learning permanently") {
  std::map<NodeId, std::vector<double>> models;
  for (NodeId i = 0; i < 5; ++i) models[i] = {static_cast<double>(i), 1.0};
  World w = make_static_world(gen_star(5), models);
  FedAvgProtocol fedavg(0);

  run_cycles(w, fedavg, 1);
  REQUIRE(fedavg.last_global().has_value());
  CHECK(fedavg.last_global()->values[0] == doctest::Approx(2.5));  // mean of 1..4
  CHECK_FALSE(fedavg.halted());

  w.kill(0);
  const auto before = w.nodes.at(3).model.values;
  const auto sent_before = w.bus.total_sent();
  run_cycles(w, fedavg, 3);
  CHECK(fedavg.halted());
  CHECK(w.nodes.at(3).model.values == before);
  CHECK(w.bus.total_sent() == sent_before);
}

TEST_CASE("sends to a stale hub view are lost, not fatal") {
  std::map<NodeId, std::vector<double>> models;
  for (NodeId i = 0; i < 4; ++i) models[i] = {1.0, 1.0};
  World w = make_static_world(gen_star(4), models);
  HealProtocol heal(HealOptions{1, false});

  run_cycles(w, heal, 1);
  w.nodes.erase(0);  // crash the hub but keep the stale hub set
  w.bus.discard_for(0);
  const auto dropped_before = w.bus.total_dropped();
  w.cycle += 1;
  heal.step(w);  // clients still believe 0 is the hub
  CHECK(w.bus.total_dropped() > dropped_before);
}

TEST_CASE("hub-based learning yields bitwise-identical globals on every hub") {
  Rng rng(21);
  std::map<NodeId, std::vector<double>> models;
  for (NodeId i = 0; i < 30; ++i)
    models[i] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};

  World w;
  w.rep_seed = 7;
  w.dynamic = true;
  w.overlay = ElevatorOverlay(3, 8, 7);
  w.overlay.bootstrap(gen_kregular(30, 8, 7));
  for (const auto& [id, values] : models) {
    NodeState st;
    st.model.spec = {ModelKind::BinaryLogistic, values.size() - 1, 1};
    st.model.values = values;
    w.nodes.emplace(id, std::move(st));
  }
  HealProtocol heal(HealOptions{1, false});

  run_cycles(w, heal, 12);
  REQUIRE(detect_hubs(w.current_graph).size() == 3);
  REQUIRE(heal.last_globals().size() >= 2);
  const auto& first = heal.last_globals().begin()->second.values;
  for (const auto& [hub, global] : heal.last_globals()) CHECK(global.values == first);
}

TEST_CASE("weighted and unweighted hub averages agree with a single hub") {
  std::map<NodeId, std::vector<double>> models;
  for (NodeId i = 0; i < 5; ++i) models[i] = {0.1 * static_cast<double>(i + 1), 2.0};
  World a = make_static_world(gen_star(5), models);
  World b = make_static_world(gen_star(5), models);
  HealProtocol plain(HealOptions{1, false});
  HealProtocol weighted(HealOptions{1, true});
  run_cycles(a, plain, 2);
  run_cycles(b, weighted, 2);
  for (NodeId i = 0; i < 5; ++i) {
    REQUIRE(a.nodes.at(i).model.values.size() == b.nodes.at(i).model.values.size());
    for (std::size_t p = 0; p < a.nodes.at(i).model.values.size(); ++p)
      CHECK(a.nodes.at(i).model.values[p] ==
            doctest::Approx(b.nodes.at(i).model.values[p]).epsilon(1e-12));
  }
}

TEST_CASE("consensus containment: averaging never leaves the initial box") {
  Rng meta(31337);
  for (int c = 0; c < 1000; ++c) {
    const std::size_t n = 3 + meta.below(6);
    const std::size_t dim = 1 + meta.below(3);
    std::map<NodeId, std::vector<double>> models;
    std::vector<double> lo(dim + 1, 1e9), hi(dim + 1, -1e9);
    for (NodeId i = 0; i < n; ++i) {
      std::vector<double> v(dim + 1);
      for (std::size_t p = 0; p <= dim; ++p) {
        v[p] = meta.uniform(-1.0, 1.0);
        lo[p] = std::min(lo[p], v[p]);
        hi[p] = std::max(hi[p], v[p]);
      }
      models[i] = std::move(v);
    }

    World w;
    std::unique_ptr<Protocol> proto;
    switch (meta.below(5)) {
      case 0:
        w = make_static_world(gen_star(n), models);
        proto = std::make_unique<HealProtocol>(HealOptions{1, meta.below(2) == 0});
        break;
      case 1:
        w = make_static_world(gen_star(n), models);
        proto = std::make_unique<FedAvgProtocol>(NodeId{0});
        break;
      case 2: {
        const std::size_t servers = 1 + meta.below(2);
        std::vector<NodeId> sv;
        std::map<NodeId, NodeId> assign;
        for (std::size_t i = 0; i < servers; ++i) sv.push_back(i);
        for (std::size_t i = servers; i < n; ++i) assign[i] = (i - servers) % servers;
        w = make_static_world(gen_multistar(n, servers), models);
        proto = std::make_unique<GaiaProtocol>(std::move(sv), std::move(assign));
        break;
      }
      case 3:
        w = make_static_world(meta.below(2) == 0 ? gen_ring(n) : gen_complete(n), models);
        proto = std::make_unique<GossipProtocol>();
        break;
      default:
        w = make_static_world(meta.below(2) == 0 ? gen_ring(n) : gen_complete(n), models);
        proto = std::make_unique<EpidemicProtocol>();
        break;
    }

    const int cycles = 1 + static_cast<int>(meta.below(4));
    for (int t = 0; t < cycles; ++t) {
      if (w.nodes.size() > 2 && meta.below(4) == 0) {
        const auto ids = w.live_ids();
        w.kill(ids[meta.below(ids.size())]);
      }
      run_cycles(w, *proto, 1);
      for (const auto& [id, st] : w.nodes)
        for (std::size_t p = 0; p <= dim; ++p) {
          REQUIRE(st.model.values[p] >= lo[p] - 1e-12);
          REQUIRE(st.model.values[p] <= hi[p] + 1e-12);
        }
    }
  }
}
