#include <doctest.h>

#include <map>

#include "reference_models.hpp"
#include "sdlpq/mux.hpp"

using namespace sdlpq;

namespace {

Packet pk(PacketId id) { return Packet{id, static_cast<Priority>(id), 0}; }

}  // namespace

TEST_CASE("mux: registered timing holds a lone arrival for one slot") {
  FifoMux mux({4, 2, MuxTiming::registered});
  const Packet x = pk(1);
  auto first = mux.step(std::vector<Packet>{x});
  CHECK_FALSE(first.departure);
  CHECK(mux.next_departure() == x);
  auto second = mux.step({});
  REQUIRE(second.departure);
  CHECK(*second.departure == x);
  CHECK(mux.occupancy() == 0);
}

TEST_CASE("mux: cut-through lets an arrival into an empty buffer leave at once") {
  FifoMux mux({4, 2, MuxTiming::cut_through});
  const Packet x = pk(1);
  auto out = mux.step(std::vector<Packet>{x});
  REQUIRE(out.departure);
  CHECK(*out.departure == x);
  CHECK(mux.occupancy() == 0);
}

TEST_CASE("mux: overflow count follows flow conservation") {
  FifoMux mux({4, 2, MuxTiming::registered});
  mux.step(std::vector<Packet>{pk(1), pk(2)});
  REQUIRE(mux.occupancy() == 2);
  auto out = mux.step(std::vector<Packet>{pk(3), pk(4), pk(5)});
  REQUIRE(out.departure);
  CHECK(out.departure->id == 1);
  // q(t-1) + arrivals - departure - B = 2 + 3 - 1 - 2.
  REQUIRE(out.losses.size() == 2);
  CHECK(out.losses[0].id == 5);
  CHECK(out.losses[1].id == 4);
  CHECK(mux.occupancy() == 2);
}

TEST_CASE("mux: packets leave in arrival order") {
  FifoMux mux({2, 4, MuxTiming::registered});
  std::vector<PacketId> order;
  auto record = [&order](const MuxStep& s) {
    if (s.departure) order.push_back(s.departure->id);
  };
  record(mux.step(std::vector<Packet>{pk(7), pk(9)}));
  record(mux.step(std::vector<Packet>{pk(3)}));
  for (int i = 0; i < 3; ++i) record(mux.step({}));
  CHECK(order == std::vector<PacketId>{7, 9, 3});
}

TEST_CASE("mux: too many arrivals and bad configs are rejected") {
  FifoMux mux({2, 4, MuxTiming::registered});
  CHECK_THROWS_AS(mux.step(std::vector<Packet>{pk(1), pk(2), pk(3)}), LinkOvercommit);
  CHECK_THROWS_AS(FifoMux({0, 1, MuxTiming::registered}), std::invalid_argument);
  CHECK_THROWS_AS(FifoMux({1, 0, MuxTiming::registered}), std::invalid_argument);
}

TEST_CASE("mux: matches the brute-force FIFO on random arrival patterns") {
  int cases = 0;
  for (int n : {1, 2, 4}) {
    for (int buffer : {1, 2, 4, 8}) {
      for (MuxTiming timing : {MuxTiming::registered, MuxTiming::cut_through}) {
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
          std::mt19937_64 rng(seed * 7919 + static_cast<std::uint64_t>(n * 31 + buffer));
          FifoMux mux({n, buffer, timing});
          testing::BruteFifo ref(n, buffer, timing == MuxTiming::cut_through);
          PacketId next = 1;
          std::map<PacketId, Slot> arrived;
          Slot last_departure_arrival = 0;
          for (Slot t = 1; t <= 60; ++t) {
            const int k = static_cast<int>(rng() % static_cast<std::uint64_t>(n + 1));
            std::vector<Packet> in;
            for (int i = 0; i < k; ++i) in.push_back(pk(next++));
            for (const Packet& p : in) arrived[p.id] = t;

            const int q_prev = mux.occupancy();
            const auto got = mux.step(in);
            const auto want = ref.step(in);
            REQUIRE(got.departure == want.departure);
            REQUIRE(got.losses == want.losses);

            // Flow conservation and non-idling.
            CHECK(mux.occupancy() == q_prev + k - (got.departure ? 1 : 0) -
                                         static_cast<int>(got.losses.size()));
            const bool busy = timing == MuxTiming::registered ? q_prev > 0 : q_prev + k > 0;
            CHECK(got.departure.has_value() == busy);
            CHECK(mux.occupancy() <= buffer);
            if (got.departure) {
              const Slot a = arrived[got.departure->id];
              CHECK(a >= last_departure_arrival);
              last_departure_arrival = a;
            }
            ++cases;
          }
        }
      }
    }
  }
  CHECK(cases >= 10000);
}
