#include "sdlpq/model.hpp"

#include <algorithm>
#include <string>

namespace sdlpq {

namespace {

void require_m(int m) {
  if (m < 1 || m > kMaxM) {
    throw std::invalid_argument("m must be in [1, " + std::to_string(kMaxM) +
                                "], got " + std::to_string(m));
  }
}

int pow2(int e) { return 1 << e; }

}  // namespace

DuplicatePriority::DuplicatePriority(Priority p)
    : std::logic_error("duplicate priority " + std::to_string(p)), priority_(p) {}

std::vector<RankInterval> psi_partition(int m) {
  require_m(m);
  const int top = 3 * pow2(m - 1);
  std::vector<RankInterval> out;
  out.reserve(static_cast<std::size_t>(2 * m - 1));
  for (int j = 1; j <= m; ++j) out.push_back({pow2(j - 1), pow2(j) - 1});
  for (int j = m + 1; j <= 2 * m - 1; ++j) {
    out.push_back({top - pow2(2 * m - j), top - pow2(2 * m - j - 1) - 1});
  }
  return out;
}

int group_buffer_size(int g, int m) {
  require_m(m);
  if (g < 1 || g > 2 * m - 1) {
    throw std::out_of_range("group index " + std::to_string(g) + " outside [1, " +
                            std::to_string(2 * m - 1) + "]");
  }
  const int j = std::min(g, 2 * m - g);
  return j == 1 ? 1 : pow2(j - 2);
}

int queue_capacity(int m) {
  require_m(m);
  return 3 * pow2(m - 1) - 2;
}

SystemParams SystemParams::make(int m) {
  SystemParams p;
  p.m = m;
  p.group_count = 2 * m - 1;
  p.capacity = queue_capacity(m);
  p.psi = psi_partition(m);
  p.group_buffers.reserve(static_cast<std::size_t>(p.group_count));
  for (int g = 1; g <= p.group_count; ++g) p.group_buffers.push_back(group_buffer_size(g, m));
  return p;
}

int SystemParams::group_of_rank(int rank) const {
  // psi is sorted by lo; find the last interval starting at or before rank.
  auto it = std::upper_bound(psi.begin(), psi.end(), rank,
                             [](int r, const RankInterval& iv) { return r < iv.lo; });
  if (it == psi.begin()) return 0;
  --it;
  return it->contains(rank) ? static_cast<int>(it - psi.begin()) + 1 : 0;
}

RankInterval SystemParams::drift_envelope(int g) const {
  const RankInterval& iv = interval(g);
  const int slack = buffer(g) - 1;
  return {std::max(1, iv.lo - slack), std::min(capacity, iv.hi + slack)};
}

int SystemParams::group_capacity_bound(int g) const {
  return interval(g).size() + 2 * (buffer(g) - 1);
}

std::unordered_map<PacketId, int> ranks(std::span<const Packet> population) {
  std::vector<const Packet*> order;
  order.reserve(population.size());
  for (const Packet& p : population) order.push_back(&p);
  std::sort(order.begin(), order.end(),
            [](const Packet* a, const Packet* b) { return outranks(*a, *b); });
  std::unordered_map<PacketId, int> out;
  out.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k > 0 && order[k]->priority == order[k - 1]->priority) {
      throw DuplicatePriority(order[k]->priority);
    }
    out.emplace(order[k]->id, static_cast<int>(k) + 1);
  }
  return out;
}

}  // namespace sdlpq
