#include "wickspde/modes.hpp"

#include <algorithm>
#include <map>
#include <mutex>

namespace wickspde {

ModeSet::ModeSet(int cutoff) : cutoff_(cutoff) {
  if (cutoff < 0) throw std::invalid_argument("ModeSet: cutoff must be >= 0");
  long long r2 = static_cast<long long>(cutoff) * cutoff;
  table_.assign(static_cast<std::size_t>(2 * cutoff + 1) * (2 * cutoff + 1), 0);
  for (int l2 = -cutoff; l2 <= cutoff; ++l2)
    for (int l1 = -cutoff; l1 <= cutoff; ++l1) {
      Mode m{l1, l2};
      if (m.norm2() > r2) continue;
      table_[flat(l1, l2)] = static_cast<std::uint32_t>(modes_.size());
      modes_.push_back(m);
    }
  conj_index_.resize(modes_.size());
  for (std::size_t i = 0; i < modes_.size(); ++i)
    conj_index_[i] = table_[flat(-modes_[i].l1, -modes_[i].l2)];

  std::map<long long, int> h;
  for (const Mode& m : modes_) ++h[m.norm2()];
  hist_.assign(h.begin(), h.end());
}

std::shared_ptr<const ModeSet> ModeSet::shared(int cutoff) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const ModeSet>> cache;
  std::lock_guard<std::mutex> lk(mu);
  auto& slot = cache[cutoff];
  if (!slot) slot = std::make_shared<const ModeSet>(cutoff);
  return slot;
}

}  // namespace wickspde
