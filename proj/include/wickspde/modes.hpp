#pragma once
// Mode set for band-limited fields on the 2-torus: all l in Z^2 with |l| <= N
// (Euclidean ball), in a fixed canonical order with O(1) index lookup.

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

namespace wickspde {

struct Mode {
  int l1 = 0, l2 = 0;
  long long norm2() const {
    return static_cast<long long>(l1) * l1 + static_cast<long long>(l2) * l2;
  }
};

class ModeSet {
 public:
  explicit ModeSet(int cutoff);

  int cutoff() const { return cutoff_; }
  std::size_t size() const { return modes_.size(); }
  const Mode& operator[](std::size_t i) const { return modes_[i]; }
  const std::vector<Mode>& modes() const { return modes_; }

  bool contains(int l1, int l2) const {
    return static_cast<long long>(l1) * l1 + static_cast<long long>(l2) * l2 <=
           static_cast<long long>(cutoff_) * cutoff_;
  }
  // Index in canonical order; throws for modes outside the ball.
  std::size_t index_of(int l1, int l2) const {
    if (!contains(l1, l2)) throw std::out_of_range("ModeSet: mode outside cutoff ball");
    return table_[flat(l1, l2)];
  }
  std::size_t index_of_conjugate(std::size_t i) const { return conj_index_[i]; }

  // True for the canonical representative of each conjugate pair {l, -l}:
  // l2 > 0, or l2 == 0 and l1 > 0. The zero mode is its own representative.
  static bool is_positive(const Mode& m) { return m.l2 > 0 || (m.l2 == 0 && m.l1 > 0); }

  // Distinct squared radii with multiplicities, for kernels that depend on |l|^2 only.
  const std::vector<std::pair<long long, int>>& radius2_histogram() const { return hist_; }

  // Shared immutable instances, cached per cutoff.
  static std::shared_ptr<const ModeSet> shared(int cutoff);

 private:
  std::size_t flat(int l1, int l2) const {
    return static_cast<std::size_t>(l1 + cutoff_) * (2 * cutoff_ + 1) +
           static_cast<std::size_t>(l2 + cutoff_);
  }

  int cutoff_;
  std::vector<Mode> modes_;
  std::vector<std::uint32_t> table_;
  std::vector<std::uint32_t> conj_index_;
  std::vector<std::pair<long long, int>> hist_;
};

}  // namespace wickspde
