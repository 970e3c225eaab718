#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ssr {

//! Output of one RankAccumulator::push.
struct SignedRank
{
  int sign = 0;            //!< -1, 0 or +1
  std::size_t rank = 0;    //!< #{j <= i : |x_j| <= |x_i|}
  std::size_t index = 0;   //!< i, 1-based
};

//---------------------------------------------------------------------------//
/*!
 * Streaming signed sequential ranks.
 *
 * Magnitudes are kept in a treap augmented with subtree sizes, so each push
 * costs O(log i) expected. Ties count toward the rank ("less than or equal"),
 * and an exact zero gets sign 0 while still entering the magnitude multiset.
 *
 * Nodes live in a contiguous arena; reset() keeps the capacity so a single
 * accumulator can be reused across Monte Carlo replications.
 */
class RankAccumulator
{
public:
  RankAccumulator() = default;

  //! Absorb x. Throws InputError for non-finite x, leaving state unchanged.
  SignedRank push(double x);

  void reset();

  std::size_t count() const { return nodes_.size(); }

  //! Number of stored magnitudes <= m (query only).
  std::size_t count_at_most(double m) const;

  //! Stored magnitudes in increasing order.
  std::vector<double> magnitudes() const;

private:
  static constexpr std::uint32_t nil = 0xffffffffu;

  struct Node
  {
    double key;
    std::uint32_t priority;
    std::uint32_t size;
    std::uint32_t left;
    std::uint32_t right;
  };

  std::vector<Node> nodes_;
  std::uint32_t root_ = nil;
  std::uint64_t priority_state_ = 0x9e3779b97f4a7c15ull;

  std::uint32_t size_of(std::uint32_t n) const
  {
    return n == nil ? 0 : nodes_[n].size;
  }
  std::uint32_t next_priority();
  std::uint32_t insert(std::uint32_t tree, std::uint32_t fresh, std::size_t& at_most);
};

}  // namespace ssr
