#include "ssr/seqrank.hpp"

#include <cmath>
#include <limits>

#include "ssr/error.hpp"

namespace ssr {

std::uint32_t RankAccumulator::next_priority()
{
  // xorshift64*
  priority_state_ ^= priority_state_ >> 12;
  priority_state_ ^= priority_state_ << 25;
  priority_state_ ^= priority_state_ >> 27;
  return static_cast<std::uint32_t>((priority_state_ * 0x2545f4914f6cdd1dull) >> 32);
}

std::uint32_t
RankAccumulator::insert(std::uint32_t tree, std::uint32_t fresh, std::size_t& at_most)
{
  if (tree == nil)
  {
    return fresh;
  }
  Node& t = nodes_[tree];
  ++t.size;
  if (nodes_[fresh].key >= t.key)
  {
    at_most += size_of(t.left) + 1;
    std::uint32_t child = insert(t.right, fresh, at_most);
    Node& parent = nodes_[tree];
    parent.right = child;
    if (nodes_[child].priority > parent.priority)
    {
      // rotate left
      Node& c = nodes_[child];
      parent.right = c.left;
      c.left = tree;
      c.size = parent.size;
      parent.size = size_of(parent.left) + size_of(parent.right) + 1;
      return child;
    }
  }
  else
  {
    std::uint32_t child = insert(t.left, fresh, at_most);
    Node& parent = nodes_[tree];
    parent.left = child;
    if (nodes_[child].priority > parent.priority)
    {
      // rotate right
      Node& c = nodes_[child];
      parent.left = c.right;
      c.right = tree;
      c.size = parent.size;
      parent.size = size_of(parent.left) + size_of(parent.right) + 1;
      return child;
    }
  }
  return tree;
}

SignedRank RankAccumulator::push(double x)
{
  if (!std::isfinite(x))
  {
    throw InputError("RankAccumulator::push: non-finite observation");
  }
  if (nodes_.size() >= std::numeric_limits<std::uint32_t>::max() - 1)
  {
    throw ConfigError("RankAccumulator capacity exceeded");
  }
  auto const fresh = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(Node{std::fabs(x), next_priority(), 1, nil, nil});
  std::size_t at_most = 0;
  root_ = insert(root_, fresh, at_most);

  SignedRank out;
  out.sign = (x > 0) - (x < 0);
  out.rank = at_most + 1;
  out.index = nodes_.size();
  return out;
}

void RankAccumulator::reset()
{
  nodes_.clear();
  root_ = nil;
  priority_state_ = 0x9e3779b97f4a7c15ull;
}

std::size_t RankAccumulator::count_at_most(double m) const
{
  std::size_t total = 0;
  std::uint32_t n = root_;
  while (n != nil)
  {
    Node const& node = nodes_[n];
    if (node.key <= m)
    {
      total += size_of(node.left) + 1;
      n = node.right;
    }
    else
    {
      n = node.left;
    }
  }
  return total;
}

std::vector<double> RankAccumulator::magnitudes() const
{
  std::vector<double> out;
  out.reserve(nodes_.size());
  std::vector<std::uint32_t> stack;
  std::uint32_t n = root_;
  while (n != nil || !stack.empty())
  {
    while (n != nil)
    {
      stack.push_back(n);
      n = nodes_[n].left;
    }
    n = stack.back();
    stack.pop_back();
    out.push_back(nodes_[n].key);
    n = nodes_[n].right;
  }
  return out;
}

}  // namespace ssr
