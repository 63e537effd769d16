#include "manikey/kdtree.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace manikey {

namespace {
constexpr int kLeafSize = 16;
}

KdTree::KdTree(const Eigen::MatrixX3f& pts) : pts_(pts) {
  order_.resize(static_cast<std::size_t>(pts_.rows()));
  std::iota(order_.begin(), order_.end(), 0);
  if (!order_.empty()) {
    nodes_.reserve(order_.size() / kLeafSize * 2 + 2);
    root_ = build(0, static_cast<int>(order_.size()));
  }
}

int KdTree::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  if (end - begin <= kLeafSize) {
    nodes_[id].axis = -1;
    nodes_[id].left = begin;
    nodes_[id].right = end;
    return id;
  }

  Eigen::Vector3f lo = pts_.row(order_[begin]);
  Eigen::Vector3f hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(pts_.row(order_[i]).transpose());
    hi = hi.cwiseMax(pts_.row(order_[i]).transpose());
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) { return pts_(a, axis) < pts_(b, axis); });

  nodes_[id].axis = axis;
  nodes_[id].split = pts_(order_[mid], axis);
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::knn(const Eigen::Vector3f& q, int k, std::vector<int>& idx,
                 std::vector<float>& dist2, int exclude) const {
  idx.clear();
  dist2.clear();
  if (root_ < 0 || k <= 0) return;

  // max-heap of (dist2, index), worst candidate on top
  using Cand = std::pair<float, int>;
  std::priority_queue<Cand> heap;

  // iterative traversal, nearer child first
  std::vector<std::pair<int, float>> stack;  // (node, dist2 to its region)
  stack.emplace_back(root_, 0.0f);
  while (!stack.empty()) {
    const auto [node, bound] = stack.back();
    stack.pop_back();
    if (static_cast<int>(heap.size()) == k && bound >= heap.top().first) continue;
    const Node& nd = nodes_[node];
    if (nd.axis < 0) {
      for (int i = nd.left; i < nd.right; ++i) {
        const int p = order_[i];
        if (p == exclude) continue;
        const float d2 = (pts_.row(p).transpose() - q).squaredNorm();
        if (static_cast<int>(heap.size()) < k) {
          heap.emplace(d2, p);
        } else if (d2 < heap.top().first) {
          heap.pop();
          heap.emplace(d2, p);
        }
      }
      continue;
    }
    const float delta = q[nd.axis] - nd.split;
    const int near = delta < 0.0f ? nd.left : nd.right;
    const int far = delta < 0.0f ? nd.right : nd.left;
    stack.emplace_back(far, delta * delta);
    stack.emplace_back(near, 0.0f);
  }

  idx.resize(heap.size());
  dist2.resize(heap.size());
  for (int i = static_cast<int>(heap.size()) - 1; i >= 0; --i) {
    idx[i] = heap.top().second;
    dist2[i] = heap.top().first;
    heap.pop();
  }
}

int KdTree::nearest(const Eigen::Vector3f& q, int exclude) const {
  std::vector<int> idx;
  std::vector<float> d2;
  knn(q, 1, idx, d2, exclude);
  return idx.empty() ? -1 : idx[0];
}

template <typename Visitor>
void KdTree::traverse_radius(int node, const Eigen::Vector3f& q, float r2, Visitor&& visit) const {
  const Node& nd = nodes_[node];
  if (nd.axis < 0) {
    for (int i = nd.left; i < nd.right; ++i) {
      const int p = order_[i];
      const float d2 = (pts_.row(p).transpose() - q).squaredNorm();
      if (d2 <= r2) visit(p);
    }
    return;
  }
  const float delta = q[nd.axis] - nd.split;
  const int near = delta < 0.0f ? nd.left : nd.right;
  const int far = delta < 0.0f ? nd.right : nd.left;
  traverse_radius(near, q, r2, visit);
  if (delta * delta <= r2) traverse_radius(far, q, r2, visit);
}

std::vector<int> KdTree::radius(const Eigen::Vector3f& q, float r, int exclude) const {
  std::vector<int> out;
  if (root_ < 0 || r < 0.0f) return out;
  traverse_radius(root_, q, r * r, [&](int p) {
    if (p != exclude) out.push_back(p);
  });
  return out;
}

int KdTree::count_within(const Eigen::Vector3f& q, float r, int exclude) const {
  int count = 0;
  if (root_ < 0 || r < 0.0f) return 0;
  traverse_radius(root_, q, r * r, [&](int p) {
    if (p != exclude) ++count;
  });
  return count;
}

}  // namespace manikey
