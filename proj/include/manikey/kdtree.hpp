#pragma once

#include <Eigen/Core>
#include <vector>

namespace manikey {

/// Median-split kd-tree over the rows of an n x 3 matrix.
/// The matrix is copied; queries are const and thread-safe.
class KdTree {
 public:
  explicit KdTree(const Eigen::MatrixX3f& pts);

  Eigen::Index size() const { return pts_.rows(); }

  /// Indices and squared distances of the k nearest points to q, closest
  /// first. `exclude` removes one index (typically the query point itself).
  void knn(const Eigen::Vector3f& q, int k, std::vector<int>& idx, std::vector<float>& dist2,
           int exclude = -1) const;

  /// Index of the single nearest point (excluding `exclude`), or -1.
  int nearest(const Eigen::Vector3f& q, int exclude = -1) const;

  /// All indices within radius r of q, unsorted.
  std::vector<int> radius(const Eigen::Vector3f& q, float r, int exclude = -1) const;

  /// Number of points within radius r of q, excluding `exclude`.
  int count_within(const Eigen::Vector3f& q, float r, int exclude = -1) const;

 private:
  struct Node {
    float split = 0.0f;
    int axis = -1;   // -1 marks a leaf
    int left = -1;   // child node, or begin in order_ for leaves
    int right = -1;  // child node, or end in order_ for leaves
  };

  int build(int begin, int end);

  template <typename Visitor>
  void traverse_radius(int node, const Eigen::Vector3f& q, float r2, Visitor&& visit) const;

  Eigen::MatrixX3f pts_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace manikey
