#include "manikey/types.hpp"

#include <unordered_set>

namespace manikey {

void KeypointSet::require_consistent_with(const PointCloud& cloud) const {
  const auto m = indices.size();
  if (positions.rows() != static_cast<Index>(m))
    throw ShapeMismatch("keypoint positions rows " + std::to_string(positions.rows()) +
                        " vs indices " + std::to_string(m));
  if (!labels.empty() && labels.size() != m)
    throw ShapeMismatch("keypoint labels " + std::to_string(labels.size()) + " vs indices " +
                        std::to_string(m));
  std::unordered_set<int> seen;
  for (std::size_t j = 0; j < m; ++j) {
    const int idx = indices[j];
    if (idx < 0 || idx >= cloud.size())
      throw DataError("keypoint index " + std::to_string(idx) + " out of range for cloud of " +
                      std::to_string(cloud.size()) + " points");
    if (!seen.insert(idx).second)
      throw DataError("keypoint index " + std::to_string(idx) + " is duplicated");
    if (positions.row(j) != cloud.points.row(idx))
      throw DataError("keypoint position " + std::to_string(j) +
                      " does not equal its cloud point");
  }
}

void AnnotatedSample::require_valid() const {
  cloud.require_valid();
  keypoints.require_consistent_with(cloud);
  if (geodesic) {
    if (geodesic->values.rows() != cloud.size() ||
        geodesic->values.cols() != static_cast<Index>(keypoints.size()))
      throw ShapeMismatch("geodesic field " + std::to_string(geodesic->values.rows()) + "x" +
                          std::to_string(geodesic->values.cols()) + " vs cloud " +
                          std::to_string(cloud.size()) + " and keypoints " +
                          std::to_string(keypoints.size()));
  }
}

std::string to_string(GeodesicMethod m) {
  return m == GeodesicMethod::dijkstra ? "dijkstra" : "heat";
}

GeodesicMethod geodesic_method_from_string(const std::string& s) {
  if (s == "dijkstra") return GeodesicMethod::dijkstra;
  if (s == "heat") return GeodesicMethod::heat;
  throw DataError("unknown geodesic method '" + s + "' (expected dijkstra or heat)");
}

const std::vector<std::string>& canonical_keypoint_labels() {
  static const std::vector<std::string> labels = {
      "right-rear-leg", "right-front-leg", "hip", "neck", "left-front-leg", "left-rear-leg"};
  return labels;
}

std::vector<int> default_flip_permutation() { return {5, 4, 2, 3, 1, 0}; }

}  // namespace manikey
