#include "manikey/field_ops.hpp"

namespace manikey {

RbfField rbf_map(const GeodesicField& geodesic, float epsilon) {
  if ((geodesic.values.array() < 0.0f).any())
    throw InvalidParams("geodesic values must be nonnegative");
  RbfField field;
  field.epsilon = epsilon;
  field.values = rbf_values(geodesic.values, epsilon);
  return field;
}

}  // namespace manikey
