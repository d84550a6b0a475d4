#include "nladam/trajectory.hpp"

#include <algorithm>

namespace nladam {

StateSeries Trajectory::theta_states() const {
  StateSeries s(size(), dim());
  for (std::size_t i = 0; i < size(); ++i) std::copy(theta[i].begin(), theta[i].end(), s[i].begin());
  return s;
}

Vec Trajectory::theta_at(double t) const { return cubic_interpolate(theta_series(), t).value; }

}  // namespace nladam
