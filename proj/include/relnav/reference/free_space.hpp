#pragma once

#include "relnav/core/camera.hpp"

namespace relnav::reference {

struct FreeSpaceResult {
  double psi{0.0};
  bool blocked{false};  // no free component: psi held
  int pixel_row{-1};
  int pixel_col{-1};
  double azimuth{0.0};  // body-frame azimuth of the chosen pixel
};

/// Direction of maximum free space: threshold the depth image at free_range,
/// take the largest 4-connected free component, and steer toward the pixel
/// farthest from the component boundary (exact Euclidean distance transform;
/// image borders count as boundary). Ties prefer the smallest |azimuth|, then
/// row-major order.
FreeSpaceResult free_space_heading(const DepthImage& depth,
                                   const CameraModel& cam, double current_psi,
                                   double free_range);

/// Exact squared Euclidean distance transform of a binary mask (distance of
/// each true cell to the nearest false cell; cells outside the image count as
/// false). Exposed for testability.
std::vector<double> squared_distance_transform(const std::vector<bool>& mask,
                                               int width, int height);

}  // namespace relnav::reference
