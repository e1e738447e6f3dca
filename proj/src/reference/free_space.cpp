#include "relnav/reference/free_space.hpp"

#include <limits>
#include <queue>

namespace relnav::reference {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1D squared distance transform (lower envelope of parabolas).
void dt_1d(const std::vector<double>& f, std::vector<double>& d, int n) {
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    d[q] = (q - v[k]) * (q - v[k]) + f[v[k]];
  }
}

}  // namespace

std::vector<double> squared_distance_transform(const std::vector<bool>& mask,
                                               int width, int height) {
  // Pad by one obstacle ring so the image border counts as boundary.
  const int w = width + 2, h = height + 2;
  std::vector<double> grid(static_cast<std::size_t>(w) * h, 0.0);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      grid[(r + 1) * w + (c + 1)] = mask[r * width + c] ? kInf : 0.0;
    }
  }

  std::vector<double> buf_f(std::max(w, h)), buf_d(std::max(w, h));
  for (int c = 0; c < w; ++c) {  // columns
    for (int r = 0; r < h; ++r) buf_f[r] = grid[r * w + c];
    dt_1d(buf_f, buf_d, h);
    for (int r = 0; r < h; ++r) grid[r * w + c] = buf_d[r];
  }
  for (int r = 0; r < h; ++r) {  // rows
    for (int c = 0; c < w; ++c) buf_f[c] = grid[r * w + c];
    dt_1d(buf_f, buf_d, w);
    for (int c = 0; c < w; ++c) grid[r * w + c] = buf_d[c];
  }

  std::vector<double> out(static_cast<std::size_t>(width) * height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) out[r * width + c] = grid[(r + 1) * w + (c + 1)];
  }
  return out;
}

FreeSpaceResult free_space_heading(const DepthImage& depth,
                                   const CameraModel& cam, double current_psi,
                                   double free_range) {
  FreeSpaceResult res;
  res.psi = current_psi;
  const int w = depth.width, h = depth.height;
  std::vector<bool> free_mask(static_cast<std::size_t>(w) * h);
  bool any_free = false;
  for (int i = 0; i < w * h; ++i) {
    free_mask[i] = depth.ranges[i] >= free_range;
    any_free = any_free || free_mask[i];
  }
  if (!any_free) {
    res.blocked = true;
    return res;
  }

  // Largest 4-connected free component (ties: first seed in row-major order).
  std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
  int best_label = -1, best_size = 0, next_label = 0;
  for (int i = 0; i < w * h; ++i) {
    if (!free_mask[i] || label[i] >= 0) continue;
    int size = 0;
    std::queue<int> q;
    q.push(i);
    label[i] = next_label;
    while (!q.empty()) {
      const int cur = q.front();
      q.pop();
      ++size;
      const int r = cur / w, c = cur % w;
      const int nbr[4] = {cur - w, cur + w, cur - 1, cur + 1};
      const bool ok[4] = {r > 0, r < h - 1, c > 0, c < w - 1};
      for (int k = 0; k < 4; ++k) {
        if (ok[k] && free_mask[nbr[k]] && label[nbr[k]] < 0) {
          label[nbr[k]] = next_label;
          q.push(nbr[k]);
        }
      }
    }
    if (size > best_size) {
      best_size = size;
      best_label = next_label;
    }
    ++next_label;
  }

  std::vector<bool> component(static_cast<std::size_t>(w) * h);
  for (int i = 0; i < w * h; ++i) component[i] = (label[i] == best_label);
  const std::vector<double> dist2 = squared_distance_transform(component, w, h);

  double best_d = -1.0;
  double best_az = 0.0;
  int best_r = -1, best_c = -1;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double d = dist2[r * w + c];
      if (!component[r * w + c]) continue;
      const double az = cam.pixel_azimuth(r, c);
      if (d > best_d ||
          (d == best_d && std::abs(az) < std::abs(best_az) - 1e-15)) {
        best_d = d;
        best_az = az;
        best_r = r;
        best_c = c;
      }
    }
  }

  res.psi = wrap_pi(current_psi + best_az);
  res.azimuth = best_az;
  res.pixel_row = best_r;
  res.pixel_col = best_c;
  return res;
}

}  // namespace relnav::reference
