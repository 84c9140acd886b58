#include "horseshoe/raster.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace horseshoe {

namespace {

double cross(Complex o, Complex a, Complex b) {
  return (a.real() - o.real()) * (b.imag() - o.imag()) - (a.imag() - o.imag()) * (b.real() - o.real());
}

// Diameter of a point set through its convex hull (monotone chain).
double hull_diameter(std::vector<Complex> pts) {
  if (pts.size() < 2) return 0.0;
  std::sort(pts.begin(), pts.end(), [](Complex a, Complex b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  std::vector<Complex> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Complex& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k > 1 ? k - 1 : k);
  double best = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    for (std::size_t j = i + 1; j < hull.size(); ++j) best = std::max(best, std::abs(hull[i] - hull[j]));
  }
  return best;
}

}  // namespace

Labeling2D label_components(const std::vector<std::uint8_t>& mask, const PlaneWindow& window) {
  const int w = window.width;
  const int h = window.height;
  if (mask.size() != static_cast<std::size_t>(w) * static_cast<std::size_t>(h)) {
    throw std::invalid_argument("label_components: mask size mismatch");
  }
  auto idx = [w](int i, int j) { return static_cast<std::size_t>(j) * static_cast<std::size_t>(w) + static_cast<std::size_t>(i); };
  UnionFind uf(mask.size());
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      if (!mask[idx(i, j)]) continue;
      if (i > 0 && mask[idx(i - 1, j)]) uf.unite(idx(i, j), idx(i - 1, j));
      if (j > 0 && mask[idx(i, j - 1)]) uf.unite(idx(i, j), idx(i, j - 1));
    }
  }
  Labeling2D out;
  out.labels.assign(mask.size(), -1);
  std::vector<int> root_label(mask.size(), -1);
  std::vector<std::vector<Complex>> boundary;
  std::vector<Complex> sums;
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const std::size_t v = idx(i, j);
      if (!mask[v]) continue;
      const std::size_t r = uf.find(v);
      if (root_label[r] < 0) {
        root_label[r] = static_cast<int>(out.components.size());
        Component c;
        c.label = root_label[r];
        c.i_min = c.i_max = i;
        c.j_min = c.j_max = j;
        out.components.push_back(c);
        boundary.emplace_back();
        sums.emplace_back();
      }
      const int l = root_label[r];
      out.labels[v] = l;
      Component& c = out.components[static_cast<std::size_t>(l)];
      ++c.pixels;
      c.i_min = std::min(c.i_min, i);
      c.i_max = std::max(c.i_max, i);
      c.j_min = std::min(c.j_min, j);
      c.j_max = std::max(c.j_max, j);
      const Complex center = window.pixel_center(i, j);
      sums[static_cast<std::size_t>(l)] += center;
      const bool at_border = i == 0 || j == 0 || i == w - 1 || j == h - 1;
      if (at_border) c.touches_border = true;
      const bool edge = at_border || !mask[idx(i - 1, j)] || !mask[idx(i + 1, j)] || !mask[idx(i, j - 1)] ||
                        !mask[idx(i, j + 1)];
      if (edge) boundary[static_cast<std::size_t>(l)].push_back(center);
    }
  }
  for (std::size_t l = 0; l < out.components.size(); ++l) {
    Component& c = out.components[l];
    c.centroid = sums[l] / static_cast<double>(c.pixels);
    c.diameter = hull_diameter(std::move(boundary[l]));
  }
  return out;
}

int count_components_4d(const std::vector<std::uint8_t>& mask, std::array<int, 4> dims) {
  const std::size_t n0 = static_cast<std::size_t>(dims[0]);
  const std::size_t n1 = static_cast<std::size_t>(dims[1]);
  const std::size_t n2 = static_cast<std::size_t>(dims[2]);
  const std::size_t n3 = static_cast<std::size_t>(dims[3]);
  if (mask.size() != n0 * n1 * n2 * n3) throw std::invalid_argument("count_components_4d: mask size mismatch");
  const std::array<std::size_t, 4> stride{1, n0, n0 * n1, n0 * n1 * n2};
  UnionFind uf(mask.size());
  for (std::size_t i3 = 0; i3 < n3; ++i3) {
    for (std::size_t i2 = 0; i2 < n2; ++i2) {
      for (std::size_t i1 = 0; i1 < n1; ++i1) {
        for (std::size_t i0 = 0; i0 < n0; ++i0) {
          const std::size_t v = i0 + stride[1] * i1 + stride[2] * i2 + stride[3] * i3;
          if (!mask[v]) continue;
          const std::array<std::size_t, 4> coord{i0, i1, i2, i3};
          for (int k = 0; k < 4; ++k) {
            if (coord[static_cast<std::size_t>(k)] == 0) continue;
            const std::size_t u = v - stride[static_cast<std::size_t>(k)];
            if (mask[u]) uf.unite(v, u);
          }
        }
      }
    }
  }
  int count = 0;
  for (std::size_t v = 0; v < mask.size(); ++v) {
    if (mask[v] && uf.find(v) == v) ++count;
  }
  return count;
}

}  // namespace horseshoe
