#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <vector>

#include "horseshoe/complex_rect.hpp"

namespace horseshoe {

// Disjoint-set forest with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

// Square window of the complex plane rasterized at width x height pixel
// centers. Pixel (i, j) has center lo + ((i + 0.5) dx, (j + 0.5) dy).
struct PlaneWindow {
  double re_lo = -1.0;
  double re_hi = 1.0;
  double im_lo = -1.0;
  double im_hi = 1.0;
  int width = 2;
  int height = 2;

  static PlaneWindow around(Complex center, double half_side, int resolution) {
    return {center.real() - half_side, center.real() + half_side, center.imag() - half_side,
            center.imag() + half_side, resolution, resolution};
  }
  [[nodiscard]] double dx() const { return (re_hi - re_lo) / width; }
  [[nodiscard]] double dy() const { return (im_hi - im_lo) / height; }
  [[nodiscard]] Complex pixel_center(int i, int j) const {
    return {re_lo + (i + 0.5) * dx(), im_lo + (j + 0.5) * dy()};
  }
};

struct Component {
  int label = 0;
  std::size_t pixels = 0;
  Complex centroid{};
  // Pixel-index bounding box, inclusive.
  int i_min = 0, i_max = 0, j_min = 0, j_max = 0;
  // Largest distance between two pixel centers of the component.
  double diameter = 0.0;
  bool touches_border = false;
};

struct Labeling2D {
  std::vector<int> labels;  // -1 for background, else component index
  std::vector<Component> components;
};

// Connected components of a boolean raster (row-major, index j*width+i)
// under 4-adjacency. Components are numbered in raster-scan order of
// their first pixel.
Labeling2D label_components(const std::vector<std::uint8_t>& mask, const PlaneWindow& window);

// Number of connected components of a 4-dimensional boolean raster under
// face adjacency. dims = {n0, n1, n2, n3}; index = ((i3*n2 + i2)*n1 + i1)*n0 + i0.
int count_components_4d(const std::vector<std::uint8_t>& mask, std::array<int, 4> dims);

}  // namespace horseshoe
