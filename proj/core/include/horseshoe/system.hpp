#pragma once

#include <memory>
#include <optional>
#include <string>

#include "horseshoe/henon_map.hpp"

namespace horseshoe {

// An invertible holomorphic map G restricted to a bidisc, seen as a
// candidate horizontal-like horseshoe: the first coordinate is the
// expanding one. The symbolic and component machinery works against this
// interface so it applies both to Hénon maps and to iterates of a Hénon
// map in a local chart.
class PlanarSystem {
 public:
  virtual ~PlanarSystem() = default;

  // nullopt when the evaluation diverges or leaves the region where the
  // system is defined.
  [[nodiscard]] virtual std::optional<Point2> forward(const Point2& z) const = 0;
  [[nodiscard]] virtual std::optional<Point2> backward(const Point2& z) const = 0;
  [[nodiscard]] virtual std::optional<Matrix2C> jacobian(const Point2& z) const = 0;
  [[nodiscard]] virtual std::optional<Matrix2C> jacobian_backward(const Point2& z) const = 0;

  [[nodiscard]] virtual const Bidisc& domain() const = 0;
  [[nodiscard]] virtual int degree() const = 0;
  [[nodiscard]] virtual std::string describe() const = 0;
};

class HenonSystem final : public PlanarSystem {
 public:
  HenonSystem(HenonMap map, Bidisc domain) : map_(std::move(map)), domain_(domain) {}

  [[nodiscard]] std::optional<Point2> forward(const Point2& z) const override {
    const Point2 r = map_.step(z);
    if (!r.finite()) return std::nullopt;
    return r;
  }
  [[nodiscard]] std::optional<Point2> backward(const Point2& z) const override {
    const Point2 r = map_.step_inverse(z);
    if (!r.finite()) return std::nullopt;
    return r;
  }
  [[nodiscard]] std::optional<Matrix2C> jacobian(const Point2& z) const override { return map_.jacobian(z); }
  [[nodiscard]] std::optional<Matrix2C> jacobian_backward(const Point2& z) const override {
    return map_.jacobian_inverse(z);
  }
  [[nodiscard]] const Bidisc& domain() const override { return domain_; }
  [[nodiscard]] int degree() const override { return map_.degree(); }
  [[nodiscard]] std::string describe() const override { return map_.descriptor(); }

  [[nodiscard]] const HenonMap& map() const { return map_; }

 private:
  HenonMap map_;
  Bidisc domain_;
};

}  // namespace horseshoe
