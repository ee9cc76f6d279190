#pragma once

#include <string>
#include <vector>

#include "extot/grid.hpp"

namespace extot {

// Geometric primitives rasterized onto grids: balls, annuli, axis-aligned
// cubes, and finite unions of those.
class Shape {
 public:
  enum class Kind { Ball, Annulus, Cube, Union };

  static Shape ball(std::vector<double> center, double radius);
  static Shape annulus(std::vector<double> center, double r_in, double r_out);
  static Shape cube(std::vector<double> corner, double side);
  static Shape union_of(std::vector<Shape> parts);

  // Text form used by configs and the C API, e.g.
  //   "ball(0,0;1)", "annulus(0;1,1.25)", "cube(-1,-1;2)",
  //   "ball(0;1)+cube(2;0.5)".
  static Shape parse(const std::string& text, int dim);

  Kind kind() const { return kind_; }

  bool contains(const std::vector<double>& x) const;

  // Smallest axis-aligned bounding box of the shape.
  void bounding_box(std::vector<double>& lo, std::vector<double>& hi) const;

  std::string to_string() const;

 private:
  Shape() = default;
  Kind kind_ = Kind::Ball;
  std::vector<double> center_;  // ball/annulus center or cube corner
  double r0_ = 0.0;             // radius / r_in / side
  double r1_ = 0.0;             // r_out
  std::vector<Shape> parts_;
};

// Indicator field: value 1 where the cell center lies inside the shape.
// Throws if the shape's bounding box leaves the grid.
Field rasterize(const Shape& shape, const GridPtr& grid);

}  // namespace extot
