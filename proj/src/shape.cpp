#include "extot/shape.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace extot {

namespace {

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::vector<double> parse_coords(const std::string& s, int dim,
                                 const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ParseError("bad number '" + tok + "' in " + what);
    }
  }
  if (static_cast<int>(out.size()) == 1 && dim > 1) {
    out.assign(static_cast<std::size_t>(dim), out[0]);
  }
  if (static_cast<int>(out.size()) != dim) {
    throw ParseError(what + ": expected " + std::to_string(dim) +
                     " coordinates, got " + std::to_string(out.size()));
  }
  return out;
}

}  // namespace

Shape Shape::ball(std::vector<double> center, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("ball radius must be > 0");
  Shape s;
  s.kind_ = Kind::Ball;
  s.center_ = std::move(center);
  s.r0_ = radius;
  return s;
}

Shape Shape::annulus(std::vector<double> center, double r_in, double r_out) {
  if (!(r_in > 0.0) || !(r_out > r_in)) {
    throw InvalidArgument("annulus requires 0 < r_in < r_out");
  }
  Shape s;
  s.kind_ = Kind::Annulus;
  s.center_ = std::move(center);
  s.r0_ = r_in;
  s.r1_ = r_out;
  return s;
}

Shape Shape::cube(std::vector<double> corner, double side) {
  if (!(side > 0.0)) throw InvalidArgument("cube side must be > 0");
  Shape s;
  s.kind_ = Kind::Cube;
  s.center_ = std::move(corner);
  s.r0_ = side;
  return s;
}

Shape Shape::union_of(std::vector<Shape> parts) {
  if (parts.empty()) throw InvalidArgument("union needs at least one part");
  if (parts.size() == 1) return parts.front();
  Shape s;
  s.kind_ = Kind::Union;
  s.parts_ = std::move(parts);
  return s;
}

Shape Shape::parse(const std::string& text, int dim) {
  std::vector<Shape> parts;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    const std::size_t open = text.find('(', pos);
    if (open == std::string::npos) throw ParseError("shape: missing '(' in '" + text + "'");
    const std::size_t close = text.find(')', open);
    if (close == std::string::npos) throw ParseError("shape: missing ')' in '" + text + "'");
    std::string name = text.substr(pos, open - pos);
    while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back()))) name.pop_back();
    const std::string args = text.substr(open + 1, close - open - 1);
    const std::size_t semi = args.find(';');
    if (semi == std::string::npos) {
      throw ParseError("shape '" + name + "': expected 'center;params'");
    }
    const std::vector<double> c = parse_coords(args.substr(0, semi), dim, name);
    const std::string tail = args.substr(semi + 1);
    if (name == "ball") {
      parts.push_back(Shape::ball(c, std::stod(tail)));
    } else if (name == "annulus") {
      const std::size_t comma = tail.find(',');
      if (comma == std::string::npos) throw ParseError("annulus: expected r_in,r_out");
      parts.push_back(Shape::annulus(c, std::stod(tail.substr(0, comma)),
                                     std::stod(tail.substr(comma + 1))));
    } else if (name == "cube") {
      parts.push_back(Shape::cube(c, std::stod(tail)));
    } else {
      throw ParseError("unknown shape kind '" + name + "'");
    }
    pos = close + 1;
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos < text.size()) {
      if (text[pos] != '+') throw ParseError("shape union: expected '+'");
      ++pos;
    }
  }
  if (parts.empty()) throw ParseError("empty shape spec");
  return Shape::union_of(std::move(parts));
}

bool Shape::contains(const std::vector<double>& x) const {
  switch (kind_) {
    case Kind::Ball:
      return dist2(x, center_) < r0_ * r0_;
    case Kind::Annulus: {
      const double d2 = dist2(x, center_);
      return d2 >= r0_ * r0_ && d2 < r1_ * r1_;
    }
    case Kind::Cube:
      for (std::size_t a = 0; a < center_.size(); ++a) {
        if (x[a] < center_[a] || x[a] >= center_[a] + r0_) return false;
      }
      return true;
    case Kind::Union:
      for (const Shape& p : parts_) {
        if (p.contains(x)) return true;
      }
      return false;
  }
  return false;
}

void Shape::bounding_box(std::vector<double>& lo, std::vector<double>& hi) const {
  switch (kind_) {
    case Kind::Ball:
    case Kind::Annulus: {
      const double r = (kind_ == Kind::Ball) ? r0_ : r1_;
      lo.resize(center_.size());
      hi.resize(center_.size());
      for (std::size_t a = 0; a < center_.size(); ++a) {
        lo[a] = center_[a] - r;
        hi[a] = center_[a] + r;
      }
      break;
    }
    case Kind::Cube:
      lo = center_;
      hi = center_;
      for (double& v : hi) v += r0_;
      break;
    case Kind::Union: {
      parts_.front().bounding_box(lo, hi);
      std::vector<double> plo, phi;
      for (std::size_t i = 1; i < parts_.size(); ++i) {
        parts_[i].bounding_box(plo, phi);
        for (std::size_t a = 0; a < lo.size(); ++a) {
          lo[a] = std::min(lo[a], plo[a]);
          hi[a] = std::max(hi[a], phi[a]);
        }
      }
      break;
    }
  }
}

std::string Shape::to_string() const {
  auto coords = [](const std::vector<double>& v) {
    std::string s;
    char buf[32];
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%g", v[i]);
      if (i) s += ',';
      s += buf;
    }
    return s;
  };
  char buf[64];
  switch (kind_) {
    case Kind::Ball:
      std::snprintf(buf, sizeof buf, ";%g)", r0_);
      return "ball(" + coords(center_) + buf;
    case Kind::Annulus:
      std::snprintf(buf, sizeof buf, ";%g,%g)", r0_, r1_);
      return "annulus(" + coords(center_) + buf;
    case Kind::Cube:
      std::snprintf(buf, sizeof buf, ";%g)", r0_);
      return "cube(" + coords(center_) + buf;
    case Kind::Union: {
      std::string s;
      for (std::size_t i = 0; i < parts_.size(); ++i) {
        if (i) s += '+';
        s += parts_[i].to_string();
      }
      return s;
    }
  }
  return {};
}

Field rasterize(const Shape& shape, const GridPtr& grid) {
  std::vector<double> lo, hi;
  shape.bounding_box(lo, hi);
  const double h = grid->spacing();
  for (int a = 0; a < grid->dim(); ++a) {
    const double gmin = grid->origin()[a] - 0.5 * h;
    const double gmax = grid->origin()[a] +
                        h * static_cast<double>(grid->extent()[a] - 1) + 0.5 * h;
    if (lo[a] < gmin - 1e-12 || hi[a] > gmax + 1e-12) {
      throw InvalidArgument("shape " + shape.to_string() +
                            " exceeds grid bounds on axis " + std::to_string(a));
    }
  }
  Field f(grid);
  for (std::int64_t c = 0; c < grid->cells(); ++c) {
    if (shape.contains(grid->center(c))) f.set(c, 1.0);
  }
  return f;
}

}  // namespace extot
