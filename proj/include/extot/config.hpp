#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "extot/cost.hpp"
#include "extot/grid.hpp"
#include "extot/shape.hpp"

namespace extot {

// Flat sectioned key-value configuration:
//
//   # comment
//   [grid]
//   dim = 2
//   extent = 64          # or 64,64
//   spacing = 0.0625
//   centered = true      # centers the grid on the origin (default)
//   origin = -1.96875    # explicit origin otherwise
//
//   [cost]
//   kind = power         # power | table | anisotropic
//   p = 1.0
//   cap = 0              # 0: no cap
//   radii = 0.5,1,2      # table knots
//   values = 0.25,1,4
//   angles = 0,1.5708    # anisotropic direction samples (d=2)
//   weights = 1,2        # or the pair {w-, w+} for d=1
//
//   [field]
//   shape = ball(0;1)    # shape text, optionally scaled by
//   level = 1.0
//
//   [task]
//   name = solve         # solve | dual | rearr | optimize | curve | verify | oracle
//   seed = 0
//   threads = 0
//   m = 3.14159
//   ms = 1,2,3
//   ...                  # task-specific keys, see README
class ExperimentConfig {
 public:
  static ExperimentConfig parse_text(const std::string& text);
  static ExperimentConfig parse_file(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key,
                       double fallback) const;
  std::int64_t get_int_or(const std::string& section, const std::string& key,
                          std::int64_t fallback) const;
  std::vector<double> get_doubles(const std::string& section,
                                  const std::string& key) const;

  void set(const std::string& section, const std::string& key,
           const std::string& value);

  GridPtr build_grid() const;
  CostPtr build_cost() const;
  // Field from [field]: a shape scaled by an optional level.
  Field build_field(const GridPtr& grid) const;

  std::string task() const { return get_or("task", "name", "solve"); }
  std::uint64_t seed() const {
    return static_cast<std::uint64_t>(get_int_or("task", "seed", 0));
  }
  int threads() const { return static_cast<int>(get_int_or("task", "threads", 0)); }

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace extot
