#include "extot/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace extot {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ParseError(what + ": bad number '" + tok + "'");
    }
  }
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ParseError("line " + std::to_string(lineno) + ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw ParseError("line " + std::to_string(lineno) + ": empty section name");
      }
      cfg.sections_[section];
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("line " + std::to_string(lineno) + ": expected key = value");
    }
    if (section.empty()) {
      throw ParseError("line " + std::to_string(lineno) + ": key outside any section");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ParseError("line " + std::to_string(lineno) + ": empty key");
    }
    cfg.sections_[section][key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

bool ExperimentConfig::has(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

std::string ExperimentConfig::get(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end() || !s->second.count(key)) {
    throw ParseError("missing config key [" + section + "] " + key);
  }
  return s->second.at(key);
}

std::string ExperimentConfig::get_or(const std::string& section, const std::string& key,
                                     const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

double ExperimentConfig::get_double(const std::string& section, const std::string& key) const {
  const auto v = parse_list(get(section, key), "[" + section + "] " + key);
  if (v.size() != 1) throw ParseError("[" + section + "] " + key + ": expected one number");
  return v[0];
}

double ExperimentConfig::get_double_or(const std::string& section, const std::string& key,
                                       double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

std::int64_t ExperimentConfig::get_int_or(const std::string& section, const std::string& key,
                                          std::int64_t fallback) const {
  if (!has(section, key)) return fallback;
  const double v = get_double(section, key);
  const auto i = static_cast<std::int64_t>(v);
  if (static_cast<double>(i) != v) {
    throw ParseError("[" + section + "] " + key + ": expected an integer");
  }
  return i;
}

std::vector<double> ExperimentConfig::get_doubles(const std::string& section,
                                                  const std::string& key) const {
  return parse_list(get(section, key), "[" + section + "] " + key);
}

void ExperimentConfig::set(const std::string& section, const std::string& key,
                           const std::string& value) {
  sections_[section][key] = value;
}

GridPtr ExperimentConfig::build_grid() const {
  const int dim = static_cast<int>(get_int_or("grid", "dim", 1));
  const double spacing = get_double("grid", "spacing");
  std::vector<std::int64_t> extent;
  {
    const auto ext = get_doubles("grid", "extent");
    for (double e : ext) {
      const auto n = static_cast<std::int64_t>(e);
      if (static_cast<double>(n) != e || n < 1) {
        throw ParseError("[grid] extent: expected positive integers");
      }
      extent.push_back(n);
    }
    if (extent.size() == 1 && dim > 1) extent.assign(static_cast<std::size_t>(dim), extent[0]);
    if (static_cast<int>(extent.size()) != dim) {
      throw ParseError("[grid] extent: expected " + std::to_string(dim) + " entries");
    }
  }
  std::vector<double> origin;
  if (has("grid", "origin")) {
    origin = get_doubles("grid", "origin");
    if (origin.size() == 1 && dim > 1) origin.assign(static_cast<std::size_t>(dim), origin[0]);
    if (static_cast<int>(origin.size()) != dim) {
      throw ParseError("[grid] origin: expected " + std::to_string(dim) + " entries");
    }
  } else {
    // Centered by default.
    origin.resize(static_cast<std::size_t>(dim));
    for (int a = 0; a < dim; ++a) {
      origin[static_cast<std::size_t>(a)] =
          -0.5 * spacing * static_cast<double>(extent[static_cast<std::size_t>(a)] - 1);
    }
  }
  return make_grid(dim, std::move(extent), spacing, std::move(origin));
}

CostPtr ExperimentConfig::build_cost() const {
  const std::string kind = get_or("cost", "kind", "power");
  const double cap = get_double_or("cost", "cap", 0.0);
  if (kind == "power") {
    return Cost::power(get_double_or("cost", "p", 1.0), cap);
  }
  if (kind == "table") {
    return Cost::radial_table(get_doubles("cost", "radii"), get_doubles("cost", "values"), cap);
  }
  if (kind == "anisotropic") {
    std::vector<double> angles;
    if (has("cost", "angles")) angles = get_doubles("cost", "angles");
    return Cost::anisotropic(get_double_or("cost", "p", 1.0), std::move(angles),
                             get_doubles("cost", "weights"), cap);
  }
  throw ParseError("[cost] kind: unknown kind '" + kind + "'");
}

Field ExperimentConfig::build_field(const GridPtr& grid) const {
  const Shape shape = Shape::parse(get("field", "shape"), grid->dim());
  Field f = rasterize(shape, grid);
  const double level = get_double_or("field", "level", 1.0);
  if (level != 1.0) {
    if (!(level >= 0.0 && level <= 1.0)) {
      throw ParseError("[field] level must lie in [0, 1]");
    }
    Field scaled(grid);
    for (std::int64_t c = 0; c < grid->cells(); ++c) {
      scaled.set(c, level * f.values()[static_cast<std::size_t>(c)]);
    }
    return scaled;
  }
  return f;
}

}  // namespace extot
