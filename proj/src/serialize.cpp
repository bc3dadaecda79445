#include "stoqlab/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace stoqlab::serialize {

using nlohmann::json;

json region_to_json(const lattice::Region& r) {
  json out = json::array();
  for (const auto& p : r) {
    json coords = json::array();
    for (int i = 0; i < p.dim; ++i) coords.push_back(p[i]);
    out.push_back(coords);
  }
  return out;
}

lattice::Region region_from_json(const json& j) {
  std::vector<lattice::Point> pts;
  for (const auto& coords : j) {
    std::vector<int> xs;
    for (const auto& v : coords) xs.push_back(v.get<int>());
    pts.push_back(lattice::Point::of(xs));
  }
  return lattice::Region(std::move(pts));
}

json cover_to_json(const multiscale::Cover& c) {
  json centers = json::array();
  for (const auto& cube : c.cubes) {
    json coords = json::array();
    for (int i = 0; i < cube.center_index.dim; ++i) coords.push_back(cube.center_index[i]);
    centers.push_back(coords);
  }
  return json{{"scale", c.scale}, {"centers", centers}};
}

multiscale::Cover cover_from_json(const json& j) {
  multiscale::Cover c;
  c.scale = j.at("scale").get<int>();
  for (const auto& coords : j.at("centers")) {
    std::vector<int> xs;
    for (const auto& v : coords) xs.push_back(v.get<int>());
    c.cubes.push_back({c.scale, lattice::Point::of(xs)});
  }
  return c;
}

json contour_to_json(const contours::Contour& c) {
  json subfamily = json::array();
  for (const auto& g : c.part.subfamily) subfamily.push_back(region_to_json(g));
  json labels{{"exterior", c.exterior_label}, {"interior", c.interior_labels}};
  return json{{"support", region_to_json(c.part.support)},
              {"subfamily", subfamily},
              {"labels", labels},
              {"I_plus", region_to_json(c.interior_plus)},
              {"I_minus", region_to_json(c.interior_minus)}};
}

json element_to_json(const groupoid::AlgebraElement& f, double tol) {
  const auto& spec = *f.spec();
  json entries = json::array();
  for (std::size_t g = 0; g < spec.order(); ++g) {
    for (std::size_t sigma = 0; sigma < spec.order(); ++sigma) {
      const auto z = f.at(g, sigma);
      if (std::abs(z) <= tol) continue;
      json exps = json::array();
      for (int s = 0; s < spec.n_sites(); ++s) exps.push_back(spec.digit(g, s));
      entries.push_back(json::array({exps, sigma, z.real(), z.imag()}));
    }
  }
  return json{{"q", spec.q()}, {"sites", region_to_json(spec.sites())}, {"entries", entries}};
}

CsvWriter::CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size()) throw std::invalid_argument("CsvWriter: column mismatch");
  rows_.push_back(cells);
}

std::string CsvWriter::format(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string CsvWriter::str() const {
  std::string out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i > 0) out += ',';
    out += columns_[i];
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

void CsvWriter::write(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("CsvWriter: cannot open " + path);
  f << str();
}

}  // namespace stoqlab::serialize
