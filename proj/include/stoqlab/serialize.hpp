#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stoqlab/contours.hpp"
#include "stoqlab/groupoid.hpp"
#include "stoqlab/lattice.hpp"
#include "stoqlab/multiscale.hpp"

namespace stoqlab::serialize {

// Region <-> JSON array of integer arrays
nlohmann::json region_to_json(const lattice::Region& r);
lattice::Region region_from_json(const nlohmann::json& j);

// Cover <-> {"scale": n, "centers": [...]}
nlohmann::json cover_to_json(const multiscale::Cover& c);
multiscale::Cover cover_from_json(const nlohmann::json& j);

// Contour dump: {support, subfamily, labels, I_plus, I_minus}
nlohmann::json contour_to_json(const contours::Contour& c);

// AlgebraElement sparse dump:
// {"q", "sites", "entries": [[group_exponents, config_index, re, im], ...]}
nlohmann::json element_to_json(const groupoid::AlgebraElement& f, double tol = 0.0);

// CSV with a stable column order and fixed float formatting, so identical
// inputs produce byte-identical files
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);
  void add_row(const std::vector<std::string>& cells);
  std::string str() const;
  void write(const std::string& path) const;

  static std::string format(double v);

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace stoqlab::serialize
