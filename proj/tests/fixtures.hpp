#pragma once

#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "weyl/symbol.hpp"

namespace testfx {

inline weyl::OperatorSpec load(const std::string& name) {
  return weyl::load_spec_file(std::string(WEYL_CONFIG_DIR) + "/" + name + ".json");
}

struct Point {
  std::vector<double> x, xi;
};

// Random base point in the torus and covector with |xi| in [0.5, 2].
inline Point random_point(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> ux(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> ur(0.5, 2.0);
  Point p;
  double r = 0.0;
  for (int a = 0; a < n; ++a) {
    p.x.push_back(ux(rng));
    p.xi.push_back(g(rng));
    r += p.xi.back() * p.xi.back();
  }
  const double s = ur(rng) / std::sqrt(r);
  for (double& v : p.xi) v *= s;
  return p;
}

inline const std::vector<std::string>& identity_fixtures() {
  static const std::vector<std::string> f{"perturbed_dirac", "conjugated_perturbed_dirac", "weyl3",
                                          "spin1", "spin1_3d"};
  return f;
}

}  // namespace testfx
