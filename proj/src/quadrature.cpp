#include "emhd/quadrature.hpp"

#include <cmath>

namespace emhd {

namespace {

QuadratureRule make_degree5() {
  const double r15 = std::sqrt(15.0);
  const double a1 = (6.0 - r15) / 21.0;
  const double a2 = (6.0 + r15) / 21.0;
  const double w1 = (155.0 - r15) / 1200.0;
  const double w2 = (155.0 + r15) / 1200.0;

  QuadratureRule r;
  r.degree = 5;
  r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  r.weights.push_back(9.0 / 40.0);
  for (double a : {a1, a2}) {
    const double w = a == a1 ? w1 : w2;
    const double b = 1.0 - 2.0 * a;
    r.points.push_back({a, a, b});
    r.points.push_back({a, b, a});
    r.points.push_back({b, a, a});
    r.weights.insert(r.weights.end(), 3, w);
  }
  return r;
}

}  // namespace

const QuadratureRule& triangle_rule_degree5() {
  static const QuadratureRule rule = make_degree5();
  return rule;
}

}  // namespace emhd
