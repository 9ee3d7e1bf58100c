#include "vortishape/fem/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace vortishape::fem {

namespace {

void add_orbit3(TriangleRule& r, double a, double b, double w) {
  r.points.push_back({a, b, b});
  r.points.push_back({b, a, b});
  r.points.push_back({b, b, a});
  for (int i = 0; i < 3; ++i) r.weights.push_back(w);
}

void add_orbit6(TriangleRule& r, double a, double b, double c, double w) {
  r.points.push_back({a, b, c});
  r.points.push_back({a, c, b});
  r.points.push_back({b, a, c});
  r.points.push_back({b, c, a});
  r.points.push_back({c, a, b});
  r.points.push_back({c, b, a});
  for (int i = 0; i < 6; ++i) r.weights.push_back(w);
}

TriangleRule make_deg5() {
  TriangleRule r;
  r.degree = 5;
  const double s = std::sqrt(15.0);
  r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  r.weights.push_back(9.0 / 40.0);
  const double a1 = (6.0 - s) / 21.0;
  const double a2 = (6.0 + s) / 21.0;
  add_orbit3(r, 1.0 - 2.0 * a1, a1, (155.0 - s) / 1200.0);
  add_orbit3(r, 1.0 - 2.0 * a2, a2, (155.0 + s) / 1200.0);
  return r;
}

// Dunavant, degree 8.
TriangleRule make_deg8() {
  TriangleRule r;
  r.degree = 8;
  r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  r.weights.push_back(0.144315607677787);
  add_orbit3(r, 0.081414823414554, 0.459292588292723, 0.095091634267285);
  add_orbit3(r, 0.658861384496480, 0.170569307751760, 0.103217370534718);
  add_orbit3(r, 0.898905543365938, 0.050547228317031, 0.032458497623198);
  add_orbit6(r, 0.008394777409958, 0.263112829634638, 0.728492392955404, 0.027230314174435);
  double sum = 0.0;
  for (double w : r.weights) sum += w;
  for (double& w : r.weights) w /= sum;
  for (auto& p : r.points) {
    const double t = p[0] + p[1] + p[2];
    for (double& c : p) c /= t;
  }
  return r;
}

LineRule make_gauss(int n) {
  LineRule r;
  r.degree = 2 * n - 1;
  std::vector<double> x, w;
  switch (n) {
    case 1:
      x = {0.0};
      w = {2.0};
      break;
    case 2:
      x = {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
      w = {1.0, 1.0};
      break;
    case 3:
      x = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
      w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
      break;
    case 4: {
      const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
      const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
      const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
      const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
      x = {-b, -a, a, b};
      w = {wb, wa, wa, wb};
      break;
    }
    case 5: {
      const double a = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
      const double b = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
      const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
      const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
      x = {-b, -a, 0.0, a, b};
      w = {wb, wa, 128.0 / 225.0, wa, wb};
      break;
    }
    default:
      throw std::invalid_argument("gauss_line_rule supports 1..5 points");
  }
  for (size_t i = 0; i < x.size(); ++i) {
    r.points.push_back(0.5 * (x[i] + 1.0));
    r.weights.push_back(0.5 * w[i]);
  }
  return r;
}

}  // namespace

const TriangleRule& triangle_rule_deg5() {
  static const TriangleRule r = make_deg5();
  return r;
}

const TriangleRule& triangle_rule_deg8() {
  static const TriangleRule r = make_deg8();
  return r;
}

const TriangleRule& triangle_rule(int degree) {
  if (degree <= 5) return triangle_rule_deg5();
  if (degree <= 8) return triangle_rule_deg8();
  throw std::invalid_argument("no triangle rule above degree 8");
}

const LineRule& gauss_line_rule(int n) {
  static const LineRule rules[5] = {make_gauss(1), make_gauss(2), make_gauss(3), make_gauss(4), make_gauss(5)};
  if (n < 1 || n > 5) throw std::invalid_argument("gauss_line_rule supports 1..5 points");
  return rules[n - 1];
}

}  // namespace vortishape::fem
