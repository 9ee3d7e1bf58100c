#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "vortishape/harness/harness.hpp"

using namespace vortishape;
using namespace vortishape::harness;
using Catch::Approx;

namespace {

std::string tmp(const std::string& name) { return (std::filesystem::temp_directory_path() / name).string(); }

}  // namespace

TEST_CASE("eoc definition", "[harness]") {
  const auto e = eoc({0.5, 0.25}, {0.4, 0.1});
  REQUIRE(e.size() == 1);
  CHECK(*e[0] == Approx(2.0));
  const auto z = eoc({0.5, 0.25, 0.125}, {0.0, 0.0, 1e-3});
  CHECK_FALSE(z[0]);
  CHECK_FALSE(z[1]);
  CHECK_THROWS_AS(eoc({0.5}, {0.1, 0.2}), std::invalid_argument);
}

TEST_CASE("manufactured solution is consistent", "[harness]") {
  Manufactured ms;
  ms.shift = Vec2(0.3, -0.2);
  const Vec2 x(0.7, 0.15);
  // divergence free
  CHECK(ms.grad_u(x).trace() == Approx(0.0).margin(1e-14));
  // forcing against central differences of the strong operator
  const double d = 1e-4;
  auto lap = [&](const Vec2& y) {
    return (ms.u(y + Vec2(d, 0)) + ms.u(y - Vec2(d, 0)) + ms.u(y + Vec2(0, d)) + ms.u(y - Vec2(0, d)) - 4.0 * ms.u(y)) /
           (d * d);
  };
  const Vec2 gp((ms.p(x + Vec2(d, 0)) - ms.p(x - Vec2(d, 0))) / (2 * d),
                (ms.p(x + Vec2(0, d)) - ms.p(x - Vec2(0, d))) / (2 * d));
  const Vec2 conv = ms.grad_u(x) * ms.u(x);
  const Vec2 f = -ms.nu * lap(x) + conv + gp;
  CHECK((f - ms.forcing(x)).norm() < 1e-6);
}

TEST_CASE("manufactured flow eoc", "[harness]") {
  SECTION("rates") {
    const auto t = manufactured_flow_eoc({1.0 / 4, 1.0 / 8, 1.0 / 16});
    REQUIRE(t.size() == 2);
    CHECK(t[0].name == "velocity");
    for (const auto& e : t[0].eoc_l2()) CHECK(*e == Approx(3.0).margin(0.4));
    for (const auto& e : t[0].eoc_h1()) CHECK(*e == Approx(2.0).margin(0.4));
    for (const auto& e : t[1].eoc_l2()) CHECK(*e > 1.5);

    SECTION("invariant under translation of the frame") {
      Manufactured ms;
      ms.shift = Vec2(1.0, 0.5);
      Manufactured back = ms;
      back.shift = Vec2(1.0 + 2.0 * M_PI / ms.k, 0.5);
      const auto a = manufactured_flow_eoc({1.0 / 4, 1.0 / 8, 1.0 / 16}, ms);
      const auto b = manufactured_flow_eoc({1.0 / 4, 1.0 / 8, 1.0 / 16}, back);
      for (size_t k = 0; k < 2; ++k) CHECK(*a[0].eoc_l2()[k] == Approx(*b[0].eoc_l2()[k]).epsilon(1e-6));
    }
  }
  SECTION("zero solution gives zero errors") {
    Manufactured ms;
    ms.amplitude = 0.0;
    const auto t = manufactured_flow_eoc({1.0 / 4, 1.0 / 6, 1.0 / 8}, ms);
    for (double e : t[0].l2) CHECK(e == Approx(0.0).margin(1e-13));
    for (double e : t[1].l2) CHECK(e == Approx(0.0).margin(1e-13));
  }
  CHECK_THROWS_WITH(manufactured_flow_eoc({0.25, 0.125}), Catch::Matchers::ContainsSubstring("at least 3"));
}

TEST_CASE("eoc csv reproduces the summary", "[harness]") {
  std::vector<EocTable> t{{"velocity", {0.1, 0.05, 0.025}, {1e-3, 1.3e-4, 1.7e-5}, {2e-2, 5.1e-3, 1.3e-3}},
                          {"pressure, p1", {0.1, 0.05, 0.025}, {3e-3, 0.0, 2e-4}, {}}};
  const std::string path = tmp("vortishape_eoc.csv");
  write_eoc_csv(path, t);
  const auto back = read_eoc_csv(path);
  CHECK(format_eoc_summary(back) == format_eoc_summary(t));
  CHECK(back[1].name == "pressure, p1");
  CHECK(back[1].h1.empty());
  std::filesystem::remove(path);
}

TEST_CASE("sweep and hausdorff csv round trip", "[harness]") {
  std::vector<SweepRow> rows{{48, -2e-3, 1e-4, 12, "converged", true},
                             {52, -1e-3, 2e-4, 11, "max_iterations", true},
                             {56, 1e-3, 2e-4, 10, "converged", true},
                             {60, 0, 0, 0, "error: Newton, step 3", false}};
  const auto sc = sign_change(rows);
  REQUIRE(sc);
  CHECK(*sc == Approx(54.0));
  const std::string path = tmp("vortishape_sweep.csv");
  write_sweep_csv(path, rows);
  const auto back = read_sweep_csv(path);
  CHECK(format_sweep_summary(back) == format_sweep_summary(rows));
  CHECK(back[3].status == "error: Newton, step 3");
  CHECK_FALSE(back[3].ok);
  std::filesystem::remove(path);

  CHECK_FALSE(sign_change({rows[0], rows[1]}));

  std::vector<HausdorffRow> h{{0.1, 2e-2, 1e-4, 8, "converged"}, {0.05, 8e-3, 2e-4, 9, "converged"}};
  write_hausdorff_csv(path, h);
  CHECK(format_hausdorff_summary(read_hausdorff_csv(path)) == format_hausdorff_summary(h));
  std::filesystem::remove(path);
}

TEST_CASE("finite difference check basics", "[harness]") {
  OptConfig c;
  c.h = 1.0 / 12;
  c.gamma = 2.7;
  SECTION("zero field") {
    const auto r = fd_gradient_check(c, [](const Vec2&) { return Vec2(0, 0); }, {1e-3});
    CHECK(r.derivative == 0.0);
    CHECK(r.quotient[0] == Approx(0.0).margin(1e-8));
  }
  SECTION("fields vanish on the channel boundary") {
    for (const auto& f : {translation_field(c, Vec2(1, 0)), stretch_field(c)}) {
      CHECK(f(Vec2(0.0, 0.0)).norm() == 0.0);
      CHECK(f(Vec2(0.325, 0.5)).norm() == 0.0);
      CHECK(f(c.center + Vec2(c.radius, 0.0)).norm() > 0.99);
    }
  }
  SECTION("translation quotient agrees") {
    const auto r = fd_gradient_check(c, translation_field(c, Vec2(1, 0)), {1e-3, 1e-4});
    CHECK(r.rel_error[1] < 0.2);
  }
  CHECK_THROWS_AS(fd_gradient_check(c, [](const Vec2&) { return Vec2(1, 0); }, {1e-3}), std::invalid_argument);
}

TEST_CASE("field transfer", "[harness]") {
  const auto m = mesh::generate_channel_mesh(mesh::Rect{}, Vec2(0.325, 0.0), 0.13, 1.0 / 10);
  const TaylorHoodSpace s(m);
  const Vector u = fem::interpolate_velocity(s, [](const Vec2& x) { return Vec2(x.x() * x.y(), x.y() * x.y()); });
  std::vector<char> mask;
  int outside = -1;
  const Vector t = transfer(s, u, s, &mask, &outside);
  CHECK((t - u).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(outside == 0);
  CHECK(masked_norms(s, t - u, mask).h1 < 1e-12);

  // quadratic fields transfer exactly between meshes; the smaller obstacle
  // puts some nodes inside the reference obstacle
  const auto m2 = mesh::generate_channel_mesh(mesh::Rect{}, Vec2(0.325, 0.0), 0.1, 1.0 / 7);
  const TaylorHoodSpace s2(m2);
  const Vector t2 = transfer(s, u, s2, &mask, &outside);
  const Vector u2 = fem::interpolate_velocity(s2, [](const Vec2& x) { return Vec2(x.x() * x.y(), x.y() * x.y()); });
  CHECK(outside > 0);
  double worst = 0.0;
  for (int i = 0; i < s2.num_p2_nodes(); ++i)
    if (!mask[i]) worst = std::max(worst, std::abs(t2[i] - u2[i]));
  CHECK(worst < 1e-12);
}

TEST_CASE("hausdorff against itself", "[harness]") {
  std::vector<Vec2> ref;
  for (int i = 0; i < 40; ++i) ref.push_back(Vec2(std::cos(0.1 * M_PI * i / 2), std::sin(0.1 * M_PI * i / 2)));
  RunSummary r;
  r.h = 0.1;
  r.ok = true;
  r.result.trace.rows.resize(2);
  r.result.trace.polylines = {ref, ref};
  const auto t = hausdorff_table({r}, ref);
  CHECK(t[0].distance == 0.0);
  CHECK(t[0].iterations == 1);
}

TEST_CASE("gamma calibration hits the target", "[harness]") {
  OptConfig c;
  c.h = 1.0 / 12;
  const auto cal = calibrate_gamma(c, 0.5);
  OptConfig d = c;
  d.gamma = cal.gamma;
  const auto it = optimizer::evaluate(mesh::generate_channel_mesh(c.rect, c.center, c.radius, c.h), d);
  CHECK(it.obj.G == Approx(0.5).epsilon(1e-10));
}

TEST_CASE("parallel_for covers every index", "[harness]") {
  std::vector<int> hit(17, 0);
  parallel_for(17, [&](int i) { hit[i] += 1; });
  for (int h : hit) CHECK(h == 1);
  CHECK(worker_count() >= 1);
}
