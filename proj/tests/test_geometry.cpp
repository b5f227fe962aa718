#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "yamabe/geometry.hpp"

using namespace yamabe;

TEST_CASE("scalar curvature, direct route") {
  CHECK(scalar_curvature_direct(0.0, -1.0) == -1.0);
  CHECK(scalar_curvature_direct(0.5, -1.0) == -0.5);
  CHECK(scalar_curvature_direct(1.0, -1.0) == 0.0);
}

TEST_CASE("scalar curvature, warped route") {
  const SolitonParams p(3, -1.0, -1.0);
  SECTION("constant example gives R = lambda") {
    CHECK(scalar_curvature_warped(p, 1.0, 0.0, 0.0) == Catch::Approx(-1.0));
  }
  SECTION("the two routes agree whenever the equation holds") {
    for (double rho : {0.3, 1.0, 2.7}) {
      for (double drho : {-1.0, 0.0, 0.4}) {
        const double dd = rho_second(p, rho, drho);
        const double rd = scalar_curvature_direct(drho, p.lambda);
        const double rw = scalar_curvature_warped(p, rho, drho, dd);
        CHECK(rw == Catch::Approx(rd).margin(1e-12));
      }
    }
  }
  SECTION("a ddrho perturbation moves the routes apart by 2(n-1) delta / rho") {
    const double rho = 2.0, drho = 0.3;
    const double dd = rho_second(p, rho, drho);
    const double delta = 0.01;
    const double rw0 = scalar_curvature_warped(p, rho, drho, dd);
    const double rw1 = scalar_curvature_warped(p, rho, drho, dd + delta);
    CHECK(rw0 - rw1 ==
          Catch::Approx(2.0 * (p.n - 1) * delta / rho).epsilon(1e-12));
  }
  SECTION("rho <= 0 rejected") {
    CHECK_THROWS_AS(scalar_curvature_warped(p, 0.0, 0.0, 0.0), std::domain_error);
  }
}

TEST_CASE("constant example construction") {
  const Trajectory t = make_constant_example(3, -1.0, -1.0);
  for (const auto& s : t.samples) {
    CHECK(s.rho == 1.0);
    CHECK(s.drho == 0.0);
    CHECK(eq1_residual(t.params, s.rho, s.drho, s.ddrho).eq1_res == 0.0);
  }
  CHECK(make_constant_example(3, -4.0, -1.0).samples.front().rho ==
        Catch::Approx(0.5));
  CHECK_THROWS_AS(make_constant_example(3, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_constant_example(3, 1.0, -1.0), std::invalid_argument);
}

TEST_CASE("potential reconstruction") {
  SECTION("constant example: F(r) = r") {
    const Trajectory t = make_constant_example(3, -1.0, -1.0, 10.0, 0.05);
    const auto F = potential(t, 0.0, 0.0);
    for (const auto& [r, f] : F) CHECK(f == Catch::Approx(r).margin(1e-8));
  }
  SECTION("finite differences of F return rho") {
    const SolitonParams p(3, -1.0, -1.0);
    IntegrationOptions o;
    o.r_span = 5.0;
    o.max_output_dr = 0.002;
    const Trajectory t =
        integrate(p, SolitonState{0.0, 2.0, 0.4}, Direction::Both, o);
    const auto F = potential(t, 0.0, 0.0);
    REQUIRE(F.size() == t.samples.size());
    for (std::size_t i = 1; i + 1 < F.size(); ++i) {
      // three-point derivative (the sample grid is not exactly uniform)
      const double h1 = F[i].first - F[i - 1].first;
      const double h2 = F[i + 1].first - F[i].first;
      const double fd = -h2 / (h1 * (h1 + h2)) * F[i - 1].second +
                        (h2 - h1) / (h1 * h2) * F[i].second +
                        h1 / (h2 * (h1 + h2)) * F[i + 1].second;
      CHECK(fd == Catch::Approx(t.samples[i].rho).epsilon(1e-6));
    }
  }
  SECTION("moving the anchor shifts F by a constant") {
    const SolitonParams p(3, -1.0, -1.0);
    IntegrationOptions o;
    o.r_span = 4.0;
    o.max_output_dr = 0.01;
    const Trajectory t =
        integrate(p, SolitonState{0.0, 2.0, 0.4}, Direction::Both, o);
    const auto Fa = potential(t, t.r_min(), 0.0);
    const auto Fb = potential(t, t.r_max(), 0.0);
    const double shift = Fa.front().second - Fb.front().second;
    for (std::size_t i = 0; i < Fa.size(); ++i)
      CHECK(Fa[i].second - Fb[i].second == Catch::Approx(shift).margin(1e-10));
  }
  SECTION("anchor outside the range rejected") {
    const Trajectory t = make_constant_example(3, -1.0, -1.0, 5.0);
    CHECK_THROWS_AS(potential(t, 100.0, 0.0), std::invalid_argument);
  }
  SECTION("F is strictly increasing") {
    const SolitonParams p(3, -1.0, -1.0);
    IntegrationOptions o;
    o.r_span = 5.0;
    o.max_output_dr = 0.01;
    const Trajectory t =
        integrate(p, SolitonState{0.0, 2.0, 0.4}, Direction::Both, o);
    const auto F = potential(t, 0.0, 0.0);
    for (std::size_t i = 0; i + 1 < F.size(); ++i)
      CHECK(F[i].second < F[i + 1].second);
  }
}

TEST_CASE("geometry samples: route consistency along a trajectory") {
  const SolitonParams p(4, -1.0, -1.0);
  IntegrationOptions o;
  o.r_span = 8.0;
  o.max_output_dr = 0.05;
  const Trajectory t =
      integrate(p, SolitonState{0.0, 2.0, 0.3}, Direction::Both, o);
  const auto g = make_geometry_samples(t, 0.0, 0.0);
  REQUIRE(g.size() == t.samples.size());
  for (const auto& s : g) {
    CHECK(s.warp > 0.0);
    CHECK(std::fabs(s.R_direct - s.R_warped) <=
          20.0 * (o.rtol * std::fabs(s.R_direct) + o.atol));
  }
}
