#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>

#include "vspp/errors.hpp"
#include "vspp/numerics.hpp"

namespace vspp::numerics {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Plain power series, used only as an oracle for the zero scans below.
double series_j(int n, double x) {
  double term = 1.0;
  for (int k = 1; k <= n; ++k) term *= 0.5 * x / k;
  double sum = term;
  for (int k = 0; k < 200; ++k) {
    term *= -0.25 * x * x / ((k + 1.0) * (n + k + 1.0));
    sum += term;
  }
  return sum;
}

// Dense sign-change scan of the series; returns midpoints of the
// bracketing cells.
std::vector<double> scan_zeros(int n, double lo, double hi, double step) {
  std::vector<double> out;
  double prev = series_j(n, lo);
  for (double x = lo + step; x <= hi; x += step) {
    const double cur = series_j(n, x);
    if (prev * cur < 0.0) out.push_back(x - 0.5 * step);
    prev = cur;
  }
  return out;
}

TEST(BesselJ, ValuesAtOrigin) {
  EXPECT_EQ(bessel_j(0, 0.0), 1.0);
  EXPECT_EQ(bessel_j(1, 0.0), 0.0);
  EXPECT_EQ(bessel_j(7, 0.0), 0.0);
}

TEST(BesselJ, NearFirstZeroOfJ0) { EXPECT_LT(std::abs(bessel_j(0, 2.4048)), 5e-5); }

TEST(BesselJ, MatchesBoostAcrossSupportedRange) {
  double worst = 0.0;
  for (int n = 0; n <= 50; n += 1) {
    for (double x = 0.013; x <= 100.0; x += 0.371) {
      const double ref = boost::math::cyl_bessel_j(n, x);
      worst = std::max(worst, std::abs(bessel_j(n, x) - ref));
    }
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(BesselJ, SeriesAndRecurrenceAgreeAtSwitchPoint) {
  // The two evaluation paths meet at x = n/2 + 4.
  for (int n : {0, 3, 10, 30, 50}) {
    const double x = 0.5 * n + 4.0;
    EXPECT_NEAR(bessel_j(n, std::nextafter(x, 0.0)), bessel_j(n, x), 1e-13) << "n=" << n;
  }
}

TEST(BesselJ, ThreeTermRecurrence) {
  for (int n = 1; n <= 10; ++n) {
    for (double x = 0.5; x <= 50.0; x += 0.25) {
      const double lhs = bessel_j(n - 1, x) + bessel_j(n + 1, x);
      const double rhs = 2.0 * n / x * bessel_j(n, x);
      ASSERT_NEAR(lhs, rhs, 1e-10) << "n=" << n << " x=" << x;
    }
  }
}

TEST(BesselJ, DerivativeMatchesFiniteDifference) {
  for (int n : {0, 1, 4, 50}) {
    for (double x : {0.7, 3.3, 12.0, 61.5}) {
      const double h = 1e-5;
      const double fd = (bessel_j(n, x + h) - bessel_j(n, x - h)) / (2 * h);
      EXPECT_NEAR(bessel_j_prime(n, x), fd, 1e-8);
    }
  }
}

TEST(BesselJ, RejectsOutOfRange) {
  EXPECT_THROW(bessel_j(-1, 1.0), DomainError);
  EXPECT_THROW(bessel_j(51, 1.0), DomainError);
  EXPECT_THROW(bessel_j(0, -0.1), DomainError);
  EXPECT_THROW(bessel_j(0, 1001.0), DomainError);
  EXPECT_THROW(bessel_j(0, std::nan("")), DomainError);
}

TEST(BesselZero, FirstZeroOfJ0) {
  const double x01 = bessel_zero(0, 1);
  EXPECT_NEAR(x01, 2.4048, 5e-4);
  EXPECT_LT(std::abs(bessel_j(0, x01)), 1e-12);
}

TEST(BesselZero, SecondZeroOfJ0AgreesWithSeriesScan) {
  const auto scanned = scan_zeros(0, 2.5, 8.0, 1e-4);
  ASSERT_EQ(scanned.size(), 1u);
  const double v = bessel_zero(0, 2);
  EXPECT_GT(v, 2.4048);
  EXPECT_LT(v, 8.0);
  EXPECT_NEAR(v, scanned[0], 1e-4);
  EXPECT_LT(std::abs(bessel_j(0, v)), 1e-12);
}

TEST(BesselZero, FirstZeroOfJ1AgreesWithSeriesScan) {
  const auto scanned = scan_zeros(1, 2.4048, 5.0, 1e-4);
  ASSERT_EQ(scanned.size(), 1u);
  const double v = bessel_zero(1, 1);
  EXPECT_NEAR(v, scanned[0], 1e-4);
  EXPECT_LT(std::abs(bessel_j(1, v)), 1e-12);
}

TEST(BesselZero, MatchesBoostZeros) {
  for (int n : {0, 1, 2, 7, 20, 50}) {
    for (int p : {1, 2, 3, 10, 40, 100}) {
      const double ref = boost::math::cyl_bessel_j_zero(static_cast<double>(n), p);
      EXPECT_NEAR(bessel_zero(n, p), ref, 1e-12 * ref) << "n=" << n << " p=" << p;
    }
  }
}

TEST(BesselZero, McMahonIsAccurateForLargeIndex) {
  EXPECT_NEAR(mcmahon_zero_estimate(0, 50), bessel_zero(0, 50), 1e-8);
  EXPECT_NEAR(mcmahon_zero_estimate(3, 80), bessel_zero(3, 80), 1e-6);
}

TEST(BesselZero, Interlacing) {
  for (int n = 0; n < 12; ++n) {
    for (int p = 1; p < 12; ++p) {
      const double here = bessel_zero(n, p);
      EXPECT_LT(here, bessel_zero(n + 1, p));
      EXPECT_LT(bessel_zero(n + 1, p), bessel_zero(n, p + 1));
    }
  }
}

TEST(BesselZero, RejectsOutOfRange) {
  EXPECT_THROW(bessel_zero(0, 0), DomainError);
  EXPECT_THROW(bessel_zero(51, 1), DomainError);
  EXPECT_THROW(bessel_zero(0, 101), DomainError);
}

TEST(FindRoot, SquareRootOfTwo) {
  const double r = find_root([](double x) { return x * x - 2.0; }, {1.0, 2.0}, 1e-12);
  EXPECT_NEAR(r, std::sqrt(2.0), 1e-12);
}

TEST(FindRoot, CosineRoot) {
  const double r = find_root([](double x) { return std::cos(x); }, {1.0, 2.0}, 1e-13);
  EXPECT_NEAR(r, 0.5 * kPi, 1e-13);
}

TEST(FindRoot, IndependentOfBracket) {
  const auto f = [](double x) { return std::exp(x) - 3.0 + 0.2 * std::sin(5 * x); };
  const double ref = find_root(f, {0.0, 2.0}, 1e-13);
  for (const Bracket b : {Bracket{0.5, 1.5}, Bracket{1.0, 1.2}, Bracket{-3.0, 1.9}, Bracket{0.9, 4.0}}) {
    EXPECT_NEAR(find_root(f, b, 1e-13), ref, 1e-13);
  }
}

TEST(FindRoot, Errors) {
  const auto f = [](double x) { return x * x + 1.0; };
  EXPECT_THROW(find_root(f, {-1.0, 1.0}, 1e-10), BracketError);
  EXPECT_THROW(find_root(f, {1.0, -1.0}, 1e-10), BracketError);
  EXPECT_THROW(find_root([](double x) { return std::pow(x - 0.3, 5) + 1e-3 * (x - 0.3); }, {0.0, 1.0}, 1e-15, 2),
               ConvergenceError);
}

IntegratorConfig tight() {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  return cfg;
}

TEST(IntegrateOscillator, StationaryModeIsPeriodic) {
  const double w0 = 1.7;
  const std::complex<double> q0 = 1.0 / std::sqrt(2 * w0);
  const std::complex<double> qd0{0.0, -std::sqrt(w0 / 2)};
  const auto traj = integrate_oscillator([w0](double) { return w0 * w0; }, q0, qd0, {0.0, 2 * kPi / w0}, tight());
  ASSERT_GE(traj.size(), 2u);
  EXPECT_EQ(traj.front().t, 0.0);
  EXPECT_EQ(traj.back().t, 2 * kPi / w0);
  EXPECT_LT(std::abs(traj.back().q - q0), 1e-8);
  EXPECT_LT(std::abs(traj.back().qdot - qd0), 1e-8);
}

TEST(IntegrateOscillator, ZeroDepthModulationMatchesConstant) {
  const double kappa = 0.0;
  const auto modulated = [kappa](double t) { return 1.0 + kappa * std::sin(2.0 * t); };
  const std::complex<double> q0 = std::sqrt(0.5);
  const std::complex<double> qd0{0.0, -std::sqrt(0.5)};
  const auto a = integrate_oscillator(modulated, q0, qd0, {0.0, 50.0}, tight());
  const auto b = integrate_oscillator([](double) { return 1.0; }, q0, qd0, {0.0, 50.0}, tight());
  EXPECT_EQ(a.back().q, b.back().q);
  EXPECT_EQ(a.back().qdot, b.back().qdot);
}

TEST(IntegrateOscillator, ParametricGrowthAgreesAcrossIntegrators) {
  const auto w2 = [](double t) { return 1.0 + 0.01 * std::sin(2.0 * t); };
  const std::complex<double> q0 = std::sqrt(0.5);
  const std::complex<double> qd0{0.0, -std::sqrt(0.5)};
  IntegratorConfig loose;
  loose.rel_tol = 1e-9;
  loose.abs_tol = 1e-12;
  const auto a = integrate_oscillator(w2, q0, qd0, {0.0, 400.0}, loose, Stepper::Fehlberg78);
  const auto b = integrate_oscillator(w2, q0, qd0, {0.0, 400.0}, tight(), Stepper::DormandPrince5);
  EXPECT_LT(std::abs(a.back().q - b.back().q), 1e-6 * std::abs(b.back().q));

  // Envelope over the last quarter exceeds that over the first quarter by
  // roughly exp(kappa/4 * 300).
  double early = 0.0;
  double late = 0.0;
  for (const auto& s : b) {
    if (s.t < 100.0) early = std::max(early, std::abs(s.q));
    if (s.t > 300.0) late = std::max(late, std::abs(s.q));
  }
  EXPECT_GT(late / early, 1.8);
}

TEST(IntegrateOscillator, WronskianConservedOverHundredPeriods) {
  const double w0 = 1.0;
  const std::complex<double> q0 = 1.0 / std::sqrt(2 * w0);
  const std::complex<double> qd0{0.0, -std::sqrt(w0 / 2)};
  const auto traj = integrate_oscillator([](double) { return 1.0; }, q0, qd0, {0.0, 200 * kPi}, tight());
  double worst = 0.0;
  for (const auto& s : traj) {
    const double w = (std::complex<double>(0, 1) * (std::conj(s.q) * s.qdot - s.q * std::conj(s.qdot))).real();
    worst = std::max(worst, std::abs(w - 1.0));
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(IntegrateOscillator, SampledMatchesFullTrajectoryEndpoint) {
  const auto w2 = [](double t) { return 1.0 + 0.05 * std::sin(2.0 * t); };
  const std::complex<double> q0 = std::sqrt(0.5);
  const std::complex<double> qd0{0.0, -std::sqrt(0.5)};
  const std::vector<double> times{10.0, 20.0, 30.0};
  const auto sampled = integrate_oscillator_sampled(w2, nullptr, q0, qd0, 0.0, times, tight());
  const auto full = integrate_oscillator(w2, q0, qd0, {0.0, 30.0}, tight());
  ASSERT_EQ(sampled.size(), 3u);
  EXPECT_EQ(sampled[2].t, 30.0);
  EXPECT_LT(std::abs(sampled[2].q - full.back().q), 1e-9);
}

TEST(IntegrateOscillator, StepBudgetExhaustion) {
  IntegratorConfig cfg = tight();
  cfg.max_steps = 10;
  EXPECT_THROW(integrate_oscillator([](double) { return 1.0; }, 1.0, 0.0, {0.0, 1000.0}, cfg), ConvergenceError);
  cfg.rel_tol = 0.0;
  EXPECT_THROW(integrate_oscillator([](double) { return 1.0; }, 1.0, 0.0, {0.0, 1.0}, cfg), PreconditionError);
}

TEST(Quadrature, ElementaryIntegrals) {
  EXPECT_NEAR(quadrature([](double x) { return std::sin(x); }, 0.0, kPi, 1e-12), 2.0, 1e-12);
  EXPECT_NEAR(quadrature([](double x) { return x * x; }, 0.0, 1.0, 1e-12), 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(quadrature([](double x) { return x * x; }, 1.0, 0.0, 1e-12), -1.0 / 3.0, 1e-14);
}

TEST(Quadrature, PiecewisePermittivityWithBreakpoint) {
  const double L = 1.0;
  const double a = 0.37;
  const double k = 3.0 * kPi / L;
  const double eps1 = 4.0;
  const double eps2 = 1.0;
  const auto f = [&](double z) {
    const double c = std::cos(k * z);
    return (z < a ? eps1 : eps2) * c * c;
  };
  // Closed-form piecewise antiderivative of cos^2.
  const auto prim = [k](double z) { return 0.5 * z + std::sin(2 * k * z) / (4 * k); };
  const double exact = eps1 * (prim(a) - prim(0.0)) + eps2 * (prim(L) - prim(a));
  const double bp[] = {a};
  EXPECT_NEAR(quadrature(f, 0.0, L, 1e-12, bp), exact, 1e-10);
}

TEST(Quadrature, ReportsUnmetTolerance) {
  // Oscillation far beyond the resolvable depth.
  const auto f = [](double x) { return std::sin(1e7 * x * x); };
  EXPECT_THROW(quadrature(f, 0.0, 1.0, 1e-14), ConvergenceError);
}

}  // namespace
}  // namespace vspp::numerics
