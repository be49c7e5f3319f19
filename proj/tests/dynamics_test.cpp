#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include "vspp/dispersion.hpp"
#include "vspp/dynamics.hpp"
#include "vspp/errors.hpp"

namespace vspp::dynamics {
namespace {

constexpr double kPi = 3.14159265358979323846;

IntegratorConfig tight() {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.abs_tol = 1e-14;
  return cfg;
}

// Floquet growth rate of ln N for q'' + w2(t) q = 0 with period T: the largest
// monodromy eigenvalue lambda gives |q| ~ |lambda|^(t/T), so N grows at 2 ln|lambda|/T.
// Classical fixed-step RK4 on the real 2x2 fundamental matrix.
double floquet_ln_n_rate(const std::function<double(double)>& w2, double period) {
  const int steps = 20000;
  const double h = period / steps;
  std::array<double, 4> y{1.0, 0.0, 0.0, 1.0};  // columns (x, v) of two solutions
  const auto rhs = [&](double t, const std::array<double, 4>& s) {
    const double w = w2(t);
    return std::array<double, 4>{s[1], -w * s[0], s[3], -w * s[2]};
  };
  double t = 0.0;
  for (int i = 0; i < steps; ++i) {
    const auto k1 = rhs(t, y);
    std::array<double, 4> tmp;
    for (int j = 0; j < 4; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
    const auto k2 = rhs(t + 0.5 * h, tmp);
    for (int j = 0; j < 4; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
    const auto k3 = rhs(t + 0.5 * h, tmp);
    for (int j = 0; j < 4; ++j) tmp[j] = y[j] + h * k3[j];
    const auto k4 = rhs(t + h, tmp);
    for (int j = 0; j < 4; ++j) y[j] += h / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    t += h;
  }
  // Monodromy [[x1, x2], [v1, v2]], determinant 1.
  const double tr = y[0] + y[3];
  const double lambda = 0.5 * (std::abs(tr) + std::sqrt(std::max(0.0, tr * tr - 4.0)));
  return 2.0 * std::log(lambda) / period;
}

TEST(EvolveMode, ConstantFrequencyIsStationary) {
  const double w = 2.7;
  for (double t1 : {0.0, 1.3, 50.0}) {
    const auto s = evolve_mode([w](double) { return w * w; }, w, t1, tight());
    const complex expected = std::polar(1.0 / std::sqrt(2.0 * w), -w * t1);
    EXPECT_LT(std::abs(s.q - expected), 1e-10);
    EXPECT_LT(std::abs(s.qdot - complex(0, -w) * expected), 1e-10 * w);
    EXPECT_NEAR(wronskian(s), 1.0, 1e-10);
    const auto b = bogolyubov_extract(s, w);
    EXPECT_LT(std::abs(b.beta), 1e-10);
    EXPECT_NEAR(std::abs(b.alpha), 1.0, 1e-10);
  }
}

TEST(EvolveMode, ZeroDriveMatchesConstant) {
  const auto br = oscillator_branch(1.0, 0.0);
  const auto s = evolve_mode([&](double t) { return br.omega_sq(0.0, t); }, 1.0, 400.0, tight());
  EXPECT_LT(std::abs(s.q - std::polar(1.0 / std::sqrt(2.0), -400.0)), 1e-9);
}

TEST(EvolveMode, ResonantGrowthAgreesAcrossIntegrators) {
  const auto br = oscillator_branch(1.0, 0.0);
  const auto w2 = [&](double t) { return br.omega_sq(0.01, t); };
  const auto a = evolve_mode(w2, 1.0, 400.0, tight());
  EvolveOptions dp;
  dp.stepper = numerics::Stepper::DormandPrince5;
  const auto b = evolve_mode(w2, 1.0, 400.0, tight(), dp);
  // N ~ sinh^2(omega0 kappa t / 4) = sinh^2(1)
  EXPECT_GT(bogolyubov_extract(a, 1.0).number(), 1.0);
  EXPECT_LT(std::abs(a.q - b.q), 1e-7 * std::abs(a.q));
}

TEST(EvolveMode, Preconditions) {
  EXPECT_THROW(evolve_mode([](double) { return 2.0; }, 1.0, 1.0, tight()), PreconditionError);
  EXPECT_THROW(evolve_mode([](double) { return 1.0; }, 0.0, 1.0, tight()), PreconditionError);
  EXPECT_THROW(evolve_mode([](double) { return 1.0; }, 1.0, -1.0, tight()), PreconditionError);
}

TEST(EvolveMode, DampingHookRemovesEnergy) {
  EvolveOptions opt;
  opt.damping = [](double) { return 0.1; };
  const auto s = evolve_mode([](double) { return 1.0; }, 1.0, 20.0, tight(), opt);
  // Underdamped envelope exp(-g t / 2).
  const double energy = std::norm(s.qdot) + std::norm(s.q);
  EXPECT_NEAR(energy, std::exp(-0.1 * 20.0), 2e-2);
}

TEST(Bogolyubov, ExamplesAndNormalisation) {
  const double w = 1.7;
  const double t = 0.9;
  const complex q = std::polar(1.0 / std::sqrt(2.0 * w), w * t);
  const auto b = bogolyubov_extract({t, q, complex(0, w) * q}, w);
  EXPECT_NEAR(std::abs(b.beta), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(b.alpha), 0.0, 1e-14);
  EXPECT_THROW(bogolyubov_extract({0, q, q}, 0.0), PreconditionError);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 50; ++i) {
    const OscillatorState s{0.0, {nd(rng), nd(rng)}, {nd(rng), nd(rng)}};
    const auto p = bogolyubov_extract(s, 0.5 + std::abs(nd(rng)));
    EXPECT_NEAR(std::norm(p.alpha) - std::norm(p.beta), wronskian(s), 1e-12 * (1 + std::norm(p.alpha)));
  }
}

TEST(Bogolyubov, GlobalPhaseDoesNotChangeN) {
  const auto br = oscillator_branch(1.3, 0.0);
  const auto s = evolve_mode([&](double t) { return br.omega_sq(0.03, t); }, 1.3, 200.0, tight());
  const double n0 = bogolyubov_extract(s, 1.3).number();
  for (double th : {0.3, 1.9, 4.4}) {
    const complex ph = std::polar(1.0, th);
    const double n = bogolyubov_extract({s.t, s.q * ph, s.qdot * ph}, 1.3).number();
    EXPECT_NEAR(n, n0, 1e-12 * n0);
  }
}

TEST(Bogolyubov, NormalisationOverLongDrive) {
  const double w0 = 1.0;
  const double periods = 1e4;
  // Off-resonant drive nu = omega0: bounded N, absolute check.
  {
    const auto br = oscillator_branch(w0, w0);
    const double t1 = periods * 2 * kPi / br.drive_frequency;
    const auto s = evolve_mode([&](double t) { return br.omega_sq(0.01, t); }, w0, t1, tight());
    const auto b = bogolyubov_extract(s, w0);
    EXPECT_NEAR(std::norm(b.alpha) - std::norm(b.beta), 1.0, 1e-8);
  }
  // Parametric resonance: N ~ e^{157}; drift relative to the state's scale.
  {
    const auto br = oscillator_branch(w0, 0.0);
    const double t1 = periods * 2 * kPi / br.drive_frequency;
    const auto s = evolve_mode([&](double t) { return br.omega_sq(0.01, t); }, w0, t1, tight());
    const auto b = bogolyubov_extract(s, w0);
    EXPECT_GT(b.number(), 1e60);
    const double scale = std::norm(b.alpha) + std::norm(b.beta);
    EXPECT_LT(std::abs(std::norm(b.alpha) - std::norm(b.beta) - 1.0) / scale, 1e-8);
  }
}

TEST(Bogolyubov, AdiabaticRampCreatesNothing) {
  const double w0 = 1.0;
  const double ramp = 400.0;
  const double total = 3 * ramp;
  const auto envelope = [&](double t) {
    if (t <= 0 || t >= total) return 0.0;
    if (t < ramp) return std::pow(std::sin(0.5 * kPi * t / ramp), 2);
    if (t > total - ramp) return std::pow(std::sin(0.5 * kPi * (total - t) / ramp), 2);
    return 1.0;
  };
  // Off resonance: nu = 0.7 omega0.
  const auto w2 = [&](double t) { return w0 * w0 * (1 + 0.05 * envelope(t) * std::sin(0.7 * t)); };
  const auto s = evolve_mode(w2, w0, total, tight());
  EXPECT_LT(bogolyubov_extract(s, w0).number(), 1e-6);
}

TEST(Enhancement, ClosedForms) {
  EXPECT_EQ(spp_enhancement(1.0, 2.0, 0.0, 1.0, 10.0, 1.0), 0.0);
  // argument (k^2 c^2/w0)(kappa/(2 eps2)) t = 1
  EXPECT_NEAR(spp_enhancement(2.0, 1.0, 0.5, 1.0, 4.0, 0.5), std::pow(std::sinh(1.0), 2), 1e-15);
  EXPECT_EQ(photon_enhancement(2.4, 1.0, 0.0, 1.0, 1.0, 0.1, 1.0, 5.0, 1.0), 0.0);
  EXPECT_EQ(photon_enhancement(2.4, 1.0, 0.1, 1.0, 1.0, 0.0, 1.0, 5.0, 1.0), 0.0);
  EXPECT_NEAR(photon_enhancement(2.0, 1.0, 0.25, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0), std::pow(std::sinh(1.0), 2), 1e-15);
  EXPECT_THROW(photon_enhancement(2.4, 1.0, 1.0, 1.0, 1.0, 0.1, 1.0, 5.0, 1.0), PreconditionError);
  EXPECT_THROW(spp_enhancement(-1.0, 2.0, 0.1, 1.0, 10.0, 1.0), PreconditionError);
}

TEST(Enhancement, ReferenceGeometryPhotonNumberIsFinite) {
  const double c = 2.99792458e10;  // cm/s
  const double x = 2.404825557695773;
  const double w0 = c * std::hypot(x / 2.5, kPi / 10.0);
  const double n = photon_enhancement(x, 2.5, 1e-3, 10.0, 1.0, 0.01, w0, 1e-6, c);
  EXPECT_TRUE(std::isfinite(n));
  EXPECT_GT(n, 0.0);
}

TEST(Dominance, ThresholdAndLimits) {
  const double x = 2.404825557695773;
  const auto d = dominance_ratio(1.0, x, 2.5, 1e-3, 10.0);
  // (x^2/R^2)(a/L) with R = 2.5 cm, a/L = 1e-4
  EXPECT_NEAR(d.threshold_k, std::sqrt(x * x / 6.25 * 1e-4), 1e-15);
  EXPECT_NEAR(d.threshold_k, 0.009619, 1e-6);
  EXPECT_NEAR(dominance_ratio(d.threshold_k, x, 2.5, 1e-3, 10.0).ratio, 1.0, 1e-14);
  const double k_sp = 2 * kPi / 1e-4;  // lambda_sp = 1 um in cm
  EXPECT_GT(dominance_ratio(k_sp, x, 2.5, 1e-3, 10.0).ratio, 1e9);
  EXPECT_THROW(dominance_ratio(0.0, x, 2.5, 1e-3, 10.0), PreconditionError);
}

TEST(ResonanceScan, NoDriveNoParticles) {
  const auto br = oscillator_branch(1.0, 0.0);
  const double k[] = {0.0};
  const auto r = resonance_scan(br, k, 1e4 * kPi, tight());
  ASSERT_EQ(r.size(), 1u);
  EXPECT_LT(r[0].N_numeric, 1e-12);
  EXPECT_EQ(r[0].N_formula, 0.0);
  EXPECT_TRUE(r[0].warning.has_value());
}

TEST(ResonanceScan, SlopeLinearInKappaAndMatchesFloquetOracle) {
  const double w0 = 1.0;
  const auto br = oscillator_branch(w0, 0.0);
  const std::vector<double> kappas{0.005, 0.01, 0.02, 0.04};
  const auto reps = resonance_scan(br, kappas, 5000.0, tight());
  for (std::size_t i = 0; i < kappas.size(); ++i) {
    const auto& r = reps[i];
    EXPECT_FALSE(r.warning) << *r.warning;
    const double oracle = floquet_ln_n_rate([&](double t) { return br.omega_sq(kappas[i], t); }, kPi / w0);
    EXPECT_NEAR(r.growth_rate_fit, oracle, 0.02 * oracle) << kappas[i];
    // Measured constant: slope / kappa close to omega0/2, half the formula's omega0.
    EXPECT_NEAR(r.growth_rate_fit / kappas[i], 0.5 * w0, 0.025 * w0);
    EXPECT_NEAR(r.growth_rate_formula / kappas[i], w0, 1e-15);
    EXPECT_LT(r.wronskian_drift, 1e-8);
  }
  EXPECT_NEAR(reps[2].growth_rate_fit / reps[1].growth_rate_fit, 2.0, 0.1);
}

TEST(SppBranch, FrequencyMatchesDispersionRelation) {
  const double k = 3.0;
  const double eps2 = 1.5;
  const double chi = -0.4;
  const auto br = spp_branch(Branch::SPPelectric, k, eps2, 1.0, chi, 0.0, 2.0);
  for (double t : {0.0, 0.3, 1.7}) {
    const double r = chi - 0.05 * std::sin(br.drive_frequency * t);
    const media::MediumState m1{{eps2 / r, 0}, {1, 0}};
    const media::MediumState m2{{eps2, 0}, {1, 0}};
    const double w = dispersion::single_interface_omega(m1, m2, k, 2.0, media::Polarization::TMelectric);
    EXPECT_NEAR(br.omega_sq(0.05, t), w * w, 1e-12 * w * w);
  }
  EXPECT_THROW(spp_branch(Branch::SPPelectric, k, eps2, 1.0, -1.0, 0.0, 2.0), PreconditionError);
  EXPECT_THROW(spp_branch(Branch::Photon, k, eps2, 1.0, chi, 0.0, 2.0), PreconditionError);
}

TEST(SppBranch, DualityAndGrowthConstant) {
  const double chi = -0.5;
  const auto el = spp_branch(Branch::SPPelectric, 2.0, 2.0, 1.5, chi, 0.0, 1.0);
  const auto mag = spp_branch(Branch::SPPmagnetic, 2.0, 2.0, 1.5, chi, 0.0, 1.0);
  const std::vector<double> kappas{0.01, 0.02};
  const double duration = 40.0 * 2 * kPi / el.omega0 * 50;
  const auto re = resonance_scan(el, kappas, duration, tight());
  const auto rm = resonance_scan(mag, kappas, duration, tight());
  for (std::size_t i = 0; i < kappas.size(); ++i) {
    EXPECT_EQ(re[i].N_numeric, rm[i].N_numeric);
    EXPECT_EQ(re[i].N_formula, rm[i].N_formula);
    EXPECT_EQ(re[i].growth_rate_fit, rm[i].growth_rate_fit);
    EXPECT_EQ(rm[i].branch, Branch::SPPmagnetic);
    EXPECT_FALSE(re[i].warning);
    // omega^2 = omega0^2 (1 - kappa/(1+chi) sin): Mathieu slope omega0 kappa/(2(1+chi)),
    // half of the closed form's late-time slope.
    EXPECT_NEAR(re[i].growth_rate_fit / re[i].growth_rate_formula, 0.5, 0.03);
  }
}

TEST(PhotonBranch, TableAndGrowth) {
  const cavity::Geometry g{1.0, 1.0, 0.01};
  const auto br = photon_branch(g, 1.0, 0, 1, 1.0, 0.1, 0.0, 1.0);
  const double w0 = cavity::solve_cavity_modes(g, 1.0, 1.0, 0, 1, 1, 1.0).modes[0].omega;
  EXPECT_NEAR(br.omega0, w0, 1e-14 * w0);
  for (double t : {0.1, 0.77, 2.0}) {
    const double r = 1.0 - 0.08 * std::sin(br.drive_frequency * t);
    const double w = cavity::solve_cavity_modes(g, 1.0 / r, 1.0, 0, 1, 1, 1.0).modes[0].omega;
    EXPECT_NEAR(br.omega_sq(0.08, t), w * w, 1e-11 * w * w);
  }
  EXPECT_THROW(br.omega_sq(0.2, 1.0), PreconditionError);

  const std::vector<double> kappas{0.1};
  const auto rep = resonance_scan(br, kappas, 6000.0, tight());
  EXPECT_FALSE(rep[0].warning) << *rep[0].warning;
  // Same factor as the other branches, up to the O(a/L) thin-slab correction.
  EXPECT_NEAR(rep[0].growth_rate_fit / rep[0].growth_rate_formula, 0.5, 0.05);
}

}  // namespace
}  // namespace vspp::dynamics
