#pragma once

// Numerical kernel shared by the dispersion, cavity and dynamics modules:
// Bessel functions of the first kind and their zeros, bracketed scalar root
// finding, adaptive integration of complex second-order oscillators, and
// adaptive 1-D quadrature with interface breakpoints.

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace vspp::numerics {

using complex = std::complex<double>;
using RealFunction = std::function<double(double)>;

/// Closed interval on which a target function changes sign.
struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
};

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 50'000'000;

  /// Throws PreconditionError when a tolerance or limit is not positive.
  void validate() const;
};

/// Embedded Runge-Kutta pairs available to the oscillator integrator.
enum class Stepper {
  Fehlberg78,     ///< 7(8) pair, default
  DormandPrince5  ///< 5(4) pair, used as the independent cross-check
};

/// Point on a trajectory of Q'' + gamma(t) Q' + omega^2(t) Q = 0.
struct OscillatorState {
  double t = 0.0;
  complex q;
  complex qdot;
};

// ---------------------------------------------------------------------------
// Bessel functions

inline constexpr int kMaxBesselOrder = 50;
inline constexpr double kMaxBesselArgument = 1000.0;
inline constexpr int kMaxBesselZeroIndex = 100;

/// J_n(x) for 0 <= n <= 50 and 0 <= x <= 1000.
///
/// Power series for x < n/2 + 4, otherwise Miller's downward recurrence
/// normalised by the Neumann sum J_0 + 2 sum_k J_2k = 1. Absolute error is
/// below 1e-12 for x <= 100. Throws DomainError outside the supported range.
double bessel_j(int n, double x);

/// Derivative J_n'(x) from the recurrence 2 J_n' = J_{n-1} - J_{n+1}.
double bessel_j_prime(int n, double x);

/// p-th positive zero of J_n, 0 <= n <= 50 and 1 <= p <= 100, to 1e-12
/// relative accuracy. Throws DomainError outside that range.
double bessel_zero(int n, int p);

/// McMahon's large-p asymptotic estimate of the p-th zero of J_n.
double mcmahon_zero_estimate(int n, int p);

// ---------------------------------------------------------------------------
// Root finding

/// Root of f inside a sign-change bracket, returned once the enclosing
/// interval is narrower than tol (floored at a few ulps of the root).
///
/// Uses a bisection-safeguarded interpolation scheme (TOMS 748). Throws
/// BracketError if f(lo) f(hi) > 0 or lo >= hi, ConvergenceError if
/// max_iter iterations do not shrink the interval enough.
double find_root(const RealFunction& f, Bracket bracket, double tol, int max_iter = 200);

// ---------------------------------------------------------------------------
// Oscillator integration

/// Solves Q'' + omega_sq(t) Q = 0 on [t_span.first, t_span.second] with
/// complex Q, as a real 4-component first-order system.
///
/// Every accepted step is recorded; the trajectory starts at t_span.first
/// and ends exactly at t_span.second. Throws ConvergenceError when
/// cfg.max_steps is exhausted.
std::vector<OscillatorState> integrate_oscillator(const RealFunction& omega_sq, complex q0, complex qdot0,
                                                  std::pair<double, double> t_span, const IntegratorConfig& cfg,
                                                  Stepper stepper = Stepper::Fehlberg78);

/// Same system with an optional first-derivative coefficient
/// (Q'' + damping(t) Q' + omega_sq(t) Q = 0); only the states at the
/// requested sample times (ascending, inside t_span) are returned.
std::vector<OscillatorState> integrate_oscillator_sampled(const RealFunction& omega_sq, const RealFunction& damping,
                                                          complex q0, complex qdot0, double t0,
                                                          std::span<const double> sample_times,
                                                          const IntegratorConfig& cfg,
                                                          Stepper stepper = Stepper::Fehlberg78);

// ---------------------------------------------------------------------------
// Quadrature

/// Adaptive Gauss-Kronrod estimate of the integral of f over [a, b].
///
/// Interior breakpoints split the range into panels that are integrated
/// separately, so no panel straddles a discontinuity. Breakpoints outside
/// (a, b) are ignored. Throws ConvergenceError if the error estimate
/// exceeds tol * max(1, integral of |f|).
double quadrature(const RealFunction& f, double a, double b, double tol, std::span<const double> breakpoints = {});

}  // namespace vspp::numerics
