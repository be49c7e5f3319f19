#include "vspp/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint.hpp>

#include "vspp/errors.hpp"

namespace vspp::numerics {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_bessel_args(int n, double x) {
  if (n < 0 || n > kMaxBesselOrder) {
    throw DomainError("bessel_j: order " + std::to_string(n) + " outside [0, 50]");
  }
  if (!(x >= 0.0) || x > kMaxBesselArgument) {
    throw DomainError("bessel_j: argument " + std::to_string(x) + " outside [0, 1000]");
  }
}

double bessel_series(int n, double x) {
  const double half = 0.5 * x;
  double term = 1.0;
  for (int k = 1; k <= n; ++k) term *= half / k;
  const double q = half * half;
  double sum = term;
  for (int k = 0; k < 500; ++k) {
    term *= -q / ((k + 1.0) * (n + k + 1.0));
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// Miller's algorithm: recur downward from an order well above max(n, x),
// normalise with J_0 + 2 (J_2 + J_4 + ...) = 1.
double bessel_miller(int n, double x) {
  const double top = std::max(static_cast<double>(n), x);
  int start = static_cast<int>(top + 30.0 + std::sqrt(60.0 * top));
  start += start % 2;
  constexpr double kBig = 1e250;
  double next = 0.0;  // J_{k+1}
  double cur = 1e-300;  // J_k, arbitrary seed
  double norm = 0.0;
  double jn = 0.0;
  const double two_over_x = 2.0 / x;
  for (int k = start; k > 0; --k) {
    const double prev = k * two_over_x * cur - next;  // J_{k-1}
    next = cur;
    cur = prev;
    if (std::abs(cur) > kBig) {
      cur /= kBig;
      next /= kBig;
      norm /= kBig;
      jn /= kBig;
    }
    const int order = k - 1;
    if (order == n) jn = cur;
    if (order > 0 && order % 2 == 0) norm += 2.0 * cur;
  }
  norm += cur;  // J_0
  return jn / norm;
}

// Termination test on the bracket width, floored at a few ulps of the
// bracket location so that tiny tolerances stay attainable.
struct WidthTolerance {
  double tol;
  bool operator()(double a, double b) const {
    const double floor = 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b));
    return std::abs(b - a) <= std::max(tol, floor);
  }
};

using OdeState = std::array<double, 4>;

struct OscillatorSystem {
  const RealFunction& omega_sq;
  const RealFunction* damping;
  void operator()(const OdeState& x, OdeState& dxdt, double t) const {
    const double w2 = omega_sq(t);
    const double g = damping != nullptr ? (*damping)(t) : 0.0;
    dxdt[0] = x[2];
    dxdt[1] = x[3];
    dxdt[2] = -w2 * x[0] - g * x[2];
    dxdt[3] = -w2 * x[1] - g * x[3];
  }
};

OdeState pack(complex q, complex qdot) { return {q.real(), q.imag(), qdot.real(), qdot.imag()}; }

OscillatorState unpack(double t, const OdeState& x) { return {t, complex(x[0], x[1]), complex(x[2], x[3])}; }

// Adaptive driver shared by both embedded pairs. Observer is called after
// every accepted step; the last step is clipped to land on t_end exactly.
template <class Controlled, class Observer>
void drive(Controlled& ctrl, const OscillatorSystem& sys, OdeState& x, double& t, double t_end, double& dt,
           const IntegratorConfig& cfg, std::size_t& attempts, Observer&& observe) {
  namespace odeint = boost::numeric::odeint;
  while (t < t_end) {
    if (attempts >= cfg.max_steps) {
      throw ConvergenceError("integrate_oscillator: step budget of " + std::to_string(cfg.max_steps) +
                             " exhausted at t = " + std::to_string(t));
    }
    ++attempts;
    const double remaining = t_end - t;
    double h = std::min({dt, remaining, cfg.max_step});
    const bool last = h >= remaining;
    const double t_before = t;
    if (ctrl.try_step(sys, x, t, h) == odeint::success) {
      if (last) t = t_end;
      observe(t, x);
      dt = h;
    } else {
      t = t_before;
      dt = h;
    }
    if (!(dt > 0.0) || !std::isfinite(x[0]) || !std::isfinite(x[2])) {
      throw ConvergenceError("integrate_oscillator: step size collapsed or state diverged at t = " +
                             std::to_string(t));
    }
  }
}

double initial_step(const RealFunction& omega_sq, double t0, double span, const IntegratorConfig& cfg) {
  const double w = std::sqrt(std::abs(omega_sq(t0)));
  double h = span / 100.0;
  if (w > 0.0) h = std::min(h, 0.01 / w);
  return std::min(h, cfg.max_step);
}

template <class Observer>
void run_stepper(Stepper stepper, const OscillatorSystem& sys, OdeState& x, double& t, double t_end, double& dt,
                 const IntegratorConfig& cfg, std::size_t& attempts, Observer&& observe) {
  namespace odeint = boost::numeric::odeint;
  switch (stepper) {
    case Stepper::Fehlberg78: {
      auto ctrl = odeint::make_controlled<odeint::runge_kutta_fehlberg78<OdeState>>(cfg.abs_tol, cfg.rel_tol);
      drive(ctrl, sys, x, t, t_end, dt, cfg, attempts, observe);
      break;
    }
    case Stepper::DormandPrince5: {
      auto ctrl = odeint::make_controlled<odeint::runge_kutta_dopri5<OdeState>>(cfg.abs_tol, cfg.rel_tol);
      drive(ctrl, sys, x, t, t_end, dt, cfg, attempts, observe);
      break;
    }
  }
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(max_step > 0.0) || max_steps == 0) {
    throw PreconditionError("IntegratorConfig: rel_tol, abs_tol, max_step and max_steps must be positive");
  }
}

double bessel_j(int n, double x) {
  check_bessel_args(n, x);
  if (x == 0.0) return n == 0 ? 1.0 : 0.0;
  if (x < 0.5 * n + 4.0) return bessel_series(n, x);
  return bessel_miller(n, x);
}

double bessel_j_prime(int n, double x) {
  check_bessel_args(n, x);
  if (n == 0) return -bessel_j(1, x);
  if (n == kMaxBesselOrder) {
    // J_n' = J_{n-1} - (n/x) J_n avoids order n+1.
    if (x == 0.0) return 0.0;
    return bessel_j(n - 1, x) - n / x * bessel_j(n, x);
  }
  return 0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x));
}

double mcmahon_zero_estimate(int n, int p) {
  const double beta = (p + 0.5 * n - 0.25) * kPi;
  const double mu = 4.0 * n * n;
  const double b8 = 8.0 * beta;
  return beta - (mu - 1.0) / b8 - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8 * b8 * b8);
}

double bessel_zero(int n, int p) {
  if (n < 0 || n > kMaxBesselOrder || p < 1 || p > kMaxBesselZeroIndex) {
    throw DomainError("bessel_zero: (n, p) = (" + std::to_string(n) + ", " + std::to_string(p) +
                      ") outside n in [0, 50], p in [1, 100]");
  }
  // No zero of J_n lies below n, and consecutive zeros are more than 3
  // apart, so a unit-step scan sees every sign change exactly once.
  const auto f = [n](double x) { return bessel_j(n, x); };
  double lo = n == 0 ? 0.5 : static_cast<double>(n);
  double flo = f(lo);
  int found = 0;
  while (lo < kMaxBesselArgument) {
    const double hi = lo + 1.0;
    const double fhi = f(hi);
    if (fhi == 0.0) {
      if (++found == p) return hi;
    } else if (flo * fhi < 0.0) {
      if (++found == p) return find_root(f, {lo, hi}, 1e-15 * hi);
    }
    lo = hi;
    flo = fhi;
  }
  throw DomainError("bessel_zero: zero lies beyond the supported argument range");
}

double find_root(const RealFunction& f, Bracket bracket, double tol, int max_iter) {
  if (!(bracket.lo < bracket.hi)) {
    throw BracketError("find_root: bracket requires lo < hi");
  }
  const double flo = f(bracket.lo);
  const double fhi = f(bracket.hi);
  if (flo == 0.0) return bracket.lo;
  if (fhi == 0.0) return bracket.hi;
  if (!(flo * fhi < 0.0)) {
    throw BracketError("find_root: no sign change on [" + std::to_string(bracket.lo) + ", " +
                       std::to_string(bracket.hi) + "]");
  }
  std::uintmax_t iters = static_cast<std::uintmax_t>(max_iter);
  const WidthTolerance done{tol};
  const auto [a, b] = boost::math::tools::toms748_solve(f, bracket.lo, bracket.hi, flo, fhi, done, iters);
  if (!done(a, b)) {
    throw ConvergenceError("find_root: bracket did not shrink below tolerance in " + std::to_string(max_iter) +
                           " iterations");
  }
  return 0.5 * (a + b);
}

std::vector<OscillatorState> integrate_oscillator(const RealFunction& omega_sq, complex q0, complex qdot0,
                                                  std::pair<double, double> t_span, const IntegratorConfig& cfg,
                                                  Stepper stepper) {
  cfg.validate();
  auto [t, t_end] = t_span;
  if (!(t_end >= t)) throw PreconditionError("integrate_oscillator: t_span must be ordered");
  std::vector<OscillatorState> out;
  OdeState x = pack(q0, qdot0);
  out.push_back(unpack(t, x));
  if (t_end == t) return out;
  const OscillatorSystem sys{omega_sq, nullptr};
  double dt = initial_step(omega_sq, t, t_end - t, cfg);
  std::size_t attempts = 0;
  run_stepper(stepper, sys, x, t, t_end, dt, cfg, attempts,
              [&out](double tt, const OdeState& xx) { out.push_back(unpack(tt, xx)); });
  return out;
}

std::vector<OscillatorState> integrate_oscillator_sampled(const RealFunction& omega_sq, const RealFunction& damping,
                                                          complex q0, complex qdot0, double t0,
                                                          std::span<const double> sample_times,
                                                          const IntegratorConfig& cfg, Stepper stepper) {
  cfg.validate();
  std::vector<OscillatorState> out;
  out.reserve(sample_times.size());
  if (sample_times.empty()) return out;
  if (!std::is_sorted(sample_times.begin(), sample_times.end()) || sample_times.front() < t0) {
    throw PreconditionError("integrate_oscillator_sampled: sample times must be ascending and >= t0");
  }
  const OscillatorSystem sys{omega_sq, damping ? &damping : nullptr};
  OdeState x = pack(q0, qdot0);
  double t = t0;
  double dt = initial_step(omega_sq, t0, sample_times.back() - t0 + 1.0, cfg);
  std::size_t attempts = 0;
  for (const double target : sample_times) {
    if (target > t) run_stepper(stepper, sys, x, t, target, dt, cfg, attempts, [](double, const OdeState&) {});
    out.push_back(unpack(target, x));
  }
  return out;
}

double quadrature(const RealFunction& f, double a, double b, double tol, std::span<const double> breakpoints) {
  if (!(tol > 0.0)) throw PreconditionError("quadrature: tol must be positive");
  if (a == b) return 0.0;
  const double sign = a < b ? 1.0 : -1.0;
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  std::vector<double> nodes{lo};
  for (const double p : breakpoints) {
    if (p > lo && p < hi) nodes.push_back(p);
  }
  nodes.push_back(hi);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  // Bisect panels until each meets its share of an absolute budget set by the
  // L1 norm of the first pass; Boost's own recursion is relative to |integral|.
  using GaussKronrod = boost::math::quadrature::gauss_kronrod<double, 31>;
  struct Panel {
    double lo, hi, value, err, l1;
  };
  const auto eval = [&](double x0, double x1) {
    Panel p{x0, x1, 0.0, 0.0, 0.0};
    p.value = GaussKronrod::integrate(f, x0, x1, 0, 0.0, &p.err, &p.l1);
    return p;
  };
  std::vector<Panel> work;
  double l1 = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    work.push_back(eval(nodes[i], nodes[i + 1]));
    l1 += work.back().l1;
  }
  const double budget = tol * std::max(1.0, l1);
  const double span = hi - lo;
  constexpr int kMaxPanels = 1 << 16;
  double total = 0.0;
  double error = 0.0;
  int panels = static_cast<int>(work.size());
  while (!work.empty()) {
    const Panel p = work.back();
    work.pop_back();
    const double share = budget * (p.hi - p.lo) / span;
    if (p.err <= share || panels >= kMaxPanels) {
      total += p.value;
      error += p.err;
      continue;
    }
    const double mid = 0.5 * (p.lo + p.hi);
    work.push_back(eval(p.lo, mid));
    work.push_back(eval(mid, p.hi));
    ++panels;
  }
  if (!(error <= budget)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "quadrature: error estimate %.3e exceeds tolerance %.3e", error, budget);
    throw ConvergenceError(buf);
  }
  return sign * total;
}

}  // namespace vspp::numerics
