#include "vspp/dynamics.hpp"

#include <boost/math/interpolators/barycentric_rational.hpp>
#include <cmath>
#include <memory>

#include "vspp/errors.hpp"

namespace vspp::dynamics {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sinh_sq(double x) {
  const double s = std::sinh(x);
  return s * s;
}

// Least-squares slope and coefficient of determination.
struct LineFit {
  double slope = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  f.points = x.size();
  if (x.size() < 2) return f;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  f.slope = sxy / sxx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

double scaled_drift(const OscillatorState& s, double omega) {
  const double scale = omega * std::norm(s.q) + std::norm(s.qdot) / omega;
  return std::abs(wronskian(s) - 1.0) / std::max(1.0, scale);
}

}  // namespace

double wronskian(const OscillatorState& s) {
  return (complex(0.0, 1.0) * (std::conj(s.q) * s.qdot - s.q * std::conj(s.qdot))).real();
}

std::vector<OscillatorState> evolve_mode_sampled(const numerics::RealFunction& omega_sq_of_t, double omega_in,
                                                 std::span<const double> sample_times, const IntegratorConfig& cfg,
                                                 const EvolveOptions& options) {
  cfg.validate();
  if (!(omega_in > 0.0)) throw PreconditionError("evolve_mode: omega_in must be > 0");
  const double w2 = omega_sq_of_t(0.0);
  if (!(std::abs(w2 - omega_in * omega_in) <= 1e-12 * omega_in * omega_in)) {
    throw PreconditionError("evolve_mode: omega^2(0) differs from omega_in^2");
  }
  // Integrate in tau = omega_in t with q = sqrt(omega_in) Q.
  const double w_in2 = omega_in * omega_in;
  const auto scaled_sq = [&](double tau) { return omega_sq_of_t(tau / omega_in) / w_in2; };
  numerics::RealFunction scaled_damping;
  if (options.damping) scaled_damping = [&](double tau) { return options.damping(tau / omega_in) / omega_in; };
  IntegratorConfig scaled = cfg;
  scaled.max_step = cfg.max_step * omega_in;

  std::vector<double> taus;
  taus.reserve(sample_times.size());
  double prev = 0.0;
  for (double t : sample_times) {
    if (!(t >= prev)) throw PreconditionError("evolve_mode: sample times must be ascending and >= 0");
    taus.push_back(t * omega_in);
    prev = t;
  }
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const auto states = numerics::integrate_oscillator_sampled(scaled_sq, scaled_damping, complex(inv_sqrt2, 0.0),
                                                             complex(0.0, -inv_sqrt2), 0.0, taus, scaled,
                                                             options.stepper);
  std::vector<OscillatorState> out;
  out.reserve(states.size());
  const double root = std::sqrt(omega_in);
  for (std::size_t i = 0; i < states.size(); ++i) {
    out.push_back({sample_times[i], states[i].q / root, states[i].qdot * root});
  }
  return out;
}

OscillatorState evolve_mode(const numerics::RealFunction& omega_sq_of_t, double omega_in, double t1,
                            const IntegratorConfig& cfg, const EvolveOptions& options) {
  if (!(t1 >= 0.0)) throw PreconditionError("evolve_mode: t1 must be >= 0");
  const double times[] = {t1};
  return evolve_mode_sampled(omega_sq_of_t, omega_in, times, cfg, options).front();
}

BogolyubovPair bogolyubov_extract(const OscillatorState& state, double omega_out) {
  if (!(omega_out > 0.0)) throw PreconditionError("bogolyubov_extract: omega_out must be > 0");
  const double s = std::sqrt(0.5 * omega_out);
  const complex iv = complex(0.0, 1.0) * state.qdot / omega_out;
  BogolyubovPair b;
  b.alpha = s * (state.q + iv);
  b.beta = s * (state.q - iv);
  b.omega_out = omega_out;
  b.t1 = state.t;
  return b;
}

double spp_enhancement(double k_perp, double eps2, double kappa, double omega0, double t, double c) {
  if (!(k_perp > 0.0 && eps2 > 0.0 && omega0 > 0.0 && c > 0.0) || kappa < 0.0 || t < 0.0) {
    throw PreconditionError("spp_enhancement: arguments must be positive");
  }
  return sinh_sq(k_perp * k_perp * c * c / omega0 * (kappa / (2.0 * eps2)) * t);
}

double photon_enhancement(double x_np, double R, double a, double L, double eps2, double kappa, double omega0, double t,
                          double c) {
  if (!(a >= 0.0 && a < L)) throw PreconditionError("photon_enhancement: need 0 <= a < L");
  if (!(x_np > 0.0 && R > 0.0 && eps2 > 0.0 && omega0 > 0.0 && c > 0.0) || kappa < 0.0 || t < 0.0) {
    throw PreconditionError("photon_enhancement: arguments must be positive");
  }
  return sinh_sq(x_np * x_np * c * c / (R * R * omega0) * (kappa * a / (eps2 * L)) * t);
}

Dominance dominance_ratio(double k_perp, double x_np, double R, double a, double L) {
  if (!(k_perp > 0.0 && x_np > 0.0 && R > 0.0 && a > 0.0 && L > 0.0)) {
    throw PreconditionError("dominance_ratio: arguments must be positive");
  }
  const double photon_scale = x_np * x_np / (R * R) * (a / L);
  return {k_perp * k_perp / photon_scale, std::sqrt(photon_scale)};
}

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::SPPelectric:
      return "spp_electric";
    case Branch::SPPmagnetic:
      return "spp_magnetic";
    case Branch::Photon:
      return "photon";
    case Branch::Generic:
      break;
  }
  return "generic";
}

BranchConfig oscillator_branch(double omega0, double drive_frequency) {
  if (!(omega0 > 0.0)) throw PreconditionError("oscillator_branch: omega0 must be > 0");
  BranchConfig b;
  b.branch = Branch::Generic;
  b.omega0 = omega0;
  b.drive_frequency = drive_frequency > 0.0 ? drive_frequency : 2.0 * omega0;
  const double w02 = omega0 * omega0;
  const double nu = b.drive_frequency;
  b.omega_sq = [w02, nu](double kappa, double t) { return w02 * (1.0 + kappa * std::sin(nu * t)); };
  b.formula_rate = [omega0](double kappa) { return 0.5 * omega0 * kappa; };
  return b;
}

BranchConfig spp_branch(Branch polarization, double k_perp, double s2, double s_common, double chi,
                        double drive_frequency, double c) {
  if (polarization != Branch::SPPelectric && polarization != Branch::SPPmagnetic) {
    throw PreconditionError("spp_branch: polarization must be an SPP branch");
  }
  if (!(k_perp > 0.0 && s2 > 0.0 && s_common > 0.0 && c > 0.0)) {
    throw PreconditionError("spp_branch: k_perp, s2, s_common and c must be > 0");
  }
  if (!(chi > -1.0 && chi < 0.0)) throw PreconditionError("spp_branch: need -1 < chi < 0 for a bound surface mode");
  BranchConfig b;
  b.branch = polarization;
  const double base = k_perp * k_perp * c * c / (s2 * s_common);
  b.omega0 = std::sqrt(base * (1.0 + chi));
  b.drive_frequency = drive_frequency > 0.0 ? drive_frequency : 2.0 * b.omega0;
  const double nu = b.drive_frequency;
  b.omega_sq = [base, chi, nu](double kappa, double t) {
    const double r = chi - kappa * std::sin(nu * t);
    if (!(1.0 + r > 0.0)) throw SingularMediumError("spp_branch: modulation crosses the surface resonance");
    return base * (1.0 + r);
  };
  const double w0 = b.omega0;
  const double s_both = s2 * s_common;
  b.formula_rate = [k_perp, s_both, w0, c](double kappa) {
    return k_perp * k_perp * c * c / w0 * kappa / (2.0 * s_both);
  };
  return b;
}

BranchConfig photon_branch(const cavity::Geometry& g, double eps2, int n, int p, double chi, double kappa_max,
                           double drive_frequency, double c) {
  g.validate();
  if (!(eps2 > 0.0)) throw PreconditionError("photon_branch: eps2 must be > 0");
  if (!(kappa_max >= 0.0 && chi - kappa_max > 0.0)) {
    throw PreconditionError("photon_branch: need chi - kappa_max > 0 (positive slab permittivity)");
  }
  const auto omega_sq_at = [&](double r) {
    const auto s = cavity::solve_cavity_modes(g, eps2 / r, eps2, n, p, 1, c);
    if (s.modes.empty()) throw ConvergenceError("photon_branch: no cavity mode found");
    return s.modes.front().omega * s.modes.front().omega;
  };
  BranchConfig b;
  b.branch = Branch::Photon;
  const double w02 = omega_sq_at(chi);
  b.omega0 = std::sqrt(w02);
  b.drive_frequency = drive_frequency > 0.0 ? drive_frequency : 2.0 * b.omega0;
  const double nu = b.drive_frequency;

  // Chebyshev-node table of omega^2(r) - omega0^2, so the unmodulated value is exact.
  std::shared_ptr<const boost::math::barycentric_rational<double>> table;
  if (kappa_max > 0.0) {
    constexpr int kNodes = 24;
    std::vector<double> r(kNodes);
    std::vector<double> v(kNodes);
    for (int i = 0; i < kNodes; ++i) {
      // ascending nodes
      r[i] = chi - kappa_max * std::cos(kPi * (i + 0.5) / kNodes);
      v[i] = omega_sq_at(r[i]) - w02;
    }
    table = std::make_shared<const boost::math::barycentric_rational<double>>(r.data(), v.data(), kNodes, 5);
  }
  b.omega_sq = [table, w02, chi, kappa_max, nu](double kappa, double t) {
    if (kappa == 0.0) return w02;
    if (!table || kappa > kappa_max * (1.0 + 1e-12)) {
      throw PreconditionError("photon_branch: kappa exceeds the tabulated range");
    }
    const double r = chi - kappa * std::sin(nu * t);
    return w02 + (*table)(r);
  };
  const double q2 = std::pow(numerics::bessel_zero(n, p) / g.R, 2);
  const double w0 = b.omega0;
  const double frac = g.a / g.L;
  b.formula_rate = [q2, c, w0, frac, eps2](double kappa) { return q2 * c * c / w0 * kappa * frac / eps2; };
  return b;
}

std::vector<EnhancementReport> resonance_scan(const BranchConfig& branch, std::span<const double> kappas,
                                              double duration, const IntegratorConfig& cfg, int samples) {
  if (!(duration > 0.0)) throw PreconditionError("resonance_scan: duration must be > 0");
  if (samples < 4) throw PreconditionError("resonance_scan: need at least 4 samples");
  std::vector<double> times(samples);
  for (int i = 0; i < samples; ++i) times[i] = duration * (i + 1) / samples;

  std::vector<EnhancementReport> out;
  for (const double kappa : kappas) {
    if (!(kappa >= 0.0 && kappa <= 0.1)) throw PreconditionError("resonance_scan: kappa must lie in [0, 0.1]");
    const auto w2 = [&](double t) { return branch.omega_sq(kappa, t); };
    const auto states = evolve_mode_sampled(w2, branch.omega0, times, cfg);

    EnhancementReport rep;
    rep.branch = branch.branch;
    rep.kappa = kappa;
    rep.t1 = duration;
    std::vector<double> fit_t;
    std::vector<double> fit_ln;
    for (std::size_t i = 0; i < states.size(); ++i) {
      const double w_out = std::sqrt(w2(states[i].t));
      const double n = bogolyubov_extract(states[i], w_out).number();
      if (i + 1 == states.size()) {
        rep.N_numeric = n;
        rep.wronskian_drift = scaled_drift(states[i], w_out);
      }
      if (states[i].t >= 0.5 * duration && n > 1e-8) {
        fit_t.push_back(states[i].t);
        fit_ln.push_back(std::log(n));
      }
    }
    const double g = branch.formula_rate(kappa);
    rep.N_formula = sinh_sq(g * duration);
    rep.growth_rate_formula = 2.0 * g;
    const auto fit = fit_line(fit_t, fit_ln);
    rep.growth_rate_fit = fit.slope;
    if (fit.points < 10) {
      rep.warning = "fit window has too few points above the noise floor";
    } else if (fit.r2 < 0.99) {
      rep.warning = "late-time ln N is not linear (R^2 = " + std::to_string(fit.r2) + ")";
    }
    out.push_back(rep);
  }
  return out;
}

}  // namespace vspp::dynamics
