#include "vspp/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vspp/errors.hpp"

namespace vspp::dispersion {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEps = std::numeric_limits<double>::epsilon();

const complex& polar_eps(const MediumState& m, Polarization p) {
  return p == Polarization::TMelectric ? m.eps : m.mu;
}

void check_positive_c(double c) {
  if (!(c > 0.0)) throw PreconditionError("speed of light must be positive");
}

// Real decay constant squared of a lossless layer, (k^2 - eps mu omega^2/c^2).
double kappa_sq(const MediumState& m, double omega, double k, double c) {
  const double w = omega / c;
  return k * k - (m.eps * m.mu).real() * w * w;
}

// tanh(x)/x, continuous at 0.
double tanhc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 15.0;
  }
  return std::tanh(x) / x;
}

// sin(x)/x, continuous at 0.
double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

bool mirror_symmetric(const Stack3& s) { return s[0] == s[2]; }

}  // namespace

complex decaying_sqrt(complex z) {
  complex r = std::sqrt(z);
  if (r.real() < 0.0) r = -r;
  return r;
}

complex electric_spp_kperp(const MediumState& m1, const MediumState& m2, double omega, double c) {
  check_positive_c(c);
  const complex e1 = m1.eps;
  const complex e2 = m2.eps;
  const complex sum = e1 + e2;
  if (std::abs(sum) <= 4.0 * kEps * (std::abs(e1) + std::abs(e2))) {
    throw ResonancePoleError("electric_spp_kperp: eps1 + eps2 = 0 (surface-mode resonance)");
  }
  const complex diff = e1 - e2;
  if (std::abs(diff) <= 4.0 * kEps * (std::abs(e1) + std::abs(e2))) {
    throw DegenerateFormulaError("electric_spp_kperp: eps1 = eps2 leaves the relation undefined");
  }
  const complex x = e1 * e2 / sum * ((e1 * m2.mu - e2 * m1.mu) / diff);
  return (omega / c) * decaying_sqrt(x);
}

complex magnetic_spp_kperp(const MediumState& m1, const MediumState& m2, double omega, double c) {
  return electric_spp_kperp(media::swap_eps_mu(m1), media::swap_eps_mu(m2), omega, c);
}

std::pair<complex, complex> decay_constants(double omega, complex k_perp, const MediumState& m1,
                                            const MediumState& m2, double c) {
  check_positive_c(c);
  const double w = omega / c;
  const complex k2 = k_perp * k_perp;
  return {decaying_sqrt(k2 - m1.eps * m1.mu * (w * w)), decaying_sqrt(k2 - m2.eps * m2.mu * (w * w))};
}

complex interface_residual(const SurfaceMode& mode, const MediumState& m1, const MediumState& m2) {
  return mode.kappa1 / polar_eps(m1, mode.polarization) + mode.kappa2 / polar_eps(m2, mode.polarization);
}

double decay_residual(const SurfaceMode& mode, const MediumState& m1, const MediumState& m2, double c) {
  const double w = mode.omega / c;
  const complex k2 = mode.k_perp * mode.k_perp;
  double worst = 0.0;
  for (const auto& [m, kap] : {std::pair{m1, mode.kappa1}, std::pair{m2, mode.kappa2}}) {
    const complex light = m.eps * m.mu * (w * w);
    const complex r = k2 - light - kap * kap;
    const double scale = std::max({std::abs(k2), std::abs(light), std::abs(kap * kap)});
    worst = std::max(worst, scale > 0.0 ? std::abs(r) / scale : std::abs(r));
  }
  return worst;
}

SurfaceMode single_interface_mode(const MediumState& m1, const MediumState& m2, double omega, double c,
                                  Polarization polarization) {
  SurfaceMode mode;
  mode.omega = omega;
  mode.polarization = polarization;
  mode.k_perp = polarization == Polarization::TMelectric ? electric_spp_kperp(m1, m2, omega, c)
                                                         : magnetic_spp_kperp(m1, m2, omega, c);
  std::tie(mode.kappa1, mode.kappa2) = decay_constants(omega, mode.k_perp, m1, m2, c);
  mode.amplitude_ratio = 1.0;
  return mode;
}

double single_interface_omega(const MediumState& m1, const MediumState& m2, double k_perp, double c,
                              Polarization polarization) {
  // k is linear in omega for non-dispersive media.
  const complex k_unit = polarization == Polarization::TMelectric ? electric_spp_kperp(m1, m2, 1.0, c)
                                                                  : magnetic_spp_kperp(m1, m2, 1.0, c);
  if (!(k_unit.real() > 0.0)) throw PreconditionError("single_interface_omega: no propagating surface mode");
  return k_perp / k_unit.real();
}

PropagationQuantities propagation_quantities(complex k_perp) {
  if (!(k_perp.real() > 0.0)) throw PreconditionError("propagation_quantities: Re(k_perp) must be > 0");
  PropagationQuantities q;
  q.lambda_sp = 2.0 * kPi / k_perp.real();
  q.prop_length = k_perp.imag() == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / (2.0 * k_perp.imag());
  return q;
}

LayerResidual multilayer_dispersion_residual(const Stack3& stack, double d, double omega, double k_perp, double c) {
  check_positive_c(c);
  std::array<double, 3> p{};
  for (int i = 0; i < 3; ++i) {
    const double ks = kappa_sq(stack[i], omega, k_perp, c);
    p[i] = std::sqrt(std::max(ks, 0.0)) / stack[i].eps.real();
  }
  const double den1 = p[1] - p[0];
  const double den3 = p[1] - p[2];
  const double scale = std::abs(p[0]) + std::abs(p[1]) + std::abs(p[2]);
  LayerResidual out;
  if (std::abs(den1) <= 1e-14 * scale || std::abs(den3) <= 1e-14 * scale) {
    out.pole = true;
    out.value = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const double kappa2 = p[1] * stack[1].eps.real();
  out.value = std::exp(-2.0 * kappa2 * d) - (p[1] + p[0]) / den1 * ((p[1] + p[2]) / den3);
  return out;
}

LayerResidual multilayer_dispersion_residual(const media::RegionStack& stack, double omega, double k_perp, double c,
                                             double t) {
  stack.validate();
  if (stack.size() != 3) throw PreconditionError("multilayer residual needs three regions");
  const auto s = stack.state_at(t);
  return multilayer_dispersion_residual(Stack3{s[0], s[1], s[2]}, stack.middle_thickness(), omega, k_perp, c);
}

std::optional<double> multilayer_characteristic(const Stack3& stack, double d, double omega, double k_perp,
                                                double c) {
  check_positive_c(c);
  const double k1s = kappa_sq(stack[0], omega, k_perp, c);
  const double k2s = kappa_sq(stack[1], omega, k_perp, c);
  const double k3s = kappa_sq(stack[2], omega, k_perp, c);
  if (k1s <= 0.0 || k3s <= 0.0) return std::nullopt;
  const double e2 = stack[1].eps.real();
  const double p1 = std::sqrt(k1s) / stack[0].eps.real();
  const double p3 = std::sqrt(k3s) / stack[2].eps.real();
  double s = 0.0;
  double ch = 1.0;
  if (k2s >= 0.0) {
    s = d * tanhc(std::sqrt(k2s) * d);
  } else {
    const double b = std::sqrt(-k2s);
    s = d * sinc(b * d);
    ch = std::cos(b * d);
  }
  return (k2s / (e2 * e2) + p1 * p3) * s + (p1 + p3) * ch / e2;
}

std::optional<double> symmetric_branch_function(const Stack3& stack, double d, double omega, double k_perp, double c,
                                                Parity parity) {
  check_positive_c(c);
  if (!mirror_symmetric(stack)) throw PreconditionError("symmetric_branch_function: regions 1 and 3 differ");
  const double k1s = kappa_sq(stack[0], omega, k_perp, c);
  if (k1s <= 0.0) return std::nullopt;
  const double k2s = kappa_sq(stack[1], omega, k_perp, c);
  const double e2 = stack[1].eps.real();
  const double p1 = std::sqrt(k1s) / stack[0].eps.real();
  const double h = 0.5 * d;
  double s = 0.0;   // tanh(x)/x or sin(y)/y at the half thickness
  double ch = 1.0;  // 1 or cos(y)
  if (k2s >= 0.0) {
    s = tanhc(std::sqrt(k2s) * h);
  } else {
    const double y = std::sqrt(-k2s) * h;
    s = sinc(y);
    ch = std::cos(y);
  }
  if (parity == Parity::Even) return k2s / e2 * h * s + p1 * ch;
  if (parity == Parity::Odd) return ch / e2 + p1 * h * s;
  throw PreconditionError("symmetric_branch_function: parity must be Even or Odd");
}

double multilayer_light_line(const Stack3& stack, double k_perp, double c) {
  double out = std::numeric_limits<double>::infinity();
  for (int i : {0, 2}) {
    const double n2 = (stack[i].eps * stack[i].mu).real();
    if (n2 > 0.0) out = std::min(out, c * k_perp / std::sqrt(n2));
  }
  return out;
}

std::vector<numerics::Bracket> scan_multilayer_brackets(const Stack3& stack, double d, double k_perp, double c,
                                                        double omega_max, int samples) {
  std::vector<numerics::Bracket> out;
  if (!(omega_max > 0.0) || !std::isfinite(omega_max) || samples < 2) return out;
  const double h = omega_max / samples;
  double prev_w = 0.0;
  std::optional<double> prev;
  for (int i = 1; i < samples; ++i) {
    const double w = i * h;
    const auto f = multilayer_characteristic(stack, d, w, k_perp, c);
    if (f && prev && (*prev) * (*f) < 0.0) out.push_back({prev_w, w});
    prev = f;
    prev_w = w;
  }
  return out;
}

MultilayerModes solve_multilayer(const Stack3& stack, double d, double k_perp, double c,
                                 std::span<const numerics::Bracket> brackets) {
  if (!(d > 0.0)) throw PreconditionError("solve_multilayer: thickness must be > 0");
  MultilayerModes out;
  const auto make_mode = [&](double w) {
    LayerMode mode;
    mode.omega = w;
    mode.k_perp = k_perp;
    for (int i = 0; i < 3; ++i) {
      const double ks = kappa_sq(stack[i], w, k_perp, c);
      mode.kappa[i] = ks >= 0.0 ? std::sqrt(ks) : -std::sqrt(-ks);
    }
    return mode;
  };
  const auto solve_in = [&](const numerics::RealFunction& f, const numerics::Bracket& b) -> std::optional<double> {
    const double flo = f(b.lo);
    const double fhi = f(b.hi);
    if (!(flo * fhi <= 0.0)) return std::nullopt;
    return numerics::find_root(f, b, 1e-15 * b.hi);
  };
  const auto as_real = [](std::optional<double> v) { return v ? *v : std::numeric_limits<double>::quiet_NaN(); };

  if (mirror_symmetric(stack)) {
    for (const Parity parity : {Parity::Even, Parity::Odd}) {
      const auto f = [&, parity](double w) {
        return as_real(symmetric_branch_function(stack, d, w, k_perp, c, parity));
      };
      for (const auto& b : brackets) {
        const auto w = solve_in(f, b);
        if (!w) continue;
        LayerMode mode = make_mode(*w);
        mode.parity = parity;
        auto& slot = parity == Parity::Even ? out.even : out.odd;
        if (!slot) {
          slot = mode;
        } else {
          out.unclassified.push_back(mode);
        }
      }
    }
    return out;
  }
  const auto f = [&](double w) { return as_real(multilayer_characteristic(stack, d, w, k_perp, c)); };
  for (const auto& b : brackets) {
    if (const auto w = solve_in(f, b)) out.unclassified.push_back(make_mode(*w));
  }
  return out;
}

MultilayerModes solve_multilayer(const Stack3& stack, double d, double k_perp, double c) {
  double top = multilayer_light_line(stack, k_perp, c);
  if (!std::isfinite(top)) {
    const double n2 = std::max((stack[1].eps * stack[1].mu).real(), 1.0);
    top = 4.0 * c * k_perp / std::sqrt(n2);
  }
  const double w_max = top * (1.0 - 1e-12);
  if (!mirror_symmetric(stack)) {
    return solve_multilayer(stack, d, k_perp, c, scan_multilayer_brackets(stack, d, k_perp, c, w_max));
  }
  // Even and odd roots can be exponentially close; scan each factor alone.
  std::vector<numerics::Bracket> brackets;
  constexpr int kSamples = 4000;
  for (const Parity parity : {Parity::Even, Parity::Odd}) {
    std::optional<double> prev;
    for (int i = 1; i < kSamples; ++i) {
      const double w = w_max * i / kSamples;
      const auto v = symmetric_branch_function(stack, d, w, k_perp, c, parity);
      if (v && prev && (*prev) * (*v) < 0.0) brackets.push_back({w_max * (i - 1) / kSamples, w});
      prev = v;
    }
  }
  return solve_multilayer(stack, d, k_perp, c, brackets);
}

}  // namespace vspp::dispersion
