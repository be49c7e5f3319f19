#include "vspp/cavity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vspp/dispersion.hpp"
#include "vspp/errors.hpp"
#include "vspp/numerics.hpp"

namespace vspp::cavity {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Functions of a wavenumber known through its square; a negative square means
// k = i gamma and the trigonometric forms continue to hyperbolic ones.
double cos_k(double ks, double x) {
  return ks >= 0.0 ? std::cos(std::sqrt(ks) * x) : std::cosh(std::sqrt(-ks) * x);
}

// k sin(k x)
double ksin_k(double ks, double x) {
  if (ks >= 0.0) {
    const double k = std::sqrt(ks);
    return k * std::sin(k * x);
  }
  const double g = std::sqrt(-ks);
  return -g * std::sinh(g * x);
}

// int_0^x cos^2(k u) du
double cos_sq_integral(double ks, double x) {
  if (ks == 0.0) return x;
  if (ks > 0.0) {
    const double k = std::sqrt(ks);
    return 0.5 * x + std::sin(2.0 * k * x) / (4.0 * k);
  }
  const double g = std::sqrt(-ks);
  return 0.5 * x + std::sinh(2.0 * g * x) / (4.0 * g);
}

double signed_square(complex k) { return k.real() * k.real() - k.imag() * k.imag(); }

complex from_square(double ks) { return ks >= 0.0 ? complex(std::sqrt(ks), 0.0) : complex(0.0, std::sqrt(-ks)); }

double transverse_q(const Geometry& g, int n, int p) { return numerics::bessel_zero(n, p) / g.R; }

void check_indices(int n, int p) {
  if (n < 0 || p < 1) throw PreconditionError("cavity: need n >= 0 and p >= 1");
}

// Determinant of the interface conditions as a function of s = omega^2/c^2:
// k1 sin(k1 a) cos(k2 b)/eps1 + k2 sin(k2 b) cos(k1 a)/eps2, b = L - a.
struct Determinant {
  double a, b, eps1, eps2, q2;

  double ks1(double s) const { return eps1 * s - q2; }
  double ks2(double s) const { return eps2 * s - q2; }

  double operator()(double s) const {
    const double k1s = ks1(s);
    const double k2s = ks2(s);
    return ksin_k(k1s, a) * cos_k(k2s, b) / eps1 + ksin_k(k2s, b) * cos_k(k1s, a) / eps2;
  }
};

CavityMode build_mode(const Geometry& g, const Determinant& det, double s, int n, int p, int m, double x_np, double c) {
  CavityMode mode;
  mode.n = n;
  mode.p = p;
  mode.m = m;
  mode.x_np = x_np;
  mode.omega = c * std::sqrt(s);
  const double k1s = det.ks1(s);
  const double k2s = det.ks2(s);
  mode.k1 = from_square(k1s);
  mode.k2 = from_square(k2s);

  const double b = g.L - g.a;
  const double c1 = cos_k(k1s, g.a);
  const double c2 = cos_k(k2s, b);
  // Two null vectors of the 2x2 interface system; use the better conditioned one.
  double A1 = 0.0;
  double A2 = 0.0;
  if (std::max(std::abs(c1), std::abs(c2)) >= 0.5) {
    A1 = c2;
    A2 = c1;
  } else {
    A1 = ksin_k(k2s, b) / det.eps2;
    A2 = -ksin_k(k1s, g.a) / det.eps1;
  }
  if (A1 < 0.0) {
    A1 = -A1;
    A2 = -A2;
  }
  const double norm = det.eps1 * A1 * A1 * cos_sq_integral(k1s, g.a) + det.eps2 * A2 * A2 * cos_sq_integral(k2s, b);
  const double scale = 1.0 / std::sqrt(norm);
  mode.norm1 = A1 * scale;
  mode.norm2 = A2 * scale;
  return mode;
}

// Modes at a shifted time matched to the reference set by nearest omega.
std::vector<CavityMode> track(const std::vector<CavityMode>& ref, const std::vector<CavityMode>& candidates) {
  std::vector<CavityMode> out;
  std::vector<bool> used(candidates.size(), false);
  for (const auto& r : ref) {
    std::size_t best = candidates.size();
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      const double gap = std::abs(candidates[j].omega - r.omega);
      if (gap < best_gap) {
        best_gap = gap;
        best = j;
      }
    }
    if (best == candidates.size() || best_gap > 0.1 * r.omega) {
      throw TrackingError("coupling_matrix: mode m=" + std::to_string(r.m) + " jumps by more than 10%");
    }
    if (used[best]) throw TrackingError("coupling_matrix: two modes track onto the same branch");
    used[best] = true;
    out.push_back(candidates[best]);
  }
  return out;
}

double max_abs_diff(const std::vector<std::vector<double>>& x, const std::vector<std::vector<double>>& y) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x[i].size(); ++j) worst = std::max(worst, std::abs(x[i][j] - y[i][j]));
  }
  return worst;
}

// Combines central differences at delta and delta/2 (Richardson).
CouplingResult combine(const std::vector<std::vector<double>>& coarse, const std::vector<std::vector<double>>& fine) {
  CouplingResult out;
  out.matrix = fine;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    for (std::size_t j = 0; j < fine.size(); ++j) {
      out.matrix[i][j] = (4.0 * fine[i][j] - coarse[i][j]) / 3.0;
      if (i != j) out.max_offdiag = std::max(out.max_offdiag, std::abs(out.matrix[i][j]));
    }
  }
  out.richardson_change = max_abs_diff(coarse, fine);
  return out;
}

}  // namespace

void Geometry::validate() const {
  if (!(R > 0.0)) throw PreconditionError("geometry: R must be > 0");
  if (!(a > 0.0 && a < L)) throw PreconditionError("geometry: need 0 < a < L");
}

TranscendentalResidual transcendental_residual(double k1, const Geometry& g, double eps1, double eps2, int n, int p,
                                               double c) {
  g.validate();
  check_indices(n, p);
  if (!(c > 0.0)) throw PreconditionError("transcendental_residual: c must be > 0");
  if (!(k1 > 0.0)) throw PreconditionError("transcendental_residual: k1 must be > 0");
  if (eps1 == 0.0 || eps2 == 0.0) throw PreconditionError("transcendental_residual: permittivities must be nonzero");
  const double q = transverse_q(g, n, p);
  const double s = (k1 * k1 + q * q) / eps1;
  const double k2s = eps2 * s - q * q;
  const double b = g.L - g.a;
  const double c1 = std::cos(k1 * g.a);
  const double c2 = cos_k(k2s, b);
  constexpr double kPoleTol = 1e-10;
  TranscendentalResidual out;
  if (std::abs(c1) < kPoleTol || std::abs(c2) < kPoleTol) {
    out.pole = true;
    out.value = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  // k2 tan(k2 (a - L)) = -k2 tan(k2 b)
  out.value = k1 * std::tan(k1 * g.a) / eps1 + ksin_k(k2s, b) / c2 / eps2;
  return out;
}

ModeResiduals mode_residuals(const CavityMode& mode, const Geometry& g, double eps1, double eps2) {
  const double k1s = signed_square(mode.k1);
  const double k2s = signed_square(mode.k2);
  const double b = g.L - g.a;
  const double q2 = std::pow(mode.x_np / g.R, 2);
  const double t1 = ksin_k(k1s, g.a) * cos_k(k2s, b) / eps1;
  const double t2 = ksin_k(k2s, b) * cos_k(k1s, g.a) / eps2;
  const double t3 = cos_k(k1s, g.a) * cos_k(k2s, b) / (g.L * std::min(std::abs(eps1), std::abs(eps2)));
  ModeResiduals r;
  r.transcendental = std::abs(t1 + t2) / (std::abs(t1) + std::abs(t2) + std::abs(t3));
  const double s1 = (k1s + q2) / eps1;
  const double s2 = (k2s + q2) / eps2;
  r.matching = std::abs(s1 - s2) / std::max(std::abs(s1), std::abs(s2));
  return r;
}

CavitySpectrum solve_cavity_modes(const Geometry& g, double eps1, double eps2, int n, int p, int count, double c) {
  g.validate();
  check_indices(n, p);
  if (count < 1) throw PreconditionError("solve_cavity_modes: count must be >= 1");
  if (!(c > 0.0)) throw PreconditionError("solve_cavity_modes: c must be > 0");
  if (!(eps1 > 0.0 && eps2 > 0.0)) throw PreconditionError("solve_cavity_modes: permittivities must be > 0");

  const double x_np = numerics::bessel_zero(n, p);
  const double q = x_np / g.R;
  const Determinant det{g.a, g.L - g.a, eps1, eps2, q * q};
  const double eps_min = std::min(eps1, eps2);
  const double eps_max = std::max(eps1, eps2);

  // Every eigenvalue lies at or below its counterpart for a uniform eps_min
  // filling, and the determinant is negative while both layers are evanescent.
  const double u_lo = std::sqrt(q * q / eps_max) * (1.0 - 1e-6);
  const double u_hi = 1.05 * std::sqrt((q * q + std::pow((count + 1) * kPi / g.L, 2)) / eps_min);
  const int samples = static_cast<int>(2000.0 * (count + 2) * std::sqrt(eps_max / eps_min));

  std::vector<double> roots;
  double u_prev = u_lo;
  double f_prev = det(u_lo * u_lo);
  for (int i = 1; i <= samples; ++i) {
    const double u = u_lo + (u_hi - u_lo) * i / samples;
    const double f = det(u * u);
    if (f == 0.0) {
      roots.push_back(u * u);
    } else if (f_prev != 0.0 && (f_prev < 0.0) != (f < 0.0)) {
      const double s_lo = u_prev * u_prev;
      const double s_hi = u * u;
      roots.push_back(numerics::find_root(det, {s_lo, s_hi}, 4e-16 * s_hi));
    }
    u_prev = u;
    f_prev = f;
  }

  CavitySpectrum out;
  // roots[0] is the branch through k = 0 of the uniform cavity.
  for (std::size_t i = 1; i < roots.size() && static_cast<int>(out.modes.size()) < count; ++i) {
    out.modes.push_back(build_mode(g, det, roots[i], n, p, static_cast<int>(i), x_np, c));
  }
  if (static_cast<int>(out.modes.size()) < count) {
    out.warning = "solve_cavity_modes: found " + std::to_string(out.modes.size()) + " of " + std::to_string(count) +
                  " modes in the scan window";
  }
  return out;
}

double mode_profile(const CavityMode& mode, const Geometry& g, double z) {
  if (z <= g.a) return mode.norm1 * cos_k(signed_square(mode.k1), z);
  return mode.norm2 * cos_k(signed_square(mode.k2), z - g.L);
}

double mode_profile_dz(const CavityMode& mode, const Geometry& g, double z) {
  if (z <= g.a) return -mode.norm1 * ksin_k(signed_square(mode.k1), z);
  return -mode.norm2 * ksin_k(signed_square(mode.k2), z - g.L);
}

double thin_slab_shift(const Geometry& g, double eps1, double eps2, int n, int p, double c) {
  g.validate();
  check_indices(n, p);
  const double x = numerics::bessel_zero(n, p);
  return 2.0 * x * x * c * c / (g.R * g.R * eps2) * (g.a / g.L) * (eps2 / eps1 - 1.0);
}

CouplingResult coupling_matrix(const Geometry& g, const PermittivityPair& eps_of_t, int n, int p, int count, double t,
                               double delta, double c) {
  if (!(delta > 0.0)) throw PreconditionError("coupling_matrix: delta must be > 0");
  const auto spectrum_at = [&](double time, int extra) {
    const auto [e1, e2] = eps_of_t(time);
    auto s = solve_cavity_modes(g, e1, e2, n, p, count + extra, c);
    if (static_cast<int>(s.modes.size()) < count) throw ConvergenceError(*s.warning);
    return s.modes;
  };
  auto ref = spectrum_at(t, 0);
  ref.resize(count);
  const auto [e1, e2] = eps_of_t(t);
  const std::array<double, 1> interface{g.a};

  const auto matrix_for = [&](double h) {
    const auto plus = track(ref, spectrum_at(t + h, 2));
    const auto minus = track(ref, spectrum_at(t - h, 2));
    std::vector<std::vector<double>> mat(count, std::vector<double>(count, 0.0));
    for (int i = 0; i < count; ++i) {
      for (int j = 0; j < count; ++j) {
        const auto overlap = [&](const CavityMode& other) {
          const auto f = [&](double z) {
            return (z <= g.a ? e1 : e2) * mode_profile(ref[i], g, z) * mode_profile(other, g, z);
          };
          return numerics::quadrature(f, 0.0, g.L, 1e-14, interface);
        };
        mat[i][j] = (overlap(plus[j]) - overlap(minus[j])) / (2.0 * h);
      }
    }
    return mat;
  };
  return combine(matrix_for(delta), matrix_for(0.5 * delta));
}

CouplingResult spp_coupling_matrix(const std::function<double(double)>& eps1_of_t, double eps2,
                                   const std::vector<double>& k_list, double box_length, double t, double delta,
                                   double c) {
  if (!(delta > 0.0)) throw PreconditionError("spp_coupling_matrix: delta must be > 0");
  if (!(box_length > 0.0)) throw PreconditionError("spp_coupling_matrix: box_length must be > 0");
  for (double k : k_list) {
    const double cycles = k * box_length / (2.0 * kPi);
    if (!(k > 0.0) || std::abs(cycles - std::round(cycles)) > 1e-9 * std::max(1.0, cycles)) {
      throw PreconditionError("spp_coupling_matrix: k must be a positive multiple of 2 pi / box_length");
    }
  }
  const media::MediumState upper{{eps2, 0.0}, {1.0, 0.0}};
  const auto decay = [&](double k, double time) {
    const media::MediumState lower{{eps1_of_t(time), 0.0}, {1.0, 0.0}};
    const double w = dispersion::single_interface_omega(lower, upper, k, c, media::Polarization::TMelectric);
    const auto [k1, k2] = dispersion::decay_constants(w, k, lower, upper, c);
    return std::pair{k1.real(), k2.real()};
  };
  const auto profile = [](std::pair<double, double> kap, double z) {
    return z < 0.0 ? std::exp(kap.first * z) : std::exp(-kap.second * z);
  };

  const std::size_t count = k_list.size();
  std::vector<std::vector<double>> overlap_x(count, std::vector<double>(count));
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < count; ++j) {
      const auto f = [&](double x) { return std::cos(k_list[i] * x) * std::cos(k_list[j] * x); };
      overlap_x[i][j] = numerics::quadrature(f, 0.0, box_length, 1e-13);
    }
  }

  const double eps1 = eps1_of_t(t);
  const auto matrix_for = [&](double h) {
    std::vector<std::vector<double>> mat(count, std::vector<double>(count, 0.0));
    for (std::size_t i = 0; i < count; ++i) {
      const auto ki = decay(k_list[i], t);
      for (std::size_t j = 0; j < count; ++j) {
        const auto kp = decay(k_list[j], t + h);
        const auto km = decay(k_list[j], t - h);
        const auto overlap = [&](std::pair<double, double> other) {
          const auto f = [&](double z) { return (z < 0.0 ? eps1 : eps2) * profile(ki, z) * profile(other, z); };
          const double z1 = 60.0 / std::min(ki.first, other.first);
          const double z2 = 60.0 / std::min(ki.second, other.second);
          return numerics::quadrature(f, -z1, 0.0, 1e-14) + numerics::quadrature(f, 0.0, z2, 1e-14);
        };
        const double zint = (overlap(kp) - overlap(km)) / (2.0 * h);
        mat[i][j] = overlap_x[i][j] * zint;
      }
    }
    return mat;
  };
  return combine(matrix_for(delta), matrix_for(0.5 * delta));
}

FieldSample field_at(const CavityMode& mode, const Geometry& g, complex Q, complex Qdot,
                     const std::array<double, 3>& position, double eps1, double eps2, double mu, Side side) {
  const auto [rho, theta, z] = position;
  const double tol = 1e-12;
  if (!(rho >= 0.0 && rho <= g.R * (1.0 + tol) && z >= -tol * g.L && z <= g.L * (1.0 + tol))) {
    throw DomainError("field_map: position outside the cavity");
  }
  const bool slab = side == Side::Slab || (side == Side::Auto && z <= g.a);
  const double eps = slab ? eps1 : eps2;
  const double phi = slab ? mode.norm1 * cos_k(signed_square(mode.k1), z)
                          : mode.norm2 * cos_k(signed_square(mode.k2), z - g.L);
  const double dphi = slab ? -mode.norm1 * ksin_k(signed_square(mode.k1), z)
                           : -mode.norm2 * ksin_k(signed_square(mode.k2), z - g.L);

  const int n = mode.n;
  const double x = mode.x_np;
  const double q = x / g.R;
  const double u = x * rho / g.R;
  const double norm = 1.0 / (std::sqrt(kPi) * g.R * numerics::bessel_j(n + 1, x));
  const complex phase = std::polar(1.0, n * theta);
  const complex r = numerics::bessel_j(n, u) * phase * norm;
  const complex dr_drho = q * numerics::bessel_j_prime(n, u) * phase * norm;
  // J_n(u)/u, finite at the axis
  double jn_over_u = 0.0;
  if (u > 1e-8) {
    jn_over_u = numerics::bessel_j(n, u) / u;
  } else if (n == 1) {
    jn_over_u = 0.5;
  }
  const complex dr_dtheta_over_rho = complex(0.0, n) * q * jn_over_u * phase * norm;

  FieldSample s;
  s.position = position;
  s.E = {Q * dphi * dr_drho / eps, Q * dphi * dr_dtheta_over_rho / eps, q * q * Q * phi * r / eps};
  s.B = {mu * Qdot * phi * dr_dtheta_over_rho, -mu * Qdot * phi * dr_drho, complex(0.0)};
  return s;
}

std::vector<FieldSample> field_map(const CavityMode& mode, const Geometry& g, complex Q, complex Qdot,
                                   const std::vector<std::array<double, 3>>& grid, double eps1, double eps2,
                                   double mu) {
  std::vector<FieldSample> out;
  out.reserve(grid.size());
  for (const auto& pos : grid) out.push_back(field_at(mode, g, Q, Qdot, pos, eps1, eps2, mu));
  return out;
}

}  // namespace vspp::cavity
