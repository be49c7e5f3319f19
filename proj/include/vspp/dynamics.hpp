#pragma once

// Particle creation in a single parametrically driven mode: integrate
// Q'' + omega^2(t) Q = 0 from the in-vacuum state, project on the out-modes
// and compare N = |beta|^2 with the closed-form sinh^2 enhancements.

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vspp/cavity.hpp"
#include "vspp/numerics.hpp"

namespace vspp::dynamics {

using complex = std::complex<double>;
using numerics::IntegratorConfig;
using numerics::OscillatorState;

/// W = i (Q* Qdot - Q Qdot*); equals 1 for the canonical in-vacuum state.
double wronskian(const OscillatorState& s);

struct EvolveOptions {
  numerics::Stepper stepper = numerics::Stepper::Fehlberg78;
  /// Optional coefficient g(t) of a first-derivative term Q'' + g Q' + omega^2 Q = 0.
  numerics::RealFunction damping;
};

/// State at t1 starting from Q(0) = 1/sqrt(2 omega_in), Qdot(0) = -i sqrt(omega_in/2).
/// Throws PreconditionError unless omega_sq_of_t(0) equals omega_in^2 to 1e-12.
OscillatorState evolve_mode(const numerics::RealFunction& omega_sq_of_t, double omega_in, double t1,
                            const IntegratorConfig& cfg, const EvolveOptions& options = {});

/// States at increasing sample times (all >= 0).
std::vector<OscillatorState> evolve_mode_sampled(const numerics::RealFunction& omega_sq_of_t, double omega_in,
                                                 std::span<const double> sample_times, const IntegratorConfig& cfg,
                                                 const EvolveOptions& options = {});

struct BogolyubovPair {
  complex alpha;
  complex beta;
  double omega_out = 0.0;
  double t1 = 0.0;

  double number() const { return std::norm(beta); }
};

/// alpha = sqrt(w/2) (Q + i Qdot/w), beta = sqrt(w/2) (Q - i Qdot/w) with the
/// out-mode phase referenced to state.t, so |alpha|^2 - |beta|^2 = W.
BogolyubovPair bogolyubov_extract(const OscillatorState& state, double omega_out);

/// sinh^2((k^2 c^2/omega0) (kappa/(2 eps2)) t). Pass mu2 for the magnetic branch.
double spp_enhancement(double k_perp, double eps2, double kappa, double omega0, double t, double c);

/// sinh^2((x_np^2 c^2/(R^2 omega0)) (kappa a/(eps2 L)) t).
double photon_enhancement(double x_np, double R, double a, double L, double eps2, double kappa, double omega0, double t,
                          double c);

struct Dominance {
  double ratio = 0.0;
  double threshold_k = 0.0;  ///< k_perp where the ratio equals 1
};

/// ratio = k^2 / ((x_np^2/R^2)(a/L)).
Dominance dominance_ratio(double k_perp, double x_np, double R, double a, double L);

enum class Branch { SPPelectric, SPPmagnetic, Photon, Generic };

const char* branch_name(Branch b);

/// A driven mode: omega^2 as a function of drive amplitude and time, and the
/// closed-form rate g with N_formula = sinh^2(g t).
struct BranchConfig {
  Branch branch = Branch::Generic;
  double omega0 = 0.0;
  double drive_frequency = 0.0;
  std::function<double(double kappa, double t)> omega_sq;
  std::function<double(double kappa)> formula_rate;
};

/// omega^2 = omega0^2 (1 + kappa sin(nu t)), formula rate omega0 kappa / 2.
BranchConfig oscillator_branch(double omega0, double drive_frequency);

/// Surface mode at fixed k_perp with r(t) = chi - kappa sin(nu t) the ratio of
/// the static to the modulated region's response (eps2/eps1 or mu2/mu1):
/// omega^2 = (k^2 c^2 / (s2 s_common)) (1 + r), with s2 = eps2 (mu2) and
/// s_common the shared mu (eps). Needs -1 < chi < 0. The formula rate is
/// (k^2 c^2/omega0) kappa/(2 s2 s_common), the closed form with the shared
/// response kept.
BranchConfig spp_branch(Branch polarization, double k_perp, double s2, double s_common, double chi,
                        double drive_frequency, double c);

/// Lowest (n, p, m = 1) cavity photon with slab permittivity eps1(t) = eps2/r(t),
/// r = chi - kappa sin(nu t). omega^2(r) is tabulated from the eigenvalue solver
/// on r in [chi - kappa_max, chi + kappa_max]. drive_frequency <= 0 selects 2 omega0.
BranchConfig photon_branch(const cavity::Geometry& g, double eps2, int n, int p, double chi, double kappa_max,
                           double drive_frequency, double c);

struct EnhancementReport {
  Branch branch = Branch::Generic;
  double kappa = 0.0;
  double t1 = 0.0;
  double N_numeric = 0.0;
  double N_formula = 0.0;
  double growth_rate_fit = 0.0;      ///< late-time slope of ln N
  double growth_rate_formula = 0.0;  ///< 2 g, the late-time slope of ln sinh^2(g t)
  double wronskian_drift = 0.0;      ///< |W - 1| scaled by omega |Q|^2 + |Qdot|^2 / omega
  std::optional<std::string> warning;
};

/// Evolve for each kappa over [0, duration], sample N(t) with the
/// instantaneous out-frequency, and fit ln N over the last half of the run
/// where N > 1e-8. A poor or empty fit sets the warning.
std::vector<EnhancementReport> resonance_scan(const BranchConfig& branch, std::span<const double> kappas,
                                              double duration, const IntegratorConfig& cfg, int samples = 400);

}  // namespace vspp::dynamics
