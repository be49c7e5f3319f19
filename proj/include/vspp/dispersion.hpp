#pragma once

// Surface-mode dispersion: closed-form single-interface plasmon polaritons
// (electric/TM and magnetic/TE), decay constants, propagation quantities of
// lossy modes, and the three-layer (IMI/MIM) dispersion equation solved for
// omega at fixed in-plane wavenumber.

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "vspp/media.hpp"
#include "vspp/numerics.hpp"

namespace vspp::dispersion {

using complex = std::complex<double>;
using media::MediumState;
using media::Polarization;

/// Bound interface solution. amplitude_ratio is A1/A2 of the Hertz scalar,
/// which continuity at the interface fixes to 1.
struct SurfaceMode {
  complex k_perp;
  double omega = 0.0;
  complex kappa1;
  complex kappa2;
  Polarization polarization = Polarization::TMelectric;
  complex amplitude_ratio{1.0, 0.0};
};

struct PropagationQuantities {
  double lambda_sp = 0.0;
  double prop_length = 0.0;  ///< +infinity for a lossless mode
};

/// Square root on the branch with Re >= 0 (bound-mode selector).
complex decaying_sqrt(complex z);

/// k_perp = (omega/c) sqrt( e1 e2/(e1+e2) * (e1 mu2 - e2 mu1)/(e1 - e2) ).
///
/// Throws ResonancePoleError when eps1 + eps2 = 0 and
/// DegenerateFormulaError when eps1 = eps2.
complex electric_spp_kperp(const MediumState& m1, const MediumState& m2, double omega, double c);

/// Electric relation evaluated with eps and mu exchanged in both regions.
complex magnetic_spp_kperp(const MediumState& m1, const MediumState& m2, double omega, double c);

/// kappa_i = sqrt(k_perp^2 - eps_i mu_i omega^2 / c^2) with Re >= 0.
std::pair<complex, complex> decay_constants(double omega, complex k_perp, const MediumState& m1,
                                            const MediumState& m2, double c);

/// kappa1/eps1 + kappa2/eps2 (TM) or kappa1/mu1 + kappa2/mu2 (TE).
complex interface_residual(const SurfaceMode& mode, const MediumState& m1, const MediumState& m2);

/// Largest relative residual of the two decay-constant equations.
double decay_residual(const SurfaceMode& mode, const MediumState& m1, const MediumState& m2, double c);

/// Full single-interface mode at angular frequency omega.
SurfaceMode single_interface_mode(const MediumState& m1, const MediumState& m2, double omega, double c,
                                  Polarization polarization);

/// Inverse of the lossless single-interface relation: omega(k_perp).
double single_interface_omega(const MediumState& m1, const MediumState& m2, double k_perp, double c,
                              Polarization polarization);

/// lambda_sp = 2 pi / Re k and L = 1 / (2 Im k). Throws PreconditionError
/// unless Re k > 0.
PropagationQuantities propagation_quantities(complex k_perp);

// ---------------------------------------------------------------------------
// Three-layer stacks. Region 2 is the middle layer of thickness d; the
// decaying factor of the dispersion equation is exp(-2 kappa2 d).

using Stack3 = std::array<MediumState, 3>;

enum class Parity { Even, Odd, Unclassified };

struct LayerResidual {
  double value = 0.0;
  bool pole = false;  ///< a factor denominator vanished; value is meaningless
};

/// exp(-2 k2 d) - [(p2 + p1)/(p2 - p1)] [(p2 + p3)/(p2 - p3)], p_i = kappa_i/eps_i,
/// for lossless media with real decay constants.
///
/// Note that kappa2 = 0 (region-2 light line) is always a trivial zero of
/// this form; multilayer_characteristic removes it.
LayerResidual multilayer_dispersion_residual(const Stack3& stack, double d, double omega, double k_perp, double c);

/// Instantaneous residual of a RegionStack at time t.
LayerResidual multilayer_dispersion_residual(const media::RegionStack& stack, double omega, double k_perp, double c,
                                             double t = 0.0);

/// Pole-free characteristic function with the same nontrivial zeros:
/// (kappa2^2/eps2^2 + p1 p3) S + (p1 + p3) C / eps2, where S = tanh(kappa2 d)/kappa2
/// and C = 1 when kappa2^2 >= 0, S = sin(b d)/b and C = cos(b d) with
/// kappa2 = i b otherwise. Real and continuous across the region-2 light line.
/// Returns nullopt when an outer region is not evanescent.
std::optional<double> multilayer_characteristic(const Stack3& stack, double d, double omega, double k_perp, double c);

struct LayerMode {
  double omega = 0.0;
  double k_perp = 0.0;
  std::array<double, 3> kappa{};  ///< kappa2 < 0 encodes kappa2 = i|kappa2|
  Parity parity = Parity::Unclassified;
};

struct MultilayerModes {
  std::optional<LayerMode> even;
  std::optional<LayerMode> odd;
  std::vector<LayerMode> unclassified;
};

/// Branch factor of a mirror-symmetric stack (regions 1 and 3 equal):
/// Even: p2 tanh(kappa2 d/2) + p1, Odd: 1/eps2 + p1 tanh(kappa2 d/2)/kappa2, each
/// rescaled to stay real and pole-free across the region-2 light line. Their
/// product carries the zeros of multilayer_characteristic, but each factor
/// has simple roots even where the two branches are exponentially close.
std::optional<double> symmetric_branch_function(const Stack3& stack, double d, double omega, double k_perp, double c,
                                                Parity parity);

/// Angular frequencies where the outer regions stop being evanescent; the
/// bound-mode window is (0, min of these).
double multilayer_light_line(const Stack3& stack, double k_perp, double c);

/// Sign-change brackets of the characteristic function on (0, omega_max),
/// found on a uniform grid of `samples` points.
std::vector<numerics::Bracket> scan_multilayer_brackets(const Stack3& stack, double d, double k_perp, double c,
                                                        double omega_max, int samples = 4000);

/// Roots in the given omega brackets. Brackets without a sign change are
/// skipped (not-found, not an error). For mirror-symmetric stacks each root
/// is classified by the parity of its Hertz-scalar profile.
MultilayerModes solve_multilayer(const Stack3& stack, double d, double k_perp, double c,
                                 std::span<const numerics::Bracket> brackets);

/// Scans (0, light line) and solves every bracket found.
MultilayerModes solve_multilayer(const Stack3& stack, double d, double k_perp, double c);

}  // namespace vspp::dispersion
