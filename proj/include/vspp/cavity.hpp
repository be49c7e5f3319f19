#pragma once

// TM photon modes of a cylindrical cavity (radius R, length L) holding a
// dielectric slab in 0 < z < a and a second medium in a < z < L. The Hertz
// scalar of a mode is phi(z) r_np(rho, theta) with
//   phi = A1 cos(k1 z)        0 < z < a
//   phi = A2 cos(k2 (z - L))  a < z < L
// and r_np built on the p-th zero of J_n. Permeability is 1 throughout.

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vspp::cavity {

using complex = std::complex<double>;

struct Geometry {
  double R = 0.0;
  double L = 0.0;
  double a = 0.0;

  /// Throws PreconditionError unless R > 0 and 0 < a < L.
  void validate() const;
};

/// k1, k2 are either real or purely imaginary (evanescent layer).
struct CavityMode {
  int n = 0;
  int p = 1;
  int m = 1;
  complex k1;
  complex k2;
  double omega = 0.0;
  double x_np = 0.0;
  double norm1 = 0.0;  ///< A1
  double norm2 = 0.0;  ///< A2
};

struct FieldSample {
  std::array<double, 3> position{};  ///< (rho, theta, z)
  std::array<complex, 3> E{};        ///< (rho, theta, z) components
  std::array<complex, 3> B{};
};

struct TranscendentalResidual {
  double value = 0.0;
  bool pole = false;  ///< a tangent is singular; value carries no sign information
};

/// k1 tan(k1 a)/eps1 - k2 tan(k2 (a - L))/eps2 with k2 fixed by the matching
/// constraint (k1^2 + q^2)/eps1 = (k2^2 + q^2)/eps2, q = x_np/R. A negative k2^2
/// continues tan to tanh.
TranscendentalResidual transcendental_residual(double k1, const Geometry& g, double eps1, double eps2, int n, int p,
                                               double c);

/// Scale-free residuals of a returned mode: the cross-multiplied eigenvalue
/// equation (finite at tangent poles) and the matching constraint.
struct ModeResiduals {
  double transcendental = 0.0;
  double matching = 0.0;
};
ModeResiduals mode_residuals(const CavityMode& mode, const Geometry& g, double eps1, double eps2);

struct CavitySpectrum {
  std::vector<CavityMode> modes;
  std::optional<std::string> warning;  ///< set when fewer than `count` modes were found
};

/// Lowest `count` modes with m >= 1, ordered by omega. The branch continuous
/// with the k = 0 solution of the uniform cavity is not returned, so m keeps
/// its uniform-limit meaning k = m pi / L. Normalised by
/// int_0^L eps phi^2 dz = 1 with A1 > 0. Requires eps1, eps2 > 0.
CavitySpectrum solve_cavity_modes(const Geometry& g, double eps1, double eps2, int n, int p, int count, double c);

/// phi(z) and dphi/dz of a normalised mode.
double mode_profile(const CavityMode& mode, const Geometry& g, double z);
double mode_profile_dz(const CavityMode& mode, const Geometry& g, double z);

/// First-order thin-slab shift of omega^2:
/// (2 x_np^2 c^2 / (R^2 eps2)) (a/L) (eps2/eps1 - 1).
double thin_slab_shift(const Geometry& g, double eps1, double eps2, int n, int p, double c);

using PermittivityPair = std::function<std::pair<double, double>(double)>;

struct CouplingResult {
  std::vector<std::vector<double>> matrix;  ///< M[m][n] = int eps phi_m d_t phi_n dz
  double max_offdiag = 0.0;
  double richardson_change = 0.0;  ///< max |M(delta) - M(delta/2)|
};

/// Intermode coupling at time t from instantaneous modes solved at t and
/// t +/- delta (central difference), repeated at delta/2. Modes at the shifted
/// times are matched to those at t by nearest eigenvalue; a relative jump
/// above 10% throws TrackingError.
CouplingResult coupling_matrix(const Geometry& g, const PermittivityPair& eps_of_t, int n, int p, int count, double t,
                               double delta, double c);

/// Same quantity for single-interface surface modes with in-plane wavenumbers
/// k_list on a periodic box of length box_length (k_j must be multiples of
/// 2 pi / box_length). eps1 of the lower half-space varies in time, eps2 is
/// fixed. Profiles are exp(kappa1 z) below and exp(-kappa2 z) above the
/// interface, times exp(i k x).
CouplingResult spp_coupling_matrix(const std::function<double(double)>& eps1_of_t, double eps2,
                                   const std::vector<double>& k_list, double box_length, double t, double delta,
                                   double c);

enum class Side { Auto, Slab, Outer };

/// Fields of Phi = Q phi_m r_np at one point, in the stated region (Auto picks
/// the slab for z <= a). E_rho = (1/eps) d_rho d_z Phi,
/// E_theta = (1/(eps rho)) d_theta d_z Phi, E_z = (q^2/eps) Phi,
/// B = mu (d_theta d_t Phi / rho, -d_rho d_t Phi, 0) with d_t Phi = Qdot phi.
FieldSample field_at(const CavityMode& mode, const Geometry& g, complex Q, complex Qdot,
                     const std::array<double, 3>& position, double eps1, double eps2, double mu,
                     Side side = Side::Auto);

/// field_at over a grid; throws DomainError for points outside the cavity.
std::vector<FieldSample> field_map(const CavityMode& mode, const Geometry& g, complex Q, complex Qdot,
                                   const std::vector<std::array<double, 3>>& grid, double eps1, double eps2,
                                   double mu);

}  // namespace vspp::cavity
