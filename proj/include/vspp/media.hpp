#pragma once

// Time-dependent, spatially uniform media. A modulated region is described
// by the ratio r(t) = eps2 / eps1(t) (or mu2 / mu1(t)) against a static
// partner region, which is the combination entering the surface-mode and
// thin-slab frequency shifts; the region's own value is back-solved from it.

#include <complex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace vspp::media {

using complex = std::complex<double>;

/// Relative permittivity and permeability (eps0 = mu0 = 1), e^{-i omega t}
/// convention: passive media have Im(eps) >= 0 and Im(mu) >= 0.
struct MediumState {
  complex eps{1.0, 0.0};
  complex mu{1.0, 0.0};

  bool operator==(const MediumState&) const = default;
};

enum class Target { Permittivity, Permeability };

enum class Polarization { TMelectric, TEmagnetic };

/// eps <-> mu exchange used by the electric/magnetic duality.
MediumState swap_eps_mu(const MediumState& m);

/// Message describing an active (gain) medium, or nullopt if passive.
std::optional<std::string> passivity_warning(const MediumState& m);

/// Sinusoidal parametric drive of region 1 against a static partner.
///
/// Inside [t_start, t_end] the ratio is r(t) = chi - kappa sin(nu (t - t_start))
/// with nu = drive_frequency; outside the window region 1 is `base`.
struct ModulationProfile {
  MediumState base;
  MediumState partner;
  double kappa = 0.0;
  double drive_frequency = 0.0;
  double chi = 0.0;
  double t_start = 0.0;
  double t_end = 0.0;
  Target target = Target::Permittivity;

  /// Throws PreconditionError unless |kappa| < 1, t_start < t_end and the
  /// drive frequency is finite and non-negative.
  void validate() const;
  bool active(double t) const { return t >= t_start && t <= t_end; }
};

/// r(t): partner value over region-1 value for the targeted quantity.
complex modulated_ratio(const ModulationProfile& profile, double t);

/// Region-1 medium at time t. Throws SingularMediumError when the ratio is
/// 0 (region 1 unbounded) or -1 (surface-mode resonance pole) at t.
MediumState eval_medium(const ModulationProfile& profile, double t);

/// Whether a bound single-interface surface mode exists: opposite signs and
/// negative sum of Re(eps) (TM) or Re(mu) (TE).
bool spp_exists(const MediumState& m1, const MediumState& m2, Polarization polarization);

/// One layer of a planar stack. Thickness is only meaningful for inner layers.
struct Region {
  std::string label;
  std::variant<MediumState, ModulationProfile> medium;
  double thickness = 0.0;

  MediumState at(double t) const;
};

/// Ordered regions along z: two for a single interface, three for IMI/MIM.
class RegionStack {
 public:
  RegionStack() = default;
  explicit RegionStack(std::vector<Region> regions);

  /// Throws PreconditionError unless there are 2 or 3 regions and any
  /// middle layer has positive thickness.
  void validate() const;

  const std::vector<Region>& regions() const { return regions_; }
  std::size_t size() const { return regions_.size(); }
  const Region& operator[](std::size_t i) const { return regions_.at(i); }
  double middle_thickness() const;

  /// Instantaneous medium of every region.
  std::vector<MediumState> state_at(double t) const;

 private:
  std::vector<Region> regions_;
};

}  // namespace vspp::media
