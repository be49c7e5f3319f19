#include "vspp/media.hpp"

#include <cmath>
#include <limits>

#include "vspp/errors.hpp"

namespace vspp::media {

namespace {

const complex& targeted(const MediumState& m, Target target) { return target == Target::Permittivity ? m.eps : m.mu; }

complex& targeted(MediumState& m, Target target) { return target == Target::Permittivity ? m.eps : m.mu; }

}  // namespace

MediumState swap_eps_mu(const MediumState& m) { return {m.mu, m.eps}; }

std::optional<std::string> passivity_warning(const MediumState& m) {
  if (m.eps.imag() < 0.0 || m.mu.imag() < 0.0) {
    return "medium with negative imaginary part (gain) under the e^{-i omega t} convention";
  }
  return std::nullopt;
}

void ModulationProfile::validate() const {
  if (!(std::abs(kappa) < 1.0)) throw PreconditionError("ModulationProfile: |kappa| must be < 1");
  if (!(t_start < t_end)) throw PreconditionError("ModulationProfile: t_start must be < t_end");
  if (!(drive_frequency >= 0.0) || !std::isfinite(drive_frequency)) {
    throw PreconditionError("ModulationProfile: drive frequency must be finite and >= 0");
  }
}

complex modulated_ratio(const ModulationProfile& profile, double t) {
  if (!profile.active(t)) {
    return targeted(profile.partner, profile.target) / targeted(profile.base, profile.target);
  }
  return {profile.chi - profile.kappa * std::sin(profile.drive_frequency * (t - profile.t_start)), 0.0};
}

MediumState eval_medium(const ModulationProfile& profile, double t) {
  if (!profile.active(t)) return profile.base;
  const complex r = modulated_ratio(profile, t);
  constexpr double kTiny = 4.0 * std::numeric_limits<double>::epsilon();
  if (std::abs(r) <= kTiny) {
    throw SingularMediumError("eval_medium: ratio vanishes, region-1 value is unbounded");
  }
  if (std::abs(1.0 + r) <= kTiny) {
    throw SingularMediumError("eval_medium: ratio equals -1, surface-mode resonance pole");
  }
  MediumState out = profile.base;
  targeted(out, profile.target) = targeted(profile.partner, profile.target) / r;
  return out;
}

bool spp_exists(const MediumState& m1, const MediumState& m2, Polarization polarization) {
  const double a = polarization == Polarization::TMelectric ? m1.eps.real() : m1.mu.real();
  const double b = polarization == Polarization::TMelectric ? m2.eps.real() : m2.mu.real();
  return a * b < 0.0 && a + b < 0.0;
}

MediumState Region::at(double t) const {
  if (const auto* fixed = std::get_if<MediumState>(&medium)) return *fixed;
  return eval_medium(std::get<ModulationProfile>(medium), t);
}

RegionStack::RegionStack(std::vector<Region> regions) : regions_(std::move(regions)) {}

void RegionStack::validate() const {
  if (regions_.size() < 2 || regions_.size() > 3) {
    throw PreconditionError("RegionStack: expected 2 or 3 regions, got " + std::to_string(regions_.size()));
  }
  if (regions_.size() == 3 && !(regions_[1].thickness > 0.0)) {
    throw PreconditionError("RegionStack: middle layer thickness d must be > 0");
  }
  for (const auto& r : regions_) {
    if (const auto* p = std::get_if<ModulationProfile>(&r.medium)) p->validate();
  }
}

double RegionStack::middle_thickness() const {
  if (regions_.size() != 3) throw PreconditionError("RegionStack: no middle layer");
  return regions_[1].thickness;
}

std::vector<MediumState> RegionStack::state_at(double t) const {
  std::vector<MediumState> out;
  out.reserve(regions_.size());
  for (const auto& r : regions_) out.push_back(r.at(t));
  return out;
}

}  // namespace vspp::media
