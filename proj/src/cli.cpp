#include "vspp/cli.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <thread>

#include "vspp/dispersion.hpp"
#include "vspp/dynamics.hpp"

#ifndef VSPP_VERSION
#define VSPP_VERSION "0.0.0"
#endif

namespace vspp::cli {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Solver failure at a sweep point (exit code 2).
class PointError : public Error {
 public:
  using Error::Error;
};

const std::vector<std::pair<std::string, Scenario>>& scenario_table() {
  static const std::vector<std::pair<std::string, Scenario>> table = {
      {"dispersion", Scenario::DispersionSweep}, {"multilayer", Scenario::MultilayerSweep},
      {"cavity", Scenario::CavityModes},         {"create", Scenario::Creation},
      {"compare", Scenario::Compare}};
  return table;
}

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json region(const std::string& label, double eps, double thickness = 0.0) {
  return {{"label", label}, {"eps", eps}, {"eps_im", 0.0}, {"mu", 1.0}, {"mu_im", 0.0}, {"thickness", thickness}};
}

const json& region_defaults() {
  static const json r = region("", 1.0);
  return r;
}

const json& axis_defaults() {
  static const json a = {{"name", ""}, {"start", 0.0}, {"stop", 0.0}, {"count", 1}, {"spacing", "linear"}};
  return a;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : path) {
    if (ch == '.') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  for (const auto& p : parts) {
    if (p.empty()) throw ValidationError("malformed key path '" + path + "'");
  }
  return parts;
}

bool is_index(const std::string& s) {
  return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos;
}

json& at_path(json& tree, const std::string& path) {
  json* node = &tree;
  for (const auto& part : split_path(path)) {
    if (node->is_object() && node->contains(part)) {
      node = &(*node)[part];
    } else if (node->is_array() && is_index(part) && std::stoul(part) < node->size()) {
      node = &(*node)[std::stoul(part)];
    } else {
      throw ValidationError("unknown key '" + path + "'");
    }
  }
  return *node;
}

bool same_kind(const json& a, const json& b) {
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

const char* kind_name(const json& j) {
  if (j.is_number()) return "number";
  return j.type_name();
}

void merge(json& base, const json& user, const std::string& prefix) {
  if (!user.is_object()) throw ValidationError((prefix.empty() ? "config" : prefix) + ": expected an object");
  for (const auto& [key, value] : user.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key)) throw ValidationError("unknown key '" + path + "'");
    json& slot = base[key];
    if (!same_kind(slot, value)) {
      throw ValidationError(path + ": expected " + kind_name(slot) + ", got " + kind_name(value));
    }
    if (slot.is_object()) {
      merge(slot, value, path);
    } else {
      slot = value;
    }
  }
}

// Array elements are merged over their element defaults after all edits.
void fill_elements(json& tree, const std::string& key, const json& defaults) {
  json filled = json::array();
  for (std::size_t i = 0; i < tree[key].size(); ++i) {
    json element = defaults;
    merge(element, tree[key][i], key + "." + std::to_string(i));
    filled.push_back(element);
  }
  tree[key] = filled;
}

void apply_override(json& tree, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  if (key == "scenario") throw ValidationError("scenario is set by the subcommand, not by --set");
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json& slot = at_path(tree, key);
  if (!same_kind(slot, value)) {
    throw ValidationError(key + ": expected " + kind_name(slot) + ", got " + kind_name(value));
  }
  if (slot.is_object()) {
    merge(slot, value, key);
  } else {
    slot = value;
  }
}

// Typed readers with field-naming errors.

double num(const json& tree, const std::string& path) {
  const json& v = at_path(const_cast<json&>(tree), path);
  if (!v.is_number()) throw ValidationError(path + ": expected number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ValidationError(path + ": must be finite");
  return x;
}

int integer(const json& tree, const std::string& path) {
  const json& v = at_path(const_cast<json&>(tree), path);
  if (!v.is_number_integer()) throw ValidationError(path + ": expected integer");
  return v.get<int>();
}

std::string str(const json& tree, const std::string& path) {
  const json& v = at_path(const_cast<json&>(tree), path);
  if (!v.is_string()) throw ValidationError(path + ": expected string");
  return v.get<std::string>();
}

void require(bool ok, const std::string& path, const std::string& what, double got) {
  if (!ok) throw ValidationError(path + ": " + what + " (got " + fmt(got) + ")");
}

double positive(const json& tree, const std::string& path) {
  const double x = num(tree, path);
  require(x > 0.0, path, "must be > 0", x);
  return x;
}

int int_at_least(const json& tree, const std::string& path, int lo) {
  const int x = integer(tree, path);
  require(x >= lo, path, "must be >= " + std::to_string(lo), x);
  return x;
}

media::MediumState medium(const json& tree, int i) {
  const std::string p = "regions." + std::to_string(i) + ".";
  return {{num(tree, p + "eps"), num(tree, p + "eps_im")}, {num(tree, p + "mu"), num(tree, p + "mu_im")}};
}

// Scenario parameters beyond the common ScenarioConfig fields.
struct Params {
  media::Polarization polarization = media::Polarization::TMelectric;
  double omega = 0.0;
  double k_perp = 0.0;
  double omega0 = 0.0;
  double chi_photon = 1.0;
  double cycles = 0.0;
  int samples = 0;
  int n = 0;
  int p = 1;
  int count = 1;
  double damping = 0.0;
  dynamics::Branch branch = dynamics::Branch::Generic;
};

struct Resolved {
  ScenarioConfig cfg;
  Params params;
};

dynamics::Branch parse_branch(const std::string& name, const std::string& path) {
  for (auto b : {dynamics::Branch::SPPelectric, dynamics::Branch::SPPmagnetic, dynamics::Branch::Photon,
                 dynamics::Branch::Generic}) {
    if (name == dynamics::branch_name(b)) return b;
  }
  throw ValidationError(path + ": unknown branch '" + name + "' (valid: spp_electric, spp_magnetic, photon, generic)");
}

std::vector<SweepAxis> parse_sweep(const json& tree) {
  std::vector<SweepAxis> axes;
  json probe = tree;
  for (std::size_t i = 0; i < tree["sweep"].size(); ++i) {
    const std::string p = "sweep." + std::to_string(i) + ".";
    SweepAxis axis;
    axis.name = str(tree, p + "name");
    if (axis.name.empty()) throw ValidationError(p + "name: must name a config key");
    const std::string root = split_path(axis.name).front();
    if (root == "sweep" || root == "output" || root == "threads" || root == "scenario") {
      throw ValidationError(p + "name: '" + axis.name + "' cannot be swept");
    }
    if (!at_path(probe, axis.name).is_number()) {
      throw ValidationError(p + "name: '" + axis.name + "' is not a numeric parameter");
    }
    for (const auto& other : axes) {
      if (other.name == axis.name) throw ValidationError(p + "name: '" + axis.name + "' is swept twice");
    }
    axis.start = num(tree, p + "start");
    axis.stop = num(tree, p + "stop");
    axis.count = int_at_least(tree, p + "count", 1);
    const std::string spacing = str(tree, p + "spacing");
    if (spacing == "log") {
      axis.log = true;
      require(axis.start > 0.0, p + "start", "log spacing needs positive bounds", axis.start);
      require(axis.stop > 0.0, p + "stop", "log spacing needs positive bounds", axis.stop);
    } else if (spacing != "linear") {
      throw ValidationError(p + "spacing: expected 'linear' or 'log', got '" + spacing + "'");
    }
    axes.push_back(axis);
  }
  return axes;
}

Resolved resolve(const json& tree) {
  Resolved out;
  ScenarioConfig& cfg = out.cfg;
  Params& prm = out.params;
  cfg.tree = tree;
  cfg.scenario = parse_scenario(str(tree, "scenario"));
  const Scenario s = cfg.scenario;

  cfg.c = positive(tree, "c");

  cfg.geometry.R = positive(tree, "geometry.R");
  cfg.geometry.L = positive(tree, "geometry.L");
  cfg.geometry.a = num(tree, "geometry.a");
  require(cfg.geometry.a > 0.0 && cfg.geometry.a < cfg.geometry.L, "geometry.a", "must satisfy 0 < a < L",
          cfg.geometry.a);

  const std::size_t want = s == Scenario::MultilayerSweep ? 3 : 2;
  if (tree["regions"].size() != want) {
    throw ValidationError("regions: scenario " + std::string(scenario_name(s)) + " needs " + std::to_string(want) +
                          " regions, got " + std::to_string(tree["regions"].size()));
  }
  std::vector<media::Region> regions;
  for (std::size_t i = 0; i < want; ++i) {
    const std::string p = "regions." + std::to_string(i) + ".";
    media::Region r;
    r.label = str(tree, p + "label");
    r.medium = medium(tree, static_cast<int>(i));
    r.thickness = num(tree, p + "thickness");
    const auto m = std::get<media::MediumState>(r.medium);
    require(m.eps != 0.0, p + "eps", "must be nonzero", m.eps.real());
    require(m.mu != 0.0, p + "mu", "must be nonzero", m.mu.real());
    if (want == 3 && i == 1) require(r.thickness > 0.0, p + "thickness", "must be > 0", r.thickness);
    regions.push_back(r);
  }
  cfg.regions = media::RegionStack(regions);

  cfg.numerics.rel_tol = positive(tree, "numerics.rel_tol");
  cfg.numerics.abs_tol = positive(tree, "numerics.abs_tol");
  const double max_step = num(tree, "numerics.max_step");
  require(max_step >= 0.0, "numerics.max_step", "must be >= 0 (0 = unlimited)", max_step);
  cfg.numerics.max_step = max_step == 0.0 ? kInf : max_step;
  const json& steps = tree["numerics"]["max_steps"];
  if (!steps.is_number_integer() || steps.get<long long>() < 1) {
    throw ValidationError("numerics.max_steps: must be an integer >= 1");
  }
  cfg.numerics.max_steps = steps.get<std::size_t>();

  const double kappa = num(tree, "drive.kappa");
  const double nu = num(tree, "drive.drive_frequency");
  require(nu >= 0.0, "drive.drive_frequency", "must be >= 0 (0 = twice the mode frequency)", nu);
  prm.cycles = num(tree, "drive.cycles");
  require(prm.cycles > 0.0, "drive.cycles", "must be > 0", prm.cycles);
  prm.samples = int_at_least(tree, "drive.samples", 20);
  prm.chi_photon = num(tree, "drive.chi_photon");
  prm.damping = num(tree, "dynamics.damping");
  const std::string target = str(tree, "drive.target");
  if (target != "permittivity" && target != "permeability") {
    throw ValidationError("drive.target: expected 'permittivity' or 'permeability', got '" + target + "'");
  }
  cfg.drive.base = medium(tree, 0);
  cfg.drive.partner = medium(tree, 1);
  cfg.drive.target = target == "permittivity" ? media::Target::Permittivity : media::Target::Permeability;
  cfg.drive.kappa = kappa;
  cfg.drive.drive_frequency = nu;
  const auto& num_of = [&](const media::MediumState& m) {
    return cfg.drive.target == media::Target::Permittivity ? m.eps.real() : m.mu.real();
  };
  cfg.drive.chi = num_of(cfg.drive.partner) / num_of(cfg.drive.base);
  cfg.drive.t_start = 0.0;
  cfg.drive.t_end = kInf;

  if (s == Scenario::Creation || s == Scenario::Compare) {
    require(kappa >= 0.0 && kappa <= 0.1, "drive.kappa", "must lie in [0, 0.1]", kappa);
    prm.k_perp = positive(tree, scenario_name(s) + std::string(".k_perp"));
    prm.n = int_at_least(tree, scenario_name(s) + std::string(".n"), 0);
    prm.p = int_at_least(tree, scenario_name(s) + std::string(".p"), 1);
    prm.branch = s == Scenario::Compare ? dynamics::Branch::SPPelectric
                                        : parse_branch(str(tree, "create.branch"), "create.branch");
    if (s == Scenario::Creation) prm.omega0 = positive(tree, "create.omega0");
    const bool magnetic = prm.branch == dynamics::Branch::SPPmagnetic;
    if (prm.branch == dynamics::Branch::SPPelectric || magnetic) {
      const auto m1 = medium(tree, 0);
      const auto m2 = medium(tree, 1);
      const double s1 = magnetic ? m1.mu.real() : m1.eps.real();
      const double s2 = magnetic ? m2.mu.real() : m2.eps.real();
      const double chi = s2 / s1;
      const std::string key = magnetic ? "mu" : "eps";
      require(chi > -1.0 && chi < 0.0, "regions.0." + key, "the ratio regions.1/regions.0 must lie in (-1, 0)", s1);
      require(std::abs(chi) + kappa < 1.0, "drive.kappa", "the modulated ratio must stay inside (-1, 0)", kappa);
      const double c1 = magnetic ? m1.eps.real() : m1.mu.real();
      const double c2 = magnetic ? m2.eps.real() : m2.mu.real();
      require(c1 == c2 && c2 > 0.0, "regions.0." + std::string(magnetic ? "eps" : "mu"),
              "the unmodulated response must be positive and equal in both regions", c1);
      cfg.drive.chi = chi;
      cfg.drive.target = magnetic ? media::Target::Permeability : media::Target::Permittivity;
    }
    if (prm.branch == dynamics::Branch::Photon || s == Scenario::Compare) {
      require(medium(tree, 1).eps.real() > 0.0, "regions.1.eps", "cavity fill must be > 0",
              medium(tree, 1).eps.real());
      require(prm.chi_photon - kappa > 0.0, "drive.chi_photon", "must exceed drive.kappa", prm.chi_photon);
    }
  }
  if (s == Scenario::DispersionSweep) {
    prm.omega = positive(tree, "dispersion.omega");
    const std::string pol = str(tree, "dispersion.polarization");
    if (pol == "magnetic") {
      prm.polarization = media::Polarization::TEmagnetic;
    } else if (pol != "electric") {
      throw ValidationError("dispersion.polarization: expected 'electric' or 'magnetic', got '" + pol + "'");
    }
  }
  if (s == Scenario::MultilayerSweep) prm.k_perp = positive(tree, "multilayer.k_perp");
  if (s == Scenario::CavityModes) {
    prm.n = int_at_least(tree, "cavity.n", 0);
    prm.p = int_at_least(tree, "cavity.p", 1);
    prm.count = int_at_least(tree, "cavity.count", 1);
    for (int i = 0; i < 2; ++i) {
      const double e = medium(tree, i).eps.real();
      require(e > 0.0, "regions." + std::to_string(i) + ".eps", "cavity permittivities must be > 0", e);
    }
    const int mode = integer(tree, "cavity.field_map.mode");
    require(mode >= 1 && mode <= prm.count, "cavity.field_map.mode", "must lie in [1, cavity.count]", mode);
    for (const char* axis : {"rho", "theta", "z"}) int_at_least(tree, std::string("cavity.field_map.") + axis, 1);
  }

  cfg.sweep = parse_sweep(tree);

  cfg.output.path = str(tree, "output.path");
  const std::string format = str(tree, "output.format");
  if (format == "json") {
    cfg.output.format = Format::JSON;
  } else if (format != "csv") {
    throw ValidationError("output.format: expected 'csv' or 'json', got '" + format + "'");
  }
  cfg.threads = integer(tree, "threads");
  require(cfg.threads >= 1 && cfg.threads <= 1024, "threads", "must lie in [1, 1024]", cfg.threads);
  return out;
}

// ---------------------------------------------------------------------------
// Scenario evaluation

struct PointResult {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> warnings;
};

std::vector<std::string> scenario_columns(Scenario s) {
  switch (s) {
    case Scenario::DispersionSweep:
      return {"omega",    "eps1",     "eps1_im",   "eps2",      "eps2_im",   "mu1",       "mu2",
              "bound",    "k_perp_re", "k_perp_im", "kappa1_re", "kappa1_im", "kappa2_re", "kappa2_im",
              "lambda_sp", "prop_length", "interface_residual"};
    case Scenario::MultilayerSweep:
      return {"k_perp",   "thickness", "eps1",          "eps2",     "eps3", "light_line", "omega_even",
              "omega_odd", "omega_other", "omega_single_interface"};
    case Scenario::CavityModes:
      return {"n",    "p",     "m",    "eps1", "eps2",  "a",        "k1_re",    "k1_im",  "k2_re",
              "k2_im", "omega", "x_np", "A1",   "A2",    "residual_transcendental", "residual_matching",
              "thin_slab_shift"};
    case Scenario::Creation:
      return {"kappa",          "omega0",         "drive_frequency",     "t1",
              "N_numeric",      "N_formula",      "growth_rate_fit",     "growth_rate_formula",
              "wronskian_drift"};
    case Scenario::Compare:
      return {"kappa", "k_perp", "lambda_sp", "dominance_ratio", "threshold_k", "omega_sp", "omega_ph", "t1_sp",
              "t1_ph", "N_sp_formula", "N_sp_ode", "N_ph_formula", "N_ph_ode"};
  }
  return {};
}

PointResult eval_dispersion(const Resolved& r) {
  const auto m1 = medium(r.cfg.tree, 0);
  const auto m2 = medium(r.cfg.tree, 1);
  const double omega = r.params.omega;
  const auto pol = r.params.polarization;
  PointResult out;
  const auto mode = dispersion::single_interface_mode(m1, m2, omega, r.cfg.c, pol);
  const bool bound = media::spp_exists(m1, m2, pol);
  double lambda = kNaN;
  double prop = kNaN;
  if (mode.k_perp.real() > 0.0) {
    const auto q = dispersion::propagation_quantities(mode.k_perp);
    lambda = q.lambda_sp;
    prop = q.prop_length;
  }
  const auto scale = pol == media::Polarization::TMelectric
                         ? std::abs(mode.kappa1 / m1.eps) + std::abs(mode.kappa2 / m2.eps)
                         : std::abs(mode.kappa1 / m1.mu) + std::abs(mode.kappa2 / m2.mu);
  const double residual = std::abs(dispersion::interface_residual(mode, m1, m2)) / (scale > 0.0 ? scale : 1.0);
  out.rows.push_back({omega, m1.eps.real(), m1.eps.imag(), m2.eps.real(), m2.eps.imag(), m1.mu.real(), m2.mu.real(),
                      bound ? 1.0 : 0.0, mode.k_perp.real(), mode.k_perp.imag(), mode.kappa1.real(),
                      mode.kappa1.imag(), mode.kappa2.real(), mode.kappa2.imag(), lambda, prop, residual});
  if (!bound) out.warnings.push_back("no bound surface mode for these media");
  return out;
}

PointResult eval_multilayer(const Resolved& r) {
  PointResult out;
  dispersion::Stack3 stack;
  for (int i = 0; i < 3; ++i) {
    stack[i] = medium(r.cfg.tree, i);
    if (stack[i].eps.imag() != 0.0 || stack[i].mu.imag() != 0.0) {
      out.warnings.push_back("multilayer solver uses the real parts of the material responses");
    }
    stack[i] = {stack[i].eps.real(), stack[i].mu.real()};
  }
  const double d = r.cfg.regions[1].thickness;
  const double k = r.params.k_perp;
  const double c = r.cfg.c;
  const double light = dispersion::multilayer_light_line(stack, k, c);
  const auto modes = dispersion::solve_multilayer(stack, d, k, c);
  double single = kNaN;
  try {
    single = dispersion::single_interface_omega(stack[0], stack[1], k, c, media::Polarization::TMelectric);
  } catch (const Error& e) {
    out.warnings.push_back(std::string("single-interface reference unavailable: ") + e.what());
  }
  const double other = modes.unclassified.empty() ? kNaN : modes.unclassified.front().omega;
  if (modes.unclassified.size() > 1) out.warnings.push_back("more than one unclassified root; first reported");
  out.rows.push_back({k, d, stack[0].eps.real(), stack[1].eps.real(), stack[2].eps.real(), light,
                      modes.even ? modes.even->omega : kNaN, modes.odd ? modes.odd->omega : kNaN, other, single});
  return out;
}

PointResult eval_cavity(const Resolved& r) {
  PointResult out;
  const double e1 = medium(r.cfg.tree, 0).eps.real();
  const double e2 = medium(r.cfg.tree, 1).eps.real();
  const auto& g = r.cfg.geometry;
  const int n = r.params.n;
  const int p = r.params.p;
  const auto spec = cavity::solve_cavity_modes(g, e1, e2, n, p, r.params.count, r.cfg.c);
  if (spec.warning) out.warnings.push_back(*spec.warning);
  const double shift = cavity::thin_slab_shift(g, e1, e2, n, p, r.cfg.c);
  for (const auto& m : spec.modes) {
    const auto res = cavity::mode_residuals(m, g, e1, e2);
    out.rows.push_back({double(n), double(p), double(m.m), e1, e2, g.a, m.k1.real(), m.k1.imag(), m.k2.real(),
                        m.k2.imag(), m.omega, m.x_np, m.norm1, m.norm2, res.transcendental, res.matching,
                        m.m == 1 ? shift : kNaN});
  }
  return out;
}

double duration_of(const dynamics::BranchConfig& b, double cycles) {
  return cycles * 2.0 * std::numbers::pi / b.drive_frequency;
}

dynamics::BranchConfig make_branch(const Resolved& r, dynamics::Branch which, double kappa) {
  const auto& prm = r.params;
  const double nu = r.cfg.drive.drive_frequency;
  const double c = r.cfg.c;
  const auto m2 = medium(r.cfg.tree, 1);
  switch (which) {
    case dynamics::Branch::SPPelectric:
      return dynamics::spp_branch(which, prm.k_perp, m2.eps.real(), m2.mu.real(), r.cfg.drive.chi, nu, c);
    case dynamics::Branch::SPPmagnetic:
      return dynamics::spp_branch(which, prm.k_perp, m2.mu.real(), m2.eps.real(), r.cfg.drive.chi, nu, c);
    case dynamics::Branch::Photon:
      return dynamics::photon_branch(r.cfg.geometry, m2.eps.real(), prm.n, prm.p, prm.chi_photon, kappa, nu, c);
    case dynamics::Branch::Generic:
      return dynamics::oscillator_branch(prm.omega0, nu);
  }
  throw ValidationError("unknown branch");
}

dynamics::EnhancementReport scan_one(const Resolved& r, const dynamics::BranchConfig& b, double kappa,
                                     std::vector<std::string>& warnings) {
  const double duration = duration_of(b, r.params.cycles);
  const double ks[] = {kappa};
  auto report = dynamics::resonance_scan(b, ks, duration, r.cfg.numerics, r.params.samples).front();
  if (report.warning && kappa > 0.0) {
    warnings.push_back(std::string(dynamics::branch_name(b.branch)) + ": " + *report.warning);
  }
  return report;
}

PointResult eval_create(const Resolved& r) {
  PointResult out;
  if (r.params.damping != 0.0) out.warnings.push_back("dynamics.damping is only applied by the library API");
  const double kappa = r.cfg.drive.kappa;
  const auto branch = make_branch(r, r.params.branch, kappa);
  const auto rep = scan_one(r, branch, kappa, out.warnings);
  out.rows.push_back({kappa, branch.omega0, branch.drive_frequency, rep.t1, rep.N_numeric, rep.N_formula,
                      rep.growth_rate_fit, rep.growth_rate_formula, rep.wronskian_drift});
  return out;
}

PointResult eval_compare(const Resolved& r) {
  PointResult out;
  const auto& g = r.cfg.geometry;
  const double kappa = r.cfg.drive.kappa;
  const double k = r.params.k_perp;
  const double x = numerics::bessel_zero(r.params.n, r.params.p);
  const auto dom = dynamics::dominance_ratio(k, x, g.R, g.a, g.L);
  const auto sp = make_branch(r, dynamics::Branch::SPPelectric, kappa);
  const auto ph = make_branch(r, dynamics::Branch::Photon, kappa);
  const auto sp_rep = scan_one(r, sp, kappa, out.warnings);
  const auto ph_rep = scan_one(r, ph, kappa, out.warnings);
  out.rows.push_back({kappa, k, 2.0 * std::numbers::pi / k, dom.ratio, dom.threshold_k, sp.omega0, ph.omega0,
                      sp_rep.t1, ph_rep.t1, sp_rep.N_formula, sp_rep.N_numeric, ph_rep.N_formula, ph_rep.N_numeric});
  return out;
}

PointResult evaluate(const Resolved& r) {
  switch (r.cfg.scenario) {
    case Scenario::DispersionSweep: return eval_dispersion(r);
    case Scenario::MultilayerSweep: return eval_multilayer(r);
    case Scenario::CavityModes: return eval_cavity(r);
    case Scenario::Creation: return eval_create(r);
    case Scenario::Compare: return eval_compare(r);
  }
  return {};
}

struct SweepPoint {
  std::vector<double> values;
  std::string label;
};

std::vector<SweepPoint> sweep_points(const std::vector<SweepAxis>& axes) {
  std::vector<SweepPoint> points{{}};
  for (const auto& axis : axes) {
    std::vector<SweepPoint> next;
    const auto vals = axis.values();
    for (const auto& base : points) {
      for (double v : vals) {
        SweepPoint p = base;
        p.values.push_back(v);
        p.label += (p.label.empty() ? "" : ", ") + axis.name + "=" + fmt(v);
        next.push_back(std::move(p));
      }
    }
    points = std::move(next);
  }
  return points;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json encode(double x) {
  if (std::isfinite(x)) return x;
  return fmt(x);
}

double decode(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return kNaN;
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw ValidationError("record value is neither a number nor nan/inf");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    // nlohmann reports "at line L, column C" inside what().
    throw ValidationError("config '" + path + "': " + e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------

const char* scenario_name(Scenario s) {
  for (const auto& [name, value] : scenario_table()) {
    if (value == s) return name.c_str();
  }
  return "?";
}

Scenario parse_scenario(const std::string& name) {
  std::string valid;
  for (const auto& [n, value] : scenario_table()) {
    if (n == name) return value;
    valid += (valid.empty() ? "" : ", ") + n;
  }
  throw ValidationError("scenario: unknown '" + name + "' (valid: " + valid + ")");
}

std::vector<double> SweepAxis::values() const {
  std::vector<double> v(static_cast<std::size_t>(count));
  if (count == 1) {
    v[0] = start;
    return v;
  }
  for (int i = 0; i < count; ++i) {
    const double f = static_cast<double>(i) / (count - 1);
    v[i] = log ? std::exp(std::log(start) + f * (std::log(stop) - std::log(start))) : start + f * (stop - start);
  }
  v.back() = stop;
  return v;
}

json default_tree(Scenario s) {
  json tree = {
      {"scenario", scenario_name(s)},
      {"c", 299792458.0},
      {"geometry", {{"R", 0.025}, {"L", 0.1}, {"a", 1e-5}}},
      {"regions", {region("metal", -2.0), region("dielectric", 1.0)}},
      {"drive",
       {{"kappa", 0.01},
        {"drive_frequency", 0.0},
        {"chi_photon", 1.0},
        {"target", "permittivity"},
        {"cycles", 200.0},
        {"samples", 200}}},
      {"dynamics", {{"damping", 0.0}}},
      {"numerics", {{"rel_tol", 1e-10}, {"abs_tol", 1e-12}, {"max_step", 0.0}, {"max_steps", 50000000}}},
      {"sweep", json::array()},
      {"output", {{"path", ""}, {"format", "csv"}}},
      {"threads", 1},
  };
  switch (s) {
    case Scenario::DispersionSweep:
      tree["dispersion"] = {{"omega", 1e15}, {"polarization", "electric"}};
      break;
    case Scenario::MultilayerSweep:
      tree["regions"] = {region("insulator", 1.0), region("metal", -10.0, 50e-9), region("insulator", 1.0)};
      tree["multilayer"] = {{"k_perp", 1e7}};
      break;
    case Scenario::CavityModes:
      tree["regions"] = {region("slab", 2.0), region("fill", 1.0)};
      tree["cavity"] = {{"n", 0},
                        {"p", 1},
                        {"count", 5},
                        {"field_map",
                         {{"path", ""},
                          {"mode", 1},
                          {"rho", 5},
                          {"theta", 4},
                          {"z", 21},
                          {"Q", 1.0},
                          {"Q_im", 0.0},
                          {"Qdot", 0.0},
                          {"Qdot_im", 0.0}}}};
      break;
    case Scenario::Creation:
      tree["create"] = {{"branch", "spp_electric"}, {"k_perp", 20.0}, {"omega0", 1.0}, {"n", 0}, {"p", 1}};
      break;
    case Scenario::Compare:
      tree["compare"] = {{"k_perp", 20.0}, {"n", 0}, {"p", 1}};
      break;
  }
  return tree;
}

ScenarioConfig build_config(const json& user, const std::vector<std::string>& overrides) {
  if (!user.is_object()) throw ValidationError("config: expected a JSON object");
  if (!user.contains("scenario")) throw ValidationError("scenario: missing");
  if (!user["scenario"].is_string()) throw ValidationError("scenario: expected string");
  json tree = default_tree(parse_scenario(user["scenario"].get<std::string>()));
  // Arrays are replaced wholesale; their elements get defaults afterwards.
  merge(tree, user, "");
  for (const auto& o : overrides) apply_override(tree, o);
  fill_elements(tree, "regions", region_defaults());
  fill_elements(tree, "sweep", axis_defaults());
  Resolved r = resolve(tree);
  return r.cfg;
}

ScenarioConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  return build_config(read_json_file(path), overrides);
}

std::string config_hash(const ScenarioConfig& cfg) {
  json canonical = cfg.tree;
  canonical.erase("output");
  canonical.erase("threads");
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunRecord run(const ScenarioConfig& cfg) {
  RunRecord rec;
  rec.scenario = scenario_name(cfg.scenario);
  rec.config_hash = config_hash(cfg);
  rec.timestamp = utc_now();
  rec.tool_version = VSPP_VERSION;
  for (const auto& axis : cfg.sweep) rec.columns.push_back(axis.name);
  for (const auto& col : scenario_columns(cfg.scenario)) rec.columns.push_back(col);

  const auto points = sweep_points(cfg.sweep);
  // Resolve every point before any solver runs so bad sweep ranges fail as
  // validation errors.
  std::vector<Resolved> resolved;
  resolved.reserve(points.size());
  for (const auto& pt : points) {
    json tree = cfg.tree;
    for (std::size_t i = 0; i < cfg.sweep.size(); ++i) at_path(tree, cfg.sweep[i].name) = pt.values[i];
    try {
      resolved.push_back(resolve(tree));
    } catch (const ValidationError& e) {
      throw ValidationError("sweep point (" + pt.label + "): " + e.what());
    }
  }

  std::vector<PointResult> results(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        results[i] = evaluate(resolved[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), points.size());
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::string where = points[i].label.empty() ? "" : " at sweep point (" + points[i].label + ")";
    if (errors[i]) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (const ValidationError& e) {
        throw ValidationError(e.what() + where);
      } catch (const std::exception& e) {
        throw PointError(std::string(rec.scenario) + " failed" + where + ": " + e.what());
      }
    }
    for (auto& row : results[i].rows) {
      std::vector<double> full = points[i].values;
      full.insert(full.end(), row.begin(), row.end());
      rec.rows.push_back(std::move(full));
    }
    for (const auto& w : results[i].warnings) rec.warnings.push_back(w + where);
  }
  return rec;
}

std::string to_csv(const RunRecord& r) {
  std::ostringstream out;
  out << "# tool=vspp version=" << r.tool_version << " scenario=" << r.scenario << " config_hash=" << r.config_hash
      << " timestamp=" << r.timestamp << "\n";
  for (const auto& w : r.warnings) out << "# warning: " << w << "\n";
  for (std::size_t i = 0; i < r.columns.size(); ++i) out << (i ? "," : "") << r.columns[i];
  out << "\n";
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << fmt(row[i]);
    out << "\n";
  }
  return out.str();
}

json to_json(const RunRecord& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json jr = json::array();
    for (double x : row) jr.push_back(encode(x));
    rows.push_back(jr);
  }
  return {{"tool", "vspp"},          {"tool_version", r.tool_version}, {"scenario", r.scenario},
          {"config_hash", r.config_hash}, {"timestamp", r.timestamp}, {"warnings", r.warnings},
          {"columns", r.columns},    {"rows", rows}};
}

RunRecord from_json(const json& j) {
  RunRecord r;
  try {
    r.scenario = j.at("scenario").get<std::string>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.timestamp = j.at("timestamp").get<std::string>();
    r.tool_version = j.at("tool_version").get<std::string>();
    r.columns = j.at("columns").get<std::vector<std::string>>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (const auto& jr : j.at("rows")) {
      std::vector<double> row;
      for (const auto& x : jr) row.push_back(decode(x));
      r.rows.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("run record: ") + e.what());
  }
  return r;
}

void emit(const RunRecord& r, Format format, const std::string& path) {
  const std::string text = format == Format::CSV ? to_csv(r) : to_json(r).dump(2) + "\n";
  if (path.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing '" + path + "'");
}

void emit_field_map(const ScenarioConfig& cfg) {
  if (cfg.scenario != Scenario::CavityModes) return;
  const json& fm = cfg.tree["cavity"]["field_map"];
  const std::string path = fm["path"].get<std::string>();
  if (path.empty()) return;
  const Resolved r = resolve(cfg.tree);
  const auto& g = r.cfg.geometry;
  const auto m1 = medium(cfg.tree, 0);
  const auto m2 = medium(cfg.tree, 1);
  const auto spec = cavity::solve_cavity_modes(g, m1.eps.real(), m2.eps.real(), r.params.n, r.params.p,
                                               r.params.count, cfg.c);
  const int index = fm["mode"].get<int>();
  if (index > static_cast<int>(spec.modes.size())) {
    throw PointError("cavity.field_map.mode: only " + std::to_string(spec.modes.size()) + " modes found");
  }
  const auto& mode = spec.modes[index - 1];
  const int nr = fm["rho"].get<int>();
  const int nt = fm["theta"].get<int>();
  const int nz = fm["z"].get<int>();
  std::vector<std::array<double, 3>> grid;
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < nt; ++j) {
      for (int k = 0; k < nz; ++k) {
        grid.push_back({nr == 1 ? 0.0 : g.R * i / (nr - 1), 2.0 * std::numbers::pi * j / nt,
                        nz == 1 ? 0.0 : g.L * k / (nz - 1)});
      }
    }
  }
  const std::complex<double> Q{fm["Q"].get<double>(), fm["Q_im"].get<double>()};
  const std::complex<double> Qdot{fm["Qdot"].get<double>(), fm["Qdot_im"].get<double>()};
  if (m1.mu != m2.mu) throw ValidationError("cavity.field_map: needs equal mu in both regions");
  const auto samples = cavity::field_map(mode, g, Q, Qdot, grid, m1.eps.real(), m2.eps.real(), m1.mu.real());

  RunRecord rec;
  rec.scenario = "cavity_field_map";
  rec.config_hash = config_hash(cfg);
  rec.timestamp = utc_now();
  rec.tool_version = VSPP_VERSION;
  rec.columns = {"rho", "theta", "z"};
  for (const char* f : {"E", "B"}) {
    for (const char* comp : {"rho", "theta", "z"}) {
      rec.columns.push_back(std::string(f) + "_" + comp + "_re");
      rec.columns.push_back(std::string(f) + "_" + comp + "_im");
    }
  }
  for (const auto& s : samples) {
    std::vector<double> row(s.position.begin(), s.position.end());
    for (const auto* field : {&s.E, &s.B}) {
      for (const auto& v : *field) {
        row.push_back(v.real());
        row.push_back(v.imag());
      }
    }
    rec.rows.push_back(std::move(row));
  }
  emit(rec, Format::CSV, path);
}

// ---------------------------------------------------------------------------

int run_cli(int argc, char** argv) {
  CLI::App app{"vspp: surface plasmon and cavity photon creation under time-varying media"};
  app.require_subcommand(1);
  app.set_version_flag("--version", VSPP_VERSION);

  std::string config_path;
  std::string out_path;
  std::string format;
  int threads = 0;
  long long seed = 0;
  std::vector<std::string> sets;
  bool print_config = false;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"dispersion", "single-interface surface mode k_perp(omega)"},
      {"multilayer", "three-layer (IMI/MIM) even and odd branches omega(k_perp)"},
      {"cavity", "eigenmodes of the cylindrical cavity with a dielectric slab"},
      {"create", "particle number in one driven mode, ODE vs closed form"},
      {"compare", "surface-mode vs cavity-photon creation and the dominance ratio"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON config file (keys and defaults below)");
    sub->add_option("--out", out_path, "output file (default: standard output)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "reserved; no stochastic components");
    sub->add_option("--set", sets, "override a config key, e.g. --set drive.kappa=0.02 (repeatable)");
    sub->add_flag("--print-config", print_config, "print the resolved config and exit");
    sub->footer("Defaults (SI units; sweep entries are {name, start, stop, count, spacing: linear|log}):\n" +
                default_tree(parse_scenario(name)).dump(2));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  const std::string scenario = app.get_subcommands().front()->get_name();
  try {
    json user = json::object();
    if (!config_path.empty()) user = read_json_file(config_path);
    if (!user.is_object()) throw ValidationError("config: expected a JSON object");
    if (user.contains("scenario") && user["scenario"] != scenario) {
      throw ValidationError("scenario: config says " + user["scenario"].dump() + " but the subcommand is '" +
                            scenario + "'");
    }
    user["scenario"] = scenario;
    std::vector<std::string> overrides;
    if (!out_path.empty()) overrides.push_back("output.path=" + json(out_path).dump());
    if (!format.empty()) overrides.push_back("output.format=" + json(format).dump());
    if (threads > 0) overrides.push_back("threads=" + std::to_string(threads));
    overrides.insert(overrides.end(), sets.begin(), sets.end());

    const ScenarioConfig cfg = build_config(user, overrides);
    if (print_config) {
      std::cout << cfg.tree.dump(2) << "\n";
      return 0;
    }
    const auto start = std::chrono::steady_clock::now();
    const RunRecord rec = run(cfg);
    emit(rec, cfg.output.format, cfg.output.path);
    emit_field_map(cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::fprintf(stderr, "vspp %s: %zu rows, %zu warnings, config %s, %.2f s -> %s\n", scenario.c_str(),
                 rec.rows.size(), rec.warnings.size(), rec.config_hash.c_str(), secs,
                 cfg.output.path.empty() ? "stdout" : cfg.output.path.c_str());
    for (const auto& w : rec.warnings) std::fprintf(stderr, "  warning: %s\n", w.c_str());
    return 0;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace vspp::cli
