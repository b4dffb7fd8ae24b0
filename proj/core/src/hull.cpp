#include "relopt/hull.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace relopt {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct HullVolumes {
  double steel = 0.0;  // mm^3 per bay
  double water = 0.0;
};

HullVolumes volumes(const HullGeometry& g) {
  const double r_shell_out = g.radius + 0.5 * g.shell_thickness;
  const double r_web = g.radius - 0.5 * g.shell_thickness - 0.5 * g.web_height;
  const double r_flange = g.radius - 0.5 * g.shell_thickness - g.web_height -
                          0.5 * g.flange_thickness;
  HullVolumes v;
  v.steel = 2.0 * kPi * g.radius * g.shell_thickness * g.frame_spacing +
            2.0 * kPi * r_web * g.web_height * g.web_thickness +
            2.0 * kPi * r_flange * g.flange_width * g.flange_thickness;
  v.water = kPi * r_shell_out * r_shell_out * g.frame_spacing;
  return v;
}

}  // namespace

void HullGeometry::validate() const {
  const double dims[] = {shell_thickness, web_height,   web_thickness,
                         flange_width,    flange_thickness, frame_spacing, radius};
  for (double d : dims)
    if (!(d > 0.0)) throw std::invalid_argument("hull geometry: dimensions must be positive");
}

void Material::validate() const {
  if (!(youngs_modulus > 0.0) || !(yield_stress > 0.0))
    throw std::invalid_argument("material: moduli must be positive");
  if (!(poisson > 0.0 && poisson < 0.5))
    throw std::invalid_argument("material: poisson ratio must lie in (0, 0.5)");
  if (!(steel_density > 0.0) || !(sea_water_density > 0.0))
    throw std::invalid_argument("material: densities must be positive");
}

double hull_cost(const HullGeometry& geometry, const Material& material) {
  geometry.validate();
  material.validate();
  const HullVolumes v = volumes(geometry);
  return material.steel_density * v.steel / (material.sea_water_density * v.water);
}

Eigen::VectorXd hull_cost_gradient(const HullGeometry& g, const Material& material) {
  g.validate();
  material.validate();
  const HullVolumes v = volumes(g);
  const double r_shell_out = g.radius + 0.5 * g.shell_thickness;
  const double r_web = g.radius - 0.5 * g.shell_thickness - 0.5 * g.web_height;
  const double r_flange = g.radius - 0.5 * g.shell_thickness - g.web_height -
                          0.5 * g.flange_thickness;

  // dV_steel / d(e, h_w, e_w, w_f, e_f)
  Eigen::VectorXd d_steel(5);
  d_steel[0] = 2.0 * kPi * (g.radius * g.frame_spacing -
                            0.5 * g.web_height * g.web_thickness -
                            0.5 * g.flange_width * g.flange_thickness);
  d_steel[1] = 2.0 * kPi * (g.web_thickness *
                                (g.radius - 0.5 * g.shell_thickness - g.web_height) -
                            g.flange_width * g.flange_thickness);
  d_steel[2] = 2.0 * kPi * r_web * g.web_height;
  d_steel[3] = 2.0 * kPi * r_flange * g.flange_thickness;
  d_steel[4] = 2.0 * kPi * g.flange_width *
               (g.radius - 0.5 * g.shell_thickness - g.web_height - g.flange_thickness);

  Eigen::VectorXd d_water = Eigen::VectorXd::Zero(5);
  d_water[0] = kPi * r_shell_out * g.frame_spacing;

  const double rho = material.steel_density / material.sea_water_density;
  return rho * (d_steel * v.water - v.steel * d_water) / (v.water * v.water);
}

HullGeometry hull_geometry_from_physical(const Eigen::VectorXd& x) {
  if (x.size() != kHullDim)
    throw std::invalid_argument("hull: physical vector must have 13 components");
  HullGeometry g;
  g.frame_spacing = x[3];
  g.radius = x[4];
  g.shell_thickness = x[5];
  g.web_height = x[6];
  g.web_thickness = x[7];
  g.flange_width = x[8];
  g.flange_thickness = x[9];
  return g;
}

Material hull_material_from_physical(const Eigen::VectorXd& x) {
  if (x.size() != kHullDim)
    throw std::invalid_argument("hull: physical vector must have 13 components");
  Material m;
  m.youngs_modulus = x[0];
  m.poisson = x[1];
  m.yield_stress = x[2];
  return m;
}

std::pair<double, double> IllustrativeCollapseModel::pressures(
    const HullGeometry& g, const Material& mat, double out_of_roundness,
    double out_of_straightness) const {
  g.validate();
  mat.validate();
  const double e = g.shell_thickness, R = g.radius, L = g.frame_spacing;

  // Combined section inertia of shell strip + web + flange about the shell
  // mid-surface.
  const double inertia =
      L * e * e * e / 12.0 + g.web_thickness * std::pow(g.web_height, 3) / 12.0 +
      g.web_height * g.web_thickness * std::pow(0.5 * (g.web_height + e), 2) +
      g.flange_width * std::pow(g.flange_thickness, 3) / 12.0 +
      g.flange_width * g.flange_thickness *
          std::pow(g.web_height + 0.5 * (e + g.flange_thickness), 2);
  const double area_ratio =
      (g.web_height * g.web_thickness + g.flange_width * g.flange_thickness) / L;

  const int n = mode_overall;
  const double p_elastic_overall =
      (n * n - 1.0) * mat.youngs_modulus * inertia / (R * R * R * L);
  const double p_yield = mat.yield_stress * (e + area_ratio) / R;
  const double knock_n = 1.0 / (1.0 + 3.0 * std::max(out_of_roundness, 0.0) / e);
  const double pe_n = p_elastic_overall * knock_n;
  const double p_overall = p_yield * pe_n / (p_yield + pe_n);

  // Von Mises style interframe pressure for a short cylinder.
  const double t2r = e / (2.0 * R);
  const double p_elastic_inter =
      2.42 * mat.youngs_modulus * std::pow(t2r, 2.5) /
      (std::pow(1.0 - mat.poisson * mat.poisson, 0.75) *
       (L / (2.0 * R) - 0.45 * std::sqrt(t2r)));
  const double knock_m = 1.0 / (1.0 + 2.0 * std::max(out_of_straightness, 0.0) / e);
  const double pe_m = std::max(p_elastic_inter, 1e-12) * knock_m;
  const double p_yield_shell = mat.yield_stress * e / R;
  const double p_interframe = p_yield_shell * pe_m / (p_yield_shell + pe_m);

  return {p_overall, p_interframe};
}

std::unique_ptr<CollapsePressureModel> make_collapse_model(const std::string& name) {
  if (name == "illustrative") return std::make_unique<IllustrativeCollapseModel>();
  throw std::invalid_argument("unknown collapse pressure model: " + name);
}

std::tuple<double, double, double> hull_limit_states(
    const Eigen::VectorXd& x, const CollapsePressureModel& collapse) {
  const HullGeometry g = hull_geometry_from_physical(x);
  const Material m = hull_material_from_physical(x);
  const double p0 = x[12];
  const auto [p_n, p_m] = collapse.pressures(g, m, x[10], x[11]);
  if (!(p_n > 0.0) || !(p_m > 0.0))
    throw std::runtime_error("collapse model '" + collapse.name() +
                             "' returned a nonpositive pressure");
  const double g1 = std::log(p_n / p0);
  const double g2 = std::log(p_m / p0);
  return {g1, g2, std::min(g1, g2)};
}

std::pair<double, double> bs5500_stiffener_bounds(const HullGeometry& geometry,
                                                  const Material& material,
                                                  double c_web, double c_flange) {
  geometry.validate();
  const double slenderness = std::sqrt(material.youngs_modulus / material.yield_stress);
  const double f1 = std::isfinite(c_web)
                        ? geometry.web_height / geometry.web_thickness -
                              c_web * slenderness
                        : -kInf;
  const double f2 = std::isfinite(c_flange)
                        ? geometry.flange_width / geometry.flange_thickness -
                              c_flange * slenderness
                        : -kInf;
  return {f1, f2};
}

RandomVectorSpec hull_stochastic_model() {
  const double radius = 2488.0, spacing = 600.0;
  const double a_n_mean = 5.0 * radius / 3000.0;
  const double a_m_mean = spacing / 300.0;
  RandomVectorSpec spec;
  spec.marginals = {
      {"E", MarginalFamily::Lognormal, 200000.0, 10000.0, std::nullopt},
      {"nu", MarginalFamily::Deterministic, 0.30, 0.0, std::nullopt},
      {"sigma_y", MarginalFamily::Lognormal, 390.0, 19.5, std::nullopt},
      {"L_s", MarginalFamily::Deterministic, spacing, 0.0, std::nullopt},
      {"R", MarginalFamily::Deterministic, radius, 0.0, std::nullopt},
      {"e", MarginalFamily::Lognormal, 24.0, 0.72, 0},
      {"h_w", MarginalFamily::Lognormal, 156.0, 4.68, 1},
      {"e_w", MarginalFamily::Lognormal, 10.0, 0.30, 2},
      {"w_f", MarginalFamily::Lognormal, 120.0, 3.60, 3},
      {"e_f", MarginalFamily::Lognormal, 24.0, 0.72, 4},
      {"A_n", MarginalFamily::Lognormal, a_n_mean, 0.5 * a_n_mean, std::nullopt},
      {"A_m", MarginalFamily::Lognormal, a_m_mean, 0.5 * a_m_mean, std::nullopt},
      {"p0", MarginalFamily::Deterministic, 2.0, 0.0, std::nullopt},
  };
  return spec;
}

DesignVector hull_design_space(double lower_factor, double upper_factor) {
  DesignVector d;
  d.values.resize(5);
  d.values << 24.0, 156.0, 10.0, 120.0, 24.0;
  d.lower = lower_factor * d.values;
  d.upper = upper_factor * d.values;
  return d;
}

}  // namespace relopt
