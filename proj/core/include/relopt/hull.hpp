#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <tuple>

#include "relopt/distributions.hpp"

namespace relopt {

// Ring-stiffened single bay; all lengths in mm.
struct HullGeometry {
  double shell_thickness = 0.0;   // e
  double web_height = 0.0;        // h_w
  double web_thickness = 0.0;     // e_w
  double flange_width = 0.0;      // w_f
  double flange_thickness = 0.0;  // e_f
  double frame_spacing = 0.0;     // L_s
  double radius = 0.0;            // R (mid-surface)

  void validate() const;
};

struct Material {
  double youngs_modulus = 200000.0;  // MPa
  double poisson = 0.30;
  double yield_stress = 390.0;       // MPa
  double steel_density = 7850.0;     // kg/m^3
  double sea_water_density = 1026.0; // kg/m^3

  void validate() const;
};

// Collapse pressures for the overall (mode n) and interframe (mode m)
// buckling scenarios. The detailed semi-analytical design formulas live
// outside this toolkit; implementations plug in behind this interface.
class CollapsePressureModel {
 public:
  virtual ~CollapsePressureModel() = default;
  virtual std::string name() const = 0;
  // Returns (p_overall, p_interframe) in MPa; both must be positive.
  virtual std::pair<double, double> pressures(const HullGeometry& geometry,
                                              const Material& material,
                                              double out_of_roundness,
                                              double out_of_straightness) const = 0;
  int mode_overall = 2;      // n
  int mode_interframe = 14;  // m
};

// Smooth elastic-buckling-style stand-in for demo runs ONLY: plausible
// magnitudes and monotone trends, not a design formula.
class IllustrativeCollapseModel final : public CollapsePressureModel {
 public:
  std::string name() const override { return "illustrative"; }
  std::pair<double, double> pressures(const HullGeometry& geometry,
                                      const Material& material,
                                      double out_of_roundness,
                                      double out_of_straightness) const override;
};

std::unique_ptr<CollapsePressureModel> make_collapse_model(const std::string& name);

// Steel mass over displaced water mass for one bay, as a fraction.
// Conventions: shell as the annulus about the mid-surface radius, stiffener
// internal to the shell, displacement to the outer shell surface.
double hull_cost(const HullGeometry& geometry, const Material& material);

// Analytic partials of hull_cost with respect to (e, h_w, e_w, w_f, e_f).
Eigen::VectorXd hull_cost_gradient(const HullGeometry& geometry, const Material& material);

// Physical vector layout used by the hull limit states (Table order):
// E, nu, sigma_y, L_s, R, e, h_w, e_w, w_f, e_f, A_n, A_m, p0.
inline constexpr int kHullDim = 13;
HullGeometry hull_geometry_from_physical(const Eigen::VectorXd& x);
Material hull_material_from_physical(const Eigen::VectorXd& x);

// g1 = log(p_overall / p0), g2 = log(p_interframe / p0), g = min(g1, g2).
std::tuple<double, double, double> hull_limit_states(
    const Eigen::VectorXd& x, const CollapsePressureModel& collapse);

// Deterministic stiffener proportion bounds of the generic slenderness form
// h_w/e_w <= C1 sqrt(E/sigma_y) and w_f/e_f <= C2 sqrt(E/sigma_y), returned
// as (f1, f2) <= 0 when admissible. Infinite constants disable a bound
// (value -inf).
std::pair<double, double> bs5500_stiffener_bounds(const HullGeometry& geometry,
                                                  const Material& material,
                                                  double c_web = 1.1,
                                                  double c_flange = 0.5);

// Stochastic model of the single bay with the five stiffener/shell means as
// design variables (linked in the order e, h_w, e_w, w_f, e_f).
RandomVectorSpec hull_stochastic_model();
DesignVector hull_design_space(double lower_factor = 0.5, double upper_factor = 2.0);

}  // namespace relopt
