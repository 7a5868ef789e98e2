#pragma once

#include <Eigen/Dense>

#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace translift {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Parameter or interval outside the declared domain.
struct domain_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Endpoint mismatch when joining paths.
struct composition_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structural violation in a bundle, foliation or group model.
struct model_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Chart singularity (e.g. a sphere pole) or a point outside the chart.
struct chart_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unresolvable or malformed run configuration.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Comparison slack for path parameters.
inline constexpr double kParamTol = 1e-9;
// Pointwise path-equality tolerance on sample grids.
inline constexpr double kPathEqTol = 1e-9;
// Base-point slack when deciding fibre membership.
inline constexpr double kFibreMatchTol = 1e-7;
// Default residual tolerances: exact algebra vs fixed-step ODE backends.
inline constexpr double kAlgebraicTol = 1e-10;
inline constexpr double kOdeTol = 1e-6;
// Group elements are reprojected once their constraint residual passes this.
inline constexpr double kGroupDriftTol = 1e-9;

inline Vec make_vec(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

inline std::mt19937 seeded_rng(unsigned seed) { return std::mt19937{seed}; }

}  // namespace translift
