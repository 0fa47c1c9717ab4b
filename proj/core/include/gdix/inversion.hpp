#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "gdix/dataset.hpp"

namespace gdix {

// V^j(r, τ) = ∂_t^j K(r, t)|_{t=τ}, j = 0..3, on a fixed set of t nodes.
struct VState {
  double r = 0.0;
  std::vector<double> t;
  std::vector<Mat> V0, V1, V2, V3;

  std::size_t size() const { return t.size(); }
  double max_norm() const;
};

struct StepControl {
  double curvature_bound = 0.0;  // 𝒦
  double ball_radius = 0.0;      // ℛ
  double lipschitz = 0.0;        // L(ℛ)
  double t2 = 0.0;
};

struct CurvatureProfile {
  std::vector<double> r;
  std::vector<Mat> R;
};

// Numerical t-derivatives of K on the given nodes (7-point stencils, 8
// points when shifted against a window end). Nodes may be nonuniform.
VState initial_vstate(const std::vector<double>& t, const std::vector<Mat>& K, double r);

// Same, starting from shape operators on a window of a sampled t grid.
// Throws SingularShape if some S in [t_lo, t_hi] is not invertible.
VState initial_vstate(const std::vector<double>& t, const std::vector<Mat>& S,
                      const std::vector<uint8_t>& mask, double t_lo, double t_hi, double r = 0.0);

// V³(r, r) by cubic interpolation over the four nearest t nodes.
Mat diag_eval(const VState& V, double r);

struct VDerivative {
  std::vector<Mat> dV0, dV1, dV2, dV3;
};
VDerivative vsystem_rhs(const VState& V, const Mat& R);

// Smoothness diagnostic: noise level of K estimated from sixth differences
// on uniform runs of the nodes, and the implied error of V³.
struct NoiseEstimate {
  double sigma_K = 0.0;
  double sigma_V3 = 0.0;
};
NoiseEstimate estimate_noise(const VState& V, double delta_t);

struct MarchResult {
  VState final_state;
  CurvatureProfile profile;       // R at every sub-step start, plus the end
  std::vector<PairMat> phi;       // Jacobi propagator from the start to each profile node
  std::vector<VState> trajectory; // filled only on request
  double max_norm = 0.0;
};

// RK4 march of the V-system from V.r to r_end with sub-steps of at most dr.
// R = ½V³(r, r) is re-evaluated at every stage, and the Jacobi propagator
// is advanced with the same stage values. Throws BlowUp outside the ball
// (when ball_radius > 0) and OutOfWindow if the diagonal leaves the nodes.
MarchResult march_vsystem(const VState& V, double r_end, double dr, double ball_radius = 0.0,
                          bool keep_trajectory = false);

// t2 = ½ min(π/(4√𝒦), 1/L, ℛ/(2(1 + 4ℛ³))) with L = 12ℛ² unless given.
StepControl step_bound(double curvature_bound, double ball_radius,
                       std::optional<double> lipschitz = std::nullopt);

// Shape operators at a new origin r1 from those at r0 by solving the
// Jacobi Cauchy problems j(r0) = I, j'(r0) = -S(r0, t) through the profile.
struct ShapeTable {
  double r = 0.0;
  std::vector<double> t;
  std::vector<Mat> S;
  std::vector<uint8_t> mask;
};
ShapeTable continue_past_step(const CurvatureProfile& profile, const ShapeTable& from, double r1);

// One geodesic's data: S(0, t) on a uniform t grid.
struct DataSlice {
  std::vector<double> t;
  std::vector<Mat> S;
  std::vector<uint8_t> mask;
  double delta_t = 0.0;
  Mat gram;  // (n-1) x (n-1) block of ĝ
};
DataSlice slice_from_dataset(const WavefrontDataset& ds, std::size_t xhat_index);

struct InversionOptions {
  double dr = 0.0;             // 0: use delta_t
  double max_window = 0.4;
  double max_step = std::numeric_limits<double>::infinity();
  bool strict_step = false;
  std::optional<double> curvature_bound;  // 𝒦
  std::optional<double> ball_radius;      // ℛ
  std::optional<double> lipschitz;
  double noise_threshold = 1e-2;  // tolerated error of V³ from data noise
  double pole_tolerance = 1e-6;   // |det S| below this ends a window
  bool keep_tables = true;
};

struct JointInfo {
  double r = 0.0;
  double R_jump = 0.0;  // ‖R(r⁻) − R(r⁺)‖
  double window = 0.0;
  std::size_t window_nodes = 0;
  NoiseEstimate noise;
  StepControl control;
};

struct Reconstruction {
  CurvatureProfile profile;
  std::vector<PairMat> propagator;  // Φ(0 → r) at each profile node
  std::vector<JointInfo> joints;
  std::vector<ShapeTable> tables;   // S(r_joint, t) at every joint
  std::vector<double> conjugate_r;  // zeros of det j for j(0) = 0, j'(0) = I
  double reached_r = 0.0;

  int crossed_conjugate_points() const { return static_cast<int>(conjugate_r.size()); }
  // Jacobi pair at profile node k for the Cauchy data (j0, dj0) at r = 0.
  PairMat solve_cauchy(std::size_t k, const Mat& j0, const Mat& dj0) const;
  // Φ(0 → r) between profile nodes by cubic Hermite interpolation, with the
  // slopes Φ' = [0 I; -R 0] Φ taken from the profile.
  PairMat propagator_at(double r) const;
};

Reconstruction reconstruct_along_geodesic(const DataSlice& data, double r_max,
                                          const InversionOptions& opts = {});

}  // namespace gdix
