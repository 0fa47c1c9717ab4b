#pragma once

#include <string>
#include <vector>

#include "gdix/inversion.hpp"

namespace gdix {

// Metric in the (x̂, r) coordinates of a fan of inward geodesics from Σ₀.
// The block structure g_rr = 1, g_{r x̂} = 0 is implied; g_hat holds the
// (n-1) x (n-1) block g(∂_x̂ʲ, ∂_x̂ᵏ).
struct ReconstructedChart {
  int dim = 0;
  double t0 = 0.0;
  std::vector<int> xhat_shape;
  std::vector<Vec> xhat;
  std::vector<double> r;
  std::vector<std::vector<Mat>> g_hat;      // [x][r]
  std::vector<std::vector<Mat>> jacobi;     // [x][r], 𝐣(x̂, r; t0); empty for ground truth
  std::vector<std::vector<uint8_t>> mask;   // [x][r], 1 = masked
  std::vector<std::string> notes;           // per-geodesic failures in partial charts
  std::string config_hash;
  // ground truth only: largest |g_rr - 1| and |g(∂_r, ∂_x̂)|
  double gauss_rr = 0.0;
  double gauss_rx = 0.0;

  std::size_t masked_count() const;
  // Full n x n metric at one node, coordinates ordered (x̂..., r).
  Mat full_metric(std::size_t x, std::size_t k) const;
};

struct RecoveryOptions {
  InversionOptions inversion;
  double r_step = 0.0;  // 0: the data's delta_t
  int jobs = 1;
  bool allow_partial = false;
};

// Runs the reconstruction along every x̂ geodesic, solves the Cauchy
// problem j(0) = I, j'(0) = -S(0, t0) through the recovered curvature and
// forms g_hat = jᵀ ĝ j. Nodes where j is (nearly) singular are masked; these
// are the points conjugate to the centre of Σ₀, the centre included.
ReconstructedChart recover_chart(const WavefrontDataset& ds, double r_max,
                                 const RecoveryOptions& opts = {});

// The same chart from the true metric: X(x̂, r) = exp_y((t0 - r) θ(x̂)) and
// its x̂-derivatives by Richardson-extrapolated central differences.
ReconstructedChart ground_truth_chart(const MetricField& m, const Sigma0Spec& spec,
                                      const std::vector<double>& r_grid, double dxhat = 0.01,
                                      int jobs = 1);

std::vector<double> chart_r_grid(double r_max, double r_step);

// Metric with coordinates (x̂..., r) interpolated from a chart (tensor cubic
// Lagrange); first derivatives by finite differences.
MetricField chart_metric_field(const ReconstructedChart& chart);

// Metric samples in Fermi coordinates (s, r) around the geodesic x̂ = x̂₀.
// The frame at r is [∂_x̂] 𝐣(r)⁻¹ C, C the Gram-Schmidt coefficients of ĝ,
// so it is the parallel transport of the orthonormalized Σ₀ coordinate
// vectors. Throws ConjugateMask when the tube around r touches masked nodes.
struct FermiSamples {
  std::vector<Vec> s;
  std::vector<double> r;
  std::vector<std::vector<Mat>> g;  // [s][r], n x n
  std::vector<int> source;          // [r]: 0 base chart, k > 0 restart k - 1
};
FermiSamples to_fermi(const ReconstructedChart& chart, std::size_t xhat_index,
                      const std::vector<Vec>& s, const std::vector<double>& r);
// The same from the true metric along the corresponding inward geodesic.
FermiSamples fermi_truth(const MetricField& m, const Sigma0Spec& spec, const Vec& xhat,
                         const std::vector<Vec>& s, const std::vector<double>& r);

// Restart from x̃₀ = γ(-s), γ the inward geodesic of x̂₀: a sphere of the
// same radius t0 about γ(t0 - s), with x̂ = 0 on γ. Points of γ conjugate
// to the new centre differ from those of the old one. `alignment` maps base
// Fermi coordinates to restart ones (s̃ = Q s); it is computed with the
// metric near Σ₀, which is known there.
struct RestartSurface {
  Sigma0Spec spec;
  double offset = 0.0;
  Mat alignment;
};
RestartSurface restart_surface(const MetricField& m, const Sigma0Spec& base, const Vec& xhat0,
                               double offset);

struct RestartChart {
  ReconstructedChart chart;
  std::size_t xhat_index = 0;  // the node with x̂ = 0
  double offset = 0.0;
  Mat alignment;
};

// Fermi samples around x̂₀ of the base chart; r values the base cannot
// serve (masked tube) are taken from the first restart chart that can, at
// r + offset with coordinates rotated by the alignment.
FermiSamples stitched_fermi(const ReconstructedChart& base, std::size_t xhat_index,
                            const std::vector<RestartChart>& restarts,
                            const std::vector<Vec>& s, const std::vector<double>& r);

struct ErrorReport {
  double max_rel = 0.0;
  double median_rel = 0.0;
  double q90_rel = 0.0;
  double q99_rel = 0.0;
  double masked_frac = 0.0;
  std::size_t compared = 0;
  std::vector<double> r;
  std::vector<double> per_r_max;
};

// Relative Frobenius error per node over nodes unmasked in both charts.
// Throws GridMismatch unless the x̂ and r grids agree.
ErrorReport chart_error(const ReconstructedChart& recovered, const ReconstructedChart& truth);

// Sectional curvatures of the radial planes span(∂_r, ∂_x̂ᵃ) from second
// r-differences of g_hat: K = (-½ G'' + ¼ G' G⁻¹ G')_aa / G_aa. NaN where
// the stencil touches a masked node. Result [x][r][a].
std::vector<std::vector<Vec>> chart_radial_curvature(const ReconstructedChart& chart);

}  // namespace gdix
