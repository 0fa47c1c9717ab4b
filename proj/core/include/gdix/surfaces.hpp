#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "gdix/metric.hpp"

namespace gdix {

// A sampled generalized metric sphere: radius t and points on it with unit
// normals. The sign of the normals is arbitrary (one sign per surface).
struct SphericalSurfaceSample {
  double t = 0.0;
  std::vector<Vec> points;
  std::vector<Vec> normals;
};

struct SurfaceFamily {
  int dim = 0;
  Box region;
  std::vector<SphericalSurfaceSample> surfaces;
};

// Kept apart from the family; algorithms never see it.
struct SurfaceFamilyTruth {
  std::vector<Vec> centers;
};

struct FamilyOptions {
  std::size_t count = 300;
  double t_lo = 0.02;
  double t_hi = 0.05;
  std::size_t points_per_surface = 96;
  // if > 0, every sample stays within this chart distance of disk_center
  double disk_radius = 0.0;
  Vec disk_center;
  std::uint64_t seed = 1;
};

// Random centres in the region, radius uniform in [t_lo, t_hi], points
// exp_y(t θ) for evenly spread θ. Surfaces leaving the region are redrawn.
std::pair<SurfaceFamily, SurfaceFamilyTruth> generate_surface_family(const MetricField& m,
                                                                      const Box& region,
                                                                      const FamilyOptions& opts);

struct ChainOptions {
  double snap_radius = 0.0;  // 0: twice the link radius
  double link_radius = 0.0;  // 0: median spacing of neighbouring samples on a surface
};

// Points of different surfaces closer than the link radius are taken as
// one point. Every pair of samples on one surface is joined with weight 2t;
// a chain is a path in this graph.
class ChainGraph {
 public:
  ChainGraph(const SurfaceFamily& fam, const ChainOptions& opts = {});

  std::size_t point_count() const { return points_.size(); }
  const Vec& point(std::size_t i) const { return points_[i]; }
  double link_radius() const { return link_; }
  double snap_radius() const { return snap_; }

  // Nearest sample within the snap radius; throws Snap otherwise.
  std::size_t snap(const Vec& x) const;
  // Chain weight from one sample to all samples (infinity if unreachable).
  std::vector<double> distances_from(std::size_t source) const;
  // Throws Disconnected if no chain joins the snapped points.
  double distance(const Vec& x, const Vec& z) const;

 private:
  std::vector<Vec> points_;
  std::vector<double> radius_;                   // per surface
  std::vector<std::vector<std::size_t>> members_;  // surface -> points
  std::vector<std::vector<std::size_t>> on_;       // point -> surfaces
  std::vector<std::vector<std::size_t>> linked_;   // point -> merged points
  double link_ = 0.0;
  double snap_ = 0.0;
};

double chain_distance(const SurfaceFamily& fam, const Vec& x, const Vec& z,
                      const ChainOptions& opts = {});

// (d(x, z_1), ..., d(x, z_n)) from chain weights. The Jacobian with respect
// to the chart is fitted over samples within probe_radius of x; throws
// DegenerateLandmarks if its condition number exceeds 1e3. A probe radius
// of 0 skips the check.
Vec distance_coordinates(const ChainGraph& graph, const Vec& x, const std::vector<Vec>& landmarks,
                         double probe_radius);

// Least-squares fit of d(y, y')² = Δᵀ g Δ over all probe pairs, Δ the
// difference of the probes' coordinates. Coordinates may be distance
// coordinates or the chart itself. Throws IllConditioned if the normal
// equations are singular or the result is not positive definite.
struct MetricFit {
  Mat g;
  double rms_residual = 0.0;  // of d², relative to the mean d²
  std::size_t pairs = 0;
};
MetricFit estimate_metric_from_distances(const std::vector<Vec>& coords,
                                         const std::function<double(std::size_t, std::size_t)>& dist);

// For normal ζ₀ at sample x0 of surface `index`: plus is true when ζ₀ is
// in N₁, i.e. the sphere is traced out by geodesics γ_{y,η}(t) with
// y = γ_{x0,ζ₀}(-t) (ζ₀ points away from that centre); minus likewise for
// -ζ₀. Both hold for an equator of the round sphere.
struct OrientationResult {
  bool plus = false;
  bool minus = false;
  double spread_plus = 0.0;
  double spread_minus = 0.0;
  double tolerance = 0.0;
  // the normals that point at a centre, i.e. -ν for ν in N₁
  std::vector<Vec> centre_pointing(const Vec& zeta0) const;
};

struct OrientationOptions {
  double epsilon = 0.02;
  std::size_t neighbours = 12;
};

// The flow uses `m`: the true metric or one recovered in U.
OrientationResult orientation_test(const MetricField& m, const SurfaceFamily& fam,
                                   std::size_t index, std::size_t x0, const Vec& zeta0,
                                   const OrientationOptions& opts = {});

}  // namespace gdix
