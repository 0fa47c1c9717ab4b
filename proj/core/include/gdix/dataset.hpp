#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gdix/jacobi.hpp"

namespace gdix {

// Σ₀: the metric sphere of radius t0 about `center`, parametrized by
// direction angles x̂ at the centre. `axis` (unit in g) is the direction
// with x̂ = 0. In two dimensions x̂ is one angle; in three, x̂ = (a, b) with
// θ = cos b cos a e1 + cos b sin a e2 + sin b e3 and e1 = axis.
struct Sigma0Spec {
  Vec center;
  double t0 = 1.0;
  Vec axis;
  // one list of node values per x̂ coordinate; the grid is their product
  std::vector<std::vector<double>> xhat_axes;
};

// Uniform list lo, lo + h, ..., hi (inclusive within 1e-9 h).
std::vector<double> uniform_nodes(double lo, double hi, double h);

struct TGrid {
  double t_start = 0.005;
  double delta_t = 0.005;
  std::size_t count = 0;

  double at(std::size_t i) const { return t_start + delta_t * static_cast<double>(i); }
  double t_max() const { return at(count - 1); }
};
TGrid make_tgrid(double t_start, double delta_t, double t_max);

// Orthonormal basis (e1, ..., en) at the centre with e1 = axis.
Mat sigma0_basis(const MetricField& m, const Sigma0Spec& spec);
// Unit direction θ(x̂) at the centre and its derivatives ∂θ/∂x̂ (columns).
Vec sigma0_direction(const Mat& basis, const Vec& xhat);
Mat sigma0_direction_jacobian(const Mat& basis, const Vec& xhat);
// All x̂ nodes in row-major order over xhat_axes.
std::vector<Vec> sigma0_nodes(const Sigma0Spec& spec);

// Geometry of Σ₀ at one x̂: point, outward unit normal ν and the coordinate
// vectors F_j = ∂x/∂x̂^j (columns), obtained from Jacobi fields along the
// radial geodesic from the centre.
struct Sigma0Point {
  Vec xhat;
  Vec point;
  Vec normal;
  Mat coord_vectors;  // n x (n-1)
};
Sigma0Point sigma0_point(const MetricField& m, const Sigma0Spec& spec, const Mat& basis,
                         const Vec& xhat);

// Frame [F_1..F_{n-1}, -ν] for the inward geodesic.
Mat inward_frame(const Sigma0Point& sp);

struct WavefrontDataset {
  int dim = 0;
  double t0 = 0.0;
  TGrid t_grid;
  std::vector<int> xhat_shape;      // node count per x̂ axis
  std::vector<Vec> xhat;            // row-major over the shape
  std::vector<Vec> points;
  std::vector<Vec> normals;
  std::vector<Mat> frames;          // n x n, columns F_1..F_n at r = 0
  std::vector<Mat> grams;           // n x n
  std::vector<std::vector<Mat>> samples;   // [xhat][t] (n-1) x (n-1)
  std::vector<std::vector<uint8_t>> mask;  // [xhat][t], 1 = masked
  std::string config_hash;

  std::size_t xhat_count() const { return xhat.size(); }
  std::size_t masked_count() const;
};

struct ForwardOptions {
  double dr = 0.005;
  int jobs = 1;
  // Samples whose distance to a focus, estimated as 1 / σ_max(S), is below
  // caustic_band·δt are masked. Samples within 2·caustic_band·δt of the
  // source are exempt. 0 masks only exact conjugate points. The inversion
  // cannot step over two consecutive masked nodes, so a band is for
  // inspecting data rather than for feeding the reconstruction.
  double caustic_band = 0.0;
};

// Shoots the inward geodesic of every x̂ (to the end of the t grid) and
// fills S(x̂, 0, t) from point-source Jacobi fields.
WavefrontDataset forward_dataset(const MetricField& m, const Sigma0Spec& spec, const TGrid& grid,
                                 const ForwardOptions& opts = {});

// The inward geodesic from Σ₀ at one x̂ with its Σ₀-adapted frame.
GeodesicPath inward_geodesic(const MetricField& m, const Sigma0Point& sp, double r_max,
                             double dr);

// Adds N(0, sigma²) to every unmasked sample entry; deterministic in seed.
void add_noise(WavefrontDataset& ds, double sigma, std::uint64_t seed);

}  // namespace gdix
