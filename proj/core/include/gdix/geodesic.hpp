#pragma once

#include <optional>
#include <vector>

#include "gdix/metric.hpp"
#include "gdix/ode.hpp"

namespace gdix {

struct GeodesicOptions {
  double atol = 1e-11;
  double rtol = 1e-11;
  int max_steps = 2000000;
};

// Unit-speed geodesic sampled on a uniform r grid together with a parallel
// frame F(r) (columns F_1..F_n, F_n = velocity). Values between nodes come
// from cubic Hermite interpolation using the stored derivatives.
class GeodesicPath {
 public:
  GeodesicPath() = default;

  int dim() const { return n_; }
  std::size_t size() const { return r_.size(); }
  double dr() const { return dr_; }
  double r_max() const { return r_.empty() ? 0.0 : r_.back(); }

  const std::vector<double>& r_grid() const { return r_; }
  const Vec& point(std::size_t k) const { return x_[k]; }
  const Vec& velocity(std::size_t k) const { return v_[k]; }
  const Mat& frame(std::size_t k) const { return F_[k]; }
  const Mat& gram() const { return gram_; }

  Vec point_at(double r) const;
  Vec velocity_at(double r) const;
  Mat frame_at(double r) const;

 private:
  friend GeodesicPath shoot_geodesic(const MetricField&, const Vec&, const Vec&, double, double,
                                     const std::optional<Mat>&, const GeodesicOptions&);

  // locates the node interval holding r and the local parameter in [0, 1]
  std::size_t locate(double r, double& s) const;

  int n_ = 0;
  double dr_ = 0.0;
  std::vector<double> r_;
  std::vector<Vec> x_;
  std::vector<Vec> v_;
  std::vector<Vec> a_;
  std::vector<Mat> F_;
  std::vector<Mat> dF_;
  Mat gram_;
};

// Gram-Schmidt from the chart basis with F_n = eta; the result is
// g-orthonormal.
Mat default_frame(const MetricField& m, const Vec& x, const Vec& eta);

// Integrates the geodesic equation from x in direction eta (unit in g)
// over [0, r_max] on a grid of step dr, transporting F0 (default_frame when
// not given) in parallel. Grid nodes are hit exactly by the adaptive
// integrator.
GeodesicPath shoot_geodesic(const MetricField& m, const Vec& x, const Vec& eta, double r_max,
                            double dr, const std::optional<Mat>& F0 = std::nullopt,
                            const GeodesicOptions& opts = {});

// Frames along an existing path for another initial basis F0 (last column
// must equal the initial velocity).
std::vector<Mat> parallel_frame(const MetricField& m, const GeodesicPath& path, const Mat& F0);

// Endpoint of the geodesic of length |v|_g leaving x along v, with the
// velocity there (unit) and, optionally, a transported set of vectors.
struct GeodesicEnd {
  Vec x;
  Vec v;
  Mat transported;
};
GeodesicEnd exp_map(const MetricField& m, const Vec& x, const Vec& v,
                    const Mat* transport = nullptr, const GeodesicOptions& opts = {});

// The (n-1)x(n-1) block of F^{-1} R(., v)v F at one point.
Mat curvature_block(const MetricField& m, const Vec& x, const Vec& v, const Mat& F);

// Curvature coefficients at every node of the path.
std::vector<Mat> curvature_coeffs(const MetricField& m, const GeodesicPath& path);

// Curvature coefficients sampled on a uniform grid r0 + k*h. Built with
// h = dr/2 so that classical RK4 on the node grid finds its stage values
// directly.
struct CurvatureTrack {
  double r0 = 0.0;
  double h = 0.0;
  std::vector<Mat> R;

  std::size_t size() const { return R.size(); }
  double r_end() const { return r0 + h * static_cast<double>(R.size() - 1); }
  // local cubic Lagrange interpolation
  Mat at(double r) const;
};
CurvatureTrack curvature_track(const MetricField& m, const GeodesicPath& path);

// ---- Fermi coordinates ---------------------------------------------------

struct FermiChart {
  GeodesicPath base;
  double rho = 0.0;
  double r_lo = 0.0;
  double r_hi = 0.0;
};

// exp_{γ(r)}(Σ s^k F_k(r)).
Vec fermi_map(const MetricField& m, const FermiChart& chart, const Vec& s, double r);

// Damped Newton on the shooting residual. Returns (s, r) stacked as an
// n-vector; throws Injectivity when Newton fails to converge.
Vec fermi_inverse(const MetricField& m, const FermiChart& chart, const Vec& x,
                  const Vec& guess, double tol = 1e-10);

// Largest tube radius (searched by bisection up to rho_max) for which Ψ
// stays a local diffeomorphism and Newton round trips succeed on a sample
// of the window [r_lo, r_hi].
double fermi_window_radius(const MetricField& m, const GeodesicPath& base, double r_lo,
                           double r_hi, double rho_max, int samples = 5);

// Builds a chart after checking injectivity on the window by sampling.
FermiChart make_fermi_chart(const MetricField& m, GeodesicPath base, double rho, double r_lo,
                            double r_hi, int samples = 5);

}  // namespace gdix
