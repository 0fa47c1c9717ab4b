#pragma once

#include <limits>
#include <vector>

#include "gdix/geodesic.hpp"

namespace gdix {

// Fundamental solution of j'' + 𝐫 j = 0 along a path:
//   [j(r); j'(r)] = Φ(r) [j(r0); j'(r0)],  Φ(r0) = I,
// tabulated at the path nodes. Classical RK4 on the node grid with stage
// values taken from the half-step curvature track.
class JacobiPropagator {
 public:
  JacobiPropagator() = default;
  explicit JacobiPropagator(CurvatureTrack track);

  int block() const { return m_; }
  const CurvatureTrack& track() const { return track_; }
  std::size_t size() const { return phi_.size(); }
  double node_r(std::size_t k) const { return track_.r0 + 2.0 * track_.h * static_cast<double>(k); }
  const PairMat& phi(std::size_t k) const { return phi_[k]; }

  // Φ at any r in range; off-node values are integrated from the nearest
  // node with an adaptive method on the interpolated curvature.
  PairMat phi_at(double r) const;

 private:
  int m_ = 0;
  CurvatureTrack track_;
  std::vector<PairMat> phi_;
};

// One RK4 step of size 2h for the pair state P (rows: j then j') using
// curvature samples Ra, Rm, Rb at the step start, middle and end.
PairMat jacobi_rk4_step(const PairMat& P, const Mat& Ra, const Mat& Rm, const Mat& Rb,
                        double step);

// Right-hand side of the pair system.
PairMat jacobi_rhs(const PairMat& P, const Mat& R);

// Solution of the point-source problem j(t_center) = 0, j'(t_center) = -I
// sampled at the path nodes.
struct JacobiMatrix {
  double t_center = 0.0;
  std::vector<double> r;
  std::vector<Mat> j;
  std::vector<Mat> dj;
  std::vector<Mat> ddj;

  // cubic Hermite values between nodes
  Mat j_at(double r) const;
  Mat dj_at(double r) const;
};

JacobiMatrix point_source_jacobi(const MetricField& m, const GeodesicPath& path, double t_center);
JacobiMatrix point_source_jacobi(const JacobiPropagator& prop, double t_center);

struct ShapeData {
  double r = 0.0;
  double t = std::numeric_limits<double>::quiet_NaN();
  Mat S;
  Mat K;
  bool has_K = false;
};

// S = -j' j^{-1}. Throws ConjugatePoint when |det j| < 1e-8 (t - r)^{n-1}.
ShapeData shape_from_jacobi(const JacobiMatrix& jm, double r);
ShapeData shape_from_pair(const Mat& j, const Mat& dj, double r, double t);

// S(0, t) for the point source at t directly from the propagator; sets
// `masked` instead of throwing at conjugate points.
struct SourceShape {
  Mat S;
  bool masked = false;
};
SourceShape source_shape_at_origin(const JacobiPropagator& prop, double t);

// Zeros of det j on the path (the centre itself excluded), refined to well
// below dr. In three dimensions a double zero (both eigenvalues at once,
// as on round spheres) is located as a minimum of the smallest singular
// value.
std::vector<double> conjugate_points(const JacobiMatrix& jm);

// Marches ∂_r S = S² + 𝐫 from S(r0) to r1 (either direction) with RK4 on the
// path grid. Both r0 and r1 must be path nodes.
std::vector<ShapeData> riccati_march(const MetricField& m, const GeodesicPath& path,
                                     const Mat& S_init, double r0, double r1,
                                     double t = std::numeric_limits<double>::quiet_NaN());
std::vector<ShapeData> riccati_march(const CurvatureTrack& track, const Mat& S_init, double r0,
                                     double r1,
                                     double t = std::numeric_limits<double>::quiet_NaN());

}  // namespace gdix
