#include "gdix/dataset.hpp"

#include <cmath>
#include <random>

#include <Eigen/SVD>
#include <sstream>

#include "gdix/errors.hpp"
#include "gdix/numerics.hpp"

namespace gdix {

std::vector<double> uniform_nodes(double lo, double hi, double h) {
  if (!(h > 0) || hi < lo) throw Error(ErrorKind::Config, "bad uniform node range");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / h + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + h * static_cast<double>(i);
  return out;
}

TGrid make_tgrid(double t_start, double delta_t, double t_max) {
  if (!(delta_t > 0) || !(t_start > 0) || t_max < t_start) {
    throw Error(ErrorKind::Config, "t grid needs 0 < t_start <= t_max and delta_t > 0");
  }
  TGrid g;
  g.t_start = t_start;
  g.delta_t = delta_t;
  g.count = static_cast<std::size_t>(std::floor((t_max - t_start) / delta_t + 1e-9)) + 1;
  return g;
}

std::size_t WavefrontDataset::masked_count() const {
  std::size_t c = 0;
  for (const auto& row : mask)
    for (uint8_t v : row) c += v;
  return c;
}

// ---- Σ₀ geometry ---------------------------------------------------------

Mat sigma0_basis(const MetricField& m, const Sigma0Spec& spec) {
  const int n = m.dim();
  const Mat g = m.eval(spec.center);
  const double an = std::sqrt(spec.axis.dot(g * spec.axis));
  if (an == 0.0) throw Error(ErrorKind::ZeroVector, "sigma0 axis is zero");
  const Mat E = default_frame(m, spec.center, spec.axis / an);
  Mat B(n, n);
  B.col(0) = E.col(n - 1);
  for (int k = 0; k < n - 1; ++k) B.col(k + 1) = E.col(k);
  return B;
}

Vec sigma0_direction(const Mat& B, const Vec& xhat) {
  if (B.cols() == 2) return std::cos(xhat[0]) * B.col(0) + std::sin(xhat[0]) * B.col(1);
  const double a = xhat[0], b = xhat[1];
  return std::cos(b) * std::cos(a) * B.col(0) + std::cos(b) * std::sin(a) * B.col(1) +
         std::sin(b) * B.col(2);
}

Mat sigma0_direction_jacobian(const Mat& B, const Vec& xhat) {
  const auto n = B.cols();
  Mat D(n, n - 1);
  if (n == 2) {
    D.col(0) = -std::sin(xhat[0]) * B.col(0) + std::cos(xhat[0]) * B.col(1);
    return D;
  }
  const double a = xhat[0], b = xhat[1];
  D.col(0) = std::cos(b) * (-std::sin(a) * B.col(0) + std::cos(a) * B.col(1));
  D.col(1) = -std::sin(b) * std::cos(a) * B.col(0) - std::sin(b) * std::sin(a) * B.col(1) +
             std::cos(b) * B.col(2);
  return D;
}

std::vector<Vec> sigma0_nodes(const Sigma0Spec& spec) {
  std::vector<Vec> out;
  if (spec.xhat_axes.size() == 1) {
    for (double a : spec.xhat_axes[0]) out.push_back(Vec::Constant(1, a));
  } else if (spec.xhat_axes.size() == 2) {
    for (double a : spec.xhat_axes[0]) {
      for (double b : spec.xhat_axes[1]) {
        Vec v(2);
        v << a, b;
        out.push_back(v);
      }
    }
  } else {
    throw Error(ErrorKind::Config, "xhat grid must have dim - 1 axes");
  }
  return out;
}

Sigma0Point sigma0_point(const MetricField& m, const Sigma0Spec& spec, const Mat& B,
                         const Vec& xhat) {
  const int n = m.dim();
  const int k = n - 1;
  if (xhat.size() != k) throw Error(ErrorKind::Config, "xhat has wrong dimension");
  const Vec theta = sigma0_direction(B, xhat);
  const Mat dtheta = sigma0_direction_jacobian(B, xhat);
  const Mat P0 = default_frame(m, spec.center, theta);
  const Mat c0 = P0.inverse() * dtheta;  // last row vanishes: ∂θ ⟂ θ

  // state: x, v, P (n columns), C (k columns of length k), C'
  const Eigen::Index size = 2 * n + n * n + 2 * k * k;
  State y = State::Zero(size);
  y.head(n) = spec.center;
  y.segment(n, n) = theta;
  for (int c = 0; c < n; ++c) y.segment(2 * n + c * n, n) = P0.col(c);
  const Eigen::Index oc = 2 * n + n * n;
  const Eigen::Index od = oc + k * k;
  for (int c = 0; c < k; ++c) y.segment(od + c * k, k) = c0.col(c).head(k);

  Rhs f = [&m, n, k, oc, od](double, const State& s, State& ds) {
    const Vec x = s.head(n);
    const Vec v = s.segment(n, n);
    Mat P(n, n);
    for (int c = 0; c < n; ++c) P.col(c) = s.segment(2 * n + c * n, n);
    const MetricJet jet = m.jet(x, 2);
    const Tensor3 gamma = christoffel(jet);
    const Mat D = directional_curvature(riemann(jet), v);
    const Mat R = (P.inverse() * D * P).topLeftCorner(k, k);
    ds.resize(s.size());
    ds.head(n) = v;
    ds.segment(n, n) = christoffel_contract(gamma, v, v);
    for (int c = 0; c < n; ++c) {
      ds.segment(2 * n + c * n, n) = christoffel_contract(gamma, v, P.col(c));
    }
    for (int c = 0; c < k; ++c) {
      const Vec C = s.segment(oc + c * k, k);
      ds.segment(oc + c * k, k) = s.segment(od + c * k, k);
      ds.segment(od + c * k, k) = -R * C;
    }
  };
  AdaptiveOptions opts;
  opts.atol = 1e-13;
  opts.rtol = 1e-12;
  double h = 0.01;
  y = integrate_dopri5(f, y, 0.0, spec.t0, opts, &h);

  Sigma0Point sp;
  sp.xhat = xhat;
  sp.point = y.head(n);
  const Mat g = m.eval(sp.point);
  Vec nu = y.segment(n, n);
  sp.normal = nu / std::sqrt(nu.dot(g * nu));
  Mat P(n, n);
  for (int c = 0; c < n; ++c) P.col(c) = y.segment(2 * n + c * n, n);
  sp.coord_vectors.resize(n, k);
  for (int c = 0; c < k; ++c) {
    sp.coord_vectors.col(c) = P.leftCols(k) * y.segment(oc + c * k, k);
  }
  return sp;
}

Mat inward_frame(const Sigma0Point& sp) {
  const auto n = sp.point.size();
  Mat F(n, n);
  F.leftCols(n - 1) = sp.coord_vectors;
  F.col(n - 1) = -sp.normal;
  return F;
}

GeodesicPath inward_geodesic(const MetricField& m, const Sigma0Point& sp, double r_max,
                             double dr) {
  return shoot_geodesic(m, sp.point, -sp.normal, r_max, dr, inward_frame(sp));
}

// ---- dataset -------------------------------------------------------------

WavefrontDataset forward_dataset(const MetricField& m, const Sigma0Spec& spec, const TGrid& grid,
                                 const ForwardOptions& opts) {
  const int n = m.dim();
  if (spec.center.size() != n || spec.axis.size() != n) {
    throw Error(ErrorKind::Config, "sigma0 center/axis have wrong dimension");
  }
  if (static_cast<int>(spec.xhat_axes.size()) != n - 1) {
    throw Error(ErrorKind::Config, "xhat grid must have dim - 1 axes");
  }
  if (grid.count == 0) throw Error(ErrorKind::Config, "empty t grid");

  WavefrontDataset ds;
  ds.dim = n;
  ds.t0 = spec.t0;
  ds.t_grid = grid;
  for (const auto& ax : spec.xhat_axes) ds.xhat_shape.push_back(static_cast<int>(ax.size()));
  ds.xhat = sigma0_nodes(spec);
  const std::size_t N = ds.xhat.size();
  ds.points.resize(N);
  ds.normals.resize(N);
  ds.frames.resize(N);
  ds.grams.resize(N);
  ds.samples.assign(N, std::vector<Mat>(grid.count));
  ds.mask.assign(N, std::vector<uint8_t>(grid.count, 0));

  const Mat B = sigma0_basis(m, spec);
  const double r_end = grid.t_max() + opts.dr;
  const double band = opts.caustic_band * grid.delta_t;
  parallel_for(N, opts.jobs, [&](std::size_t i) {
    const Sigma0Point sp = sigma0_point(m, spec, B, ds.xhat[i]);
    const GeodesicPath path = inward_geodesic(m, sp, r_end, opts.dr);
    const JacobiPropagator prop(curvature_track(m, path));
    ds.points[i] = sp.point;
    ds.normals[i] = sp.normal;
    ds.frames[i] = path.frame(0);
    ds.grams[i] = path.gram();
    for (std::size_t it = 0; it < grid.count; ++it) {
      const double t = grid.at(it);
      SourceShape s = source_shape_at_origin(prop, t);
      if (!s.masked && band > 0 && t >= 2.0 * band) {
        const double smax = Eigen::JacobiSVD<Eigen::MatrixXd>(s.S).singularValues()(0);
        if (smax * band > 1.0) s = SourceShape{Mat::Zero(s.S.rows(), s.S.cols()), true};
      }
      ds.samples[i][it] = s.S;
      ds.mask[i][it] = s.masked ? 1 : 0;
    }
  });
  return ds;
}

void add_noise(WavefrontDataset& ds, double sigma, std::uint64_t seed) {
  if (sigma <= 0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, sigma);
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    for (std::size_t t = 0; t < ds.samples[i].size(); ++t) {
      if (ds.mask[i][t]) continue;
      Mat& S = ds.samples[i][t];
      for (Eigen::Index a = 0; a < S.rows(); ++a)
        for (Eigen::Index b = 0; b < S.cols(); ++b) S(a, b) += nd(rng);
    }
  }
}

}  // namespace gdix
