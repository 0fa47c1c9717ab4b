#include "gdix/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <Eigen/SVD>

#include "gdix/errors.hpp"
#include "gdix/numerics.hpp"

namespace gdix {

namespace {

double sigma_min(const Mat& A) {
  const Eigen::MatrixXd d = A;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(d);
  return svd.singularValues().minCoeff();
}

double spectral_norm(const Mat& A) {
  const Eigen::MatrixXd d = A;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(d);
  return svd.singularValues().maxCoeff();
}

bool positive_definite(const Mat& G) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(G), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > 0;
}

// S(0, t0) from the samples; off-grid t0 is interpolated in K = S⁻¹.
Mat source_shape(const DataSlice& d, double t0) {
  const std::span<const double> t(d.t);
  const std::size_t s0 = stencil_start(t, t0, 4);
  for (std::size_t q = s0; q < s0 + 4 && q < d.t.size(); ++q) {
    if (std::abs(d.t[q] - t0) < 1e-9 * std::max(1.0, t0)) {
      if (d.mask[q]) {
        throw Error(ErrorKind::ConjugateMask, "S(0, t0) is masked: Σ₀ meets a caustic of its centre");
      }
      return d.S[q];
    }
  }
  const auto w = lagrange_weights(t0, t.subspan(s0, 4));
  Mat K = Mat::Zero(d.S[0].rows(), d.S[0].cols());
  for (std::size_t q = 0; q < 4; ++q) {
    if (d.mask[s0 + q]) throw Error(ErrorKind::ConjugateMask, "S(0, t0) stencil is masked");
    K += w[q] * d.S[s0 + q].inverse();
  }
  return K.inverse();
}

// A node is masked when the smallest singular value of j is within about
// 1.5 grid steps of vanishing at the current rate of change.
void mask_singular(const std::vector<Mat>& D, const std::vector<double>& r, double step,
                   std::vector<uint8_t>& mask) {
  for (std::size_t k = 0; k < D.size(); ++k) {
    const std::size_t a = k == 0 ? 0 : k - 1;
    const std::size_t b = std::min(k + 1, D.size() - 1);
    const double rate = spectral_norm(D[b] - D[a]) / (r[b] - r[a]);
    if (sigma_min(D[k]) < 1.5 * step * rate) mask[k] = 1;
  }
}

std::vector<double> axis_values(const ReconstructedChart& c, int axis) {
  std::vector<double> v;
  if (axis == 0) {
    const std::size_t stride = c.xhat_shape.size() > 1 ? static_cast<std::size_t>(c.xhat_shape[1]) : 1;
    for (int i = 0; i < c.xhat_shape[0]; ++i) v.push_back(c.xhat[static_cast<std::size_t>(i) * stride][0]);
  } else {
    for (int j = 0; j < c.xhat_shape[1]; ++j) v.push_back(c.xhat[static_cast<std::size_t>(j)][1]);
  }
  return v;
}

class ChartModel : public MetricModel {
 public:
  explicit ChartModel(const ReconstructedChart& c) : chart_(c) {
    for (std::size_t a = 0; a < c.xhat_shape.size(); ++a) axes_.push_back(axis_values(c, static_cast<int>(a)));
  }

  int dim() const override { return chart_.dim; }

  Box natural_domain() const override {
    const int n = chart_.dim;
    Box b{Vec(n), Vec(n)};
    // one node spacing of clamped extrapolation on each x̂ side
    for (int a = 0; a < n - 1; ++a) {
      const double pad = axes_[a].size() > 1 ? axes_[a][1] - axes_[a][0] : 0.0;
      b.lo[a] = axes_[a].front() - pad;
      b.hi[a] = axes_[a].back() + pad;
    }
    b.lo[n - 1] = chart_.r.front();
    b.hi[n - 1] = chart_.r.back();
    return b;
  }

  Mat metric(const Vec& x) const override {
    const int n = chart_.dim;
    const int k = n - 1;
    const std::span<const double> rs(chart_.r);
    const std::size_t r0 = stencil_start(rs, x[n - 1], 4);
    const auto wr = lagrange_weights(x[n - 1], rs.subspan(r0, 4));
    std::vector<std::size_t> s0;
    std::vector<std::vector<double>> w;
    for (int a = 0; a < k; ++a) {
      const std::span<const double> ax(axes_[a]);
      const std::size_t cnt = std::min<std::size_t>(4, ax.size());
      s0.push_back(stencil_start(ax, x[a], cnt));
      w.push_back(lagrange_weights(x[a], ax.subspan(s0.back(), cnt)));
    }
    Mat G = Mat::Zero(k, k);
    auto add_column = [&](std::size_t xi, double wx) {
      for (std::size_t q = 0; q < 4; ++q) G += wx * wr[q] * chart_.g_hat[xi][r0 + q];
    };
    if (k == 1) {
      for (std::size_t p = 0; p < w[0].size(); ++p) add_column(s0[0] + p, w[0][p]);
    } else {
      const std::size_t stride = axes_[1].size();
      for (std::size_t p = 0; p < w[0].size(); ++p)
        for (std::size_t q = 0; q < w[1].size(); ++q)
          add_column((s0[0] + p) * stride + s0[1] + q, w[0][p] * w[1][q]);
    }
    Mat g = Mat::Zero(n, n);
    g.topLeftCorner(k, k) = 0.5 * (G + G.transpose());
    g(n - 1, n - 1) = 1.0;
    return g;
  }

 private:
  ReconstructedChart chart_;
  std::vector<std::vector<double>> axes_;
};

// Metric in Fermi coordinates at base parameter r by Richardson-extrapolated
// central differences of the Fermi map.
std::vector<Mat> fermi_column(const MetricField& m, const FermiChart& fc, const std::vector<Vec>& s,
                              double r) {
  const int n = m.dim();
  const double h = 1e-3;
  std::vector<Mat> out;
  for (const Vec& sv : s) {
    auto psi = [&](int dir, double d) {
      Vec q = sv;
      double rv = r;
      if (dir < n - 1) {
        q[dir] += d;
      } else {
        rv += d;
      }
      return fermi_map(m, fc, q, rv);
    };
    Mat J(n, n);
    for (int c = 0; c < n; ++c) {
      const Vec d1 = (psi(c, h) - psi(c, -h)) / (2 * h);
      const Vec d2 = (psi(c, h / 2) - psi(c, -h / 2)) / h;
      J.col(c) = (4.0 * d2 - d1) / 3.0;
    }
    out.push_back(J.transpose() * m.eval(fermi_map(m, fc, sv, r)) * J);
  }
  return out;
}

double fermi_reach(const std::vector<Vec>& s) {
  double rho = 0.0;
  for (const Vec& v : s) rho = std::max(rho, v.norm());
  return rho;
}

// Gram-Schmidt of the columns of a basis with Gram matrix G: B C is
// orthonormal for the upper triangular C returned.
Mat gram_schmidt_coefficients(const Mat& G) {
  const Eigen::LLT<Eigen::MatrixXd> llt{Eigen::MatrixXd(G)};
  const Eigen::MatrixXd Lt = llt.matrixU();
  return Lt.inverse();
}

// Gram-Schmidt of the Σ₀ coordinate vectors against the normal, with -ν last.
Mat sigma0_fermi_frame(const MetricField& m, const Sigma0Point& sp) {
  const int n = m.dim();
  const Mat g = m.eval(sp.point);
  Mat F(n, n);
  for (int c = 0; c < n - 1; ++c) {
    Vec w = sp.coord_vectors.col(c);
    for (int pass = 0; pass < 2; ++pass) {
      w -= w.dot(g * sp.normal) * sp.normal;
      for (int q = 0; q < c; ++q) w -= w.dot(g * F.col(q)) * F.col(q);
    }
    F.col(c) = w / std::sqrt(w.dot(g * w));
  }
  F.col(n - 1) = -sp.normal;
  return F;
}

Mat jacobi_at(const ReconstructedChart& c, std::size_t xi, double r) {
  const std::span<const double> rs(c.r);
  const std::size_t s0 = stencil_start(rs, r, 4);
  const auto w = lagrange_weights(r, rs.subspan(s0, 4));
  Mat j = Mat::Zero(c.dim - 1, c.dim - 1);
  for (std::size_t q = 0; q < 4; ++q) j += w[q] * c.jacobi[xi][s0 + q];
  return j;
}

// Throws unless the chart can serve Fermi samples of reach rho at r.
void check_tube(const ReconstructedChart& c, double r, double rho) {
  const double step = c.r[1] - c.r[0];
  const double margin = rho + 3 * step + 0.01;
  if (r - margin < c.r.front() || r + margin > c.r.back()) {
    throw Error(ErrorKind::OutOfWindow, "Fermi tube at r = " + std::to_string(r) + " leaves the chart");
  }
  for (std::size_t i = 0; i < c.xhat.size(); ++i) {
    for (std::size_t k = 0; k < c.r.size(); ++k) {
      if (c.mask[i][k] && std::abs(c.r[k] - r) <= margin) {
        throw Error(ErrorKind::ConjugateMask, "Fermi tube at r = " + std::to_string(r) +
                                                  " meets a masked node at r = " + std::to_string(c.r[k]));
      }
    }
  }
}

bool tube_failure(const Error& e) {
  return e.kind() == ErrorKind::ConjugateMask || e.kind() == ErrorKind::OutOfWindow ||
         e.kind() == ErrorKind::Domain || e.kind() == ErrorKind::DegenerateMetric;
}

// Fermi samples of one chart around x̂ node xi at a single r.
std::vector<Mat> chart_fermi_column(const ReconstructedChart& c, const MetricField& M, std::size_t xi,
                                    const std::vector<Vec>& s, double r) {
  if (c.jacobi.empty()) throw Error(ErrorKind::Config, "chart has no Jacobi matrices");
  const int n = c.dim;
  const int k = n - 1;
  check_tube(c, r, fermi_reach(s));
  const Mat j0 = c.jacobi[xi][0];
  const Mat j0inv = j0.inverse();
  const Mat ghat = j0inv.transpose() * c.g_hat[xi][0] * j0inv;
  const Mat C = gram_schmidt_coefficients(ghat);
  const double lead = 0.01;
  Vec x0(n);
  x0.head(k) = c.xhat[xi];
  x0[k] = r - lead;
  Mat F0 = Mat::Zero(n, n);
  F0.topLeftCorner(k, k) = jacobi_at(c, xi, r - lead).inverse() * C;
  F0(k, k) = 1.0;
  FermiChart fc;
  fc.base = shoot_geodesic(M, x0, Vec::Unit(n, k), 2 * lead, lead / 4, F0);
  fc.rho = fermi_reach(s);
  fc.r_lo = 0.0;
  fc.r_hi = 2 * lead;
  return fermi_column(M, fc, s, lead);
}

}  // namespace

std::size_t ReconstructedChart::masked_count() const {
  std::size_t c = 0;
  for (const auto& row : mask)
    for (uint8_t v : row) c += v;
  return c;
}

Mat ReconstructedChart::full_metric(std::size_t x, std::size_t k) const {
  const int n = dim;
  Mat g = Mat::Zero(n, n);
  g.topLeftCorner(n - 1, n - 1) = g_hat[x][k];
  g(n - 1, n - 1) = 1.0;
  return g;
}

std::vector<double> chart_r_grid(double r_max, double r_step) {
  return uniform_nodes(0.0, r_max, r_step);
}

ReconstructedChart recover_chart(const WavefrontDataset& ds, double r_max,
                                 const RecoveryOptions& opts) {
  const int n = ds.dim;
  const int k = n - 1;
  const double step = opts.r_step > 0 ? opts.r_step : ds.t_grid.delta_t;
  ReconstructedChart chart;
  chart.dim = n;
  chart.t0 = ds.t0;
  chart.xhat_shape = ds.xhat_shape;
  chart.xhat = ds.xhat;
  chart.config_hash = ds.config_hash;
  chart.r = chart_r_grid(r_max, step);
  const std::size_t N = ds.xhat.size();
  const std::size_t R = chart.r.size();
  chart.g_hat.assign(N, std::vector<Mat>(R, Mat::Zero(k, k)));
  chart.jacobi.assign(N, std::vector<Mat>(R, Mat::Zero(k, k)));
  chart.mask.assign(N, std::vector<uint8_t>(R, 0));
  std::vector<std::string> failures(N);

  InversionOptions inv = opts.inversion;
  inv.keep_tables = false;
  const Mat I = Mat::Identity(k, k);
  parallel_for(N, opts.jobs, [&](std::size_t i) {
    try {
      const DataSlice d = slice_from_dataset(ds, i);
      const Mat S0 = source_shape(d, ds.t0);
      const Reconstruction rec = reconstruct_along_geodesic(d, r_max, inv);
      PairMat P0(2 * k, k);
      P0.topRows(k) = I;
      P0.bottomRows(k) = -S0;
      std::vector<Mat> dj(R);
      for (std::size_t q = 0; q < R; ++q) {
        const PairMat P = rec.propagator_at(chart.r[q]) * P0;
        const Mat j = P.topRows(k);
        dj[q] = P.bottomRows(k);
        chart.jacobi[i][q] = j;
        chart.g_hat[i][q] = j.transpose() * d.gram * j;
      }
      for (std::size_t q = 0; q < R; ++q) {
        const double rate = spectral_norm(dj[q]);
        if (sigma_min(chart.jacobi[i][q]) < 1.5 * step * rate || !positive_definite(chart.g_hat[i][q])) {
          chart.mask[i][q] = 1;
        }
      }
    } catch (const Error& e) {
      if (!opts.allow_partial) throw;
      failures[i] = "xhat " + std::to_string(i) + ": " + e.what();
      std::fill(chart.mask[i].begin(), chart.mask[i].end(), uint8_t{1});
    }
  });
  for (auto& f : failures)
    if (!f.empty()) chart.notes.push_back(std::move(f));
  return chart;
}

ReconstructedChart ground_truth_chart(const MetricField& m, const Sigma0Spec& spec,
                                      const std::vector<double>& r_grid, double dxhat, int jobs) {
  const int n = m.dim();
  const int k = n - 1;
  if (r_grid.size() < 3) throw Error(ErrorKind::Config, "ground truth needs at least 3 r nodes");
  ReconstructedChart chart;
  chart.dim = n;
  chart.t0 = spec.t0;
  for (const auto& ax : spec.xhat_axes) chart.xhat_shape.push_back(static_cast<int>(ax.size()));
  chart.xhat = sigma0_nodes(spec);
  chart.r = r_grid;
  const std::size_t N = chart.xhat.size();
  const std::size_t R = r_grid.size();
  chart.g_hat.assign(N, std::vector<Mat>(R, Mat::Zero(k, k)));
  chart.mask.assign(N, std::vector<uint8_t>(R, 0));
  std::vector<double> dev_rr(N, 0.0), dev_rx(N, 0.0);

  const Mat B = sigma0_basis(m, spec);
  const double step = r_grid[1] - r_grid[0];
  const double dpath = std::min(step / 4, 0.001);
  const double ahead = spec.t0 - r_grid.front();
  const double behind = r_grid.back() - spec.t0;

  // points and velocities of the radial geodesic from the centre at signed
  // distance t0 - r, for every r
  auto radial = [&](const Vec& xhat, std::vector<Vec>& X, std::vector<Vec>& V) {
    const Vec theta = sigma0_direction(B, xhat);
    X.assign(R, Vec());
    V.assign(R, Vec());
    std::optional<GeodesicPath> fwd, bwd;
    if (ahead > 0) fwd = shoot_geodesic(m, spec.center, theta, ahead + dpath, dpath);
    if (behind > 0) bwd = shoot_geodesic(m, spec.center, Vec(-theta), behind + dpath, dpath);
    for (std::size_t q = 0; q < R; ++q) {
      const double d = spec.t0 - r_grid[q];
      if (d >= 0) {
        X[q] = fwd ? fwd->point_at(d) : spec.center;
        V[q] = fwd ? Vec(-fwd->velocity_at(d)) : Vec(-theta);
      } else {
        X[q] = bwd->point_at(-d);
        V[q] = bwd->velocity_at(-d);
      }
    }
  };

  parallel_for(N, jobs, [&](std::size_t i) {
    std::vector<Vec> X, V;
    radial(chart.xhat[i], X, V);
    std::vector<Mat> D(R, Mat(n, k));
    for (int a = 0; a < k; ++a) {
      std::vector<Vec> P1, M1, P2, M2, tmp;
      Vec e = Vec::Zero(k);
      e[a] = 1.0;
      radial(chart.xhat[i] + dxhat * e, P1, tmp);
      radial(chart.xhat[i] - dxhat * e, M1, tmp);
      radial(chart.xhat[i] + 0.5 * dxhat * e, P2, tmp);
      radial(chart.xhat[i] - 0.5 * dxhat * e, M2, tmp);
      for (std::size_t q = 0; q < R; ++q) {
        const Vec d1 = (P1[q] - M1[q]) / (2 * dxhat);
        const Vec d2 = (P2[q] - M2[q]) / dxhat;
        D[q].col(a) = (4.0 * d2 - d1) / 3.0;
      }
    }
    std::vector<Mat> Dn(R);
    for (std::size_t q = 0; q < R; ++q) {
      const Mat g = m.eval(X[q]);
      chart.g_hat[i][q] = D[q].transpose() * g * D[q];
      dev_rr[i] = std::max(dev_rr[i], std::abs(V[q].dot(g * V[q]) - 1.0));
      const Vec cross = D[q].transpose() * g * V[q];
      dev_rx[i] = std::max(dev_rx[i], cross.cwiseAbs().maxCoeff());
      // D in a g-orthonormal basis, for the singularity test
      Eigen::LLT<Eigen::MatrixXd> llt{Eigen::MatrixXd(g)};
      const Eigen::MatrixXd U = llt.matrixU();
      Dn[q] = U * Eigen::MatrixXd(D[q]);
    }
    mask_singular(Dn, r_grid, step, chart.mask[i]);
  });
  chart.gauss_rr = *std::max_element(dev_rr.begin(), dev_rr.end());
  chart.gauss_rx = *std::max_element(dev_rx.begin(), dev_rx.end());
  return chart;
}

MetricField chart_metric_field(const ReconstructedChart& chart) {
  if (chart.r.size() < 4) throw Error(ErrorKind::Config, "chart needs at least 4 r nodes");
  for (int s : chart.xhat_shape) {
    if (s < 2) throw Error(ErrorKind::Config, "chart needs at least 2 nodes per x̂ axis");
  }
  auto model = std::make_shared<ChartModel>(chart);
  const Box box = model->natural_domain();
  return MetricField(model, MetricKind::Tabulated, DerivativeMode::FiniteDifference, box, 1e-5);
}

FermiSamples to_fermi(const ReconstructedChart& chart, std::size_t xhat_index,
                      const std::vector<Vec>& s, const std::vector<double>& r) {
  return stitched_fermi(chart, xhat_index, {}, s, r);
}

FermiSamples fermi_truth(const MetricField& m, const Sigma0Spec& spec, const Vec& xhat,
                         const std::vector<Vec>& s, const std::vector<double>& r) {
  const Sigma0Point sp = sigma0_point(m, spec, sigma0_basis(m, spec), xhat);
  const double r_end = *std::max_element(r.begin(), r.end()) + 0.01;
  FermiChart fc;
  fc.base = shoot_geodesic(m, sp.point, Vec(-sp.normal), r_end, 0.005, sigma0_fermi_frame(m, sp));
  fc.rho = fermi_reach(s);
  fc.r_lo = 0.0;
  fc.r_hi = r_end;
  FermiSamples out;
  out.s = s;
  out.r = r;
  out.g.assign(s.size(), std::vector<Mat>(r.size()));
  out.source.assign(r.size(), 0);
  for (std::size_t k = 0; k < r.size(); ++k) {
    const std::vector<Mat> col = fermi_column(m, fc, s, r[k]);
    for (std::size_t i = 0; i < s.size(); ++i) out.g[i][k] = col[i];
  }
  return out;
}

RestartSurface restart_surface(const MetricField& m, const Sigma0Spec& base, const Vec& xhat0,
                               double offset) {
  const int n = m.dim();
  const int k = n - 1;
  const Sigma0Point sp = sigma0_point(m, base, sigma0_basis(m, base), xhat0);
  const Mat E = sigma0_fermi_frame(m, sp);
  // back along the geodesic into the known region, carrying the frame
  const Mat normal_frame = E.leftCols(k);
  const GeodesicEnd back = exp_map(m, sp.point, offset * sp.normal, &normal_frame);
  const GeodesicEnd centre = exp_map(m, back.x, -base.t0 * back.v);
  RestartSurface out;
  out.offset = offset;
  out.spec.center = centre.x;
  out.spec.t0 = base.t0;
  out.spec.axis = -centre.v;
  out.spec.xhat_axes = base.xhat_axes;
  for (std::size_t a = 0; a < out.spec.xhat_axes.size(); ++a)
    for (double& v : out.spec.xhat_axes[a]) v -= xhat0[static_cast<int>(a)];
  const Sigma0Point rp = sigma0_point(m, out.spec, sigma0_basis(m, out.spec), Vec::Zero(k));
  const Mat T = sigma0_fermi_frame(m, rp).leftCols(k);
  out.alignment = T.transpose() * m.eval(rp.point) * back.transported;
  return out;
}

FermiSamples stitched_fermi(const ReconstructedChart& base, std::size_t xhat_index,
                            const std::vector<RestartChart>& restarts,
                            const std::vector<Vec>& s, const std::vector<double>& r) {
  if (xhat_index >= base.xhat.size()) throw Error(ErrorKind::Config, "x̂ index out of range");
  const int n = base.dim;
  const int k = n - 1;
  const MetricField M = chart_metric_field(base);
  std::vector<MetricField> RM;
  for (const RestartChart& rc : restarts) RM.push_back(chart_metric_field(rc.chart));
  FermiSamples out;
  out.s = s;
  out.r = r;
  out.g.assign(s.size(), std::vector<Mat>(r.size()));
  out.source.assign(r.size(), 0);
  for (std::size_t q = 0; q < r.size(); ++q) {
    std::vector<Mat> col;
    try {
      col = chart_fermi_column(base, M, xhat_index, s, r[q]);
    } catch (const Error& e) {
      if (!tube_failure(e) || restarts.empty()) throw;
      for (std::size_t c = 0; c < restarts.size() && col.empty(); ++c) {
        const RestartChart& rc = restarts[c];
        const Mat& Q = rc.alignment;
        std::vector<Vec> st;
        for (const Vec& v : s) st.push_back(Q * v);
        try {
          col = chart_fermi_column(rc.chart, RM[c], rc.xhat_index, st, r[q] + rc.offset);
        } catch (const Error& inner) {
          if (!tube_failure(inner)) throw;
          continue;
        }
        Mat P = Mat::Identity(n, n);
        P.topLeftCorner(k, k) = Q;
        for (Mat& g : col) g = P.transpose() * g * P;
        out.source[q] = static_cast<int>(c) + 1;
      }
      if (col.empty()) throw;
    }
    for (std::size_t i = 0; i < s.size(); ++i) out.g[i][q] = col[i];
  }
  return out;
}

ErrorReport chart_error(const ReconstructedChart& a, const ReconstructedChart& b) {
  if (a.dim != b.dim || a.xhat.size() != b.xhat.size() || a.r.size() != b.r.size()) {
    throw Error(ErrorKind::GridMismatch, "charts have different grid sizes");
  }
  for (std::size_t i = 0; i < a.xhat.size(); ++i) {
    if ((a.xhat[i] - b.xhat[i]).cwiseAbs().maxCoeff() > 1e-9) {
      throw Error(ErrorKind::GridMismatch, "x̂ node " + std::to_string(i) + " differs");
    }
  }
  for (std::size_t k = 0; k < a.r.size(); ++k) {
    if (std::abs(a.r[k] - b.r[k]) > 1e-9) {
      throw Error(ErrorKind::GridMismatch, "r node " + std::to_string(k) + " differs");
    }
  }
  ErrorReport rep;
  rep.r = a.r;
  rep.per_r_max.assign(a.r.size(), 0.0);
  std::vector<double> all;
  std::size_t masked = 0;
  for (std::size_t i = 0; i < a.xhat.size(); ++i) {
    for (std::size_t k = 0; k < a.r.size(); ++k) {
      if (a.mask[i][k]) ++masked;
      if (a.mask[i][k] || b.mask[i][k]) continue;
      const double den = b.g_hat[i][k].norm();
      const double diff = (a.g_hat[i][k] - b.g_hat[i][k]).norm();
      const double rel = den > 0 ? diff / den : diff;
      all.push_back(rel);
      rep.per_r_max[k] = std::max(rep.per_r_max[k], rel);
    }
  }
  rep.compared = all.size();
  rep.masked_frac = static_cast<double>(masked) / static_cast<double>(a.xhat.size() * a.r.size());
  if (!all.empty()) {
    std::sort(all.begin(), all.end());
    auto quant = [&](double p) {
      return all[std::min(all.size() - 1, static_cast<std::size_t>(p * static_cast<double>(all.size() - 1) + 0.5))];
    };
    rep.max_rel = all.back();
    rep.median_rel = quant(0.5);
    rep.q90_rel = quant(0.9);
    rep.q99_rel = quant(0.99);
  }
  return rep;
}

std::vector<std::vector<Vec>> chart_radial_curvature(const ReconstructedChart& chart) {
  const int k = chart.dim - 1;
  const std::size_t R = chart.r.size();
  std::vector<std::vector<Vec>> out(chart.xhat.size(), std::vector<Vec>(R, Vec::Constant(k, std::nan(""))));
  if (R < 5) return out;
  const double step = chart.r[1] - chart.r[0];
  // fourth-order differences on a stride of about 0.02; the truncation error
  // is divided by g_hat, which vanishes at masked nodes
  const auto w = static_cast<std::size_t>(std::max(1.0, std::round(0.02 / step)));
  const double h = step * static_cast<double>(w);
  for (std::size_t i = 0; i < chart.xhat.size(); ++i) {
    for (std::size_t q = 2 * w; q + 2 * w < R; ++q) {
      bool masked = false;
      for (std::size_t p = q - 2 * w; p <= q + 2 * w; ++p) masked = masked || chart.mask[i][p];
      if (masked) continue;
      const Mat& G = chart.g_hat[i][q];
      const Mat& m2 = chart.g_hat[i][q - 2 * w];
      const Mat& m1 = chart.g_hat[i][q - w];
      const Mat& p1 = chart.g_hat[i][q + w];
      const Mat& p2 = chart.g_hat[i][q + 2 * w];
      const Mat d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12 * h);
      const Mat d2 = (-m2 + 16.0 * m1 - 30.0 * G + 16.0 * p1 - p2) / (12 * h * h);
      const Mat Rm = -0.5 * d2 + 0.25 * d1 * G.inverse() * d1;
      for (int a = 0; a < k; ++a) out[i][q][a] = Rm(a, a) / G(a, a);
    }
  }
  return out;
}

}  // namespace gdix
