#include "gdix/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gdix/errors.hpp"
#include "gdix/numerics.hpp"

namespace gdix {

namespace {

// State layout: x (n), v (n), then m transported vectors column by column.
struct Layout {
  int n;
  int m;
  Eigen::Index size() const { return 2 * n + n * m; }
};

State pack(const Vec& x, const Vec& v, const Mat& T) {
  const int n = static_cast<int>(x.size());
  const int m = static_cast<int>(T.cols());
  State y(2 * n + n * m);
  y.head(n) = x;
  y.segment(n, n) = v;
  for (int c = 0; c < m; ++c) y.segment(2 * n + c * n, n) = T.col(c);
  return y;
}

void unpack(const State& y, const Layout& L, Vec& x, Vec& v, Mat& T) {
  x = y.head(L.n);
  v = y.segment(L.n, L.n);
  T.resize(L.n, L.m);
  for (int c = 0; c < L.m; ++c) T.col(c) = y.segment(2 * L.n + c * L.n, L.n);
}

// Geodesic spray with parallel transport of m vectors.
Rhs geodesic_rhs(const MetricField& m, Layout L) {
  return [&m, L](double, const State& y, State& dy) {
    const Vec x = y.head(L.n);
    const Vec v = y.segment(L.n, L.n);
    const Tensor3 gamma = christoffel(m, x);
    dy.resize(y.size());
    dy.head(L.n) = v;
    dy.segment(L.n, L.n) = christoffel_contract(gamma, v, v);
    for (int c = 0; c < L.m; ++c) {
      const Vec f = y.segment(2 * L.n + c * L.n, L.n);
      dy.segment(2 * L.n + c * L.n, L.n) = christoffel_contract(gamma, v, f);
    }
  };
}

AdaptiveOptions adaptive(const GeodesicOptions& o) {
  AdaptiveOptions a;
  a.atol = o.atol;
  a.rtol = o.rtol;
  a.max_steps = o.max_steps;
  return a;
}

double g_norm(const Mat& g, const Vec& v) { return std::sqrt(v.dot(g * v)); }

}  // namespace

// ---- GeodesicPath --------------------------------------------------------

std::size_t GeodesicPath::locate(double r, double& s) const {
  if (r_.size() < 2) throw Error(ErrorKind::Domain, "geodesic path has fewer than two nodes");
  const double tol = 1e-9 * dr_;
  if (r < r_.front() - tol || r > r_.back() + tol) {
    std::ostringstream msg;
    msg << "r = " << r << " outside path range [" << r_.front() << ", " << r_.back() << "]";
    throw Error(ErrorKind::Domain, msg.str());
  }
  auto k = static_cast<std::size_t>(std::floor((r - r_.front()) / dr_));
  k = std::min(k, r_.size() - 2);
  s = std::clamp((r - r_[k]) / (r_[k + 1] - r_[k]), 0.0, 1.0);
  return k;
}

Vec GeodesicPath::point_at(double r) const {
  double s;
  const std::size_t k = locate(r, s);
  const double h = r_[k + 1] - r_[k];
  const HermiteBasis b = hermite_basis(s);
  return b.h00 * x_[k] + b.h10 * h * v_[k] + b.h01 * x_[k + 1] + b.h11 * h * v_[k + 1];
}

Vec GeodesicPath::velocity_at(double r) const {
  double s;
  const std::size_t k = locate(r, s);
  const double h = r_[k + 1] - r_[k];
  const HermiteBasis b = hermite_basis(s);
  return b.h00 * v_[k] + b.h10 * h * a_[k] + b.h01 * v_[k + 1] + b.h11 * h * a_[k + 1];
}

Mat GeodesicPath::frame_at(double r) const {
  double s;
  const std::size_t k = locate(r, s);
  const double h = r_[k + 1] - r_[k];
  const HermiteBasis b = hermite_basis(s);
  return b.h00 * F_[k] + b.h10 * h * dF_[k] + b.h01 * F_[k + 1] + b.h11 * h * dF_[k + 1];
}

// ---- shooting ------------------------------------------------------------

Mat default_frame(const MetricField& m, const Vec& x, const Vec& eta) {
  const int n = m.dim();
  const Mat g = m.eval(x);
  const double en = g_norm(g, eta);
  if (en == 0.0) throw Error(ErrorKind::ZeroVector, "frame direction is zero");
  const Vec e = eta / en;
  Mat F(n, n);
  F.col(n - 1) = e;
  int filled = 0;
  for (int c = 0; c < n && filled < n - 1; ++c) {
    Vec w = Vec::Unit(n, c);
    // two passes of modified Gram-Schmidt for stability
    for (int pass = 0; pass < 2; ++pass) {
      w -= w.dot(g * e) * e;
      for (int k = 0; k < filled; ++k) w -= w.dot(g * F.col(k)) * F.col(k);
    }
    const double wn = g_norm(g, w);
    if (wn < 1e-6) continue;
    F.col(filled++) = w / wn;
  }
  return F;
}

GeodesicPath shoot_geodesic(const MetricField& m, const Vec& x, const Vec& eta, double r_max,
                            double dr, const std::optional<Mat>& F0,
                            const GeodesicOptions& opts) {
  const int n = m.dim();
  if (!(r_max > 0) || !(dr > 0)) throw Error(ErrorKind::Config, "r_max and dr must be positive");
  if (x.size() != n || eta.size() != n) throw Error(ErrorKind::Config, "dimension mismatch");
  const Mat g0 = m.eval(x);
  const double speed = g_norm(g0, eta);
  if (speed == 0.0) throw Error(ErrorKind::ZeroVector, "initial direction is zero");
  if (std::abs(speed - 1.0) > 1e-10) {
    std::ostringstream msg;
    msg << "initial direction has g-norm " << speed << ", expected 1";
    throw Error(ErrorKind::Config, msg.str());
  }

  Mat F = F0 ? *F0 : default_frame(m, x, eta);
  if (F.rows() != n || F.cols() != n) throw Error(ErrorKind::Config, "frame has wrong shape");
  if ((F.col(n - 1) - eta).norm() > 1e-10 * (1.0 + eta.norm())) {
    throw Error(ErrorKind::Config, "last frame column must equal the initial direction");
  }
  const double det0 = std::abs(F.determinant());
  if (det0 < 1e-14) throw Error(ErrorKind::SingularFrame, "initial frame is singular");

  GeodesicPath p;
  p.n_ = n;
  p.dr_ = dr;
  p.gram_ = F.transpose() * g0 * F;

  const auto nodes = static_cast<std::size_t>(std::ceil(r_max / dr - 1e-9));
  const Layout L{n, n};
  const Rhs f = geodesic_rhs(m, L);
  State y = pack(x, eta, F);
  State dy(y.size());
  double h = dr;
  const AdaptiveOptions ao = adaptive(opts);

  auto record = [&](double r) {
    Vec xi, vi, unused, ai;
    Mat Fi, dFi;
    unpack(y, L, xi, vi, Fi);
    f(r, y, dy);
    unpack(dy, L, unused, ai, dFi);
    if (std::abs(Fi.determinant()) < 1e-12 * det0) {
      std::ostringstream msg;
      msg << "parallel frame degenerate at r = " << r;
      throw Error(ErrorKind::SingularFrame, msg.str());
    }
    p.r_.push_back(r);
    p.x_.push_back(xi);
    p.v_.push_back(vi);
    p.a_.push_back(ai);
    p.F_.push_back(Fi);
    p.dF_.push_back(dFi);
  };

  record(0.0);
  for (std::size_t k = 1; k <= nodes; ++k) {
    const double r0 = static_cast<double>(k - 1) * dr;
    const double r1 = static_cast<double>(k) * dr;
    y = integrate_dopri5(f, y, r0, r1, ao, &h);
    record(r1);
  }
  return p;
}

std::vector<Mat> parallel_frame(const MetricField& m, const GeodesicPath& path, const Mat& F0) {
  if (path.size() == 0) return {};
  const GeodesicPath q =
      shoot_geodesic(m, path.point(0), path.velocity(0), path.r_max(), path.dr(), F0);
  std::vector<Mat> out;
  out.reserve(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) out.push_back(q.frame(k));
  return out;
}

GeodesicEnd exp_map(const MetricField& m, const Vec& x, const Vec& v, const Mat* transport,
                    const GeodesicOptions& opts) {
  const int n = m.dim();
  const Mat g = m.eval(x);
  const double len = g_norm(g, v);
  GeodesicEnd out;
  if (len == 0.0) {
    out.x = x;
    out.v = Vec::Zero(n);
    if (transport) out.transported = *transport;
    return out;
  }
  const Mat T = transport ? *transport : Mat(n, 0);
  const Layout L{n, static_cast<int>(T.cols())};
  const Rhs f = geodesic_rhs(m, L);
  double h = std::min(len, 0.05);
  State y = integrate_dopri5(f, pack(x, v / len, T), 0.0, len, adaptive(opts), &h);
  unpack(y, L, out.x, out.v, out.transported);
  return out;
}

// ---- curvature along paths -----------------------------------------------

Mat curvature_block(const MetricField& m, const Vec& x, const Vec& v, const Mat& F) {
  const int n = m.dim();
  const Mat D = directional_curvature(riemann(m, x), v);
  const Mat full = F.inverse() * D * F;
  return full.topLeftCorner(n - 1, n - 1);
}

std::vector<Mat> curvature_coeffs(const MetricField& m, const GeodesicPath& path) {
  std::vector<Mat> out;
  out.reserve(path.size());
  for (std::size_t k = 0; k < path.size(); ++k) {
    out.push_back(curvature_block(m, path.point(k), path.velocity(k), path.frame(k)));
  }
  return out;
}

CurvatureTrack curvature_track(const MetricField& m, const GeodesicPath& path) {
  CurvatureTrack tr;
  tr.r0 = path.r_grid().front();
  tr.h = 0.5 * path.dr();
  const std::size_t N = path.size();
  tr.R.resize(2 * N - 1);
  for (std::size_t k = 0; k < N; ++k) {
    tr.R[2 * k] = curvature_block(m, path.point(k), path.velocity(k), path.frame(k));
    if (k + 1 < N) {
      const double rm = 0.5 * (path.r_grid()[k] + path.r_grid()[k + 1]);
      tr.R[2 * k + 1] =
          curvature_block(m, path.point_at(rm), path.velocity_at(rm), path.frame_at(rm));
    }
  }
  return tr;
}

Mat CurvatureTrack::at(double r) const {
  const double u = (r - r0) / h;
  const auto N = static_cast<std::ptrdiff_t>(R.size());
  if (u < -1e-9 || u > static_cast<double>(N - 1) + 1e-9) {
    std::ostringstream msg;
    msg << "r = " << r << " outside curvature track";
    throw Error(ErrorKind::Domain, msg.str());
  }
  if (N < 4) {
    const auto k = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(std::round(u)), 0, N - 1);
    return R[static_cast<std::size_t>(k)];
  }
  auto start = static_cast<std::ptrdiff_t>(std::floor(u)) - 1;
  start = std::clamp<std::ptrdiff_t>(start, 0, N - 4);
  double nodes[4];
  for (int i = 0; i < 4; ++i) nodes[i] = static_cast<double>(start + i);
  const std::vector<double> w = lagrange_weights(u, nodes);
  Mat out = w[0] * R[static_cast<std::size_t>(start)];
  for (int i = 1; i < 4; ++i) out += w[i] * R[static_cast<std::size_t>(start + i)];
  return out;
}

// ---- Fermi coordinates ---------------------------------------------------

Vec fermi_map(const MetricField& m, const FermiChart& chart, const Vec& s, double r) {
  const int n = m.dim();
  if (s.size() != n - 1) throw Error(ErrorKind::Config, "Fermi offset has wrong dimension");
  const Vec base = chart.base.point_at(r);
  if (s.norm() == 0.0) return base;
  const Mat F = chart.base.frame_at(r);
  const Vec w = F.leftCols(n - 1) * s;
  return exp_map(m, base, w).x;
}

Vec fermi_inverse(const MetricField& m, const FermiChart& chart, const Vec& x, const Vec& guess,
                  double tol) {
  const int n = m.dim();
  Vec p = guess;
  auto map = [&](const Vec& q) { return fermi_map(m, chart, q.head(n - 1), q[n - 1]); };
  auto clamp_r = [&](Vec& q) {
    q[n - 1] = std::clamp(q[n - 1], chart.base.r_grid().front(), chart.base.r_max());
  };
  Vec res = map(p) - x;
  double rn = res.norm();
  const double fd = 1e-7;
  for (int it = 0; it < 60 && rn > tol; ++it) {
    Mat J(n, n);
    for (int c = 0; c < n; ++c) {
      Vec qp = p, qm = p;
      qp[c] += fd;
      qm[c] -= fd;
      J.col(c) = (map(qp) - map(qm)) / (2 * fd);
    }
    const Vec step = J.fullPivLu().solve(res);
    if (!step.allFinite()) break;
    double lambda = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      Vec q = p - lambda * step;
      clamp_r(q);
      Vec rq;
      try {
        rq = map(q) - x;
      } catch (const Error&) {
        lambda *= 0.5;
        continue;
      }
      if (rq.norm() < rn) {
        p = q;
        res = rq;
        rn = rq.norm();
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;
  }
  if (rn > std::max(tol, 1e-9) * 10) {
    std::ostringstream msg;
    msg << "Fermi inverse did not converge (residual " << rn << ")";
    throw Error(ErrorKind::Injectivity, msg.str());
  }
  return p;
}

namespace {

// Offsets of radius rho used to probe a tube.
std::vector<Vec> probe_offsets(int n, double rho) {
  std::vector<Vec> out;
  if (n == 2) {
    for (double f : {-1.0, -0.5, 0.5, 1.0}) out.push_back(Vec::Constant(1, f * rho));
  } else {
    for (int k = 0; k < 6; ++k) {
      const double a = 2 * 3.14159265358979323846 * k / 6.0;
      for (double f : {0.5, 1.0}) {
        Vec s(2);
        s << f * rho * std::cos(a), f * rho * std::sin(a);
        out.push_back(s);
      }
    }
  }
  return out;
}

bool tube_is_injective(const MetricField& m, const FermiChart& chart, int samples) {
  const int n = m.dim();
  std::vector<Vec> params, images;
  const double fd = 1e-6;
  for (int i = 0; i < samples; ++i) {
    const double r = samples == 1 ? chart.r_lo
                                  : chart.r_lo + (chart.r_hi - chart.r_lo) * i / (samples - 1.0);
    std::vector<Vec> offs = probe_offsets(n, chart.rho);
    offs.push_back(Vec::Zero(n - 1));
    for (const Vec& s : offs) {
      Vec p(n);
      p.head(n - 1) = s;
      p[n - 1] = r;
      Vec img;
      Mat J(n, n);
      try {
        img = fermi_map(m, chart, s, r);
        for (int c = 0; c < n; ++c) {
          Vec qp = p, qm = p;
          qp[c] += fd;
          qm[c] -= fd;
          qp[n - 1] = std::min(qp[n - 1], chart.base.r_max());
          qm[n - 1] = std::max(qm[n - 1], chart.base.r_grid().front());
          J.col(c) = (fermi_map(m, chart, qp.head(n - 1), qp[n - 1]) -
                      fermi_map(m, chart, qm.head(n - 1), qm[n - 1])) /
                     (qp[c] - qm[c]);
        }
      } catch (const Error&) {
        return false;
      }
      const Mat g = m.eval(img);
      // the pulled-back metric must stay well conditioned
      const Mat pull = J.transpose() * g * J;
      Eigen::SelfAdjointEigenSolver<Mat> es(pull, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < 1e-3) return false;
      params.push_back(p);
      images.push_back(img);
    }
  }
  for (std::size_t a = 0; a < params.size(); ++a) {
    for (std::size_t b = a + 1; b < params.size(); ++b) {
      const double dp = (params[a] - params[b]).norm();
      if ((images[a] - images[b]).norm() < 1e-3 * dp) return false;
    }
  }
  return true;
}

}  // namespace

double fermi_window_radius(const MetricField& m, const GeodesicPath& base, double r_lo,
                           double r_hi, double rho_max, int samples) {
  FermiChart chart{base, rho_max, r_lo, r_hi};
  if (tube_is_injective(m, chart, samples)) return rho_max;
  double lo = 0.0, hi = rho_max;
  for (int it = 0; it < 20; ++it) {
    chart.rho = 0.5 * (lo + hi);
    if (tube_is_injective(m, chart, samples)) {
      lo = chart.rho;
    } else {
      hi = chart.rho;
    }
  }
  return lo;
}

FermiChart make_fermi_chart(const MetricField& m, GeodesicPath base, double rho, double r_lo,
                            double r_hi, int samples) {
  FermiChart chart{std::move(base), rho, r_lo, r_hi};
  if (!(rho > 0) || r_hi < r_lo) throw Error(ErrorKind::Config, "bad Fermi window");
  if (!tube_is_injective(m, chart, samples)) {
    std::ostringstream msg;
    msg << "Fermi map not injective on tube of radius " << rho;
    throw Error(ErrorKind::Injectivity, msg.str());
  }
  return chart;
}

}  // namespace gdix
