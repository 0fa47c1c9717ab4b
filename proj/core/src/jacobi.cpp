#include "gdix/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gdix/errors.hpp"
#include "gdix/numerics.hpp"

namespace gdix {

PairMat jacobi_rhs(const PairMat& P, const Mat& R) {
  const auto m = R.rows();
  PairMat d(P.rows(), P.cols());
  d.topRows(m) = P.bottomRows(m);
  d.bottomRows(m) = -R * P.topRows(m);
  return d;
}

PairMat jacobi_rk4_step(const PairMat& P, const Mat& Ra, const Mat& Rm, const Mat& Rb,
                        double step) {
  const PairMat k1 = jacobi_rhs(P, Ra);
  const PairMat k2 = jacobi_rhs(P + (0.5 * step) * k1, Rm);
  const PairMat k3 = jacobi_rhs(P + (0.5 * step) * k2, Rm);
  const PairMat k4 = jacobi_rhs(P + step * k3, Rb);
  return P + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// ---- propagator ----------------------------------------------------------

JacobiPropagator::JacobiPropagator(CurvatureTrack track) : track_(std::move(track)) {
  if (track_.R.empty() || track_.R.size() % 2 == 0) {
    throw Error(ErrorKind::Config, "curvature track must have an odd number of samples");
  }
  m_ = static_cast<int>(track_.R[0].rows());
  const std::size_t nodes = (track_.R.size() + 1) / 2;
  phi_.reserve(nodes);
  phi_.push_back(PairMat::Identity(2 * m_, 2 * m_));
  const double step = 2.0 * track_.h;
  for (std::size_t k = 0; k + 1 < nodes; ++k) {
    phi_.push_back(jacobi_rk4_step(phi_.back(), track_.R[2 * k], track_.R[2 * k + 1],
                                   track_.R[2 * k + 2], step));
  }
}

PairMat JacobiPropagator::phi_at(double r) const {
  const double u = (r - track_.r0) / (2.0 * track_.h);
  const auto last = static_cast<double>(phi_.size() - 1);
  if (u < -1e-9 || u > last + 1e-9) {
    std::ostringstream msg;
    msg << "r = " << r << " outside propagator range";
    throw Error(ErrorKind::Domain, msg.str());
  }
  const auto k = static_cast<std::size_t>(std::clamp(std::round(u), 0.0, last));
  const double rk = node_r(k);
  if (std::abs(r - rk) <= 1e-12 * std::max(1.0, std::abs(r))) return phi_[k];

  const int m2 = 2 * m_;
  State y(m2 * m2);
  Eigen::Map<Eigen::MatrixXd>(y.data(), m2, m2) = phi_[k];
  Rhs f = [this, m2](double s, const State& yy, State& dy) {
    const Mat R = track_.at(s);
    PairMat P = Eigen::Map<const Eigen::MatrixXd>(yy.data(), m2, m2);
    dy.resize(yy.size());
    Eigen::Map<Eigen::MatrixXd>(dy.data(), m2, m2) = jacobi_rhs(P, R);
  };
  AdaptiveOptions opts;
  opts.atol = 1e-13;
  opts.rtol = 1e-12;
  y = integrate_dopri5(f, y, rk, r, opts);
  return Eigen::Map<const Eigen::MatrixXd>(y.data(), m2, m2);
}

// ---- point sources -------------------------------------------------------

namespace {

Mat hermite(const std::vector<double>& rs, const std::vector<Mat>& f, const std::vector<Mat>& df,
            double r) {
  if (rs.size() < 2) throw Error(ErrorKind::Domain, "too few nodes for interpolation");
  const double dr = rs[1] - rs[0];
  if (r < rs.front() - 1e-9 * dr || r > rs.back() + 1e-9 * dr) {
    std::ostringstream msg;
    msg << "r = " << r << " outside Jacobi solution range";
    throw Error(ErrorKind::Domain, msg.str());
  }
  auto k = static_cast<std::size_t>(std::floor((r - rs.front()) / dr));
  k = std::min(k, rs.size() - 2);
  const double h = rs[k + 1] - rs[k];
  const HermiteBasis b = hermite_basis(std::clamp((r - rs[k]) / h, 0.0, 1.0));
  return b.h00 * f[k] + b.h10 * h * df[k] + b.h01 * f[k + 1] + b.h11 * h * df[k + 1];
}

}  // namespace

Mat JacobiMatrix::j_at(double rr) const { return hermite(r, j, dj, rr); }
Mat JacobiMatrix::dj_at(double rr) const { return hermite(r, dj, ddj, rr); }

JacobiMatrix point_source_jacobi(const JacobiPropagator& prop, double t_center) {
  const int m = prop.block();
  const PairMat phic = prop.phi_at(t_center);
  PairMat seed = PairMat::Zero(2 * m, m);
  seed.bottomRows(m) = -Mat::Identity(m, m);
  const PairMat init = phic.fullPivLu().solve(seed);

  JacobiMatrix out;
  out.t_center = t_center;
  const std::size_t N = prop.size();
  out.r.resize(N);
  out.j.resize(N);
  out.dj.resize(N);
  out.ddj.resize(N);
  for (std::size_t k = 0; k < N; ++k) {
    const PairMat P = prop.phi(k) * init;
    out.r[k] = prop.node_r(k);
    out.j[k] = P.topRows(m);
    out.dj[k] = P.bottomRows(m);
    out.ddj[k] = -prop.track().R[2 * k] * out.j[k];
  }
  return out;
}

JacobiMatrix point_source_jacobi(const MetricField& m, const GeodesicPath& path,
                                 double t_center) {
  return point_source_jacobi(JacobiPropagator(curvature_track(m, path)), t_center);
}

ShapeData shape_from_pair(const Mat& j, const Mat& dj, double r, double t) {
  const auto m = j.rows();
  const double scale = std::isnan(t) ? 1.0 : std::pow(std::abs(t - r), static_cast<double>(m));
  const double det = j.determinant();
  if (!(std::abs(det) >= 1e-8 * scale)) {
    std::ostringstream msg;
    msg << "det j = " << det << " at r = " << r;
    throw Error(ErrorKind::ConjugatePoint, msg.str());
  }
  ShapeData sd;
  sd.r = r;
  sd.t = t;
  sd.S = -dj * j.inverse();
  Eigen::JacobiSVD<Mat> svd(sd.S);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) > 1e-12 * std::max(1.0, sv(0))) {
    sd.K = sd.S.inverse();
    sd.has_K = true;
  }
  return sd;
}

ShapeData shape_from_jacobi(const JacobiMatrix& jm, double r) {
  return shape_from_pair(jm.j_at(r), jm.dj_at(r), r, jm.t_center);
}

SourceShape source_shape_at_origin(const JacobiPropagator& prop, double t) {
  const int m = prop.block();
  const PairMat inv = prop.phi_at(t).inverse();
  const Mat j0 = -inv.topRightCorner(m, m);
  const Mat dj0 = -inv.bottomRightCorner(m, m);
  SourceShape out;
  const double scale = std::pow(std::abs(t), static_cast<double>(m));
  if (!(std::abs(j0.determinant()) >= 1e-8 * scale)) {
    out.masked = true;
    out.S = Mat::Zero(m, m);
    return out;
  }
  out.S = -dj0 * j0.inverse();
  return out;
}

// ---- conjugate points ----------------------------------------------------

std::vector<double> conjugate_points(const JacobiMatrix& jm) {
  std::vector<double> roots;
  const std::size_t N = jm.r.size();
  if (N < 2) return roots;
  const double dr = jm.r[1] - jm.r[0];
  const auto m = jm.j[0].rows();
  auto det_at = [&](double r) { return jm.j_at(r).determinant(); };
  auto near_center = [&](double r) { return std::abs(r - jm.t_center) < 0.5 * dr; };

  std::vector<double> det(N), smin(N);
  for (std::size_t k = 0; k < N; ++k) {
    det[k] = jm.j[k].determinant();
    Eigen::JacobiSVD<Mat> svd(jm.j[k]);
    smin[k] = svd.singularValues()(m - 1);
  }

  for (std::size_t k = 0; k + 1 < N; ++k) {
    const double a = jm.r[k], b = jm.r[k + 1];
    if (det[k] == 0.0 && !near_center(a)) {
      roots.push_back(a);
      continue;
    }
    if ((det[k] < 0) != (det[k + 1] < 0) && det[k + 1] != 0.0) {
      const double root = bisect_root(det_at, a, b, 1e-13);
      if (!near_center(root)) roots.push_back(root);
    }
  }

  if (m > 1) {
    // even-order zeros do not change the sign of det j
    auto smin_at = [&](double r) {
      Eigen::JacobiSVD<Mat> svd(jm.j_at(r));
      return svd.singularValues()(m - 1);
    };
    for (std::size_t k = 1; k + 1 < N; ++k) {
      if (!(smin[k] <= smin[k - 1] && smin[k] <= smin[k + 1])) continue;
      const double a = jm.r[k - 1], b = jm.r[k + 1];
      const double scale = std::max(1.0, jm.dj[k].norm());
      if (smin[k] > 2.0 * dr * scale) continue;
      const double rmin = golden_section_minimize(smin_at, a, b, 1e-12);
      if (smin_at(rmin) > 1e-7 * scale || near_center(rmin)) continue;
      const bool seen = std::any_of(roots.begin(), roots.end(),
                                    [&](double q) { return std::abs(q - rmin) < dr; });
      if (!seen) roots.push_back(rmin);
    }
    std::sort(roots.begin(), roots.end());
  }
  return roots;
}

// ---- Riccati -------------------------------------------------------------

std::vector<ShapeData> riccati_march(const CurvatureTrack& track, const Mat& S_init, double r0,
                                     double r1, double t) {
  const double step = 2.0 * track.h;
  auto node_index = [&](double r) {
    const double u = (r - track.r0) / step;
    const double k = std::round(u);
    const double last = static_cast<double>((track.R.size() - 1) / 2);
    if (std::abs(u - k) > 1e-7 || k < 0 || k > last) {
      std::ostringstream msg;
      msg << "r = " << r << " is not a node of the curvature track";
      throw Error(ErrorKind::Domain, msg.str());
    }
    return static_cast<std::ptrdiff_t>(k);
  };
  const std::ptrdiff_t k0 = node_index(r0);
  const std::ptrdiff_t k1 = node_index(r1);
  const std::ptrdiff_t dir = k1 >= k0 ? 1 : -1;

  auto rhs = [](const Mat& S, const Mat& R) -> Mat { return S * S + R; };
  auto R_at = [&](std::ptrdiff_t half) { return track.R[static_cast<std::size_t>(half)]; };

  std::vector<ShapeData> out;
  Mat S = S_init;
  auto emit = [&](std::ptrdiff_t k) {
    ShapeData sd;
    sd.r = track.r0 + step * static_cast<double>(k);
    sd.t = t;
    sd.S = S;
    Eigen::JacobiSVD<Mat> svd(S);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) > 1e-12 * std::max(1.0, sv(0))) {
      sd.K = S.inverse();
      sd.has_K = true;
    }
    out.push_back(std::move(sd));
  };
  emit(k0);
  const double h = static_cast<double>(dir) * step;
  for (std::ptrdiff_t k = k0; k != k1; k += dir) {
    const Mat& Ra = R_at(2 * k);
    const Mat& Rm = R_at(2 * k + dir);
    const Mat& Rb = R_at(2 * (k + dir));
    const Mat a1 = rhs(S, Ra);
    const Mat a2 = rhs(S + 0.5 * h * a1, Rm);
    const Mat a3 = rhs(S + 0.5 * h * a2, Rm);
    const Mat a4 = rhs(S + h * a3, Rb);
    S += (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    if (!S.allFinite() || S.norm() > 1e8) {
      std::ostringstream msg;
      msg << "shape operator exceeded 1e8 near r = " << track.r0 + step * static_cast<double>(k + dir);
      throw Error(ErrorKind::BlowUp, msg.str());
    }
    emit(k + dir);
  }
  return out;
}

std::vector<ShapeData> riccati_march(const MetricField& m, const GeodesicPath& path,
                                     const Mat& S_init, double r0, double r1, double t) {
  return riccati_march(curvature_track(m, path), S_init, r0, r1, t);
}

}  // namespace gdix
