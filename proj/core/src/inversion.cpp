#include "gdix/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "gdix/errors.hpp"
#include "gdix/numerics.hpp"

namespace gdix {

namespace {

constexpr std::size_t kStencil = 7;
constexpr std::size_t kShifted = 8;
constexpr int kBehind = 4;

double binom(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

PairMat normalize_pair(const PairMat& P) {
  const auto rows = P.rows();
  const auto cols = P.cols();
  Eigen::MatrixXd A = P;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  return Q;
}

PairMat make_pair(const Mat& j, const Mat& dj) {
  const auto m = j.rows();
  PairMat P(2 * m, m);
  P.topRows(m) = j;
  P.bottomRows(m) = dj;
  return P;
}

// |det S| = |det j'| / |det j| with S = -j' j⁻¹; large when j is singular.
double det_S(const PairMat& P, int m) {
  const double dj = std::abs(P.topRows(m).determinant());
  const double ddj = std::abs(P.bottomRows(m).determinant());
  if (dj == 0.0) return std::numeric_limits<double>::infinity();
  return ddj / dj;
}

void axpy(std::vector<Mat>& out, const std::vector<Mat>& a, double s, const std::vector<Mat>& b) {
  out.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * b[i];
}

VState stage(const VState& V, double s, const VDerivative& d, double r) {
  VState out;
  out.r = r;
  out.t = V.t;
  axpy(out.V0, V.V0, s, d.dV0);
  axpy(out.V1, V.V1, s, d.dV1);
  axpy(out.V2, V.V2, s, d.dV2);
  axpy(out.V3, V.V3, s, d.dV3);
  return out;
}

}  // namespace

double VState::max_norm() const {
  double m = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    m = std::max({m, V0[i].norm(), V1[i].norm(), V2[i].norm(), V3[i].norm()});
  }
  return m;
}

VState initial_vstate(const std::vector<double>& t, const std::vector<Mat>& K, double r) {
  if (t.size() != K.size()) throw Error(ErrorKind::Config, "node and value counts differ");
  if (t.size() < kShifted) {
    throw Error(ErrorKind::WindowExhausted,
                "need at least " + std::to_string(kShifted) + " nodes, have " +
                    std::to_string(t.size()));
  }
  const std::size_t N = t.size();
  VState V;
  V.r = r;
  V.t = t;
  V.V0 = K;
  V.V1.resize(N);
  V.V2.resize(N);
  V.V3.resize(N);
  const std::span<const double> nodes(t);
  for (std::size_t i = 0; i < N; ++i) {
    std::size_t s0;
    std::size_t count = kStencil;
    if (i >= kStencil / 2 && i + kStencil / 2 < N) {
      s0 = i - kStencil / 2;
    } else {
      count = kShifted;
      s0 = i < kStencil / 2 ? 0 : N - kShifted;
    }
    const auto w = fornberg_weights(t[i], nodes.subspan(s0, count), 3);
    Mat d1 = Mat::Zero(K[i].rows(), K[i].cols());
    Mat d2 = d1, d3 = d1;
    for (std::size_t q = 0; q < count; ++q) {
      d1 += w[1][q] * K[s0 + q];
      d2 += w[2][q] * K[s0 + q];
      d3 += w[3][q] * K[s0 + q];
    }
    V.V1[i] = d1;
    V.V2[i] = d2;
    V.V3[i] = d3;
  }
  return V;
}

VState initial_vstate(const std::vector<double>& t, const std::vector<Mat>& S,
                      const std::vector<uint8_t>& mask, double t_lo, double t_hi, double r) {
  std::vector<double> nodes;
  std::vector<Mat> K;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!mask.empty() && mask[i]) {
      throw Error(ErrorKind::SingularShape, "masked sample at t = " + std::to_string(t[i]));
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd(S[i]));
    if (!lu.isInvertible() || std::abs(S[i].determinant()) < 1e-12) {
      throw Error(ErrorKind::SingularShape, "S not invertible at t = " + std::to_string(t[i]));
    }
    nodes.push_back(t[i]);
    K.push_back(S[i].inverse());
  }
  return initial_vstate(nodes, K, r);
}

Mat diag_eval(const VState& V, double r) {
  const std::span<const double> nodes(V.t);
  if (V.t.size() < 4 || r < V.t.front() - 1e-12 || r > V.t.back() + 1e-12) {
    throw Error(ErrorKind::OutOfWindow, "diagonal r = " + std::to_string(r) + " outside nodes");
  }
  const std::size_t s0 = stencil_start(nodes, r, 4);
  const auto w = lagrange_weights(r, nodes.subspan(s0, 4));
  Mat out = Mat::Zero(V.V3[0].rows(), V.V3[0].cols());
  for (std::size_t q = 0; q < 4; ++q) out += w[q] * V.V3[s0 + q];
  return out;
}

VDerivative vsystem_rhs(const VState& V, const Mat& R) {
  const std::size_t N = V.size();
  const auto m = R.rows();
  const Mat I = Mat::Identity(m, m);
  VDerivative d;
  d.dV0.resize(N);
  d.dV1.resize(N);
  d.dV2.resize(N);
  d.dV3.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const Mat& a0 = V.V0[i];
    const Mat& a1 = V.V1[i];
    const Mat& a2 = V.V2[i];
    const Mat& a3 = V.V3[i];
    const Mat R0 = R * a0, R1 = R * a1, R2 = R * a2, R3 = R * a3;
    d.dV0[i] = -I - a0 * R0;
    d.dV1[i] = -(a1 * R0 + a0 * R1);
    d.dV2[i] = -(a2 * R0 + 2.0 * a1 * R1 + a0 * R2);
    d.dV3[i] = -(a3 * R0 + 3.0 * a2 * R1 + 3.0 * a1 * R2 + a0 * R3);
  }
  return d;
}

NoiseEstimate estimate_noise(const VState& V, double delta_t) {
  NoiseEstimate est;
  const std::size_t N = V.size();
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i + 6 < N; ++i) {
    bool uniform = true;
    for (std::size_t q = 0; q < 6; ++q) {
      if (std::abs(V.t[i + q + 1] - V.t[i + q] - delta_t) > 1e-6 * delta_t) uniform = false;
    }
    if (!uniform) continue;
    Mat d = Mat::Zero(V.V0[i].rows(), V.V0[i].cols());
    for (int q = 0; q <= 6; ++q) {
      d += ((q % 2) ? -1.0 : 1.0) * binom(6, q) * V.V0[i + static_cast<std::size_t>(q)];
    }
    sum += d.squaredNorm() / static_cast<double>(d.size());
    ++count;
  }
  if (count == 0) return est;
  est.sigma_K = std::sqrt(sum / static_cast<double>(count)) / std::sqrt(924.0);
  std::vector<double> nodes(kStencil);
  for (std::size_t q = 0; q < kStencil; ++q) nodes[q] = delta_t * static_cast<double>(q);
  const auto w = fornberg_weights(nodes[kStencil / 2], nodes, 3);
  double w3 = 0.0;
  for (double x : w[3]) w3 += std::abs(x);
  est.sigma_V3 = est.sigma_K * w3;
  return est;
}

MarchResult march_vsystem(const VState& V0, double r_end, double dr, double ball_radius,
                          bool keep_trajectory) {
  if (!(dr > 0)) throw Error(ErrorKind::Config, "march step must be positive");
  const auto m = V0.V0.empty() ? 0 : V0.V0[0].rows();
  MarchResult res;
  VState V = V0;
  PairMat Phi = PairMat::Identity(2 * m, 2 * m);
  auto check = [&](const VState& s) {
    const double nm = s.max_norm();
    res.max_norm = std::max(res.max_norm, nm);
    if (ball_radius > 0 && !(nm <= ball_radius)) {
      throw ReconstructionError(ErrorKind::BlowUp,
                                "V left the ball of radius " + std::to_string(ball_radius),
                                s.r);
    }
  };
  auto diag = [&](const VState& s, double r) { return Mat(0.5 * diag_eval(s, r)); };
  check(V);
  const std::size_t steps =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((r_end - V.r) / dr - 1e-9)));
  const double h = (r_end - V.r) / static_cast<double>(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double r = V.r;
    if (keep_trajectory) res.trajectory.push_back(V);
    const Mat Ra = diag(V, r);
    res.profile.r.push_back(r);
    res.profile.R.push_back(Ra);
    res.phi.push_back(Phi);
    const VDerivative k1 = vsystem_rhs(V, Ra);
    const PairMat p1 = jacobi_rhs(Phi, Ra);
    const VState s2 = stage(V, 0.5 * h, k1, r + 0.5 * h);
    const Mat Rb = diag(s2, s2.r);
    const VDerivative k2 = vsystem_rhs(s2, Rb);
    const PairMat p2 = jacobi_rhs(Phi + 0.5 * h * p1, Rb);
    const VState s3 = stage(V, 0.5 * h, k2, r + 0.5 * h);
    const Mat Rc = diag(s3, s3.r);
    const VDerivative k3 = vsystem_rhs(s3, Rc);
    const PairMat p3 = jacobi_rhs(Phi + 0.5 * h * p2, Rc);
    const VState s4 = stage(V, h, k3, r + h);
    const Mat Rd = diag(s4, s4.r);
    const VDerivative k4 = vsystem_rhs(s4, Rd);
    const PairMat p4 = jacobi_rhs(Phi + h * p3, Rd);
    for (std::size_t i = 0; i < V.size(); ++i) {
      V.V0[i] += h / 6.0 * (k1.dV0[i] + 2.0 * k2.dV0[i] + 2.0 * k3.dV0[i] + k4.dV0[i]);
      V.V1[i] += h / 6.0 * (k1.dV1[i] + 2.0 * k2.dV1[i] + 2.0 * k3.dV1[i] + k4.dV1[i]);
      V.V2[i] += h / 6.0 * (k1.dV2[i] + 2.0 * k2.dV2[i] + 2.0 * k3.dV2[i] + k4.dV2[i]);
      V.V3[i] += h / 6.0 * (k1.dV3[i] + 2.0 * k2.dV3[i] + 2.0 * k3.dV3[i] + k4.dV3[i]);
    }
    Phi += h / 6.0 * (p1 + 2.0 * p2 + 2.0 * p3 + p4);
    V.r = (k + 1 == steps) ? r_end : r + h;
    check(V);
  }
  if (keep_trajectory) res.trajectory.push_back(V);
  res.profile.r.push_back(V.r);
  res.profile.R.push_back(diag(V, V.r));
  res.phi.push_back(Phi);
  res.final_state = std::move(V);
  return res;
}

StepControl step_bound(double curvature_bound, double ball_radius, std::optional<double> lipschitz) {
  if (!(curvature_bound > 0) || !(ball_radius > 0)) {
    throw Error(ErrorKind::BadBound, "curvature bound and ball radius must be positive");
  }
  StepControl c;
  c.curvature_bound = curvature_bound;
  c.ball_radius = ball_radius;
  c.lipschitz = lipschitz ? *lipschitz : 12.0 * ball_radius * ball_radius;
  if (!(c.lipschitz > 0)) throw Error(ErrorKind::BadBound, "Lipschitz constant must be positive");
  const double R = ball_radius;
  c.t2 = 0.5 * std::min({std::numbers::pi / (4.0 * std::sqrt(curvature_bound)), 1.0 / c.lipschitz,
                         R / (2.0 * (1.0 + 4.0 * R * R * R))});
  return c;
}

ShapeTable continue_past_step(const CurvatureProfile& profile, const ShapeTable& from, double r1) {
  const auto& rs = profile.r;
  if (rs.size() < 4) throw Error(ErrorKind::Config, "profile too short");
  if (from.r < rs.front() - 1e-12 || r1 > rs.back() + 1e-12 || r1 < from.r) {
    throw Error(ErrorKind::OutOfWindow, "continuation range outside the profile");
  }
  const std::span<const double> nodes(rs);
  auto Rat = [&](double r) {
    const std::size_t s0 = stencil_start(nodes, r, 4);
    const auto w = lagrange_weights(r, nodes.subspan(s0, 4));
    Mat out = Mat::Zero(profile.R[0].rows(), profile.R[0].cols());
    for (std::size_t q = 0; q < 4; ++q) out += w[q] * profile.R[s0 + q];
    return out;
  };
  const auto m = profile.R[0].rows();
  // propagator through the profile nodes between from.r and r1
  std::vector<double> pts{from.r};
  for (double r : rs)
    if (r > from.r + 1e-12 && r < r1 - 1e-12) pts.push_back(r);
  pts.push_back(r1);
  PairMat Phi = PairMat::Identity(2 * m, 2 * m);
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double a = pts[k], b = pts[k + 1];
    Phi = jacobi_rk4_step(Phi, Rat(a), Rat(0.5 * (a + b)), Rat(b), b - a);
  }
  ShapeTable out;
  out.r = r1;
  const Mat I = Mat::Identity(m, m);
  for (std::size_t i = 0; i < from.t.size(); ++i) {
    if (from.t[i] <= r1) continue;
    out.t.push_back(from.t[i]);
    if (from.mask[i]) {
      out.S.push_back(Mat::Zero(m, m));
      out.mask.push_back(1);
      continue;
    }
    const PairMat P = normalize_pair(Phi * make_pair(I, -from.S[i]));
    const Mat j = P.topRows(m);
    const double dt = from.t[i] - r1;
    if (std::abs(j.determinant()) < 1e-8 * std::pow(std::min(dt, 1.0), static_cast<double>(m))) {
      out.S.push_back(Mat::Zero(m, m));
      out.mask.push_back(1);
    } else {
      out.S.push_back(-Mat(P.bottomRows(m)) * j.inverse());
      out.mask.push_back(0);
    }
  }
  return out;
}

DataSlice slice_from_dataset(const WavefrontDataset& ds, std::size_t xhat_index) {
  if (xhat_index >= ds.xhat.size()) throw Error(ErrorKind::Config, "xhat index out of range");
  DataSlice s;
  const int k = ds.dim - 1;
  s.delta_t = ds.t_grid.delta_t;
  for (std::size_t i = 0; i < ds.t_grid.count; ++i) s.t.push_back(ds.t_grid.at(i));
  s.S = ds.samples[xhat_index];
  s.mask = ds.mask[xhat_index];
  s.gram = ds.grams[xhat_index].topLeftCorner(k, k);
  return s;
}

PairMat Reconstruction::solve_cauchy(std::size_t k, const Mat& j0, const Mat& dj0) const {
  return propagator.at(k) * make_pair(j0, dj0);
}

PairMat Reconstruction::propagator_at(double r) const {
  const auto& rs = profile.r;
  if (rs.empty() || r < rs.front() - 1e-12 || r > rs.back() + 1e-12) {
    throw Error(ErrorKind::OutOfWindow, "r = " + std::to_string(r) + " outside the profile");
  }
  auto it = std::upper_bound(rs.begin(), rs.end(), r);
  std::size_t k = it == rs.begin() ? 0 : static_cast<std::size_t>(it - rs.begin()) - 1;
  if (k + 1 >= rs.size()) return propagator.back();
  const double h = rs[k + 1] - rs[k];
  if (h <= 0) return propagator[k];
  const HermiteBasis b = hermite_basis((r - rs[k]) / h);
  return b.h00 * propagator[k] + b.h10 * h * jacobi_rhs(propagator[k], profile.R[k]) +
         b.h01 * propagator[k + 1] + b.h11 * h * jacobi_rhs(propagator[k + 1], profile.R[k + 1]);
}

namespace {

struct Window {
  std::vector<double> t;
  std::vector<Mat> K;
};

// Window nodes: the data nodes from a few steps behind r_o up to r_o + width,
// K taken from the continued pairs. An isolated masked node is
// skipped; two in a row, or a node where K has a pole, end the window.
Window build_window(double r_o, const std::vector<double>& t, const std::vector<PairMat>& pairs,
                    const std::vector<uint8_t>& valid, double width, double delta_t,
                    double pole_tol, int m) {
  Window w;
  const double lo = r_o - kBehind * delta_t - 0.5 * delta_t;
  int misses = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < lo) continue;
    if (t[i] > r_o + width + 1e-12) break;
    const bool ahead = t[i] > r_o;
    if (!valid[i]) {
      if (ahead && ++misses >= 2) break;
      if (!ahead) w = Window{};  // keep the nodes contiguous behind r_o
      continue;
    }
    const PairMat& P = pairs[i];
    if (det_S(P, m) < pole_tol) {
      if (ahead) break;
      w = Window{};
      continue;
    }
    misses = 0;
    const Mat dj = P.bottomRows(m);
    w.t.push_back(t[i]);
    w.K.push_back(-Mat(P.topRows(m)) * dj.inverse());
  }
  return w;
}

std::vector<double> conjugate_zeros(const std::vector<double>& r, const std::vector<PairMat>& phi,
                                    int m) {
  std::vector<double> out;
  std::vector<double> det(r.size()), smin(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    const Mat B = phi[k].topRightCorner(m, m);
    det[k] = B.determinant();
    const Eigen::MatrixXd Bd = B;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Bd);
    smin[k] = svd.singularValues().minCoeff();
  }
  for (std::size_t k = 1; k < r.size(); ++k) {
    if (r[k] <= 1e-9) continue;
    if (det[k - 1] != 0.0 && (det[k - 1] < 0) != (det[k] < 0) && r[k - 1] > 1e-9) {
      const double a = r[k - 1], b = r[k];
      out.push_back(a + (b - a) * det[k - 1] / (det[k - 1] - det[k]));
    }
  }
  // even-multiplicity zeros show up as near-vanishing local minima of σ_min
  if (m > 1) {
    for (std::size_t k = 1; k + 1 < r.size(); ++k) {
      if (smin[k] <= smin[k - 1] && smin[k] <= smin[k + 1] && smin[k] < 1e-3 * std::max(1.0, r[k]) &&
          (det[k - 1] < 0) == (det[k + 1] < 0)) {
        out.push_back(r[k]);
      }
    }
    std::sort(out.begin(), out.end());
  }
  return out;
}

}  // namespace

Reconstruction reconstruct_along_geodesic(const DataSlice& data, double r_max,
                                          const InversionOptions& opts) {
  const std::size_t N = data.t.size();
  if (N == 0 || data.S.size() != N || data.mask.size() != N) {
    throw Error(ErrorKind::Config, "data slice is inconsistent");
  }
  const int m = static_cast<int>(data.S[0].rows());
  const double dt = data.delta_t;
  const double dr = opts.dr > 0 ? opts.dr : dt;
  if (!(r_max > 0) || r_max > data.t.back() - 8 * dt) {
    throw Error(ErrorKind::WindowExhausted, "r_max must leave a window inside the data");
  }
  const Mat I = Mat::Identity(m, m);

  // t = 0 joins the nodes as the pair j = 0, j' = I (K(0, 0) = 0) when the
  // data grid starts later
  std::vector<double> t = data.t;
  std::vector<PairMat> pairs;
  std::vector<uint8_t> valid;
  if (t.front() > 0.5 * dt) {
    t.insert(t.begin(), 0.0);
    pairs.push_back(make_pair(Mat::Zero(m, m), I));
    valid.push_back(1);
  }
  const std::size_t off = pairs.size();
  for (std::size_t i = 0; i < N; ++i) {
    valid.push_back(data.mask[i] ? 0 : 1);
    pairs.push_back(data.mask[i] ? PairMat() : normalize_pair(make_pair(I, -data.S[i])));
  }

  Reconstruction rec;
  PairMat Phi_cum = PairMat::Identity(2 * m, 2 * m);
  double r_o = 0.0;
  double K_bound = opts.curvature_bound.value_or(0.0);
  Mat R_prev;
  bool have_prev = false;

  while (r_o < r_max - 1e-12) {
    const Window w = build_window(r_o, t, pairs, valid, opts.max_window, dt,
                                  opts.pole_tolerance, m);
    if (w.t.size() < kShifted) {
      throw ReconstructionError(ErrorKind::WindowExhausted,
                                "only " + std::to_string(w.t.size()) + " usable window nodes", r_o);
    }
    VState V = initial_vstate(w.t, w.K, r_o);
    JointInfo info;
    info.r = r_o;
    info.window = w.t.back() - w.t.front();
    info.window_nodes = w.t.size();
    info.noise = estimate_noise(V, dt);
    if (info.noise.sigma_V3 > opts.noise_threshold) {
      throw ReconstructionError(ErrorKind::Noise,
                                "estimated V3 noise " + std::to_string(info.noise.sigma_V3) +
                                    " exceeds " + std::to_string(opts.noise_threshold),
                                r_o);
    }
    const Mat R0 = 0.5 * diag_eval(V, r_o);
    if (!opts.curvature_bound) K_bound = std::max({K_bound, 4.0 * R0.norm(), 0.01});
    const double ball = opts.ball_radius.value_or(2.0 * V.max_norm() + 1.0);
    info.control = step_bound(K_bound, ball, opts.lipschitz);
    if (have_prev) info.R_jump = (R_prev - R0).norm();

    double step = w.t.back() - r_o - 5.0 * dt;
    step = std::min({step, opts.max_step, r_max - r_o});
    if (opts.strict_step) step = std::min(step, info.control.t2);
    if (!(step > 1e-9)) {
      throw ReconstructionError(ErrorKind::WindowExhausted,
                                "window too short to advance (" + std::to_string(info.window) + ")",
                                r_o);
    }
    const double r1 = r_o + step;
    MarchResult mr;
    try {
      mr = march_vsystem(V, r1, std::min(dr, step), ball);
    } catch (const ReconstructionError&) {
      throw;
    } catch (const Error& e) {
      throw ReconstructionError(e.kind(), e.what(), r_o);
    }
    const bool first = rec.profile.r.empty();
    // the joint keeps the value from the window that starts there
    if (!first) rec.profile.R.back() = mr.profile.R.front();
    for (std::size_t k = first ? 0 : 1; k + 1 < mr.profile.r.size(); ++k) {
      rec.profile.r.push_back(mr.profile.r[k]);
      rec.profile.R.push_back(mr.profile.R[k]);
      rec.propagator.push_back(mr.phi[k] * Phi_cum);
    }
    R_prev = mr.profile.R.back();
    have_prev = true;
    const PairMat Phi_step = mr.phi.back();
    Phi_cum = Phi_step * Phi_cum;
    rec.profile.r.push_back(r1);
    rec.profile.R.push_back(R_prev);
    rec.propagator.push_back(Phi_cum);
    rec.joints.push_back(info);

    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (!valid[i]) continue;
      if (t[i] < r1 - (kBehind + 2) * dt) {
        valid[i] = 0;  // never inside a later window
        continue;
      }
      pairs[i] = normalize_pair(Phi_step * pairs[i]);
    }
    if (opts.keep_tables) {
      ShapeTable tab;
      tab.r = r1;
      for (std::size_t i = 0; i < N; ++i) {
        if (data.t[i] <= r1) continue;
        tab.t.push_back(data.t[i]);
        const Mat j = pairs[off + i].topRows(m);
        if (!valid[off + i] || std::abs(j.determinant()) < 1e-8) {
          tab.S.push_back(Mat::Zero(m, m));
          tab.mask.push_back(1);
        } else {
          tab.S.push_back(-Mat(pairs[off + i].bottomRows(m)) * j.inverse());
          tab.mask.push_back(0);
        }
      }
      rec.tables.push_back(std::move(tab));
    }
    r_o = r1;
    rec.reached_r = r1;
  }
  rec.conjugate_r = conjugate_zeros(rec.profile.r, rec.propagator, m);
  return rec;
}

}  // namespace gdix
