#include "gdix/metric.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "gdix/errors.hpp"

namespace gdix {

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::Euclidean: return "euclidean";
    case MetricKind::ConstantCurvature: return "constant_curvature";
    case MetricKind::Conformal: return "conformal";
    case MetricKind::DepthProfile: return "depth_profile";
    case MetricKind::AnisotropicDiagonal: return "anisotropic_diagonal";
    case MetricKind::Tabulated: return "tabulated";
    case MetricKind::Constant: return "constant";
  }
  return "unknown";
}

void MetricModel::analytic_derivatives(const Vec&, int, MetricJet&) const {
  throw Error(ErrorKind::Config, "metric model has no analytic derivatives");
}

namespace {

Box uniform_box(int dim, double lo, double hi) {
  Box b{Vec::Constant(dim, lo), Vec::Constant(dim, hi)};
  return b;
}

Vec center_or_origin(int dim, const std::vector<double>& c) {
  Vec v = Vec::Zero(dim);
  if (!c.empty()) {
    if (static_cast<int>(c.size()) != dim) {
      throw Error(ErrorKind::Config, "center has wrong dimension");
    }
    for (int i = 0; i < dim; ++i) v[i] = c[i];
  }
  return v;
}

void check_dim(int dim) {
  if (dim != 2 && dim != 3) throw Error(ErrorKind::Config, "dim must be 2 or 3");
}

class EuclideanModel final : public MetricModel {
 public:
  explicit EuclideanModel(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  Mat metric(const Vec&) const override { return Mat::Identity(dim_, dim_); }
  Box natural_domain() const override { return uniform_box(dim_, -1e3, 1e3); }
  bool has_analytic_derivatives() const override { return true; }
  void analytic_derivatives(const Vec&, int, MetricJet&) const override {}

 private:
  int dim_;
};

class ConstantMetricModel final : public MetricModel {
 public:
  explicit ConstantMetricModel(Mat g) : g_(std::move(g)) {}
  int dim() const override { return static_cast<int>(g_.rows()); }
  Mat metric(const Vec&) const override { return g_; }
  Box natural_domain() const override { return uniform_box(dim(), -1e6, 1e6); }
  bool has_analytic_derivatives() const override { return true; }
  void analytic_derivatives(const Vec&, int, MetricJet&) const override {}

 private:
  Mat g_;
};

// Polar chart of the space form with curvature kappa.
class ConstantCurvatureModel final : public MetricModel {
 public:
  ConstantCurvatureModel(int dim, double kappa) : dim_(dim), kappa_(kappa) {}
  int dim() const override { return dim_; }

  Mat metric(const Vec& x) const override {
    const double q = sn(x[0]) * sn(x[0]);
    Mat g = Mat::Zero(dim_, dim_);
    g(0, 0) = 1.0;
    if (dim_ == 2) {
      g(1, 1) = q;
    } else {
      const double st = std::sin(x[1]);
      g(1, 1) = q;
      g(2, 2) = q * st * st;
    }
    return g;
  }

  Box natural_domain() const override {
    Box b = uniform_box(dim_, -1e3, 1e3);
    constexpr double eps = 1e-3;
    b.lo[0] = eps;
    b.hi[0] = kappa_ > 0 ? std::numbers::pi / std::sqrt(kappa_) - eps : 50.0;
    if (dim_ == 3) {
      b.lo[1] = eps;
      b.hi[1] = std::numbers::pi - eps;
    }
    return b;
  }

  bool has_analytic_derivatives() const override { return true; }

  void analytic_derivatives(const Vec& x, int order, MetricJet& jet) const override {
    const double s = sn(x[0]);
    const double sp = cs(x[0]);
    const double q = s * s;
    const double qp = 2 * s * sp;
    const double qpp = 2 * (sp * sp - kappa_ * s * s);
    if (dim_ == 2) {
      jet.dg(1, 1, 0) = qp;
      if (order >= 2) jet.d2g(1, 1, 0, 0) = qpp;
      return;
    }
    const double st = std::sin(x[1]);
    const double h = st * st;
    const double hp = std::sin(2 * x[1]);
    const double hpp = 2 * std::cos(2 * x[1]);
    jet.dg(1, 1, 0) = qp;
    jet.dg(2, 2, 0) = qp * h;
    jet.dg(2, 2, 1) = q * hp;
    if (order >= 2) {
      jet.d2g(1, 1, 0, 0) = qpp;
      jet.d2g(2, 2, 0, 0) = qpp * h;
      jet.d2g(2, 2, 0, 1) = qp * hp;
      jet.d2g(2, 2, 1, 0) = qp * hp;
      jet.d2g(2, 2, 1, 1) = q * hpp;
    }
  }

 private:
  double sn(double r) const {
    if (kappa_ > 0) {
      const double k = std::sqrt(kappa_);
      return std::sin(k * r) / k;
    }
    if (kappa_ < 0) {
      const double k = std::sqrt(-kappa_);
      return std::sinh(k * r) / k;
    }
    return r;
  }
  double cs(double r) const {
    if (kappa_ > 0) return std::cos(std::sqrt(kappa_) * r);
    if (kappa_ < 0) return std::cosh(std::sqrt(-kappa_) * r);
    return 1.0;
  }

  int dim_;
  double kappa_;
};

struct Gaussian {
  double amplitude;
  double width;
  Vec center;

  // value, gradient and Hessian of amplitude·exp(-|x - center|²/width²)
  void eval(const Vec& x, double& f, Vec& grad, Mat& hess) const {
    const Vec d = x - center;
    const double w2 = width * width;
    f = amplitude * std::exp(-d.squaredNorm() / w2);
    grad = (-2.0 / w2) * f * d;
    hess = (4.0 / (w2 * w2)) * f * (d * d.transpose());
    hess.diagonal().array() -= 2.0 * f / w2;
  }
};

class ConformalModel final : public MetricModel {
 public:
  ConformalModel(int dim, double c0, Gaussian bump) : dim_(dim), c0_(c0), bump_(std::move(bump)) {}
  int dim() const override { return dim_; }

  Mat metric(const Vec& x) const override {
    const double c = speed(x);
    return Mat::Identity(dim_, dim_) / (c * c);
  }

  Box natural_domain() const override { return uniform_box(dim_, -20.0, 20.0); }
  bool has_analytic_derivatives() const override { return true; }

  void analytic_derivatives(const Vec& x, int order, MetricJet& jet) const override {
    double f;
    Vec grad;
    Mat hess;
    bump_.eval(x, f, grad, hess);
    const double c = c0_ + f;
    const double c3 = c * c * c;
    const double c4 = c3 * c;
    for (int i = 0; i < dim_; ++i) {
      for (int k = 0; k < dim_; ++k) jet.dg(i, i, k) = -2.0 * grad[k] / c3;
      if (order >= 2) {
        for (int k = 0; k < dim_; ++k) {
          for (int l = 0; l < dim_; ++l) {
            jet.d2g(i, i, k, l) = 6.0 * grad[k] * grad[l] / c4 - 2.0 * hess(k, l) / c3;
          }
        }
      }
    }
  }

  double speed(const Vec& x) const {
    double f;
    Vec grad;
    Mat hess;
    bump_.eval(x, f, grad, hess);
    return c0_ + f;
  }

 private:
  int dim_;
  double c0_;
  Gaussian bump_;
};

class DepthProfileModel final : public MetricModel {
 public:
  DepthProfileModel(int dim, double v0, double gradient)
      : dim_(dim), v0_(v0), gradient_(gradient) {}
  int dim() const override { return dim_; }
  Mat metric(const Vec& x) const override {
    const double v = v0_ + gradient_ * x[dim_ - 1];
    return Mat::Identity(dim_, dim_) / (v * v);
  }
  Box natural_domain() const override {
    Box b = uniform_box(dim_, -20.0, 20.0);
    if (gradient_ > 0) b.lo[dim_ - 1] = std::max(-20.0, -0.9 * v0_ / gradient_);
    if (gradient_ < 0) b.hi[dim_ - 1] = std::min(20.0, -0.9 * v0_ / gradient_);
    return b;
  }

 private:
  int dim_;
  double v0_;
  double gradient_;
};

class AnisotropicModel final : public MetricModel {
 public:
  AnisotropicModel(int dim, std::vector<double> base, std::vector<double> amplitude,
                   double width, Vec center)
      : dim_(dim), base_(std::move(base)), amplitude_(std::move(amplitude)), width_(width),
        center_(std::move(center)) {}
  int dim() const override { return dim_; }
  Mat metric(const Vec& x) const override {
    const double e = std::exp(-(x - center_).squaredNorm() / (width_ * width_));
    Mat g = Mat::Zero(dim_, dim_);
    for (int i = 0; i < dim_; ++i) g(i, i) = base_[i] + amplitude_[i] * e;
    return g;
  }
  Box natural_domain() const override { return uniform_box(dim_, -20.0, 20.0); }

 private:
  int dim_;
  std::vector<double> base_;
  std::vector<double> amplitude_;
  double width_;
  Vec center_;
};

double min_eigenvalue(const Mat& g) {
  Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

// ---- MetricField ---------------------------------------------------------

MetricField::MetricField(std::shared_ptr<const MetricModel> model, MetricKind kind,
                         DerivativeMode mode, Box domain, double fd_step)
    : model_(std::move(model)), kind_(kind), mode_(mode), domain_(std::move(domain)),
      fd_step_(fd_step) {
  if (mode_ == DerivativeMode::Analytic && !model_->has_analytic_derivatives()) {
    throw Error(ErrorKind::Config,
                "metric kind " + to_string(kind_) + " only supports finite differences");
  }
}

Mat MetricField::eval(const Vec& x) const {
  if (!contains(x)) {
    std::ostringstream msg;
    msg << "point (" << x.transpose() << ") outside chart domain";
    throw Error(ErrorKind::Domain, msg.str());
  }
  Mat g = model_->metric(x);
  g = 0.5 * (g + g.transpose()).eval();
  if (!g.allFinite() || min_eigenvalue(g) < 1e-12) {
    std::ostringstream msg;
    msg << "metric not positive definite at (" << x.transpose() << ")";
    throw Error(ErrorKind::DegenerateMetric, msg.str());
  }
  return g;
}

MetricJet MetricField::jet(const Vec& x, int order) const {
  MetricJet jet;
  jet.n = dim();
  jet.order = order;
  jet.g = eval(x);
  jet.ginv = jet.g.inverse();
  jet.dg = Tensor3(jet.n);
  jet.d2g = Tensor4(jet.n);
  if (order <= 0) return jet;
  if (mode_ == DerivativeMode::Analytic) {
    model_->analytic_derivatives(x, order, jet);
  } else {
    finite_difference_derivatives(x, order, jet);
  }
  return jet;
}

void MetricField::finite_difference_derivatives(const Vec& x, int order, MetricJet& jet) const {
  const int n = dim();
  const double h = fd_step_;
  auto g_at = [&](const Vec& p) { return model_->metric(p); };

  for (int k = 0; k < n; ++k) {
    Vec xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    const Mat d = (g_at(xp) - g_at(xm)) / (2 * h);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) jet.dg(i, j, k) = d(i, j);
  }
  if (order < 2) return;

  // Second derivatives: central differences with Richardson extrapolation
  // over steps (h2, h2/2). A larger base step than h keeps round-off small.
  const double h2 = std::max(1e-3, h);
  const Mat g0 = g_at(x);
  auto second = [&](int k, int l, double s) -> Mat {
    if (k == l) {
      Vec xp = x, xm = x;
      xp[k] += s;
      xm[k] -= s;
      return (g_at(xp) - 2.0 * g0 + g_at(xm)) / (s * s);
    }
    Vec pp = x, pm = x, mp = x, mm = x;
    pp[k] += s; pp[l] += s;
    pm[k] += s; pm[l] -= s;
    mp[k] -= s; mp[l] += s;
    mm[k] -= s; mm[l] -= s;
    return (g_at(pp) - g_at(pm) - g_at(mp) + g_at(mm)) / (4 * s * s);
  };
  for (int k = 0; k < n; ++k) {
    for (int l = k; l < n; ++l) {
      const Mat d = (4.0 * second(k, l, 0.5 * h2) - second(k, l, h2)) / 3.0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          jet.d2g(i, j, k, l) = d(i, j);
          jet.d2g(i, j, l, k) = d(i, j);
        }
      }
    }
  }
}

MetricField MetricField::with_derivative_mode(DerivativeMode mode) const {
  return MetricField(model_, kind_, mode, domain_, fd_step_);
}

MetricField MetricField::with_domain(Box domain) const {
  return MetricField(model_, kind_, mode_, std::move(domain), fd_step_);
}

// ---- catalog -------------------------------------------------------------

MetricField make_euclidean(int dim) {
  check_dim(dim);
  auto model = std::make_shared<EuclideanModel>(dim);
  return MetricField(model, MetricKind::Euclidean, DerivativeMode::Analytic,
                     model->natural_domain());
}

MetricField make_constant_curvature(int dim, double kappa) {
  check_dim(dim);
  auto model = std::make_shared<ConstantCurvatureModel>(dim, kappa);
  return MetricField(model, MetricKind::ConstantCurvature, DerivativeMode::Analytic,
                     model->natural_domain());
}

MetricField make_conformal(int dim, const ConformalParams& p, DerivativeMode mode) {
  check_dim(dim);
  if (p.width <= 0) throw Error(ErrorKind::Config, "conformal width must be positive");
  if (p.c0 - std::max(0.0, -p.amplitude) <= 0) {
    throw Error(ErrorKind::Config, "conformal speed c(x) must stay positive");
  }
  auto model = std::make_shared<ConformalModel>(
      dim, p.c0, Gaussian{p.amplitude, p.width, center_or_origin(dim, p.center)});
  return MetricField(model, MetricKind::Conformal, mode, model->natural_domain());
}

MetricField make_depth_profile(int dim, double v0, double gradient) {
  check_dim(dim);
  if (v0 <= 0) throw Error(ErrorKind::Config, "depth_profile v0 must be positive");
  auto model = std::make_shared<DepthProfileModel>(dim, v0, gradient);
  return MetricField(model, MetricKind::DepthProfile, DerivativeMode::FiniteDifference,
                     model->natural_domain());
}

MetricField make_anisotropic_diagonal(int dim, const AnisotropicParams& p) {
  check_dim(dim);
  if (static_cast<int>(p.base.size()) != dim || static_cast<int>(p.amplitude.size()) != dim) {
    throw Error(ErrorKind::Config, "anisotropic_diagonal needs `base` and `amplitude` of length dim");
  }
  for (int i = 0; i < dim; ++i) {
    if (p.base[i] - std::max(0.0, -p.amplitude[i]) <= 0) {
      throw Error(ErrorKind::Config, "anisotropic_diagonal coefficient must stay positive");
    }
  }
  if (p.width <= 0) throw Error(ErrorKind::Config, "anisotropic width must be positive");
  auto model = std::make_shared<AnisotropicModel>(dim, p.base, p.amplitude, p.width,
                                                  center_or_origin(dim, p.center));
  return MetricField(model, MetricKind::AnisotropicDiagonal, DerivativeMode::FiniteDifference,
                     model->natural_domain());
}

MetricField make_constant_metric(const Mat& g) {
  check_dim(static_cast<int>(g.rows()));
  auto model = std::make_shared<ConstantMetricModel>(g);
  return MetricField(model, MetricKind::Constant, DerivativeMode::Analytic,
                     model->natural_domain());
}

// ---- curvature -----------------------------------------------------------

Tensor3 christoffel(const MetricJet& jet) {
  const int n = jet.n;
  Tensor3 gamma(n);
  for (int j = 0; j < n; ++j) {
    for (int k = j; k < n; ++k) {
      for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int p = 0; p < n; ++p) {
          s += jet.ginv(i, p) * (jet.dg(j, p, k) + jet.dg(k, p, j) - jet.dg(j, k, p));
        }
        gamma(i, j, k) = 0.5 * s;
        gamma(i, k, j) = 0.5 * s;
      }
    }
  }
  return gamma;
}

Tensor3 christoffel(const MetricField& m, const Vec& x) { return christoffel(m.jet(x, 1)); }

Tensor4 riemann(const MetricJet& jet) {
  const int n = jet.n;
  const Tensor3 gamma = christoffel(jet);

  // ∂_m g^{ip} = −g^{ia} ∂_m g_ab g^{bp}
  Tensor3 dginv(n);  // dginv(i, p, m)
  for (int m = 0; m < n; ++m) {
    Mat dgm(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) dgm(a, b) = jet.dg(a, b, m);
    const Mat r = -jet.ginv * dgm * jet.ginv;
    for (int i = 0; i < n; ++i)
      for (int p = 0; p < n; ++p) dginv(i, p, m) = r(i, p);
  }

  // dgamma(i, j, k, m) = ∂_m Γ^i_{jk}
  Tensor4 dgamma(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        for (int m = 0; m < n; ++m) {
          double s = 0.0;
          for (int p = 0; p < n; ++p) {
            const double t = jet.dg(j, p, k) + jet.dg(k, p, j) - jet.dg(j, k, p);
            const double dt = jet.d2g(j, p, k, m) + jet.d2g(k, p, j, m) - jet.d2g(j, k, p, m);
            s += dginv(i, p, m) * t + jet.ginv(i, p) * dt;
          }
          dgamma(i, j, k, m) = 0.5 * s;
        }
      }
    }
  }

  Tensor4 R(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
          double s = dgamma(i, j, l, k) - dgamma(i, j, k, l);
          for (int p = 0; p < n; ++p) {
            s += gamma(p, j, l) * gamma(i, p, k) - gamma(p, j, k) * gamma(i, p, l);
          }
          R(i, j, k, l) = s;
        }
      }
    }
  }
  return R;
}

Tensor4 riemann(const MetricField& m, const Vec& x) { return riemann(m.jet(x, 2)); }

Tensor4 lower_riemann(const Tensor4& R, const Mat& g) {
  const int n = R.n;
  Tensor4 L(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double s = 0.0;
          for (int p = 0; p < n; ++p) s += g(i, p) * R(p, j, k, l);
          L(i, j, k, l) = s;
        }
  return L;
}

CurvatureTensors curvature_tensors(const MetricField& m, const Vec& x) {
  const MetricJet jet = m.jet(x, 2);
  CurvatureTensors out;
  out.christoffel = christoffel(jet);
  out.riemann = riemann(jet);
  out.riemann_lower = lower_riemann(out.riemann, jet.g);
  return out;
}

Mat directional_curvature(const Tensor4& R, const Vec& v) {
  const int n = R.n;
  Mat D = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) s += R(i, j, k, l) * v[j] * v[l];
      D(i, k) = s;
    }
  return D;
}

Mat directional_curvature(const MetricField& m, const Vec& x, const Vec& v) {
  if (v.norm() == 0.0) throw Error(ErrorKind::ZeroVector, "directional curvature of zero vector");
  return directional_curvature(riemann(m, x), v);
}

double sectional_curvature(const Tensor4& L, const Mat& g, const Vec& X, const Vec& Y) {
  const int n = L.n;
  double num = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) num += L(i, j, k, l) * X[i] * Y[j] * X[k] * Y[l];
  const double xx = X.dot(g * X);
  const double yy = Y.dot(g * Y);
  const double xy = X.dot(g * Y);
  const double den = xx * yy - xy * xy;
  if (den <= 0) throw Error(ErrorKind::ZeroVector, "sectional curvature of a degenerate plane");
  return num / den;
}

double sectional_curvature(const MetricField& m, const Vec& x, const Vec& X, const Vec& Y) {
  const MetricJet jet = m.jet(x, 2);
  return sectional_curvature(lower_riemann(riemann(jet), jet.g), jet.g, X, Y);
}

Vec christoffel_contract(const Tensor3& gamma, const Vec& a, const Vec& b) {
  const int n = gamma.n;
  Vec out = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) s += gamma(i, j, k) * a[j] * b[k];
    out[i] = -s;
  }
  return out;
}

}  // namespace gdix
