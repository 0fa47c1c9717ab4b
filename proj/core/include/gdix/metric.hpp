#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gdix/types.hpp"

namespace gdix {

enum class MetricKind {
  Euclidean,
  ConstantCurvature,
  Conformal,
  DepthProfile,
  AnisotropicDiagonal,
  Tabulated,
  Constant,
};

enum class DerivativeMode { Analytic, FiniteDifference };

std::string to_string(MetricKind kind);

// g, g^{-1} and derivatives at one point. dg(i, j, k) = ∂_k g_ij,
// d2g(i, j, k, l) = ∂_k ∂_l g_ij. `order` says how many derivative levels
// are filled in.
struct MetricJet {
  int n = 0;
  int order = 0;
  Mat g;
  Mat ginv;
  Tensor3 dg;
  Tensor4 d2g;
};

// Source of metric coefficients in a single chart.
class MetricModel {
 public:
  virtual ~MetricModel() = default;

  virtual int dim() const = 0;
  virtual Mat metric(const Vec& x) const = 0;
  virtual Box natural_domain() const = 0;

  virtual bool has_analytic_derivatives() const { return false; }
  // Fills jet.dg (order >= 1) and jet.d2g (order >= 2); g/ginv are set by
  // the caller. Only called when has_analytic_derivatives() is true.
  virtual void analytic_derivatives(const Vec& x, int order, MetricJet& jet) const;
};

// A metric on one chart with a declared box domain. Immutable value type;
// copies share the underlying model.
class MetricField {
 public:
  MetricField(std::shared_ptr<const MetricModel> model, MetricKind kind, DerivativeMode mode,
              Box domain, double fd_step = 1e-5);

  int dim() const { return model_->dim(); }
  MetricKind kind() const { return kind_; }
  DerivativeMode derivative_mode() const { return mode_; }
  double fd_step() const { return fd_step_; }
  const Box& domain() const { return domain_; }
  const MetricModel& model() const { return *model_; }

  bool contains(const Vec& x) const { return domain_.contains(x); }

  // Throws Domain outside the chart box and DegenerateMetric when the
  // smallest eigenvalue drops below 1e-12.
  Mat eval(const Vec& x) const;

  MetricJet jet(const Vec& x, int order) const;

  MetricField with_derivative_mode(DerivativeMode mode) const;
  MetricField with_domain(Box domain) const;

 private:
  void finite_difference_derivatives(const Vec& x, int order, MetricJet& jet) const;

  std::shared_ptr<const MetricModel> model_;
  MetricKind kind_;
  DerivativeMode mode_;
  Box domain_;
  double fd_step_;
};

// ---- catalog -------------------------------------------------------------

MetricField make_euclidean(int dim);

// Polar chart dρ² + sn_κ(ρ)² dΩ², with dΩ² = dφ² (n = 2) or
// dθ² + sin²θ dφ² (n = 3).
MetricField make_constant_curvature(int dim, double kappa);

// g = c(x)^{-2} δ with c(x) = c0 + amplitude·exp(-|x - center|² / width²).
struct ConformalParams {
  double c0 = 1.0;
  double amplitude = 0.0;
  double width = 1.0;
  std::vector<double> center;  // defaults to the origin
};
MetricField make_conformal(int dim, const ConformalParams& p,
                           DerivativeMode mode = DerivativeMode::Analytic);

// g = v(z)^{-2} δ with v(z) = v0 + gradient·z, z the last coordinate.
MetricField make_depth_profile(int dim, double v0, double gradient);

// g = diag(a_1(x), ..., a_n(x)), a_i = base_i + amplitude_i·exp(-|x - center|²/width²).
struct AnisotropicParams {
  std::vector<double> base;
  std::vector<double> amplitude;
  double width = 1.0;
  std::vector<double> center;
};
MetricField make_anisotropic_diagonal(int dim, const AnisotropicParams& p);

// Constant coefficient matrix on the whole of R^n.
MetricField make_constant_metric(const Mat& g);

// ---- curvature -----------------------------------------------------------

struct CurvatureTensors {
  Tensor3 christoffel;    // Γ^i_{jk}
  Tensor4 riemann;        // R^i_{jkl}
  Tensor4 riemann_lower;  // R_{ijkl}
};

Tensor3 christoffel(const MetricJet& jet);
Tensor3 christoffel(const MetricField& m, const Vec& x);

// R^i_{jkl} = ∂_k Γ^i_{jl} − ∂_l Γ^i_{jk} + Γ^p_{jl}Γ^i_{pk} − Γ^p_{jk}Γ^i_{pl};
// R(X, Y)Z = R^i_{jkl} Z^j X^k Y^l ∂_i. Needs a jet of order 2.
Tensor4 riemann(const MetricJet& jet);
Tensor4 riemann(const MetricField& m, const Vec& x);

Tensor4 lower_riemann(const Tensor4& riemann, const Mat& g);

CurvatureTensors curvature_tensors(const MetricField& m, const Vec& x);

// Matrix of V ↦ R(V, v)v in the chart basis.
Mat directional_curvature(const Tensor4& riemann, const Vec& v);
Mat directional_curvature(const MetricField& m, const Vec& x, const Vec& v);

// g(R(X,Y)Y, X) / (|X|²|Y|² − g(X,Y)²).
double sectional_curvature(const Tensor4& riemann_lower, const Mat& g, const Vec& X,
                           const Vec& Y);
double sectional_curvature(const MetricField& m, const Vec& x, const Vec& X, const Vec& Y);

// −Γ^i_{jk} a^j b^k
Vec christoffel_contract(const Tensor3& gamma, const Vec& a, const Vec& b);

}  // namespace gdix
