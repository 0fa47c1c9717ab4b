#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "gdix/errors.hpp"
#include "gdix/inversion.hpp"
#include "support/scenarios.hpp"

using namespace gdix;
using namespace gdix::scenario;

namespace {

std::vector<double> nodes(double lo, double h, int count) {
  std::vector<double> t;
  for (int i = 0; i < count; ++i) t.push_back(lo + h * i);
  return t;
}

std::vector<Mat> tan_values(const std::vector<double>& t, double r) {
  std::vector<Mat> K;
  for (double q : t) K.push_back(Mat::Constant(1, 1, std::tan(q - r)));
  return K;
}

// d³/du³ tan u
double tan3(double u) {
  const double c = std::cos(u);
  const double s = std::tan(u);
  return 2.0 * (1.0 + 3.0 * s * s) / (c * c);
}

}  // namespace

TEST(StepBound, ReproducesTableValues) {
  EXPECT_NEAR(step_bound(1.0, 2.0, 24.0).t2, 0.5 * (2.0 / (2.0 * (1.0 + 32.0))), 1e-12);
  EXPECT_NEAR(step_bound(1.0, 2.0, 24.0).t2, 0.01515, 5e-6);
  EXPECT_NEAR(step_bound(0.01, 1.0, 6.0).t2, 0.05, 1e-12);
}

TEST(StepBound, DefaultLipschitzIsTwelveRSquared) {
  const StepControl c = step_bound(1.0, 3.0);
  EXPECT_DOUBLE_EQ(c.lipschitz, 108.0);
}

TEST(StepBound, MonotoneInCurvatureAndRadius) {
  double prev = step_bound(0.01, 2.0, 24.0).t2;
  for (double K : {0.1, 1.0, 10.0, 100.0, 1e4, 1e6}) {
    const double t2 = step_bound(K, 2.0, 24.0).t2;
    EXPECT_LE(t2, prev);
    prev = t2;
  }
  EXPECT_LT(step_bound(1e8, 2.0).t2, 1e-4);
  prev = step_bound(1.0, 1.0).t2;
  for (double R : {1.5, 2.0, 4.0, 8.0}) {
    const double t2 = step_bound(1.0, R).t2;
    EXPECT_LE(t2, prev);
    prev = t2;
  }
}

TEST(StepBound, RejectsNonPositiveInputs) {
  EXPECT_THROW(step_bound(0.0, 1.0), Error);
  EXPECT_THROW(step_bound(1.0, -1.0), Error);
  try {
    step_bound(1.0, 1.0, -2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BadBound);
  }
}

TEST(InitialVState, SphereThirdDerivative) {
  const double dt = 0.005;
  const auto t = nodes(0.0, dt, 81);
  const VState V = initial_vstate(t, tan_values(t, 0.0), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_NEAR(V.V3[i](0, 0), tan3(t[i]), 1e-4 * tan3(t[i])) << "t = " << t[i];
    EXPECT_NEAR(V.V1[i](0, 0), 1.0 / std::pow(std::cos(t[i]), 2), 1e-8);
  }
}

TEST(InitialVState, NonuniformNodes) {
  std::vector<double> t{0.0, 0.0031};
  for (int i = 1; i < 40; ++i) t.push_back(0.0031 + 0.005 * i);
  const VState V = initial_vstate(t, tan_values(t, 0.0), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(V.V3[i](0, 0), tan3(t[i]), 1e-4 * tan3(t[i]));
}

TEST(InitialVState, RejectsSingularShape) {
  const auto t = nodes(0.1, 0.005, 20);
  std::vector<Mat> S(t.size(), Mat::Identity(1, 1));
  S[5](0, 0) = 0.0;
  try {
    initial_vstate(t, S, {}, 0.1, 0.2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularShape);
  }
}

TEST(DiagEval, OutsideNodesThrows) {
  const auto t = nodes(0.0, 0.005, 20);
  const VState V = initial_vstate(t, tan_values(t, 0.0), 0.0);
  EXPECT_NEAR(diag_eval(V, 0.0123)(0, 0), tan3(0.0123), 1e-4);
  try {
    diag_eval(V, 0.2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfWindow);
  }
}

TEST(VSystem, EuclideanRightHandSide) {
  VState V;
  V.t = {0.5};
  V.V0 = {Mat::Identity(2, 2) * 0.5};
  V.V1 = {Mat::Identity(2, 2)};
  V.V2 = {Mat::Zero(2, 2)};
  V.V3 = {Mat::Zero(2, 2)};
  const VDerivative d = vsystem_rhs(V, Mat::Zero(2, 2));
  EXPECT_TRUE(d.dV0[0].isApprox(-Mat::Identity(2, 2)));
  EXPECT_TRUE(d.dV1[0].isZero());
  EXPECT_TRUE(d.dV3[0].isZero());
}

// For fixed τ the V-system is the t-derivative hierarchy of ∂_r K = -I - K R K;
// check against K = tan(τ - r), R = 1, with exact derivatives.
TEST(VSystem, SphereDerivativeHierarchy) {
  const double u = 0.3;
  const double s = std::tan(u), c2 = 1.0 / std::pow(std::cos(u), 2);
  VState V;
  V.t = {u};
  V.V0 = {Mat::Constant(1, 1, s)};
  V.V1 = {Mat::Constant(1, 1, c2)};
  V.V2 = {Mat::Constant(1, 1, 2.0 * s * c2)};
  V.V3 = {Mat::Constant(1, 1, tan3(u))};
  const VDerivative d = vsystem_rhs(V, Mat::Identity(1, 1));
  // ∂_r V^j = -∂_u^{j+1} tan u
  EXPECT_NEAR(d.dV0[0](0, 0), -c2, 1e-12);
  EXPECT_NEAR(d.dV1[0](0, 0), -2.0 * s * c2, 1e-12);
  EXPECT_NEAR(d.dV2[0](0, 0), -tan3(u), 1e-12);
  const double h = 1e-4;
  const double fd4 = (tan3(u + h) - tan3(u - h)) / (2 * h);
  EXPECT_NEAR(d.dV3[0](0, 0), -fd4, 1e-6);
}

TEST(March, ExactSphereData) {
  const auto t = nodes(0.0, 0.005, 81);
  const VState V = initial_vstate(t, tan_values(t, 0.0), 0.0);
  const MarchResult mr = march_vsystem(V, 0.375, 0.005);
  EXPECT_LT(max_error(mr.profile, 1.0), 1e-6);
  EXPECT_NEAR(mr.phi.back()(0, 0), std::cos(0.375), 1e-9);
  EXPECT_NEAR(mr.phi.back()(0, 1), std::sin(0.375), 1e-9);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_NEAR(mr.final_state.V0[i](0, 0), std::tan(t[i] - 0.375), 1e-8);
  }
}

TEST(March, LeavingTheBallThrows) {
  const auto t = nodes(0.0, 0.005, 81);
  const VState V = initial_vstate(t, tan_values(t, 0.0), 0.0);
  try {
    march_vsystem(V, 0.3, 0.005, 1.0);
    FAIL();
  } catch (const ReconstructionError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BlowUp);
  }
}

TEST(March, TrajectoryOnRequest) {
  const auto t = nodes(0.0, 0.01, 30);
  const VState V = initial_vstate(t, tan_values(t, 0.0), 0.0);
  const MarchResult mr = march_vsystem(V, 0.1, 0.01, 0.0, true);
  EXPECT_EQ(mr.trajectory.size(), mr.profile.r.size());
  EXPECT_NEAR(mr.trajectory.back().r, 0.1, 1e-15);
}

TEST(Continuation, Euclidean) {
  CurvatureProfile prof;
  for (int k = 0; k <= 100; ++k) {
    prof.r.push_back(0.01 * k);
    prof.R.push_back(Mat::Zero(2, 2));
  }
  ShapeTable from;
  for (int i = 1; i <= 300; ++i) {
    from.t.push_back(0.01 * i);
    from.S.push_back(Mat::Identity(2, 2) / (0.01 * i));
    from.mask.push_back(0);
  }
  const ShapeTable out = continue_past_step(prof, from, 0.8);
  ASSERT_FALSE(out.t.empty());
  for (std::size_t i = 0; i < out.t.size(); ++i) {
    ASSERT_FALSE(out.mask[i]);
    EXPECT_LT((out.S[i] - Mat::Identity(2, 2) / (out.t[i] - 0.8)).norm(), 1e-9 / (out.t[i] - 0.8));
  }
}

TEST(Continuation, SphereCrossesZeroAndPole) {
  CurvatureProfile prof;
  for (int k = 0; k <= 200; ++k) {
    prof.r.push_back(0.005 * k);
    prof.R.push_back(Mat::Identity(1, 1));
  }
  const DataSlice d = sphere_slice(0.005, 4.5);
  ShapeTable from{0.0, d.t, d.S, d.mask};
  const ShapeTable out = continue_past_step(prof, from, 1.0);
  int crossed_zero = 0, past_pole = 0;
  for (std::size_t i = 0; i < out.t.size(); ++i) {
    const double u = out.t[i] - 1.0;
    if (out.mask[i]) {
      EXPECT_LT(std::abs(std::sin(u)), 1e-3);
      continue;
    }
    if (u > std::numbers::pi / 2) ++crossed_zero;
    if (u > std::numbers::pi) ++past_pole;
    EXPECT_NEAR(out.S[i](0, 0), 1.0 / std::tan(u), 1e-4 * std::max(1.0, std::abs(1.0 / std::tan(u))));
  }
  EXPECT_GT(crossed_zero, 100);
  EXPECT_GT(past_pole, 50);
}

TEST(Reconstruct, EuclideanZeroCurvature) {
  for (int k : {1, 2}) {
    const Reconstruction rec = reconstruct_along_geodesic(euclidean_slice(0.005, 3.6, k), 3.0);
    EXPECT_LT(max_error(rec.profile, 0.0), 1e-6);
    EXPECT_NEAR(rec.reached_r, 3.0, 1e-12);
    EXPECT_EQ(rec.crossed_conjugate_points(), 0);
    for (const ShapeTable& tab : rec.tables) {
      for (std::size_t i = 0; i < tab.t.size(); ++i) {
        const double u = tab.t[i] - tab.r;
        EXPECT_LT((tab.S[i] - Mat::Identity(k, k) / u).norm(), 1e-6 / u);
      }
    }
  }
}

TEST(Reconstruct, SpherePastConjugatePoint) {
  const double r_max = 2 * std::numbers::pi;
  const Reconstruction rec = reconstruct_along_geodesic(sphere_slice(0.005, r_max + 0.6), r_max);
  EXPECT_LT(max_error(rec.profile, 1.0), 1e-3);
  ASSERT_EQ(rec.crossed_conjugate_points(), 1);
  EXPECT_NEAR(rec.conjugate_r[0], std::numbers::pi, 1e-3);
  double worst = 0.0;
  for (const ShapeTable& tab : rec.tables) {
    for (std::size_t i = 0; i < tab.t.size(); ++i) {
      if (tab.mask[i]) continue;
      const double u = tab.t[i] - tab.r;
      if (std::abs(std::sin(u)) < 0.05) continue;
      worst = std::max(worst, std::abs(tab.S[i](0, 0) - 1.0 / std::tan(u)));
    }
  }
  EXPECT_LT(worst, 1e-4);
  for (const JointInfo& j : rec.joints) EXPECT_LT(j.R_jump, 1e-3);
}

TEST(Reconstruct, StrictStepsAgreeWithAdaptive) {
  InversionOptions strict;
  strict.strict_step = true;
  const DataSlice d = sphere_slice(0.005, 1.2);
  const Reconstruction a = reconstruct_along_geodesic(d, 0.3);
  const Reconstruction s = reconstruct_along_geodesic(d, 0.3, strict);
  EXPECT_LT(max_error(s.profile, 1.0), 1e-5);
  ASSERT_FALSE(s.joints.empty());
  double largest = 0.0;
  for (const JointInfo& j : s.joints) largest = std::max(largest, j.control.t2);
  EXPECT_GE(static_cast<double>(s.joints.size()), 0.3 / largest - 1e-9);
  EXPECT_EQ(a.joints.size(), 1u);
}

TEST(Reconstruct, NoisyDataRaisesNoiseError) {
  DataSlice d = sphere_slice(0.005, 1.5);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd(0.0, 1e-5);
  for (Mat& S : d.S) S(0, 0) += nd(rng);
  try {
    reconstruct_along_geodesic(d, 1.0);
    FAIL();
  } catch (const ReconstructionError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Noise);
    EXPECT_GE(e.reached_r(), 0.0);
  }
}

TEST(Reconstruct, ShortDataIsWindowExhausted) {
  try {
    reconstruct_along_geodesic(euclidean_slice(0.005, 1.0), 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::WindowExhausted);
  }
}

TEST(Reconstruct, CauchySolutionsFromPropagator) {
  const Reconstruction rec = reconstruct_along_geodesic(sphere_slice(0.005, 3.0), 2.0);
  const Mat I = Mat::Identity(1, 1);
  for (std::size_t k = 0; k < rec.profile.r.size(); k += 37) {
    const double r = rec.profile.r[k];
    const PairMat P = rec.solve_cauchy(k, I, Mat::Zero(1, 1));
    EXPECT_NEAR(P(0, 0), std::cos(r), 1e-6);
    EXPECT_NEAR(P(1, 0), -std::sin(r), 1e-6);
  }
}

TEST(Reconstruct, LensMatchesForwardCurvature) {
  const WavefrontDataset ds = lens_dataset();
  const Reconstruction rec = reconstruct_along_geodesic(slice_from_dataset(ds, 0), 2.0);
  EXPECT_LT(max_error(rec.profile, lens_truth(rec.profile.r)), 1e-3);
  EXPECT_GE(rec.crossed_conjugate_points(), 1);
}

TEST(Reconstruct, LensConvergesUnderRefinement) {
  double err[2];
  int idx = 0;
  for (double dt : {0.01, 0.005}) {
    const WavefrontDataset ds = lens_dataset(dt);
    const Reconstruction rec = reconstruct_along_geodesic(slice_from_dataset(ds, 0), 2.0);
    err[idx++] = max_error(rec.profile, lens_truth(rec.profile.r, 0.0, dt));
  }
  EXPECT_GE(err[0] / err[1], 3.0) << err[0] << " " << err[1];
}

TEST(Reconstruct, MaskedSampleOnlyActsLocally) {
  const WavefrontDataset ds = lens_dataset();
  const DataSlice full = slice_from_dataset(ds, 0);
  DataSlice holed = full;
  const std::size_t hole = 199;  // t = 1.0
  holed.mask[hole] = 1;
  const Reconstruction a = reconstruct_along_geodesic(full, 2.0);
  const Reconstruction b = reconstruct_along_geodesic(holed, 2.0);
  ASSERT_EQ(a.profile.r.size(), b.profile.r.size());
  double far = 0.0;
  for (std::size_t k = 0; k < a.profile.r.size(); ++k) {
    const double diff = (a.profile.R[k] - b.profile.R[k]).norm();
    if (a.profile.r[k] < full.t[hole] - 0.45) {
      EXPECT_EQ(diff, 0.0);
    } else {
      far = std::max(far, diff);
    }
  }
  EXPECT_LT(far, 1e-4);
}
