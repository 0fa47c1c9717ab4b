#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gdix/dataset.hpp"
#include "gdix/metric.hpp"
#include "gdix/recovery.hpp"
#include "gdix/surfaces.hpp"

namespace gdix::cli {

struct AxisRange {
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;
};

struct MetricConfig {
  std::string kind = "euclidean";
  std::string derivative_mode = "analytic";
  double kappa = 1.0;
  ConformalParams conformal;
  double v0 = 1.0;
  double gradient = 0.0;
  AnisotropicParams anisotropic;
};

struct Sigma0Config {
  std::vector<double> center;
  double t0 = 1.0;
  std::vector<double> axis;
  std::vector<AxisRange> xhat;
};

struct GridConfig {
  double dt = 0.005;
  double dr = 0.005;
  double t_start = 0.0;  // 0 means dt
  double t_max = 0.0;
  double r_max = 0.0;
  double caustic_band = 0.0;  // in units of dt; see ForwardOptions
};

struct InversionConfig {
  bool strict_step = false;
  std::optional<double> curvature_bound;
  std::optional<double> ball_radius;
  double max_window = 0.4;
  double noise_threshold = 1e-2;
  std::vector<double> restart_offsets;
};

struct NoiseConfig {
  double sigma = 0.0;
  std::uint64_t seed = 1;
};

struct CompareConfig {
  double tolerance = 1e-3;
  double dxhat = 0.01;
};

struct SurfacesConfig {
  std::size_t count = 300;
  double t_lo = 0.02;
  double t_hi = 0.05;
  std::size_t points_per_surface = 96;
  std::vector<double> region_lo;
  std::vector<double> region_hi;
  double disk_radius = 1.0;
  std::vector<double> disk_center;
  std::uint64_t seed = 1;
  std::size_t pairs = 20;
  double pair_radius = 0.8;  // pair endpoints are drawn inside this disk
  double link_radius = 0.0;
  double snap_radius = 0.0;
  double probe_radius = 0.3;  // metric fit probes at this distance from the disk centre
  std::size_t probes = 8;
};

struct ExperimentConfig {
  int dim = 2;
  MetricConfig metric;
  Sigma0Config sigma0;
  GridConfig grids;
  InversionConfig inversion;
  NoiseConfig noise;
  CompareConfig compare;
  SurfacesConfig surfaces;
  int jobs = 1;
  std::string output = "gdix_out";
};

// Throws Error(Config) naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
void validate(const ExperimentConfig& c);

// Every field, defaults included.
nlohmann::json to_json(const ExperimentConfig& c);
// FNV-1a of the compact materialized JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

ExperimentConfig euclidean_demo_config(int dim);

MetricField build_metric(const ExperimentConfig& c);
Sigma0Spec build_sigma0(const ExperimentConfig& c);
TGrid build_tgrid(const ExperimentConfig& c);
InversionOptions build_inversion(const ExperimentConfig& c);

}  // namespace gdix::cli
