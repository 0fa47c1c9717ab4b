#include "gdix/surfaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <random>
#include <unordered_map>

#include <Eigen/SVD>

#include "gdix/errors.hpp"
#include "gdix/geodesic.hpp"

namespace gdix {

namespace {

// Evenly spread unit directions in an orthonormal basis: equal angles in
// two dimensions, a Fibonacci lattice in three.
std::vector<Vec> spread_directions(int n, std::size_t count, double phase) {
  std::vector<Vec> out;
  for (std::size_t k = 0; k < count; ++k) {
    Vec u(n);
    if (n == 2) {
      const double a = phase + 2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
      u << std::cos(a), std::sin(a);
    } else {
      const double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(count);
      const double a = phase + static_cast<double>(k) * std::numbers::pi * (3.0 - std::sqrt(5.0));
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      u << rho * std::cos(a), rho * std::sin(a), z;
    }
    out.push_back(u);
  }
  return out;
}

// g-orthonormal basis at x by Gram-Schmidt of the chart basis.
Mat orthonormal_basis(const MetricField& m, const Vec& x) {
  const int n = m.dim();
  const Mat g = m.eval(x);
  Mat B = Mat::Identity(n, n);
  for (int c = 0; c < n; ++c) {
    Vec w = B.col(c);
    for (int q = 0; q < c; ++q) w -= w.dot(g * B.col(q)) * B.col(q);
    B.col(c) = w / std::sqrt(w.dot(g * w));
  }
  return B;
}

struct CellKey {
  long a, b, c;
  bool operator==(const CellKey&) const = default;
};
struct CellHash {
  std::size_t operator()(const CellKey& k) const {
    return static_cast<std::size_t>(k.a * 73856093L ^ k.b * 19349663L ^ k.c * 83492791L);
  }
};

CellKey cell_of(const Vec& x, double h) {
  CellKey k{0, 0, 0};
  k.a = static_cast<long>(std::floor(x[0] / h));
  k.b = static_cast<long>(std::floor(x[1] / h));
  if (x.size() > 2) k.c = static_cast<long>(std::floor(x[2] / h));
  return k;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::nth_element(v.begin(), v.begin() + static_cast<long>(v.size() / 2), v.end());
  return v[v.size() / 2];
}

}  // namespace

std::pair<SurfaceFamily, SurfaceFamilyTruth> generate_surface_family(const MetricField& m,
                                                                      const Box& region,
                                                                      const FamilyOptions& opts) {
  const int n = m.dim();
  if (opts.t_lo <= 0 || opts.t_hi < opts.t_lo || opts.points_per_surface < 3) {
    throw Error(ErrorKind::Config, "surface family needs 0 < t_lo <= t_hi and at least 3 points");
  }
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SurfaceFamily fam;
  fam.dim = n;
  fam.region = region;
  SurfaceFamilyTruth truth;
  std::size_t attempts = 0;
  while (fam.surfaces.size() < opts.count) {
    if (++attempts > 100 * opts.count + 1000) {
      throw Error(ErrorKind::Config, "cannot place the requested surfaces inside the region");
    }
    Vec y(n);
    for (int i = 0; i < n; ++i) y[i] = region.lo[i] + (region.hi[i] - region.lo[i]) * unit(rng);
    const double t = opts.t_lo + (opts.t_hi - opts.t_lo) * unit(rng);
    const Mat B = orthonormal_basis(m, y);
    SphericalSurfaceSample s;
    s.t = t;
    const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
    bool inside = true;
    for (const Vec& u : spread_directions(n, opts.points_per_surface, 2 * std::numbers::pi * unit(rng))) {
      const GeodesicEnd e = exp_map(m, y, t * (B * u));
      if (!region.contains(e.x) ||
          (opts.disk_radius > 0 && (e.x - opts.disk_center).norm() > opts.disk_radius)) {
        inside = false;
        break;
      }
      s.points.push_back(e.x);
      s.normals.push_back(sign * e.v);
    }
    if (!inside) continue;
    fam.surfaces.push_back(std::move(s));
    truth.centers.push_back(y);
  }
  return {fam, truth};
}

ChainGraph::ChainGraph(const SurfaceFamily& fam, const ChainOptions& opts) {
  if (fam.surfaces.empty()) throw Error(ErrorKind::InsufficientSamples, "empty surface family");
  std::vector<double> spacing;
  for (const auto& s : fam.surfaces) {
    const std::size_t first = points_.size();
    radius_.push_back(s.t);
    members_.emplace_back();
    for (const Vec& p : s.points) {
      members_.back().push_back(points_.size());
      on_.push_back({radius_.size() - 1});
      points_.push_back(p);
    }
    for (std::size_t a = first; a < points_.size(); ++a) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t b = first; b < points_.size(); ++b)
        if (a != b) best = std::min(best, (points_[a] - points_[b]).norm());
      if (std::isfinite(best)) spacing.push_back(best);
    }
  }
  link_ = opts.link_radius > 0 ? opts.link_radius : median(spacing);
  snap_ = opts.snap_radius > 0 ? opts.snap_radius : 2 * link_;
  linked_.assign(points_.size(), {});
  if (link_ <= 0) return;
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> grid;
  for (std::size_t i = 0; i < points_.size(); ++i) grid[cell_of(points_[i], link_)].push_back(i);
  const int n = static_cast<int>(points_[0].size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const CellKey k = cell_of(points_[i], link_);
    for (long da = -1; da <= 1; ++da)
      for (long db = -1; db <= 1; ++db)
        for (long dc = (n > 2 ? -1 : 0); dc <= (n > 2 ? 1 : 0); ++dc) {
          const auto it = grid.find({k.a + da, k.b + db, k.c + dc});
          if (it == grid.end()) continue;
          for (std::size_t j : it->second) {
            if (j == i || on_[j][0] == on_[i][0]) continue;
            if ((points_[i] - points_[j]).norm() <= link_) linked_[i].push_back(j);
          }
        }
  }
}

std::size_t ChainGraph::snap(const Vec& x) const {
  std::size_t best = 0;
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double e = (points_[i] - x).norm();
    if (e < d) {
      d = e;
      best = i;
    }
  }
  if (d > snap_) {
    throw Error(ErrorKind::Snap, "nearest sample is " + std::to_string(d) + " away (snap radius " +
                                     std::to_string(snap_) + ")");
  }
  return best;
}

// Dijkstra on points and surfaces: entering a surface costs t, leaving it
// costs t, so any two of its samples are 2t apart. A link to a sample of
// another surface is free but must be followed by a ride on that surface;
// states P..2P-1 are points reached through a link.
std::vector<double> ChainGraph::distances_from(std::size_t source) const {
  const double inf = std::numeric_limits<double>::infinity();
  const std::size_t P = points_.size();
  std::vector<double> d(2 * P + radius_.size(), inf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  d[source] = 0.0;
  pq.push({0.0, source});
  while (!pq.empty()) {
    const auto [du, u] = pq.top();
    pq.pop();
    if (du > d[u]) continue;
    auto relax = [&](std::size_t v, double w) {
      if (du + w < d[v]) {
        d[v] = du + w;
        pq.push({d[v], v});
      }
    };
    if (u < 2 * P) {
      const std::size_t p = u % P;
      for (std::size_t s : on_[p]) relax(2 * P + s, radius_[s]);
      if (u < P)
        for (std::size_t v : linked_[p]) relax(P + v, 0.0);
    } else {
      const std::size_t s = u - 2 * P;
      for (std::size_t v : members_[s]) relax(v, radius_[s]);
    }
  }
  std::vector<double> out(P);
  for (std::size_t i = 0; i < P; ++i) out[i] = std::min(d[i], d[P + i]);
  return out;
}

double ChainGraph::distance(const Vec& x, const Vec& z) const {
  const std::size_t a = snap(x), b = snap(z);
  const double d = distances_from(a)[b];
  if (!std::isfinite(d)) throw Error(ErrorKind::Disconnected, "no chain of surfaces joins the points");
  return d;
}

double chain_distance(const SurfaceFamily& fam, const Vec& x, const Vec& z, const ChainOptions& opts) {
  return ChainGraph(fam, opts).distance(x, z);
}

Vec distance_coordinates(const ChainGraph& graph, const Vec& x, const std::vector<Vec>& landmarks,
                         double probe_radius) {
  const int n = static_cast<int>(x.size());
  if (static_cast<int>(landmarks.size()) != n) {
    throw Error(ErrorKind::Config, "need one landmark per dimension");
  }
  const std::size_t xs = graph.snap(x);
  if (probe_radius <= 0) {
    Vec coords(n);
    for (int j = 0; j < n; ++j) {
      const double d = graph.distances_from(graph.snap(landmarks[static_cast<std::size_t>(j)]))[xs];
      if (!std::isfinite(d)) throw Error(ErrorKind::Disconnected, "landmark not reachable");
      coords[j] = d;
    }
    return coords;
  }
  std::vector<std::size_t> probes;
  for (std::size_t i = 0; i < graph.point_count(); ++i)
    if ((graph.point(i) - x).norm() <= probe_radius) probes.push_back(i);
  if (probes.size() < static_cast<std::size_t>(n + 1)) {
    throw Error(ErrorKind::InsufficientSamples, "too few samples near the point to check the landmarks");
  }
  Vec coords(n);
  Eigen::MatrixXd D(probes.size(), n);
  for (int j = 0; j < n; ++j) {
    const std::vector<double> d = graph.distances_from(graph.snap(landmarks[static_cast<std::size_t>(j)]));
    if (!std::isfinite(d[xs])) throw Error(ErrorKind::Disconnected, "landmark not reachable");
    coords[j] = d[xs];
    for (std::size_t p = 0; p < probes.size(); ++p) D(static_cast<long>(p), j) = d[probes[p]];
  }
  // affine fit D ≈ c + (y - x) J
  Eigen::MatrixXd A(probes.size(), n + 1);
  for (std::size_t p = 0; p < probes.size(); ++p) {
    A(static_cast<long>(p), 0) = 1.0;
    for (int c = 0; c < n; ++c) A(static_cast<long>(p), c + 1) = graph.point(probes[p])[c] - x[c];
  }
  const Eigen::MatrixXd sol = A.colPivHouseholderQr().solve(D);
  const Eigen::MatrixXd J = sol.bottomRows(n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  const auto sv = svd.singularValues();
  const double cond = sv.minCoeff() > 0 ? sv.maxCoeff() / sv.minCoeff() : std::numeric_limits<double>::infinity();
  if (!(cond <= 1e3)) {
    throw Error(ErrorKind::DegenerateLandmarks,
                "distance coordinates are degenerate (condition number " + std::to_string(cond) + ")");
  }
  return coords;
}

MetricFit estimate_metric_from_distances(const std::vector<Vec>& coords,
                                         const std::function<double(std::size_t, std::size_t)>& dist) {
  if (coords.empty()) throw Error(ErrorKind::InsufficientSamples, "no probes");
  const int n = static_cast<int>(coords[0].size());
  const int u = n * (n + 1) / 2;
  if (coords.size() < static_cast<std::size_t>(n * (n + 1))) {
    throw Error(ErrorKind::InsufficientSamples, "need at least n(n+1) probes");
  }
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  for (std::size_t a = 0; a < coords.size(); ++a) {
    for (std::size_t b = a + 1; b < coords.size(); ++b) {
      const Vec d = coords[b] - coords[a];
      Eigen::VectorXd row(u);
      int q = 0;
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) row[q++] = (i == j ? 1.0 : 2.0) * d[i] * d[j];
      rows.push_back(row);
      const double e = dist(a, b);
      rhs.push_back(e * e);
    }
  }
  Eigen::MatrixXd A(rows.size(), u);
  Eigen::VectorXd y(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    A.row(static_cast<long>(r)) = rows[r].transpose();
    y[static_cast<long>(r)] = rhs[r];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto sv = svd.singularValues();
  if (sv.minCoeff() <= 1e-10 * sv.maxCoeff()) {
    throw Error(ErrorKind::IllConditioned, "probe differences do not determine the metric");
  }
  const Eigen::VectorXd x = svd.solve(y);
  MetricFit fit;
  fit.g = Mat(n, n);
  int q = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) fit.g(i, j) = fit.g(j, i) = x[q++];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(fit.g), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0) {
    throw Error(ErrorKind::IllConditioned, "fitted metric is not positive definite");
  }
  fit.pairs = rows.size();
  fit.rms_residual = std::sqrt((A * x - y).squaredNorm() / static_cast<double>(rows.size())) / y.mean();
  return fit;
}

std::vector<Vec> OrientationResult::centre_pointing(const Vec& zeta0) const {
  std::vector<Vec> out;
  if (plus) out.push_back(-zeta0);
  if (minus) out.push_back(zeta0);
  return out;
}

OrientationResult orientation_test(const MetricField& m, const SurfaceFamily& fam,
                                   std::size_t index, std::size_t x0, const Vec& zeta0,
                                   const OrientationOptions& opts) {
  if (index >= fam.surfaces.size() || x0 >= fam.surfaces[index].points.size()) {
    throw Error(ErrorKind::Config, "surface or sample index out of range");
  }
  const SphericalSurfaceSample& sf = fam.surfaces[index];
  if (sf.points.size() < 10 || opts.neighbours < 10) {
    throw Error(ErrorKind::InsufficientSamples, "orientation test needs at least 10 samples near x0");
  }
  // Σ ∩ U′: the samples nearest to x0
  std::vector<std::size_t> near(sf.points.size());
  for (std::size_t i = 0; i < near.size(); ++i) near[i] = i;
  const Vec& p0 = sf.points[x0];
  std::sort(near.begin(), near.end(), [&](std::size_t a, std::size_t b) {
    return (sf.points[a] - p0).norm() < (sf.points[b] - p0).norm();
  });
  near.resize(std::min(opts.neighbours, near.size()));
  // a normal field ζ with ζ(x0) = ζ₀
  const Mat g0 = m.eval(p0);
  std::vector<Vec> zeta;
  for (std::size_t i : near) {
    Vec z = sf.normals[i];
    if (z.dot(g0 * zeta0) < 0) z = -z;
    zeta.push_back(z);
  }
  std::vector<double> nn;
  for (std::size_t a : near) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t b : near)
      if (a != b) best = std::min(best, std::sqrt((sf.points[a] - sf.points[b]).dot(g0 * (sf.points[a] - sf.points[b]))));
    nn.push_back(best);
  }
  OrientationResult res;
  res.tolerance = 3.0 * median(nn);

  // largest spread of the points γ_{p,η}(-(t+s)) over the flowed surfaces
  auto spread = [&](double sign) {
    double worst = 0.0;
    const double e = opts.epsilon;
    for (double s : {-e, -e / 2, e / 2, e}) {
      std::vector<Vec> foci;
      for (std::size_t q = 0; q < near.size(); ++q) {
        const GeodesicEnd flowed = exp_map(m, sf.points[near[q]], sign * s * zeta[q]);
        // a negative s flows backwards, which reverses the velocity
        const Vec eta = flowed.v * (s < 0 ? -1.0 : 1.0);
        foci.push_back(exp_map(m, flowed.x, -(sf.t + s) * eta).x);
      }
      Vec mean = Vec::Zero(foci[0].size());
      for (const Vec& f : foci) mean += f;
      mean /= static_cast<double>(foci.size());
      const Mat gm = m.eval(mean);
      for (const Vec& f : foci) worst = std::max(worst, std::sqrt((f - mean).dot(gm * (f - mean))));
    }
    return worst;
  };
  res.spread_plus = spread(1.0);
  res.spread_minus = spread(-1.0);
  res.plus = res.spread_plus <= res.tolerance;
  res.minus = res.spread_minus <= res.tolerance;
  return res;
}

}  // namespace gdix
