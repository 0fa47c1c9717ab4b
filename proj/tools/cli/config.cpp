#include "cli/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "gdix/errors.hpp"

namespace gdix::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::Config, where + ": " + what);
}

// Walks one JSON object, remembering which keys were consumed so unknown
// keys (usually typos) are reported.
class Obj {
 public:
  Obj(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(where_, "expected an object");
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key) && !j_[key].is_null();
  }
  std::string path(const char* key) const { return where_.empty() ? key : where_ + "." + key; }
  const json& at(const char* key) {
    if (!has(key)) fail(path(key), "missing");
    return j_[key];
  }

  double number(const char* key, double def) { return has(key) ? number(key) : def; }
  double number(const char* key) {
    const json& v = at(key);
    if (!v.is_number()) fail(path(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(path(key), "must be finite");
    return d;
  }
  std::optional<double> optional_number(const char* key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }
  std::int64_t integer(const char* key, std::int64_t def) {
    if (!has(key)) return def;
    const json& v = j_[key];
    if (!v.is_number_integer()) fail(path(key), "expected an integer");
    return v.get<std::int64_t>();
  }
  std::size_t count(const char* key, std::size_t def) {
    const std::int64_t v = integer(key, static_cast<std::int64_t>(def));
    if (v < 0) fail(path(key), "must be non-negative");
    return static_cast<std::size_t>(v);
  }
  bool boolean(const char* key, bool def) {
    if (!has(key)) return def;
    if (!j_[key].is_boolean()) fail(path(key), "expected true or false");
    return j_[key].get<bool>();
  }
  std::string string(const char* key, const std::string& def) {
    if (!has(key)) return def;
    if (!j_[key].is_string()) fail(path(key), "expected a string");
    return j_[key].get<std::string>();
  }
  std::vector<double> numbers(const char* key, const std::vector<double>& def) {
    if (!has(key)) return def;
    const json& v = j_[key];
    if (!v.is_array()) fail(path(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(path(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(where_.empty() ? it.key() : where_ + "." + it.key(), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

void parse_metric(Obj& top, ExperimentConfig& c) {
  Obj o(top.at("metric"), "metric");
  c.metric.kind = o.string("kind", c.metric.kind);
  c.metric.derivative_mode = o.string("derivative_mode", c.metric.derivative_mode);
  json empty = json::object();
  Obj p(o.has("params") ? o.at("params") : empty, "metric.params");
  const std::string& k = c.metric.kind;
  if (k == "euclidean") {
  } else if (k == "constant_curvature") {
    c.metric.kappa = p.number("kappa", c.metric.kappa);
  } else if (k == "conformal") {
    auto& q = c.metric.conformal;
    q.c0 = p.number("c0", q.c0);
    q.amplitude = p.number("amplitude", q.amplitude);
    q.width = p.number("width", q.width);
    q.center = p.numbers("center", std::vector<double>(c.dim, 0.0));
  } else if (k == "depth_profile") {
    c.metric.v0 = p.number("v0", c.metric.v0);
    c.metric.gradient = p.number("gradient", c.metric.gradient);
  } else if (k == "anisotropic_diagonal") {
    auto& q = c.metric.anisotropic;
    q.base = p.numbers("base", std::vector<double>(c.dim, 1.0));
    q.amplitude = p.numbers("amplitude", std::vector<double>(c.dim, 0.0));
    q.width = p.number("width", q.width);
    q.center = p.numbers("center", std::vector<double>(c.dim, 0.0));
  } else {
    fail("metric.kind",
         "unknown kind '" + k +
             "' (euclidean, constant_curvature, conformal, depth_profile, anisotropic_diagonal)");
  }
  p.finish();
  o.finish();
}

void parse_sigma0(Obj& top, ExperimentConfig& c) {
  Obj o(top.at("sigma0"), "sigma0");
  c.sigma0.center = o.numbers("center", {});
  c.sigma0.t0 = o.number("t0");
  std::vector<double> axis(c.dim, 0.0);
  axis[0] = 1.0;
  c.sigma0.axis = o.numbers("axis", axis);
  const json& xs = o.at("xhat");
  if (!xs.is_array()) fail("sigma0.xhat", "expected an array of {lo, hi, step}");
  c.sigma0.xhat.clear();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Obj a(xs[i], "sigma0.xhat[" + std::to_string(i) + "]");
    AxisRange r;
    r.lo = a.number("lo");
    r.hi = a.number("hi");
    r.step = a.number("step");
    a.finish();
    c.sigma0.xhat.push_back(r);
  }
  o.finish();
}

void parse_grids(Obj& top, ExperimentConfig& c) {
  Obj o(top.at("grids"), "grids");
  auto& g = c.grids;
  g.dt = o.number("dt", g.dt);
  g.dr = o.number("dr", g.dr);
  g.t_start = o.number("t_start", g.t_start);
  g.t_max = o.number("t_max");
  g.r_max = o.number("r_max");
  g.caustic_band = o.number("caustic_band", g.caustic_band);
  o.finish();
}

void parse_inversion(Obj& top, ExperimentConfig& c) {
  if (!top.has("inversion")) return;
  Obj o(top.at("inversion"), "inversion");
  auto& v = c.inversion;
  v.strict_step = o.boolean("strict_step", v.strict_step);
  v.curvature_bound = o.optional_number("curvature_bound");
  v.ball_radius = o.optional_number("ball_radius");
  v.max_window = o.number("max_window", v.max_window);
  v.noise_threshold = o.number("noise_threshold", v.noise_threshold);
  v.restart_offsets = o.numbers("restart_offsets", v.restart_offsets);
  o.finish();
}

void parse_noise(Obj& top, ExperimentConfig& c) {
  if (!top.has("noise")) return;
  Obj o(top.at("noise"), "noise");
  c.noise.sigma = o.number("sigma", c.noise.sigma);
  c.noise.seed = o.count("seed", c.noise.seed);
  o.finish();
}

void parse_compare(Obj& top, ExperimentConfig& c) {
  if (!top.has("compare")) return;
  Obj o(top.at("compare"), "compare");
  c.compare.tolerance = o.number("tolerance", c.compare.tolerance);
  c.compare.dxhat = o.number("dxhat", c.compare.dxhat);
  o.finish();
}

void parse_surfaces(Obj& top, ExperimentConfig& c) {
  auto& s = c.surfaces;
  s.region_lo.assign(c.dim, -1.0);
  s.region_hi.assign(c.dim, 1.0);
  s.disk_center.assign(c.dim, 0.0);
  if (!top.has("surfaces")) return;
  Obj o(top.at("surfaces"), "surfaces");
  s.count = o.count("count", s.count);
  s.t_lo = o.number("t_lo", s.t_lo);
  s.t_hi = o.number("t_hi", s.t_hi);
  s.points_per_surface = o.count("points_per_surface", s.points_per_surface);
  s.region_lo = o.numbers("region_lo", s.region_lo);
  s.region_hi = o.numbers("region_hi", s.region_hi);
  s.disk_radius = o.number("disk_radius", s.disk_radius);
  s.disk_center = o.numbers("disk_center", s.disk_center);
  s.seed = o.count("seed", s.seed);
  s.pairs = o.count("pairs", s.pairs);
  s.pair_radius = o.number("pair_radius", s.pair_radius);
  s.link_radius = o.number("link_radius", s.link_radius);
  s.snap_radius = o.number("snap_radius", s.snap_radius);
  s.probe_radius = o.number("probe_radius", s.probe_radius);
  s.probes = o.count("probes", s.probes);
  o.finish();
}

void require(bool ok, const std::string& where, const std::string& what) {
  if (!ok) fail(where, what);
}

void require_len(const std::vector<double>& v, std::size_t n, const std::string& where) {
  require(v.size() == n, where, "expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
}

json range_json(const AxisRange& r) { return {{"lo", r.lo}, {"hi", r.hi}, {"step", r.step}}; }

Vec to_vec(const std::vector<double>& v) {
  Vec x(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x[static_cast<Eigen::Index>(i)] = v[i];
  return x;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  Obj top(j, "");
  const std::int64_t dim = top.integer("dim", 2);
  require(dim == 2 || dim == 3, "dim", "must be 2 or 3");
  c.dim = static_cast<int>(dim);
  parse_metric(top, c);
  parse_sigma0(top, c);
  parse_grids(top, c);
  parse_inversion(top, c);
  parse_noise(top, c);
  parse_compare(top, c);
  parse_surfaces(top, c);
  const std::int64_t jobs = top.integer("jobs", 1);
  require(jobs >= 1 && jobs <= 1024, "jobs", "must be between 1 and 1024");
  c.jobs = static_cast<int>(jobs);
  c.output = top.string("output", c.output);
  top.finish();
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Config, path.filename().string() + ": " + e.what());
  }
  return parse_config(j);
}

void validate(const ExperimentConfig& c) {
  const std::size_t n = static_cast<std::size_t>(c.dim);
  const auto& m = c.metric;
  require(m.derivative_mode == "analytic" || m.derivative_mode == "finite_difference",
          "metric.derivative_mode", "must be analytic or finite_difference");
  if (m.kind == "conformal") {
    require_len(m.conformal.center, n, "metric.params.center");
    require(m.conformal.c0 > 0, "metric.params.c0", "must be positive");
    require(m.conformal.width > 0, "metric.params.width", "must be positive");
  } else if (m.kind == "anisotropic_diagonal") {
    require_len(m.anisotropic.base, n, "metric.params.base");
    require_len(m.anisotropic.amplitude, n, "metric.params.amplitude");
    require_len(m.anisotropic.center, n, "metric.params.center");
    require(m.anisotropic.width > 0, "metric.params.width", "must be positive");
    for (double b : m.anisotropic.base) require(b > 0, "metric.params.base", "entries must be positive");
  } else if (m.kind == "depth_profile") {
    require(m.v0 > 0, "metric.params.v0", "must be positive");
  }

  require_len(c.sigma0.center, n, "sigma0.center");
  require_len(c.sigma0.axis, n, "sigma0.axis");
  require(c.sigma0.t0 > 0, "sigma0.t0", "must be positive");
  require(c.sigma0.xhat.size() == n - 1, "sigma0.xhat", "expected dim - 1 = " + std::to_string(n - 1) + " ranges");
  for (std::size_t i = 0; i < c.sigma0.xhat.size(); ++i) {
    const AxisRange& r = c.sigma0.xhat[i];
    const std::string w = "sigma0.xhat[" + std::to_string(i) + "]";
    require(r.step > 0, w + ".step", "must be positive");
    require(r.hi >= r.lo, w, "needs lo <= hi");
  }

  const auto& g = c.grids;
  require(g.dt > 0, "grids.dt", "must be positive");
  require(g.dr > 0, "grids.dr", "must be positive");
  require(g.t_start >= 0, "grids.t_start", "must be non-negative");
  require(g.r_max > 0, "grids.r_max", "must be positive");
  require(g.caustic_band >= 0, "grids.caustic_band", "must be non-negative");
  require(g.t_max > g.r_max + 20.0 * g.dt, "grids.t_max",
          "must exceed r_max + 20 dt (the shortest inversion window)");

  const auto& v = c.inversion;
  if (v.curvature_bound) require(*v.curvature_bound > 0, "inversion.curvature_bound", "must be positive");
  if (v.ball_radius) require(*v.ball_radius > 0, "inversion.ball_radius", "must be positive");
  require(v.max_window > 0, "inversion.max_window", "must be positive");
  require(v.noise_threshold > 0, "inversion.noise_threshold", "must be positive");
  for (double s : v.restart_offsets) require(s > 0, "inversion.restart_offsets", "offsets must be positive");

  require(c.noise.sigma >= 0, "noise.sigma", "must be non-negative");
  require(c.compare.tolerance > 0, "compare.tolerance", "must be positive");
  require(c.compare.dxhat > 0, "compare.dxhat", "must be positive");

  const auto& s = c.surfaces;
  require(s.count > 0, "surfaces.count", "must be positive");
  require(s.t_lo > 0 && s.t_hi >= s.t_lo, "surfaces", "needs 0 < t_lo <= t_hi");
  require(s.points_per_surface >= 3, "surfaces.points_per_surface", "must be at least 3");
  require_len(s.region_lo, n, "surfaces.region_lo");
  require_len(s.region_hi, n, "surfaces.region_hi");
  require_len(s.disk_center, n, "surfaces.disk_center");
  for (std::size_t i = 0; i < n; ++i) require(s.region_hi[i] > s.region_lo[i], "surfaces.region_hi", "must exceed region_lo");
  require(s.disk_radius >= 0, "surfaces.disk_radius", "must be non-negative");
  require(s.pair_radius > 0, "surfaces.pair_radius", "must be positive");
  require(s.link_radius >= 0, "surfaces.link_radius", "must be non-negative");
  require(s.snap_radius >= 0, "surfaces.snap_radius", "must be non-negative");
  require(s.probe_radius > 0, "surfaces.probe_radius", "must be positive");
  require(s.probes >= 3, "surfaces.probes", "must be at least 3");
  require(!c.output.empty(), "output", "must not be empty");
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["dim"] = c.dim;
  json params = json::object();
  const auto& m = c.metric;
  if (m.kind == "constant_curvature") {
    params["kappa"] = m.kappa;
  } else if (m.kind == "conformal") {
    params = {{"c0", m.conformal.c0}, {"amplitude", m.conformal.amplitude}, {"width", m.conformal.width},
              {"center", m.conformal.center}};
  } else if (m.kind == "depth_profile") {
    params = {{"v0", m.v0}, {"gradient", m.gradient}};
  } else if (m.kind == "anisotropic_diagonal") {
    params = {{"base", m.anisotropic.base}, {"amplitude", m.anisotropic.amplitude},
              {"width", m.anisotropic.width}, {"center", m.anisotropic.center}};
  }
  j["metric"] = {{"kind", m.kind}, {"derivative_mode", m.derivative_mode}, {"params", params}};
  json xs = json::array();
  for (const AxisRange& r : c.sigma0.xhat) xs.push_back(range_json(r));
  j["sigma0"] = {{"center", c.sigma0.center}, {"t0", c.sigma0.t0}, {"axis", c.sigma0.axis}, {"xhat", xs}};
  j["grids"] = {{"dt", c.grids.dt}, {"dr", c.grids.dr}, {"t_start", c.grids.t_start > 0 ? c.grids.t_start : c.grids.dt},
                {"t_max", c.grids.t_max}, {"r_max", c.grids.r_max}, {"caustic_band", c.grids.caustic_band}};
  const auto& v = c.inversion;
  j["inversion"] = {{"strict_step", v.strict_step},
                    {"curvature_bound", v.curvature_bound ? json(*v.curvature_bound) : json(nullptr)},
                    {"ball_radius", v.ball_radius ? json(*v.ball_radius) : json(nullptr)},
                    {"max_window", v.max_window},
                    {"noise_threshold", v.noise_threshold},
                    {"restart_offsets", v.restart_offsets}};
  j["noise"] = {{"sigma", c.noise.sigma}, {"seed", c.noise.seed}};
  j["compare"] = {{"tolerance", c.compare.tolerance}, {"dxhat", c.compare.dxhat}};
  const auto& s = c.surfaces;
  j["surfaces"] = {{"count", s.count},
                   {"t_lo", s.t_lo},
                   {"t_hi", s.t_hi},
                   {"points_per_surface", s.points_per_surface},
                   {"region_lo", s.region_lo},
                   {"region_hi", s.region_hi},
                   {"disk_radius", s.disk_radius},
                   {"disk_center", s.disk_center},
                   {"seed", s.seed},
                   {"pairs", s.pairs},
                   {"pair_radius", s.pair_radius},
                   {"link_radius", s.link_radius},
                   {"snap_radius", s.snap_radius},
                   {"probe_radius", s.probe_radius},
                   {"probes", s.probes}};
  j["jobs"] = c.jobs;
  j["output"] = c.output;
  return j;
}

std::string config_hash(const ExperimentConfig& c) {
  json j = to_json(c);
  // scheduling and destination do not change results
  j.erase("jobs");
  j.erase("output");
  const std::string text = j.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig euclidean_demo_config(int dim) {
  json j = {{"dim", dim},
            {"metric", {{"kind", "euclidean"}}},
            {"grids", {{"t_max", 1.2}, {"r_max", 0.8}}}};
  json xs = json::array();
  for (int i = 0; i < dim - 1; ++i) xs.push_back({{"lo", -0.2}, {"hi", 0.2}, {"step", 0.05}});
  j["sigma0"] = {{"center", std::vector<double>(dim, 0.0)}, {"t0", 1.0}, {"xhat", xs}};
  return parse_config(j);
}

MetricField build_metric(const ExperimentConfig& c) {
  const auto& m = c.metric;
  const DerivativeMode mode =
      m.derivative_mode == "analytic" ? DerivativeMode::Analytic : DerivativeMode::FiniteDifference;
  MetricField f = [&] {
    if (m.kind == "constant_curvature") return make_constant_curvature(c.dim, m.kappa);
    if (m.kind == "conformal") return make_conformal(c.dim, m.conformal);
    if (m.kind == "depth_profile") return make_depth_profile(c.dim, m.v0, m.gradient);
    if (m.kind == "anisotropic_diagonal") return make_anisotropic_diagonal(c.dim, m.anisotropic);
    return make_euclidean(c.dim);
  }();
  if (mode == DerivativeMode::FiniteDifference) f = f.with_derivative_mode(mode);
  return f;
}

Sigma0Spec build_sigma0(const ExperimentConfig& c) {
  Sigma0Spec s;
  s.center = to_vec(c.sigma0.center);
  s.t0 = c.sigma0.t0;
  s.axis = to_vec(c.sigma0.axis);
  for (const AxisRange& r : c.sigma0.xhat) s.xhat_axes.push_back(uniform_nodes(r.lo, r.hi, r.step));
  return s;
}

TGrid build_tgrid(const ExperimentConfig& c) {
  return make_tgrid(c.grids.t_start > 0 ? c.grids.t_start : c.grids.dt, c.grids.dt, c.grids.t_max);
}

InversionOptions build_inversion(const ExperimentConfig& c) {
  InversionOptions o;
  o.dr = c.grids.dr;
  o.max_window = c.inversion.max_window;
  o.strict_step = c.inversion.strict_step;
  o.curvature_bound = c.inversion.curvature_bound;
  o.ball_radius = c.inversion.ball_radius;
  o.noise_threshold = c.inversion.noise_threshold;
  return o;
}

}  // namespace gdix::cli
