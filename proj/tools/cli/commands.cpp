#include "cli/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli/config.hpp"
#include "gdix/errors.hpp"
#include "gdix/io.hpp"
#include "gdix/numerics.hpp"

namespace gdix::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Flags {
  std::string config;
  std::string output;
  int jobs = 0;
  bool strict_step = false;
  std::optional<double> noise_sigma;
  std::optional<std::uint64_t> seed;
  std::vector<double> restart_offsets;
  std::optional<double> tolerance;
  std::string dataset;
  std::string chart;
  std::string truth;
  bool allow_partial = false;
  int demo_dim = 2;
};

struct Context {
  ExperimentConfig cfg;
  std::string hash;
  fs::path out;
  Flags flags;
  std::ostream& log;
};

ExperimentConfig resolve_config(const Flags& f, bool demo) {
  ExperimentConfig c;
  if (!f.config.empty()) {
    c = load_config(f.config);
  } else if (!f.output.empty() && fs::exists(fs::path(f.output) / "config.json")) {
    c = load_config(fs::path(f.output) / "config.json");
  } else if (demo) {
    c = euclidean_demo_config(f.demo_dim);
  } else {
    throw Error(ErrorKind::Config, "no configuration: pass --config or an --output directory holding config.json");
  }
  if (!f.output.empty()) c.output = f.output;
  if (f.jobs > 0) c.jobs = f.jobs;
  if (f.strict_step) c.inversion.strict_step = true;
  if (f.noise_sigma) c.noise.sigma = *f.noise_sigma;
  if (f.seed) c.noise.seed = *f.seed;
  if (!f.restart_offsets.empty()) c.inversion.restart_offsets = f.restart_offsets;
  if (f.tolerance) c.compare.tolerance = *f.tolerance;
  validate(c);
  return c;
}

void write_config(const Context& ctx) {
  std::ofstream o(ctx.out / "config.json");
  if (!o) throw Error(ErrorKind::Config, "cannot write to " + ctx.out.string());
  o << to_json(ctx.cfg).dump(1) << '\n';
}

void write_json_file(const json& j, const fs::path& p) {
  std::ofstream o(p);
  if (!o) throw Error(ErrorKind::Format, "cannot write " + p.string());
  o << j.dump(1) << '\n';
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(6) << v;
  return s.str();
}

std::string xhat_text(const Vec& x) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) s += (i ? ", " : "") + fmt(x[i]);
  return s + ")";
}

fs::path input_path(const std::string& flag, const Context& ctx, const char* name) {
  return flag.empty() ? ctx.out / name : fs::path(flag);
}

WavefrontDataset load_dataset(const Context& ctx) {
  const fs::path p = input_path(ctx.flags.dataset, ctx, "dataset.json");
  WavefrontDataset ds = read_dataset(p);
  if (ds.config_hash != ctx.hash) {
    ctx.log << "note: " << p.filename().string() << " was written with config " << ds.config_hash
            << ", current config is " << ctx.hash << '\n';
  }
  if (ds.dim != ctx.cfg.dim) throw Error(ErrorKind::GridMismatch, "dataset dimension differs from the config");
  return ds;
}

WavefrontDataset simulate(const Context& ctx, const Sigma0Spec& spec) {
  ForwardOptions fo;
  fo.dr = ctx.cfg.grids.dr;
  fo.jobs = ctx.cfg.jobs;
  fo.caustic_band = ctx.cfg.grids.caustic_band;
  WavefrontDataset ds = forward_dataset(build_metric(ctx.cfg), spec, build_tgrid(ctx.cfg), fo);
  if (ctx.cfg.noise.sigma > 0) add_noise(ds, ctx.cfg.noise.sigma, ctx.cfg.noise.seed);
  ds.config_hash = ctx.hash;
  return ds;
}

int cmd_forward(Context& ctx) {
  const WavefrontDataset ds = simulate(ctx, build_sigma0(ctx.cfg));
  write_dataset(ds, ctx.out / "dataset.json");
  const std::size_t total = ds.xhat_count() * ds.t_grid.count;
  ctx.log << "dataset: " << ds.xhat_count() << " geodesics x " << ds.t_grid.count << " times, "
          << ds.masked_count() << " of " << total << " samples masked\n";
  for (std::size_t i = 0; i < ds.xhat_count(); ++i) {
    std::string bands;
    std::size_t k = 0;
    while (k < ds.t_grid.count) {
      if (!ds.mask[i][k]) {
        ++k;
        continue;
      }
      std::size_t e = k;
      while (e + 1 < ds.t_grid.count && ds.mask[i][e + 1]) ++e;
      bands += " [" + fmt(ds.t_grid.at(k)) + ", " + fmt(ds.t_grid.at(e)) + "]";
      k = e + 1;
    }
    if (!bands.empty()) ctx.log << "  xhat " << i << " " << xhat_text(ds.xhat[i]) << ": masked t in" << bands << '\n';
  }
  return 0;
}

int cmd_invert(Context& ctx) {
  const WavefrontDataset ds = load_dataset(ctx);
  const InversionOptions io = build_inversion(ctx.cfg);
  const double r_max = ctx.cfg.grids.r_max;
  std::vector<Reconstruction> recs(ds.xhat_count());
  parallel_for(ds.xhat_count(), ctx.cfg.jobs, [&](std::size_t i) {
    recs[i] = reconstruct_along_geodesic(slice_from_dataset(ds, i), r_max, io);
  });
  write_curvature_csv(recs, ctx.out / "curvature.csv", ctx.hash);
  write_shapes_csv(recs, ctx.out / "shapes.csv", ctx.hash);

  json geo = json::array();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const Reconstruction& rec = recs[i];
    json joints = json::array();
    for (const JointInfo& jt : rec.joints) {
      joints.push_back({{"r", jt.r},
                        {"window", jt.window},
                        {"window_nodes", jt.window_nodes},
                        {"R_jump", jt.R_jump},
                        {"noise_sigma_K", jt.noise.sigma_K},
                        {"noise_sigma_V3", jt.noise.sigma_V3}});
    }
    std::vector<double> xh(ds.xhat[i].data(), ds.xhat[i].data() + ds.xhat[i].size());
    geo.push_back({{"xhat_index", i},
                   {"xhat", xh},
                   {"reached_r", rec.reached_r},
                   {"conjugate_r", rec.conjugate_r},
                   {"joints", std::move(joints)}});
    const int k = rec.crossed_conjugate_points();
    ctx.log << "xhat " << i << " " << xhat_text(ds.xhat[i]) << ": crossed " << k << " conjugate point"
            << (k == 1 ? "" : "s") << ", " << rec.joints.size() << " joints, reached r = " << fmt(rec.reached_r)
            << '\n';
  }
  write_json_file({{"format", "gdix-inversion-report"}, {"config_hash", ctx.hash}, {"r_max", r_max}, {"geodesics", geo}},
                  ctx.out / "inversion.json");
  return 0;
}

std::size_t nearest_to_zero(const std::vector<Vec>& xs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (xs[i].norm() < xs[best].norm()) best = i;
  return best;
}

int cmd_recover(Context& ctx) {
  const WavefrontDataset ds = load_dataset(ctx);
  RecoveryOptions ro;
  ro.inversion = build_inversion(ctx.cfg);
  ro.r_step = ctx.cfg.grids.dr;
  ro.jobs = ctx.cfg.jobs;
  ro.allow_partial = ctx.flags.allow_partial;
  ReconstructedChart chart = recover_chart(ds, ctx.cfg.grids.r_max, ro);
  chart.config_hash = ctx.hash;
  write_chart(chart, ctx.out / "chart.json");
  const std::size_t total = chart.xhat.size() * chart.r.size();
  ctx.log << "chart: " << chart.xhat.size() << " x " << chart.r.size() << " nodes, " << chart.masked_count()
          << " of " << total << " masked\n";
  for (const std::string& n : chart.notes) ctx.log << "  " << n << '\n';

  const auto& offsets = ctx.cfg.inversion.restart_offsets;
  if (offsets.empty()) return 0;
  double longest = 0.0;
  for (double s : offsets) longest = std::max(longest, s);
  const double r_rest = ctx.cfg.grids.r_max + longest;
  if (!(ctx.cfg.grids.t_max > r_rest + 20.0 * ctx.cfg.grids.dt)) {
    throw Error(ErrorKind::Config, "grids.t_max: restarts need t_max > r_max + largest offset + 20 dt");
  }
  const MetricField m = build_metric(ctx.cfg);
  const Sigma0Spec spec = build_sigma0(ctx.cfg);
  const std::size_t axis = nearest_to_zero(chart.xhat);
  std::vector<RestartChart> restarts;
  for (double s : offsets) {
    const RestartSurface rs = restart_surface(m, spec, chart.xhat[axis], s);
    RestartChart rc;
    rc.chart = recover_chart(simulate(ctx, rs.spec), r_rest, ro);
    rc.xhat_index = nearest_to_zero(rc.chart.xhat);
    rc.offset = s;
    rc.alignment = rs.alignment;
    ctx.log << "restart " << fmt(s) << ": " << rc.chart.masked_count() << " masked nodes\n";
    restarts.push_back(std::move(rc));
  }
  const int k = ctx.cfg.dim - 1;
  std::vector<Vec> sv = {Vec::Zero(k)};
  for (int a = 0; a < k; ++a)
    for (double h : {-0.01, 0.01}) {
      Vec v = Vec::Zero(k);
      v[a] = h;
      sv.push_back(v);
    }
  // the tube needs room in r on both sides
  std::vector<double> rv;
  for (double r : chart.r)
    if (r >= 0.05 && r <= ctx.cfg.grids.r_max - 0.05) rv.push_back(r);
  const FermiSamples f = stitched_fermi(chart, axis, restarts, sv, rv);
  write_fermi_csv(f, ctx.out / "fermi_stitched.csv", ctx.hash);
  std::size_t from_restarts = 0;
  for (int s : f.source) from_restarts += s > 0;
  ctx.log << "stitched Fermi tube around xhat " << axis << ": " << from_restarts << " of " << f.r.size()
          << " radii served by restarts\n";
  return 0;
}

int cmd_compare(Context& ctx) {
  const ReconstructedChart chart = read_chart(input_path(ctx.flags.chart, ctx, "chart.json"));
  ReconstructedChart truth;
  if (!ctx.flags.truth.empty()) {
    truth = read_chart(ctx.flags.truth);
  } else {
    truth = ground_truth_chart(build_metric(ctx.cfg), build_sigma0(ctx.cfg), chart.r, ctx.cfg.compare.dxhat,
                               ctx.cfg.jobs);
    truth.config_hash = ctx.hash;
    write_chart(truth, ctx.out / "truth_chart.json");
  }
  const ErrorReport rep = chart_error(chart, truth);
  const double tol = ctx.cfg.compare.tolerance;
  write_error_report(rep, ctx.out / "error_report.json", ctx.hash, tol);
  const bool pass = rep.max_rel <= tol;
  ctx.log << "compare: max_rel " << fmt(rep.max_rel) << ", median " << fmt(rep.median_rel) << ", masked "
          << fmt(100.0 * rep.masked_frac) << "% of " << rep.compared << " compared nodes; tolerance " << fmt(tol)
          << (pass ? " PASS" : " FAIL") << '\n';
  return pass ? 0 : 3;
}

std::vector<Vec> probe_directions(int dim, std::size_t count) {
  std::vector<Vec> out;
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < count; ++i) {
    Vec d(dim);
    if (dim == 2) {
      const double a = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(count);
      d << std::cos(a), std::sin(a);
    } else {
      const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(count);
      const double rr = std::sqrt(1.0 - z * z);
      d << rr * std::cos(golden * i), rr * std::sin(golden * i), z;
    }
    out.push_back(d);
  }
  return out;
}

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()); }

json vec_list(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

int cmd_distance(Context& ctx) {
  const auto& sc = ctx.cfg.surfaces;
  const MetricField m = build_metric(ctx.cfg);
  Box region{to_vec(sc.region_lo), to_vec(sc.region_hi)};
  FamilyOptions fo;
  fo.count = sc.count;
  fo.t_lo = sc.t_lo;
  fo.t_hi = sc.t_hi;
  fo.points_per_surface = sc.points_per_surface;
  fo.disk_radius = sc.disk_radius;
  fo.disk_center = to_vec(sc.disk_center);
  fo.seed = sc.seed;
  const auto [fam, hidden] = generate_surface_family(m, region, fo);
  write_surface_family(fam, ctx.out / "surfaces.json", ctx.hash);
  write_family_truth(hidden, ctx.out / "surfaces_truth.json");

  ChainOptions co;
  co.link_radius = sc.link_radius;
  co.snap_radius = sc.snap_radius;
  const ChainGraph graph(fam, co);
  // straight-line truth is exact only for a constant metric
  const bool flat = ctx.cfg.metric.kind == "euclidean";
  const Vec centre = to_vec(sc.disk_center);

  std::mt19937_64 rng(sc.seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto draw = [&] {
    for (;;) {
      Vec v(ctx.cfg.dim);
      for (int a = 0; a < ctx.cfg.dim; ++a) v[a] = u(rng);
      if (v.norm() <= 1.0) return Vec(centre + sc.pair_radius * v);
    }
  };
  json pairs = json::array();
  std::size_t ok = 0;
  double sum_rel = 0.0, max_rel = 0.0;
  for (std::size_t p = 0; p < sc.pairs; ++p) {
    const Vec x = draw(), z = draw();
    json e = {{"x", vec_list(x)}, {"z", vec_list(z)}};
    e["truth"] = flat ? json((x - z).norm()) : json(nullptr);
    try {
      const double d = graph.distance(x, z);
      e["estimate"] = d;
      ++ok;
      if (flat) {
        const double rel = (d - (x - z).norm()) / (x - z).norm();
        e["rel_error"] = rel;
        sum_rel += std::abs(rel);
        max_rel = std::max(max_rel, std::abs(rel));
      }
    } catch (const Error& err) {
      if (!is_numerical(err.kind())) throw;
      e["error"] = err.what();
    }
    pairs.push_back(std::move(e));
  }

  json fitj;
  try {
    std::vector<Vec> probes;
    for (const Vec& d : probe_directions(ctx.cfg.dim, sc.probes)) probes.push_back(centre + sc.probe_radius * d);
    const MetricFit fit = estimate_metric_from_distances(
        probes, [&](std::size_t a, std::size_t b) { return graph.distance(probes[a], probes[b]); });
    const Mat g = m.eval(centre);
    fitj = {{"g", json::array()}, {"truth", json::array()}};
    for (Eigen::Index a = 0; a < g.rows(); ++a) {
      fitj["g"].push_back(vec_list(fit.g.row(a).transpose()));
      fitj["truth"].push_back(vec_list(g.row(a).transpose()));
    }
    fitj["rel_error"] = (fit.g - g).norm() / g.norm();
    fitj["rms_residual"] = fit.rms_residual;
    fitj["pairs"] = fit.pairs;
  } catch (const Error& err) {
    if (!is_numerical(err.kind())) throw;
    fitj = {{"error", err.what()}};
  }

  json rep = {{"format", "gdix-distance-report"},
              {"config_hash", ctx.hash},
              {"surfaces", fam.surfaces.size()},
              {"points", graph.point_count()},
              {"link_radius", graph.link_radius()},
              {"snap_radius", graph.snap_radius()},
              {"connected_pairs", ok},
              {"pairs", std::move(pairs)},
              {"metric_fit", fitj}};
  if (flat && ok > 0) {
    rep["mean_abs_rel"] = sum_rel / static_cast<double>(ok);
    rep["max_abs_rel"] = max_rel;
  }
  write_json_file(rep, ctx.out / "distance_report.json");
  ctx.log << "distance: " << fam.surfaces.size() << " surfaces, " << ok << " of " << sc.pairs << " pairs connected";
  if (flat && ok > 0) ctx.log << ", mean |rel| " << fmt(sum_rel / ok) << ", max |rel| " << fmt(max_rel);
  ctx.log << '\n';
  if (fitj.contains("rel_error")) {
    ctx.log << "metric fit at the disk centre: rel error " << fmt(fitj["rel_error"].get<double>()) << '\n';
  } else {
    ctx.log << "metric fit failed: " << fitj["error"].get<std::string>() << '\n';
  }
  return ok > 0 || fitj.contains("rel_error") ? 0 : 2;
}

int cmd_demo(Context& ctx) {
  cmd_forward(ctx);
  cmd_invert(ctx);
  cmd_recover(ctx);
  return cmd_compare(ctx);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Metric recovery from wavefront shape operators"};
  app.require_subcommand(1, 1);
  Flags f;
  app.add_option("--config", f.config, "Experiment JSON");
  app.add_option("--output", f.output, "Output directory (overrides the config)");
  app.add_option("--jobs", f.jobs, "Worker threads")->check(CLI::Range(1, 1024));
  app.add_flag("--strict-step", f.strict_step, "Cap inversion steps at the theoretical bound");
  app.add_option("--noise-sigma", f.noise_sigma, "Gaussian noise added to the samples")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", f.seed, "Noise seed");
  app.add_option("--restart-offsets", f.restart_offsets, "Restart offsets s1,s2,...")->delimiter(',');
  app.add_option("--tolerance", f.tolerance, "Compare gate on max relative error");
  app.add_option("--dataset", f.dataset, "Dataset JSON (default OUTPUT/dataset.json)");
  app.add_option("--chart", f.chart, "Recovered chart JSON (default OUTPUT/chart.json)");
  app.add_option("--truth", f.truth, "Reference chart JSON (default: computed from the metric)");
  app.add_flag("--allow-partial", f.allow_partial, "Keep charts whose geodesics partly fail");
  app.add_option("--dim", f.demo_dim, "Dimension of the built-in demo")->check(CLI::Range(2, 3));

  const std::vector<std::pair<const char*, const char*>> subs = {
      {"forward", "Simulate the wavefront dataset"},
      {"invert", "Recover curvature along every geodesic"},
      {"recover", "Recover the metric chart"},
      {"compare", "Compare the recovered chart with the truth"},
      {"distance", "Chain distances from sampled spherical surfaces"},
      {"demo", "forward, invert, recover and compare in one go"}};
  for (const auto& [name, help] : subs) app.add_subcommand(name, help)->fallthrough();

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    Context ctx{resolve_config(f, cmd == "demo"), "", {}, f, out};
    ctx.hash = config_hash(ctx.cfg);
    ctx.out = ctx.cfg.output;
    fs::create_directories(ctx.out);
    write_config(ctx);
    if (cmd == "forward") return cmd_forward(ctx);
    if (cmd == "invert") return cmd_invert(ctx);
    if (cmd == "recover") return cmd_recover(ctx);
    if (cmd == "compare") return cmd_compare(ctx);
    if (cmd == "distance") return cmd_distance(ctx);
    return cmd_demo(ctx);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_numerical(e.kind()) ? 2 : 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace gdix::cli
