#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "gdix/errors.hpp"
#include "gdix/io.hpp"

using namespace gdix;
using namespace gdix::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "gdix");
  std::ostringstream o, e;
  const int code = run_cli(args, o, e);
  return {code, o.str(), e.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gdix_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "input.json";
  std::ofstream(p) << j.dump(1);
  return p;
}

json sphere_json(double t_max, double r_max) {
  return {{"dim", 2},
          {"metric", {{"kind", "constant_curvature"}, {"params", {{"kappa", 1.0}}}}},
          {"sigma0",
           {{"center", {1.5707963267948966, 0.0}},
            {"t0", 1.0},
            {"axis", {0.0, 1.0}},
            {"xhat", {{{"lo", -0.05}, {"hi", 0.05}, {"step", 0.05}}}}}},
          {"grids", {{"t_max", t_max}, {"r_max", r_max}}}};
}

json lens_json() {
  return {{"dim", 2},
          {"metric",
           {{"kind", "conformal"},
            {"params", {{"c0", 1.0}, {"amplitude", -0.5}, {"width", 0.5}, {"center", {0.0, 0.0}}}}}},
          {"sigma0",
           {{"center", {0.6, 0.05}},
            {"t0", 2.0},
            {"axis", {-1.0, 0.0}},
            {"xhat", {{{"lo", -0.1}, {"hi", 0.1}, {"step", 0.025}}}}}},
          {"grids", {{"t_max", 2.0}, {"r_max", 1.6}}}};
}

std::string config_error(const json& j) {
  try {
    parse_config(j);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Config);
    return e.what();
  }
  ADD_FAILURE() << "accepted: " << j.dump();
  return "";
}

}  // namespace

TEST(Config, MaterializedDefaultsRoundTrip) {
  const ExperimentConfig c = parse_config(sphere_json(4.0, 1.0));
  const json full = to_json(c);
  EXPECT_EQ(full["grids"]["dt"], 0.005);
  EXPECT_EQ(full["inversion"]["max_window"], 0.4);
  EXPECT_TRUE(full["inversion"]["curvature_bound"].is_null());
  const ExperimentConfig back = parse_config(full);
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(to_json(back), full);
}

TEST(Config, HashIgnoresJobsAndOutput) {
  ExperimentConfig a = parse_config(sphere_json(4.0, 1.0));
  ExperimentConfig b = a;
  b.jobs = 7;
  b.output = "elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.noise.seed = 2;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, DiagnosticsNameTheField) {
  json j = sphere_json(4.0, 1.0);
  j["grids"].erase("r_max");
  EXPECT_NE(config_error(j).find("grids.r_max"), std::string::npos);

  j = sphere_json(4.0, 1.0);
  j["grids"]["dtt"] = 0.1;
  EXPECT_NE(config_error(j).find("grids.dtt: unknown field"), std::string::npos);

  j = sphere_json(4.0, 1.0);
  j["metric"]["kind"] = "flat";
  EXPECT_NE(config_error(j).find("metric.kind"), std::string::npos);

  j = sphere_json(4.0, 1.0);
  j["sigma0"]["center"] = {1.0};
  EXPECT_NE(config_error(j).find("sigma0.center"), std::string::npos);

  j = sphere_json(4.0, 1.0);
  j["grids"]["dt"] = "small";
  EXPECT_NE(config_error(j).find("grids.dt: expected a number"), std::string::npos);
}

TEST(Config, TMaxMustCoverTheLastWindow) {
  EXPECT_NE(config_error(sphere_json(1.09, 1.0)).find("grids.t_max"), std::string::npos);
  EXPECT_NO_THROW(parse_config(sphere_json(1.11, 1.0)));
}

TEST(Cli, EuclideanDemoPassesWithFlatCurvature) {
  const fs::path d = scratch("demo");
  const CliRun r = run({"demo", "--output", d.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("0 of 2160 samples masked"), std::string::npos) << r.out;

  std::ifstream in(d / "curvature.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("# config_hash=", 0), 0u);
  std::getline(in, line);
  std::size_t rows = 0;
  double worst = 0.0;
  while (std::getline(in, line)) {
    const std::string R = line.substr(line.rfind(',') + 1);
    worst = std::max(worst, std::abs(std::stod(R)));
    ++rows;
  }
  EXPECT_GT(rows, 100u);
  EXPECT_LE(worst, 1e-6);

  const json rep = json::parse(slurp(d / "error_report.json"));
  EXPECT_LE(rep["max_rel"].get<double>(), 1e-5);
  EXPECT_TRUE(rep["passed"].get<bool>());
}

TEST(Cli, SphereForwardMasksABandAroundPi) {
  const fs::path d = scratch("sphere_fwd");
  json j = sphere_json(4.0, 2.0);
  j["grids"]["caustic_band"] = 2.0;
  const CliRun r = run({"forward", "--config", write_config(d, j).string(), "--output", d.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const WavefrontDataset ds = read_dataset(d / "dataset.json");
  for (std::size_t i = 0; i < ds.xhat_count(); ++i) {
    std::size_t masked = 0;
    for (std::size_t k = 0; k < ds.t_grid.count; ++k) {
      if (!ds.mask[i][k]) continue;
      ++masked;
      EXPECT_LT(std::abs(ds.t_grid.at(k) - M_PI), 0.02) << ds.t_grid.at(k);
    }
    EXPECT_GE(masked, 2u);
  }
}

TEST(Cli, SphereInversionReportsOneCrossing) {
  const fs::path d = scratch("sphere_inv");
  const std::string cfg = write_config(d, sphere_json(6.6, 2.0 * M_PI)).string();
  ASSERT_EQ(run({"forward", "--config", cfg, "--output", d.string()}).code, 0);
  const CliRun r = run({"invert", "--output", d.string(), "--jobs", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t lines = 0, pos = 0;
  while ((pos = r.out.find("crossed 1 conjugate point,", pos)) != std::string::npos) {
    ++lines;
    ++pos;
  }
  EXPECT_EQ(lines, 3u) << r.out;
}

TEST(Cli, SameSeedGivesIdenticalBytes) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const std::string cfg = write_config(a, sphere_json(4.0, 2.0)).string();
  for (const fs::path& d : {a, b}) {
    ASSERT_EQ(run({"forward", "--config", cfg, "--output", d.string(), "--noise-sigma", "1e-4", "--seed", "9"}).code, 0);
  }
  EXPECT_EQ(slurp(a / "dataset.json"), slurp(b / "dataset.json"));
  EXPECT_EQ(slurp(a / "dataset.csv"), slurp(b / "dataset.csv"));
}

TEST(Cli, WorkerCountDoesNotChangeResults) {
  const fs::path a = scratch("jobs_a"), b = scratch("jobs_b");
  const std::string cfg = write_config(a, lens_json()).string();
  for (auto [d, jobs] : {std::pair{a, "1"}, std::pair{b, "4"}}) {
    ASSERT_EQ(run({"forward", "--config", cfg, "--output", d.string(), "--jobs", jobs}).code, 0);
    ASSERT_EQ(run({"invert", "--output", d.string(), "--jobs", jobs}).code, 0);
  }
  EXPECT_EQ(slurp(a / "dataset.csv"), slurp(b / "dataset.csv"));
  EXPECT_EQ(slurp(a / "curvature.csv"), slurp(b / "curvature.csv"));
  EXPECT_EQ(slurp(a / "shapes.csv"), slurp(b / "shapes.csv"));
}

TEST(Cli, CompareGateOnLens) {
  const fs::path d = scratch("lens_cmp");
  const std::string cfg = write_config(d, lens_json()).string();
  ASSERT_EQ(run({"forward", "--config", cfg, "--output", d.string(), "--jobs", "4"}).code, 0);
  ASSERT_EQ(run({"recover", "--output", d.string(), "--jobs", "4"}).code, 0);
  const CliRun ok = run({"compare", "--output", d.string(), "--jobs", "4"});
  EXPECT_EQ(ok.code, 0) << ok.out << ok.err;
  EXPECT_LE(json::parse(slurp(d / "error_report.json"))["max_rel"].get<double>(), 1e-3);
  const CliRun tight = run({"compare", "--output", d.string(), "--jobs", "4", "--tolerance", "1e-9"});
  EXPECT_EQ(tight.code, 3) << tight.out;
  EXPECT_FALSE(json::parse(slurp(d / "error_report.json"))["passed"].get<bool>());
}

TEST(Cli, RestartOffsetsWriteStitchedTube) {
  const fs::path d = scratch("restart");
  json j = lens_json();
  j["grids"]["t_max"] = 2.3;
  j["sigma0"]["xhat"] = {{{"lo", -0.2}, {"hi", 0.2}, {"step", 0.025}}};
  const std::string cfg = write_config(d, j).string();
  ASSERT_EQ(run({"forward", "--config", cfg, "--output", d.string(), "--jobs", "4"}).code, 0);
  const CliRun r = run({"recover", "--output", d.string(), "--jobs", "4", "--restart-offsets", "0.2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(d / "fermi_stitched.csv"));
  EXPECT_EQ(json::parse(slurp(d / "config.json"))["inversion"]["restart_offsets"], json({0.2}));
  // rows s_1,r,source,...: the centre-conjugate band near r = 0.24 comes from the restart
  std::ifstream in(d / "fermi_stitched.csv");
  std::string line;
  std::size_t from_restart = 0, rows = 0;
  std::getline(in, line);
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string s1, rr, src;
    std::getline(ss, s1, ',');
    std::getline(ss, rr, ',');
    std::getline(ss, src, ',');
    ++rows;
    if (src == "1") {
      ++from_restart;
      EXPECT_GT(std::stod(rr), 0.1);
      EXPECT_LT(std::stod(rr), 0.35);
    }
  }
  EXPECT_GT(rows, 0u);
  EXPECT_GT(from_restart, 0u);
}

TEST(Cli, DistanceWritesFamilyAndReport) {
  const fs::path d = scratch("distance");
  json j = sphere_json(4.0, 2.0);
  j["metric"] = {{"kind", "euclidean"}};
  j["sigma0"]["center"] = {0.0, 0.0};
  j["surfaces"] = {{"count", 200}, {"t_lo", 0.1}, {"t_hi", 0.2}, {"pairs", 4}, {"pair_radius", 0.3}};
  const CliRun r = run({"distance", "--config", write_config(d, j).string(), "--output", d.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const SurfaceFamily fam = read_surface_family(d / "surfaces.json");
  EXPECT_EQ(fam.surfaces.size(), 200u);
  EXPECT_EQ(read_family_truth(d / "surfaces_truth.json").centers.size(), 200u);
  const json rep = json::parse(slurp(d / "distance_report.json"));
  EXPECT_EQ(rep["pairs"].size(), 4u);
}

TEST(Cli, InputErrorsExitOne) {
  const fs::path d = scratch("bad");
  EXPECT_EQ(run({"bogus"}).code, 1);
  EXPECT_EQ(run({"forward"}).code, 1);
  EXPECT_EQ(run({"forward", "--config", (d / "missing.json").string(), "--output", d.string()}).code, 1);

  std::ofstream(d / "broken.json") << "{\"dim\": 2, ";
  CliRun r = run({"forward", "--config", (d / "broken.json").string(), "--output", d.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("broken.json"), std::string::npos) << r.err;

  ASSERT_EQ(run({"demo", "--output", d.string()}).code, 0);
  const std::string csv = slurp(d / "dataset.csv");
  std::ofstream(d / "dataset.csv") << csv.substr(0, csv.size() / 2) << "0,1,abc,0\n";
  r = run({"invert", "--output", d.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("dataset.csv:"), std::string::npos) << r.err;

  std::ofstream(d / "chart.csv") << "# config_hash=x\nxhat_index,r,g_11,masked\n0,0,1\n";
  r = run({"compare", "--output", d.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("chart.csv:3"), std::string::npos) << r.err;
}

TEST(Cli, GridMismatchIsAnInputError) {
  const fs::path d = scratch("mismatch");
  ASSERT_EQ(run({"demo", "--output", d.string()}).code, 0);
  ASSERT_EQ(run({"demo", "--output", (d / "three").string(), "--dim", "2", "--config",
                 write_config(d, lens_json()).string()}).code, 0);
  const CliRun r = run({"compare", "--output", d.string(), "--truth", (d / "three" / "truth_chart.json").string()});
  EXPECT_EQ(r.code, 1) << r.err;
}

TEST(Cli, NumericalFailureExitsTwo) {
  // the fan around the pole leaves the polar chart
  const fs::path d = scratch("numeric");
  json j = sphere_json(4.0, 2.0);
  j["sigma0"]["center"] = {0.3, 0.0};
  j["sigma0"]["axis"] = {1.0, 0.0};
  j["sigma0"]["t0"] = 0.1;
  const CliRun r = run({"forward", "--config", write_config(d, j).string(), "--output", d.string()});
  EXPECT_EQ(r.code, 2) << r.out << r.err;
}

TEST(ChartIo, RoundTripIsByteExact) {
  const fs::path d = scratch("chart_io");
  ASSERT_EQ(run({"demo", "--output", d.string()}).code, 0);
  for (const char* name : {"chart", "truth_chart"}) {
    const ReconstructedChart c = read_chart(d / (std::string(name) + ".json"));
    write_chart(c, d / "again.json");
    EXPECT_EQ(slurp(d / (std::string(name) + ".csv")), slurp(d / "again.csv")) << name;
    const ReconstructedChart back = read_chart(d / "again.json");
    EXPECT_EQ(back.r, c.r);
    EXPECT_EQ(back.mask, c.mask);
    EXPECT_EQ(back.xhat_shape, c.xhat_shape);
    EXPECT_EQ(back.jacobi.empty(), c.jacobi.empty());
  }
}

TEST(SurfaceIo, RoundTripAndRegionCheck) {
  const fs::path d = scratch("surface_io");
  SurfaceFamily fam;
  fam.dim = 2;
  fam.region = {Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)};
  SphericalSurfaceSample s;
  s.t = 0.1;
  for (int i = 0; i < 5; ++i) {
    Vec p(2), n(2);
    n << std::cos(i * 1.3), std::sin(i * 1.3);
    p = 0.1 * n;
    s.points.push_back(p);
    s.normals.push_back(n);
  }
  fam.surfaces.push_back(s);
  write_surface_family(fam, d / "f.json", "abc");
  const SurfaceFamily back = read_surface_family(d / "f.json");
  ASSERT_EQ(back.surfaces.size(), 1u);
  EXPECT_EQ(back.surfaces[0].t, 0.1);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(back.surfaces[0].points[i], s.points[i]);

  fam.surfaces[0].points[2] << 3.0, 0.0;
  write_surface_family(fam, d / "g.json", "abc");
  try {
    read_surface_family(d / "g.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Format);
    EXPECT_NE(std::string(e.what()).find("surfaces[0].points[2]"), std::string::npos) << e.what();
  }
}
