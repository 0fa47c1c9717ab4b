#include "gdix/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gdix/errors.hpp"

namespace gdix {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& token, const std::string& context) {
  if (token.empty()) throw Error(ErrorKind::Format, context + ": empty number");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end != token.c_str() + token.size() || errno == ERANGE) {
    throw Error(ErrorKind::Format, context + ": cannot parse '" + token + "' as a number");
  }
  return v;
}

std::filesystem::path csv_sibling(const std::filesystem::path& json_path) {
  std::filesystem::path p = json_path;
  p.replace_extension(".csv");
  return p;
}

namespace {

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) a.push_back(m(i, j));
  return a;
}

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorKind::Format, where + ": missing field '" + key + "'");
  }
  return j.at(key);
}

double num(const json& j, const char* key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_number()) throw Error(ErrorKind::Format, where + "." + key + ": expected a number");
  return v.get<double>();
}

Vec json_vec(const json& j, int n, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) {
    throw Error(ErrorKind::Format, where + ": expected an array of " + std::to_string(n));
  }
  Vec v(n);
  for (int i = 0; i < n; ++i) {
    if (!j[i].is_number()) throw Error(ErrorKind::Format, where + ": non-numeric entry");
    v[i] = j[i].get<double>();
  }
  return v;
}

Mat json_mat(const json& j, int rows, int cols, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows * cols) {
    throw Error(ErrorKind::Format, where + ": expected " + std::to_string(rows * cols) + " entries");
  }
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const json& e = j[static_cast<std::size_t>(r * cols + c)];
      if (!e.is_number()) throw Error(ErrorKind::Format, where + ": non-numeric entry");
      m(r, c) = e.get<double>();
    }
  return m;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Format, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Format, path.string() + ": " + e.what());
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_dataset(const WavefrontDataset& ds, const std::filesystem::path& path) {
  const int n = ds.dim;
  const int k = n - 1;
  json meta;
  meta["format"] = "gdix-wavefront-dataset";
  meta["version"] = 1;
  meta["config_hash"] = ds.config_hash;
  meta["dim"] = n;
  meta["t0"] = ds.t0;
  meta["t_start"] = ds.t_grid.t_start;
  meta["delta_t"] = ds.t_grid.delta_t;
  meta["n_t"] = ds.t_grid.count;
  meta["xhat_shape"] = ds.xhat_shape;
  meta["samples_csv"] = csv_sibling(path).filename().string();
  json nodes = json::array();
  for (std::size_t i = 0; i < ds.xhat.size(); ++i) {
    json node;
    node["xhat"] = vec_json(ds.xhat[i]);
    node["point"] = vec_json(ds.points[i]);
    node["normal"] = vec_json(ds.normals[i]);
    node["frame"] = mat_json(ds.frames[i]);
    node["gram"] = mat_json(ds.grams[i]);
    nodes.push_back(std::move(node));
  }
  meta["nodes"] = std::move(nodes);
  {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Format, "cannot write " + path.string());
    out << meta.dump(1) << '\n';
  }

  std::ofstream csv(csv_sibling(path));
  if (!csv) throw Error(ErrorKind::Format, "cannot write " + csv_sibling(path).string());
  csv << "# config_hash=" << ds.config_hash << '\n';
  csv << "xhat_index,t_index";
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) csv << ",s_" << a + 1 << b + 1;
  csv << ",masked\n";
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    for (std::size_t t = 0; t < ds.samples[i].size(); ++t) {
      csv << i << ',' << t;
      const Mat& S = ds.samples[i][t];
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) csv << ',' << format_double(S(a, b));
      csv << ',' << static_cast<int>(ds.mask[i][t]) << '\n';
    }
  }
}

WavefrontDataset read_dataset(const std::filesystem::path& path) {
  const json meta = read_json(path);
  const std::string where = path.filename().string();
  if (!meta.is_object() || meta.value("format", "") != "gdix-wavefront-dataset") {
    throw Error(ErrorKind::Format, where + ": not a gdix wavefront dataset");
  }
  WavefrontDataset ds;
  const json& dimj = field(meta, "dim", where);
  if (!dimj.is_number_integer() || (dimj.get<int>() != 2 && dimj.get<int>() != 3)) {
    throw Error(ErrorKind::Format, where + ".dim: must be 2 or 3");
  }
  ds.dim = dimj.get<int>();
  const int n = ds.dim;
  const int k = n - 1;
  ds.t0 = num(meta, "t0", where);
  ds.t_grid.t_start = num(meta, "t_start", where);
  ds.t_grid.delta_t = num(meta, "delta_t", where);
  const json& ntj = field(meta, "n_t", where);
  if (!ntj.is_number_unsigned()) throw Error(ErrorKind::Format, where + ".n_t: expected count");
  ds.t_grid.count = ntj.get<std::size_t>();
  ds.config_hash = meta.value("config_hash", "");
  const json& shape = field(meta, "xhat_shape", where);
  if (!shape.is_array() || static_cast<int>(shape.size()) != k) {
    throw Error(ErrorKind::Format, where + ".xhat_shape: expected dim - 1 entries");
  }
  std::size_t expect = 1;
  for (const json& s : shape) {
    if (!s.is_number_integer() || s.get<int>() <= 0) {
      throw Error(ErrorKind::Format, where + ".xhat_shape: entries must be positive integers");
    }
    ds.xhat_shape.push_back(s.get<int>());
    expect *= static_cast<std::size_t>(s.get<int>());
  }
  const json& nodes = field(meta, "nodes", where);
  if (!nodes.is_array() || nodes.size() != expect) {
    throw Error(ErrorKind::Format, where + ".nodes: count does not match xhat_shape");
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string w = where + ".nodes[" + std::to_string(i) + "]";
    ds.xhat.push_back(json_vec(field(nodes[i], "xhat", w), k, w + ".xhat"));
    ds.points.push_back(json_vec(field(nodes[i], "point", w), n, w + ".point"));
    ds.normals.push_back(json_vec(field(nodes[i], "normal", w), n, w + ".normal"));
    ds.frames.push_back(json_mat(field(nodes[i], "frame", w), n, n, w + ".frame"));
    ds.grams.push_back(json_mat(field(nodes[i], "gram", w), n, n, w + ".gram"));
  }

  const std::size_t N = ds.xhat.size();
  ds.samples.assign(N, std::vector<Mat>(ds.t_grid.count, Mat::Zero(k, k)));
  ds.mask.assign(N, std::vector<uint8_t>(ds.t_grid.count, 1));
  std::vector<std::vector<uint8_t>> seen(N, std::vector<uint8_t>(ds.t_grid.count, 0));

  std::filesystem::path csv_path = path.parent_path() / meta.value("samples_csv", "");
  if (!meta.contains("samples_csv")) csv_path = csv_sibling(path);
  std::ifstream csv(csv_path);
  if (!csv) throw Error(ErrorKind::Format, "cannot open " + csv_path.string());
  const std::string cw = csv_path.filename().string();
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  const std::size_t cols = 3 + static_cast<std::size_t>(k * k);
  while (std::getline(csv, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    const std::string ctx = cw + ":" + std::to_string(lineno);
    const auto tok = split_csv(line);
    if (tok.size() != cols) {
      throw Error(ErrorKind::Format, ctx + ": expected " + std::to_string(cols) + " fields, got " +
                                         std::to_string(tok.size()));
    }
    const double xi = parse_double(tok[0], ctx + " field 1");
    const double ti = parse_double(tok[1], ctx + " field 2");
    if (xi < 0 || ti < 0 || xi != std::floor(xi) || ti != std::floor(ti) ||
        xi >= static_cast<double>(N) || ti >= static_cast<double>(ds.t_grid.count)) {
      throw Error(ErrorKind::Format, ctx + ": index out of range");
    }
    const auto i = static_cast<std::size_t>(xi);
    const auto t = static_cast<std::size_t>(ti);
    Mat S(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        const std::size_t f = 2 + static_cast<std::size_t>(a * k + b);
        S(a, b) = parse_double(tok[f], ctx + " field " + std::to_string(f + 1));
      }
    const std::string& mk = tok.back();
    if (mk != "0" && mk != "1") {
      throw Error(ErrorKind::Format, ctx + " field " + std::to_string(cols) + ": mask must be 0 or 1");
    }
    ds.samples[i][t] = S;
    ds.mask[i][t] = mk == "1" ? 1 : 0;
    seen[i][t] = 1;
  }
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t t = 0; t < ds.t_grid.count; ++t)
      if (!seen[i][t]) {
        throw Error(ErrorKind::Format, cw + ": missing sample for xhat " + std::to_string(i) +
                                           ", t index " + std::to_string(t));
      }
  return ds;
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Format, "cannot write " + path.string());
  return out;
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << j.dump(1) << '\n';
}

std::string matrix_header(const char* prefix, int k) {
  std::string h;
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) h += std::string(",") + prefix + std::to_string(a + 1) + std::to_string(b + 1);
  return h;
}

void write_matrix(std::ostream& out, const Mat& M) {
  for (Eigen::Index a = 0; a < M.rows(); ++a)
    for (Eigen::Index b = 0; b < M.cols(); ++b) out << ',' << format_double(M(a, b));
}

std::size_t parse_index(const std::string& tok, std::size_t limit, const std::string& ctx) {
  const double v = parse_double(tok, ctx);
  if (v < 0 || v != std::floor(v) || v >= static_cast<double>(limit)) {
    throw Error(ErrorKind::Format, ctx + ": index out of range");
  }
  return static_cast<std::size_t>(v);
}

std::vector<Vec> json_vec_list(const json& j, int n, const std::string& where) {
  if (!j.is_array()) throw Error(ErrorKind::Format, where + ": expected an array");
  std::vector<Vec> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(json_vec(j[i], n, where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

}  // namespace

void write_chart(const ReconstructedChart& chart, const std::filesystem::path& path) {
  const int k = chart.dim - 1;
  const bool has_j = !chart.jacobi.empty();
  json meta;
  meta["format"] = "gdix-chart";
  meta["version"] = 1;
  meta["config_hash"] = chart.config_hash;
  meta["dim"] = chart.dim;
  meta["t0"] = chart.t0;
  meta["xhat_shape"] = chart.xhat_shape;
  json xs = json::array();
  for (const Vec& x : chart.xhat) xs.push_back(vec_json(x));
  meta["xhat"] = std::move(xs);
  meta["n_r"] = chart.r.size();
  meta["has_jacobi"] = has_j;
  meta["gauss_rr"] = chart.gauss_rr;
  meta["gauss_rx"] = chart.gauss_rx;
  meta["masked"] = chart.masked_count();
  meta["notes"] = chart.notes;
  meta["nodes_csv"] = csv_sibling(path).filename().string();
  write_json(meta, path);

  std::ofstream csv = open_out(csv_sibling(path));
  csv << "# config_hash=" << chart.config_hash << '\n';
  csv << "xhat_index,r" << matrix_header("g_", k);
  if (has_j) csv << matrix_header("j_", k);
  csv << ",masked\n";
  for (std::size_t i = 0; i < chart.xhat.size(); ++i) {
    for (std::size_t q = 0; q < chart.r.size(); ++q) {
      csv << i << ',' << format_double(chart.r[q]);
      write_matrix(csv, chart.g_hat[i][q]);
      if (has_j) write_matrix(csv, chart.jacobi[i][q]);
      csv << ',' << static_cast<int>(chart.mask[i][q]) << '\n';
    }
  }
}

ReconstructedChart read_chart(const std::filesystem::path& path) {
  const json meta = read_json(path);
  const std::string where = path.filename().string();
  if (!meta.is_object() || meta.value("format", "") != "gdix-chart") {
    throw Error(ErrorKind::Format, where + ": not a gdix chart");
  }
  ReconstructedChart c;
  const json& dimj = field(meta, "dim", where);
  if (!dimj.is_number_integer() || (dimj.get<int>() != 2 && dimj.get<int>() != 3)) {
    throw Error(ErrorKind::Format, where + ".dim: must be 2 or 3");
  }
  c.dim = dimj.get<int>();
  const int k = c.dim - 1;
  c.t0 = num(meta, "t0", where);
  c.config_hash = meta.value("config_hash", "");
  c.gauss_rr = meta.value("gauss_rr", 0.0);
  c.gauss_rx = meta.value("gauss_rx", 0.0);
  const json& shape = field(meta, "xhat_shape", where);
  if (!shape.is_array() || static_cast<int>(shape.size()) != k) {
    throw Error(ErrorKind::Format, where + ".xhat_shape: expected dim - 1 entries");
  }
  for (const json& e : shape) {
    if (!e.is_number_integer() || e.get<int>() <= 0) {
      throw Error(ErrorKind::Format, where + ".xhat_shape: entries must be positive integers");
    }
    c.xhat_shape.push_back(e.get<int>());
  }
  c.xhat = json_vec_list(field(meta, "xhat", where), k, where + ".xhat");
  const json& nr = field(meta, "n_r", where);
  if (!nr.is_number_unsigned()) throw Error(ErrorKind::Format, where + ".n_r: expected a count");
  const std::size_t R = nr.get<std::size_t>();
  const bool has_j = meta.value("has_jacobi", false);
  if (meta.contains("notes") && meta["notes"].is_array()) {
    for (const json& n : meta["notes"])
      if (n.is_string()) c.notes.push_back(n.get<std::string>());
  }
  const std::size_t N = c.xhat.size();
  c.r.assign(R, 0.0);
  c.g_hat.assign(N, std::vector<Mat>(R, Mat::Zero(k, k)));
  if (has_j) c.jacobi.assign(N, std::vector<Mat>(R, Mat::Zero(k, k)));
  c.mask.assign(N, std::vector<uint8_t>(R, 0));
  std::vector<std::vector<uint8_t>> seen(N, std::vector<uint8_t>(R, 0));
  std::vector<std::size_t> next(N, 0);

  std::filesystem::path csv_path = path.parent_path() / meta.value("nodes_csv", "");
  if (!meta.contains("nodes_csv")) csv_path = csv_sibling(path);
  std::ifstream csv(csv_path);
  if (!csv) throw Error(ErrorKind::Format, "cannot open " + csv_path.string());
  const std::string cw = csv_path.filename().string();
  const std::size_t cols = 3 + static_cast<std::size_t>(k * k) * (has_j ? 2 : 1);
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(csv, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    const std::string ctx = cw + ":" + std::to_string(lineno);
    const auto tok = split_csv(line);
    if (tok.size() != cols) {
      throw Error(ErrorKind::Format, ctx + ": expected " + std::to_string(cols) + " fields, got " +
                                         std::to_string(tok.size()));
    }
    const std::size_t i = parse_index(tok[0], N, ctx + " field 1");
    if (next[i] >= R) throw Error(ErrorKind::Format, ctx + ": too many rows for xhat " + tok[0]);
    const std::size_t q = next[i]++;
    const double r = parse_double(tok[1], ctx + " field 2");
    if (i == 0) {
      c.r[q] = r;
    } else if (r != c.r[q] && seen[0][q]) {
      throw Error(ErrorKind::Format, ctx + ": r differs from the first x̂ block");
    } else {
      c.r[q] = r;
    }
    std::size_t f = 2;
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b, ++f) c.g_hat[i][q](a, b) = parse_double(tok[f], ctx + " field " + std::to_string(f + 1));
    if (has_j) {
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b, ++f) c.jacobi[i][q](a, b) = parse_double(tok[f], ctx + " field " + std::to_string(f + 1));
    }
    const std::string& mk = tok.back();
    if (mk != "0" && mk != "1") {
      throw Error(ErrorKind::Format, ctx + " field " + std::to_string(cols) + ": mask must be 0 or 1");
    }
    c.mask[i][q] = mk == "1" ? 1 : 0;
    seen[i][q] = 1;
  }
  for (std::size_t i = 0; i < N; ++i) {
    if (next[i] != R) {
      throw Error(ErrorKind::Format, cw + ": xhat " + std::to_string(i) + " has " + std::to_string(next[i]) +
                                         " rows, expected " + std::to_string(R));
    }
  }
  return c;
}

void write_error_report(const ErrorReport& rep, const std::filesystem::path& path,
                        const std::string& config_hash, double tolerance) {
  json j;
  j["format"] = "gdix-error-report";
  j["config_hash"] = config_hash;
  j["max_rel"] = rep.max_rel;
  j["median_rel"] = rep.median_rel;
  j["q90_rel"] = rep.q90_rel;
  j["q99_rel"] = rep.q99_rel;
  j["masked_frac"] = rep.masked_frac;
  j["compared"] = rep.compared;
  j["tolerance"] = tolerance;
  j["passed"] = rep.max_rel <= tolerance;
  json prof = json::array();
  for (std::size_t q = 0; q < rep.r.size(); ++q) prof.push_back({{"r", rep.r[q]}, {"max_rel", rep.per_r_max[q]}});
  j["per_r_profile"] = std::move(prof);
  write_json(j, path);
}

void write_curvature_csv(const std::vector<Reconstruction>& recs, const std::filesystem::path& path,
                         const std::string& config_hash) {
  std::ofstream csv = open_out(path);
  const int k = recs.empty() || recs[0].profile.R.empty() ? 1 : static_cast<int>(recs[0].profile.R[0].rows());
  csv << "# config_hash=" << config_hash << '\n';
  csv << "xhat_index,r" << matrix_header("R_", k) << '\n';
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const CurvatureProfile& p = recs[i].profile;
    for (std::size_t q = 0; q < p.r.size(); ++q) {
      csv << i << ',' << format_double(p.r[q]);
      write_matrix(csv, p.R[q]);
      csv << '\n';
    }
  }
}

void write_shapes_csv(const std::vector<Reconstruction>& recs, const std::filesystem::path& path,
                      const std::string& config_hash) {
  std::ofstream csv = open_out(path);
  int k = 1;
  for (const auto& rec : recs)
    for (const auto& tb : rec.tables)
      if (!tb.S.empty()) k = static_cast<int>(tb.S[0].rows());
  csv << "# config_hash=" << config_hash << '\n';
  csv << "xhat_index,r_joint,t" << matrix_header("S_", k) << ",masked\n";
  for (std::size_t i = 0; i < recs.size(); ++i) {
    for (const ShapeTable& tb : recs[i].tables) {
      for (std::size_t q = 0; q < tb.t.size(); ++q) {
        csv << i << ',' << format_double(tb.r) << ',' << format_double(tb.t[q]);
        write_matrix(csv, tb.mask[q] ? Mat(Mat::Zero(k, k)) : tb.S[q]);
        csv << ',' << static_cast<int>(tb.mask[q]) << '\n';
      }
    }
  }
}

void write_fermi_csv(const FermiSamples& f, const std::filesystem::path& path,
                     const std::string& config_hash) {
  std::ofstream csv = open_out(path);
  const int k = f.s.empty() ? 1 : static_cast<int>(f.s[0].size());
  csv << "# config_hash=" << config_hash << '\n';
  for (int a = 0; a < k; ++a) csv << "s_" << a + 1 << ',';
  csv << "r,source" << matrix_header("g_", k + 1) << '\n';
  for (std::size_t i = 0; i < f.s.size(); ++i) {
    for (std::size_t q = 0; q < f.r.size(); ++q) {
      for (int a = 0; a < k; ++a) csv << format_double(f.s[i][a]) << ',';
      csv << format_double(f.r[q]) << ',' << f.source[q];
      write_matrix(csv, f.g[i][q]);
      csv << '\n';
    }
  }
}

void write_surface_family(const SurfaceFamily& fam, const std::filesystem::path& path,
                          const std::string& config_hash) {
  json j;
  j["format"] = "gdix-surface-family";
  j["version"] = 1;
  j["config_hash"] = config_hash;
  j["dim"] = fam.dim;
  j["region"] = {{"lo", vec_json(fam.region.lo)}, {"hi", vec_json(fam.region.hi)}};
  json list = json::array();
  for (const auto& s : fam.surfaces) {
    json e;
    e["t"] = s.t;
    json pts = json::array(), nrm = json::array();
    for (const Vec& p : s.points) pts.push_back(vec_json(p));
    for (const Vec& v : s.normals) nrm.push_back(vec_json(v));
    e["points"] = std::move(pts);
    e["normals"] = std::move(nrm);
    list.push_back(std::move(e));
  }
  j["surfaces"] = std::move(list);
  write_json(j, path);
}

SurfaceFamily read_surface_family(const std::filesystem::path& path) {
  const json j = read_json(path);
  const std::string where = path.filename().string();
  if (!j.is_object() || j.value("format", "") != "gdix-surface-family") {
    throw Error(ErrorKind::Format, where + ": not a gdix surface family");
  }
  SurfaceFamily fam;
  const json& dimj = field(j, "dim", where);
  if (!dimj.is_number_integer() || (dimj.get<int>() != 2 && dimj.get<int>() != 3)) {
    throw Error(ErrorKind::Format, where + ".dim: must be 2 or 3");
  }
  fam.dim = dimj.get<int>();
  const json& region = field(j, "region", where);
  fam.region.lo = json_vec(field(region, "lo", where + ".region"), fam.dim, where + ".region.lo");
  fam.region.hi = json_vec(field(region, "hi", where + ".region"), fam.dim, where + ".region.hi");
  const json& list = field(j, "surfaces", where);
  if (!list.is_array()) throw Error(ErrorKind::Format, where + ".surfaces: expected an array");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string w = where + ".surfaces[" + std::to_string(i) + "]";
    SphericalSurfaceSample s;
    s.t = num(list[i], "t", w);
    if (!(s.t > 0)) throw Error(ErrorKind::Format, w + ".t: must be positive");
    s.points = json_vec_list(field(list[i], "points", w), fam.dim, w + ".points");
    s.normals = json_vec_list(field(list[i], "normals", w), fam.dim, w + ".normals");
    if (s.points.size() != s.normals.size()) {
      throw Error(ErrorKind::Format, w + ": points and normals differ in length");
    }
    for (std::size_t p = 0; p < s.points.size(); ++p) {
      if (!fam.region.contains(s.points[p])) {
        throw Error(ErrorKind::Format, w + ".points[" + std::to_string(p) + "]: outside the region");
      }
    }
    fam.surfaces.push_back(std::move(s));
  }
  return fam;
}

void write_family_truth(const SurfaceFamilyTruth& truth, const std::filesystem::path& path) {
  json j;
  j["format"] = "gdix-surface-truth";
  json c = json::array();
  for (const Vec& v : truth.centers) c.push_back(vec_json(v));
  j["centers"] = std::move(c);
  write_json(j, path);
}

SurfaceFamilyTruth read_family_truth(const std::filesystem::path& path) {
  const json j = read_json(path);
  const std::string where = path.filename().string();
  if (!j.is_object() || j.value("format", "") != "gdix-surface-truth") {
    throw Error(ErrorKind::Format, where + ": not a surface ground-truth file");
  }
  SurfaceFamilyTruth t;
  const json& c = field(j, "centers", where);
  if (!c.is_array()) throw Error(ErrorKind::Format, where + ".centers: expected an array");
  for (std::size_t i = 0; i < c.size(); ++i) {
    const int n = c[i].is_array() ? static_cast<int>(c[i].size()) : 0;
    t.centers.push_back(json_vec(c[i], n, where + ".centers[" + std::to_string(i) + "]"));
  }
  return t;
}

}  // namespace gdix
