#pragma once

#include <filesystem>
#include <string>

#include "gdix/dataset.hpp"
#include "gdix/recovery.hpp"
#include "gdix/surfaces.hpp"

namespace gdix {

// "%.17g" formatting; parses back to the identical double.
std::string format_double(double v);

// Strict parse of a full token; throws Format with the given context.
double parse_double(const std::string& token, const std::string& context);

// Dataset = JSON metadata (`path`) plus a CSV payload next to it with the
// same stem. CSV rows: xhat_index,t_index,s_11,s_12,...,masked.
void write_dataset(const WavefrontDataset& ds, const std::filesystem::path& path);
WavefrontDataset read_dataset(const std::filesystem::path& path);

std::filesystem::path csv_sibling(const std::filesystem::path& json_path);

// Chart = JSON metadata plus CSV rows
// xhat_index,r,g_11,...[,j_11,...],masked.
void write_chart(const ReconstructedChart& chart, const std::filesystem::path& path);
ReconstructedChart read_chart(const std::filesystem::path& path);

// {max_rel, median_rel, q90_rel, q99_rel, masked_frac, compared,
//  per_r_profile: [{r, max_rel}], tolerance, passed, config_hash}
void write_error_report(const ErrorReport& rep, const std::filesystem::path& path,
                        const std::string& config_hash, double tolerance);

// Rows xhat_index,r,R_11,...; one block per geodesic.
void write_curvature_csv(const std::vector<Reconstruction>& recs, const std::filesystem::path& path,
                         const std::string& config_hash);
// Rows xhat_index,r_joint,t,S_11,...,masked from the stored shape tables.
void write_shapes_csv(const std::vector<Reconstruction>& recs, const std::filesystem::path& path,
                      const std::string& config_hash);
// Rows s_1..,r,source,g_11,... of Fermi samples.
void write_fermi_csv(const FermiSamples& f, const std::filesystem::path& path,
                     const std::string& config_hash);

// Surface family: {dim, region, surfaces: [{t, points, normals}]}. The
// hidden centres go to a separate sidecar file.
void write_surface_family(const SurfaceFamily& fam, const std::filesystem::path& path,
                          const std::string& config_hash);
SurfaceFamily read_surface_family(const std::filesystem::path& path);
void write_family_truth(const SurfaceFamilyTruth& truth, const std::filesystem::path& path);
SurfaceFamilyTruth read_family_truth(const std::filesystem::path& path);

}  // namespace gdix
