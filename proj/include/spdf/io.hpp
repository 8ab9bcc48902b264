// Copyright 2026 The spdf authors
// SPDX-License-Identifier: Apache-2.0

#ifndef SPDF_IO_HPP
#define SPDF_IO_HPP

#include "spdf/types.hpp"

#include <string>

namespace spdf {

enum class CloudFormat { CsvXyz, PlyAscii };

/// Picks a format from the file extension (.ply -> PlyAscii, else CsvXyz).
CloudFormat format_from_path(const std::string& path);

/// Loads a point cloud.
///
/// CSV: either a header line naming columns from {x,y,z,nx,ny,nz,s_surface,
/// s_curve,s_point,label,confidence} (unknown names are skipped), or headerless
/// rows of 3 (x,y,z) or 6 (x,y,z,nx,ny,nz) values. PLY: ASCII format with float
/// or double vertex properties; unknown properties are skipped. Labels are the
/// integers {0,1,2} = {surface, curve, junction}. Throws ParseError with the
/// offending line number.
PointCloud load_cloud(const std::string& path, CloudFormat format);
PointCloud load_cloud(const std::string& path);

/// Writes the cloud with every present channel; values are printed with 17
/// significant digits so a CSV round-trip is bit-exact and a second
/// write -> read -> write is byte-identical.
void save_cloud(const PointCloud& cloud, const std::string& path, CloudFormat format);
void save_cloud(const PointCloud& cloud, const std::string& path);

}  // namespace spdf

#endif  // SPDF_IO_HPP
