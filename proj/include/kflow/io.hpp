// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kflow/core.hpp"
#include "kflow/embed.hpp"
#include "kflow/loss.hpp"

namespace kflow::io {

// Point clouds and flow fields share two on-disk formats, chosen by
// extension: ".xyz" is one "x y z" per line (UTF-8, '.' decimal, LF);
// anything else is little-endian binary with a magic + u64 count header and
// f32 triplets. Points use magic "PCF1", flows "FLW1". Values are f32 on
// disk and widened to f64 in memory.

PointCloud read_points(const std::string& path);
void write_points(const std::string& path, const PointCloud& cloud);

FlowField read_flow(const std::string& path);
void write_flow(const std::string& path, const FlowField& flow);

/// PEAT weight file: 16-byte header (magic "PEAT", u32 d_pe, u32 d_k,
/// u32 d_v) then row-major f32 matrices in W_Q, W_K, W_V order.
PeatWeights read_peat_weights(const std::string& path);
void write_peat_weights(const std::string& path, const PeatWeights& weights);

/// Distance-transform debug dump: "DTG1", 3x u32 dims, 3x f32 origin,
/// f32 spacing, then f32 values x-fastest, little-endian.
void write_dt_grid(const std::string& path, const DistanceTransformGrid& grid);
DistanceTransformGrid read_dt_grid(const std::string& path);

/// ASCII PLY with per-vertex RGB encoding the flow: hue from the xy flow
/// direction, blended from neutral gray by magnitude against the 95th
/// percentile. Zero flow renders (128,128,128); unit +x flow renders red.
void export_ply(const std::string& path, const PointCloud& cloud, const FlowField& flow);

struct ManifestEntry {
    std::string id;
    std::string source;
    std::string target;
    std::optional<std::string> gt_flow;
};

/// JSON array of {id, source, target, gt_flow?}. Paths are resolved relative
/// to the manifest file's directory; ids must be unique.
std::vector<ManifestEntry> read_manifest(const std::string& path);
void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);

}  // namespace kflow::io
