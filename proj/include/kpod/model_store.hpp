#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>
#include <cstdint>

#include "json.hpp"

#include "kpod/geometry.hpp"
#include "kpod/kpca.hpp"
#include "kpod/linalg.hpp"
#include "kpod/problems/mesh2d.hpp"

namespace kpod {

inline constexpr int kModelFormatVersion = 1;

/// Offline artifacts needed by the online phase.
struct ModelBundle {
  SnapshotSet snapshots;
  KpcaModel kpca;
  ReducedGeometry geometry;
  /// Tolerance of the local (and global) POD truncation.
  double epsilon = 1e-8;
  /// Free-form description of the problem that produced the snapshots
  /// (`{"id": "adv1d", ...}`); written verbatim to the manifest.
  nlohmann::json problem = nlohmann::json::object();
  /// Column names of params.csv, one per snapshot parameter.
  std::vector<std::string> param_names;
  /// Present for mesh-based problems; stored as mesh.txt.
  std::optional<adv2d::Mesh2D> mesh;
};

/// Writes manifest.json, X/Z/Vstar/G.f64le (column-major little-endian doubles),
/// adjacency.txt (1-based), params.csv and, if present, mesh.txt. Any existing
/// files of the same name are replaced.
void save_model(const ModelBundle& model, const std::filesystem::path& dir);

/// Reads a directory written by `save_model`. Errors: `Errc::io` for a missing
/// file, `Errc::version` for an unknown format, `Errc::checksum` when a file's
/// size or CRC-32 disagrees with the manifest, `Errc::dimension` when shapes and
/// manifest disagree. Unknown manifest fields are ignored.
ModelBundle load_model(const std::filesystem::path& dir);

/// CRC-32 (zlib polynomial) of a byte range.
std::uint32_t crc32_bytes(const void* data, std::size_t size);

}  // namespace kpod
