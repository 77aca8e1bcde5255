#pragma once

#include "woundbench/mesh.hpp"

#include <filesystem>

namespace woundbench {

enum class MeshFormat { ply_binary, ply_ascii };

/// Reads PLY (ascii or binary little-endian) or OBJ (positions and faces,
/// polygons fan-triangulated). PLY files may carry per-vertex `label`
/// (uchar, nonzero = wound) and `red`/`green`/`blue` (uchar).
///
/// Errors: "unsupported format" for unknown magic or header, "malformed
/// face" for out-of-range indices, "unexpected EOF" for truncated data.
TriangleMesh load_mesh(const std::filesystem::path& path);

/// Writes PLY with double-precision positions, so a binary save then load is
/// bit-exact. Labels and colors are written when present. The write is
/// atomic (temporary file, then rename).
void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path, MeshFormat format = MeshFormat::ply_binary);

/// In-memory variants used by the file functions.
TriangleMesh parse_ply(const std::string& bytes);
TriangleMesh parse_obj(const std::string& text);
std::string serialize_ply(const TriangleMesh& mesh, MeshFormat format);

} // namespace woundbench
