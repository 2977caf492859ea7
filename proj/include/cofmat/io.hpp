#pragma once

#include "cofmat/blockops.hpp"
#include "cofmat/linalg.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace cofmat::io {

/// Decimal text with 17 significant digits (round-trips exactly);
/// "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double x);

/// Writes `content` to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

std::string sha256_hex(const std::string& bytes);

/// MatrixMarket "array real general" text.
std::string matrix_market(const Matrix& m);
void write_matrix_market(const std::filesystem::path& path, const Matrix& m);

/// Reads array or coordinate, real or integer, general or symmetric files.
Matrix read_matrix_market(const std::filesystem::path& path);

/// Writes one MatrixMarket file per block plus `<stem>.json` naming them.
/// Returns the written paths, manifest last.
std::vector<std::filesystem::path> save_block_system(const std::filesystem::path& dir,
                                                     const std::string& stem,
                                                     const BlockSystem& sys);

struct LoadedSystem {
  std::vector<std::string> names;
  std::vector<Index> dims;
  std::map<std::pair<int, int>, Matrix> blocks;
  Matrix assembled;
};

LoadedSystem load_block_system(const std::filesystem::path& manifest);

}  // namespace cofmat::io
