#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "morphrom/linalg.hpp"

namespace morphrom {

nlohmann::json load_json(const std::filesystem::path& path);

// Serializes with sorted keys and writes through a temporary file in the
// same directory, so readers never observe a half-written document.
void save_json_atomic(const std::filesystem::path& path, const nlohmann::json& doc);

// Binary blocks live under the store directory and are described by a JSON
// entry {file, length, checksum} kept in the manifest. Loading verifies both
// length and checksum and names the offending file on mismatch.
nlohmann::json save_block(const std::filesystem::path& store_dir, const std::string& rel,
                          const std::vector<double>& values);
std::vector<double> load_block(const std::filesystem::path& store_dir, const nlohmann::json& entry);

// Column-major matrix payload in one block; rows/cols recorded in the entry.
nlohmann::json save_matrix_block(const std::filesystem::path& store_dir, const std::string& rel,
                                 const Matrix& m);
Matrix load_matrix_block(const std::filesystem::path& store_dir, const nlohmann::json& entry);

}  // namespace morphrom
