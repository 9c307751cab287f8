// Copyright 2026 The Subzero Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// File formats shared by the command-line tools.
//
// Hessian file (little-endian):
//   bytes 0..7   magic "SZHESS01"
//   uint64       dim
//   uint64       number of diagonal blocks B
//   uint64       nonzero eigenvalues per block r
//   float64[dim*dim] entries, row-major
//
// Sidecars are "key=value" lines. A manifest is a CSV with one row per
// emitted file: path (relative to the manifest), byte count and FNV-1a
// 64-bit content hash in hex.

#ifndef SUBZERO_IO_HPP_
#define SUBZERO_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "subzero/hessian.hpp"

namespace subzero::io {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

void save_hessian(const std::filesystem::path& path, const Hessian& h);
Hessian load_hessian(const std::filesystem::path& path);

void write_key_values(std::ostream& out, const KeyValues& kv);
KeyValues read_key_values(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

std::string read_file(const std::filesystem::path& path);
// Writes through a temporary file and renames it into place.
void write_file(const std::filesystem::path& path, std::string_view contents);

struct ManifestEntry {
  std::string path;
  std::uint64_t bytes = 0;
  std::string hash;
};

inline constexpr const char* kManifestName = "manifest.csv";

// Hashes the listed files (relative to dir) in the given order and writes
// dir/manifest.csv.
std::vector<ManifestEntry> write_manifest(const std::filesystem::path& dir,
                                          const std::vector<std::string>& files);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& dir);
// Paths whose current contents no longer match the manifest.
std::vector<std::string> verify_manifest(const std::filesystem::path& dir);

}  // namespace subzero::io

#endif  // SUBZERO_IO_HPP_
