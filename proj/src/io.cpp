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

#include "subzero/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "subzero/csv.hpp"
#include "subzero/errors.hpp"

namespace subzero::io {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[8] = {'S', 'Z', 'H', 'E', 'S', 'S', '0', '1'};

static_assert(std::endian::native == std::endian::little,
              "Hessian files are written in host byte order");

void put_u64(std::string& buf, std::uint64_t v) {
  char raw[8];
  std::memcpy(raw, &v, 8);
  buf.append(raw, 8);
}

std::uint64_t get_u64(std::string_view buf, std::size_t offset) {
  std::uint64_t v = 0;
  std::memcpy(&v, buf.data() + offset, 8);
  return v;
}

}  // namespace

void save_hessian(const fs::path& path, const Hessian& h) {
  const std::size_t d = h.dim();
  std::string buf;
  buf.reserve(32 + 8 * d * d);
  buf.append(kMagic, 8);
  put_u64(buf, d);
  put_u64(buf, h.num_blocks);
  put_u64(buf, h.rank);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double v = h.matrix(i, j);
      char raw[8];
      std::memcpy(raw, &v, 8);
      buf.append(raw, 8);
    }
  }
  write_file(path, buf);
}

Hessian load_hessian(const fs::path& path) {
  const std::string buf = read_file(path);
  const std::string name = path.string();
  if (buf.size() < 32 || std::memcmp(buf.data(), kMagic, 8) != 0) {
    throw InputError(name + ": not a Hessian file (bad magic)");
  }
  const std::uint64_t d = get_u64(buf, 8);
  const std::uint64_t blocks = get_u64(buf, 16);
  const std::uint64_t rank = get_u64(buf, 24);
  if (d == 0 || d > (1u << 15) || buf.size() != 32 + 8 * d * d) {
    throw InputError(name + ": size does not match the header dimension");
  }
  if (blocks == 0 || d % blocks != 0) {
    throw InputError(name + ": block count does not divide the dimension");
  }
  Matrix a(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  const char* p = buf.data() + 32;
  for (std::uint64_t i = 0; i < d; ++i) {
    for (std::uint64_t j = 0; j < d; ++j, p += 8) {
      double v = 0.0;
      std::memcpy(&v, p, 8);
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  if (!a.allFinite()) throw InputError(name + ": non-finite entry");
  if (a != a.transpose()) throw InputError(name + ": matrix is not symmetric");
  return Hessian{SymMatrix::from_upper(a), static_cast<std::size_t>(blocks),
                 static_cast<std::size_t>(rank)};
}

void write_key_values(std::ostream& out, const KeyValues& kv) {
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
}

KeyValues read_key_values(const fs::path& path) {
  std::istringstream in(read_file(path));
  KeyValues out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError(path.string() + ": malformed line '" + line + "'");
    }
    out.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw InputError("write failed for " + path.string());
  }
  fs::rename(tmp, path);
}

std::vector<ManifestEntry> write_manifest(const fs::path& dir,
                                          const std::vector<std::string>& files) {
  std::vector<ManifestEntry> entries;
  std::ostringstream out;
  out << "path,bytes,fnv1a64\n";
  for (const auto& f : files) {
    const std::string data = read_file(dir / f);
    entries.push_back({f, data.size(), hex64(fnv1a64(data))});
    out << csv::row({f, std::to_string(data.size()), entries.back().hash}) << '\n';
  }
  write_file(dir / kManifestName, out.str());
  return entries;
}

std::vector<ManifestEntry> read_manifest(const fs::path& dir) {
  std::istringstream in(read_file(dir / kManifestName));
  std::string line;
  std::getline(in, line);
  if (line != "path,bytes,fnv1a64") {
    throw InputError((dir / kManifestName).string() + ": unexpected header");
  }
  std::vector<ManifestEntry> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 3) throw InputError("malformed manifest row '" + line + "'");
    out.push_back({f[0], std::stoull(f[1]), f[2]});
  }
  return out;
}

std::vector<std::string> verify_manifest(const fs::path& dir) {
  std::vector<std::string> bad;
  for (const auto& e : read_manifest(dir)) {
    std::error_code ec;
    if (!fs::exists(dir / e.path, ec)) {
      bad.push_back(e.path);
      continue;
    }
    const std::string data = read_file(dir / e.path);
    if (data.size() != e.bytes || hex64(fnv1a64(data)) != e.hash) bad.push_back(e.path);
  }
  return bad;
}

}  // namespace subzero::io
