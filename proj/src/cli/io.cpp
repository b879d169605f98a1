// Copyright 2026 The cos2phi Authors
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

#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <locale>
#include <sstream>

#include "cos2phi/cli.hpp"
#include "cos2phi/errors.hpp"

namespace cos2phi::cli {
namespace {

constexpr char kMagic[8] = {'C', '2', 'P', 'S', 'O', 'L', '1', '\n'};

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T take(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ResourceError("truncated solution file");
  return v;
}

void put_string(std::ostream& os, const std::string& s) {
  put<std::uint64_t>(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string take_string(std::istream& is) {
  const auto n = take<std::uint64_t>(is);
  if (n > (1u << 20)) throw ResourceError("corrupt solution file");
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (!is) throw ResourceError("truncated solution file");
  return s;
}

}  // namespace

void write_solution(std::ostream& os, const EigenSolution& s) {
  os.write(kMagic, sizeof kMagic);
  put<std::int64_t>(os, s.energies.size());
  put<std::int64_t>(os, s.vectors.rows());
  put<std::uint64_t>(os, s.fingerprint);
  os.write(reinterpret_cast<const char*>(s.energies.data()),
           static_cast<std::streamsize>(sizeof(double) * s.energies.size()));
  for (double r : s.residuals) put(os, r);
  os.write(reinterpret_cast<const char*>(s.vectors.data()),
           static_cast<std::streamsize>(sizeof(cplx) * s.vectors.size()));
  put_string(os, s.meta.backend);
  put_string(os, s.meta.kernels);
  put<std::int32_t>(os, s.meta.iterations);
  put<std::int32_t>(os, s.meta.restarts);
  put<std::int64_t>(os, s.meta.matvecs);
  put(os, s.meta.tolerance);
  put<std::uint64_t>(os, s.meta.seed);
}

EigenSolution read_solution(std::istream& is) {
  char magic[sizeof kMagic];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw ResourceError("not a cos2phi solution file");
  }
  EigenSolution s;
  const auto k = take<std::int64_t>(is);
  const auto dim = take<std::int64_t>(is);
  if (k < 0 || dim < 0 || k > dim) throw ResourceError("corrupt solution header");
  s.fingerprint = take<std::uint64_t>(is);
  s.energies.resize(k);
  is.read(reinterpret_cast<char*>(s.energies.data()), static_cast<std::streamsize>(sizeof(double) * k));
  for (std::int64_t i = 0; i < k; ++i) s.residuals.push_back(take<double>(is));
  s.vectors.resize(dim, k);
  is.read(reinterpret_cast<char*>(s.vectors.data()),
          static_cast<std::streamsize>(sizeof(cplx) * dim * k));
  if (!is) throw ResourceError("truncated solution file");
  s.meta.backend = take_string(is);
  s.meta.kernels = take_string(is);
  s.meta.iterations = take<std::int32_t>(is);
  s.meta.restarts = take<std::int32_t>(is);
  s.meta.matvecs = take<std::int64_t>(is);
  s.meta.tolerance = take<double>(is);
  s.meta.seed = take<std::uint64_t>(is);
  return s;
}

SolutionCache::SolutionCache(std::filesystem::path dir, bool enabled, double tol, SolverOptions opts)
    : dir_(std::move(dir)), enabled_(enabled), tol_(tol), opts_(opts) {}

std::string SolutionCache::key(const CircuitParams& p, const BiasPoint& b,
                               const BasisTruncation& t, Index k) const {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << "v" << version() << ' ' << p.eps_J << ' ' << p.eps_C << ' '
     << p.eps_L << ' ' << p.x << ' ' << p.delta_J << ' ' << p.delta_C << ' ' << p.delta_A << ' '
     << p.delta_L << ' ' << b.phi_ext << ' ' << b.N_g << ' ' << t.N0 << ' ' << t.p0 << ' '
     << t.q0 << ' ' << k << ' ' << tol_ << ' ' << to_string(opts_.backend) << ' '
     << opts_.dense_threshold << ' ' << opts_.seed << ' ' << opts_.max_restarts;
  return sha256_hex(os.str());
}

EigenSolution SolutionCache::get(const CircuitParams& p, const BiasPoint& b,
                                 const BasisTruncation& t, Index k) {
  const std::filesystem::path file = dir_ / (key(p, b, t, k) + ".sol");
  if (enabled_) {
    std::ifstream in(file, std::ios::binary);
    if (in) {
      try {
        EigenSolution s = read_solution(in);
        if (s.vectors.rows() == t.dim() && s.size() == k) {
          ++hits_;
          return s;
        }
      } catch (const ResourceError&) {
        // Fall through and recompute.
      }
    }
  }
  EigenSolution s = direct_diagonalizer(tol_, opts_)(p, b, t, k);
  ++solves_;
  if (enabled_) {
    std::lock_guard<std::mutex> lock(io_);
    std::filesystem::create_directories(dir_);
    const std::filesystem::path tmp = file.string() + ".tmp";
    {
      std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
      if (!os) throw ResourceError("cannot write cache file " + tmp.string());
      write_solution(os, s);
    }
    std::filesystem::rename(tmp, file);
  }
  return s;
}

Diagonalizer SolutionCache::diagonalizer() {
  return [this](const CircuitParams& p, const BiasPoint& b, const BasisTruncation& t, Index k) {
    return get(p, b, t, k);
  };
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << v;
  return os.str();
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

CsvTable& CsvTable::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size()) {
    throw InternalError("CSV row has " + std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(columns_.size()));
  }
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  rows_.push_back(line);
  return *this;
}

std::string CsvTable::render(const Provenance& p) const {
  std::string body;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) body += ',';
    body += columns_[i];
  }
  body += '\n';
  for (const auto& r : rows_) body += r + '\n';
  std::string out;
  out += std::string("# cos2phi ") + version() + '\n';
  out += "# subcommand: " + p.subcommand + '\n';
  out += "# config_sha256: " + p.config_hash + '\n';
  out += "# data_sha256: " + sha256_hex(body) + '\n';
  return out + body;
}

bool verify_csv(const std::string& text) {
  std::size_t pos = 0;
  std::string expected;
  while (pos < text.size() && text[pos] == '#') {
    const std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) return false;
    const std::string line = text.substr(pos, end - pos);
    const std::string tag = "# data_sha256: ";
    if (line.rfind(tag, 0) == 0) expected = line.substr(tag.size());
    pos = end + 1;
  }
  return !expected.empty() && sha256_hex(text.substr(pos)) == expected;
}

json provenance_json(const Provenance& p) {
  return {{"code_version", version()},
          {"subcommand", p.subcommand},
          {"config_sha256", p.config_hash},
          {"schema_version", kSchemaVersion}};
}

std::string render_json(const json& data, const Provenance& p) {
  json doc;
  doc["provenance"] = provenance_json(p);
  doc["provenance"]["data_sha256"] = sha256_hex(data.dump());
  doc["data"] = data;
  return doc.dump(2) + "\n";
}

}  // namespace cos2phi::cli
