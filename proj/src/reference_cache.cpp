// Reference-solution cache.
//
// File layout: 8-byte magic "HGREF01\n", 8-byte little-endian header length,
// a key=value text header (doubles as C99 hex floats, so keys compare
// bit-exactly), then the coefficients and alpha as little-endian doubles.
// The header carries a crc32 of the payload.

#include <zlib.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "hypogal/error.hpp"
#include "hypogal/solver.hpp"

namespace hypogal {

namespace {

constexpr char kMagic[8] = {'H', 'G', 'R', 'E', 'F', '0', '1', '\n'};

std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

std::string hex_list(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += hex_double(v[i]);
  }
  return s;
}

uint32_t crc_of(const void* data, size_t bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  const auto* p = static_cast<const Bytef*>(data);
  while (bytes > 0) {
    const uInt chunk = static_cast<uInt>(std::min<size_t>(bytes, 1u << 30));
    crc = crc32(crc, p, chunk);
    p += chunk;
    bytes -= chunk;
  }
  return static_cast<uint32_t>(crc);
}

uint64_t to_le(uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
  return v;
}

void doubles_to_le(std::vector<double>& v) {
  if constexpr (std::endian::native == std::endian::big) {
    for (double& d : v) d = std::bit_cast<double>(__builtin_bswap64(std::bit_cast<uint64_t>(d)));
  }
}

std::string key_header(const ReferenceKey& key) {
  std::ostringstream h;
  h << "format=hypogal-reference-1\n";
  h << "potential.c0=" << hex_double(key.potential.constant()) << "\n";
  h << "potential.cos=" << hex_list(key.potential.cos_coeffs()) << "\n";
  h << "potential.sin=" << hex_list(key.potential.sin_coeffs()) << "\n";
  h << "beta=" << hex_double(key.beta) << "\n";
  h << "gamma=" << hex_double(key.gamma) << "\n";
  h << "observable=" << key.observable << "\n";
  h << "K=" << key.K << "\n";
  h << "L=" << key.L << "\n";
  return h.str();
}

std::string file_tag(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open observable file " + path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", crc_of(content.data(), content.size()));
  return std::string("file-crc32:") + buf;
}

}  // namespace

std::string ObservableSpec::tag() const {
  switch (kind) {
    case ObservableKind::kVelocity: return "velocity";
    case ObservableKind::kSobolev: return "sobolev";
    case ObservableKind::kFile: return file_tag(path);
  }
  return "unknown";
}

std::string ReferenceKey::file_name() const {
  const std::string h = key_header(*this);
  char buf[64];
  std::snprintf(buf, sizeof buf, "ref-K%d-L%d-%08x.bin", K, L, crc_of(h.data(), h.size()));
  return buf;
}

bool ReferenceKey::operator==(const ReferenceKey& other) const {
  return key_header(*this) == key_header(other);
}

void write_reference_cache(const std::string& path, const ReferenceKey& key,
                           const ReferenceResult& result) {
  std::vector<double> payload = result.X.values();
  payload.push_back(result.alpha);
  doubles_to_le(payload);
  const uint32_t crc = crc_of(payload.data(), payload.size() * sizeof(double));
  std::ostringstream h;
  h << key_header(key);
  h << "count=" << result.X.size() << "\n";
  h << "residual=" << hex_double(result.residual) << "\n";
  h << "condition_estimate=" << hex_double(result.condition_estimate) << "\n";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%08x", crc);
  h << "crc32=" << buf << "\n";
  const std::string header = h.str();

  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  std::random_device rd;
  const fs::path tmp = target.string() + ".tmp-" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write cache file " + tmp.string());
    out.write(kMagic, sizeof kMagic);
    const uint64_t len = to_le(header.size());
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(double)));
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::optional<ReferenceResult> read_reference_cache(const std::string& path,
                                                    const ReferenceKey& key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  uint64_t len = 0;
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) return std::nullopt;
  if (!in.read(reinterpret_cast<char*>(&len), sizeof len)) return std::nullopt;
  len = to_le(len);
  if (len > (1u << 20)) return std::nullopt;
  std::string header(len, '\0');
  if (!in.read(header.data(), static_cast<std::streamsize>(len))) return std::nullopt;
  const std::string expected = key_header(key);
  if (header.compare(0, expected.size(), expected) != 0) return std::nullopt;

  std::map<std::string, std::string> fields;
  std::istringstream hs(header);
  std::string line;
  while (std::getline(hs, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) fields[line.substr(0, eq)] = line.substr(eq + 1);
  }
  try {
    const long count = std::stol(fields.at("count"));
    if (count != static_cast<long>(2L * key.K - 1) * key.L) return std::nullopt;
    std::vector<double> payload(count + 1);
    if (!in.read(reinterpret_cast<char*>(payload.data()),
                 static_cast<std::streamsize>(payload.size() * sizeof(double)))) {
      return std::nullopt;
    }
    if (in.peek() != std::char_traits<char>::eof()) return std::nullopt;
    const uint32_t crc = static_cast<uint32_t>(std::stoul(fields.at("crc32"), nullptr, 16));
    if (crc != crc_of(payload.data(), payload.size() * sizeof(double))) return std::nullopt;
    doubles_to_le(payload);
    ReferenceResult r;
    r.alpha = payload.back();
    payload.pop_back();
    r.X = CoefficientVector(key.K, key.L, std::move(payload));
    r.residual = std::strtod(fields.at("residual").c_str(), nullptr);
    r.condition_estimate = std::strtod(fields.at("condition_estimate").c_str(), nullptr);
    r.from_cache = true;
    r.cache_path = path;
    return r;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

ReferenceResult reference_solution(const ModelParams& params, int K_ref, int L_ref,
                                   const ObservableSpec& observable,
                                   const std::string& cache_dir,
                                   const SolverOptions& options) {
  ModelParams ref = params;
  ref.K = K_ref;
  ref.L = L_ref;
  ref.n_quad_q = std::max(params.n_quad_q, ModelParams::min_quadrature(K_ref, params.potential.degree()));
  ref.validate();

  ReferenceKey key{ref.potential, ref.beta, ref.gamma, observable.tag(), K_ref, L_ref};
  std::string path;
  if (!cache_dir.empty()) {
    path = (std::filesystem::path(cache_dir) / key.file_name()).string();
    if (auto cached = read_reference_cache(path, key)) return *cached;
  }
  const GalerkinSystem system = assemble_system(ref);
  const PoissonSolver solver(system, options);
  SolveResult s = solver.solve(observable.build(ref));
  ReferenceResult r;
  r.X = std::move(s.X);
  r.alpha = s.alpha;
  r.residual = s.residual;
  r.condition_estimate = s.factor_stats.condition_estimate;
  r.from_cache = false;
  if (!path.empty()) {
    write_reference_cache(path, key, r);
    r.cache_path = path;
  }
  return r;
}

}  // namespace hypogal
