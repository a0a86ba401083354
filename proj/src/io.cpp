#include "attnedit/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "attnedit/error.hpp"
#include "json.hpp"

namespace attnedit {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

[[noreturn]] void format_error(const std::string& what) {
  throw Error(ErrorKind::Format, what);
}

template <class U>
void put_le(std::vector<std::byte>& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<std::byte>((value >> (8 * i)) & 0xff));
  }
}

template <class U>
U get_le(std::span<const std::byte> bytes, std::size_t offset) {
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    value |= static_cast<U>(std::to_integer<std::uint8_t>(bytes[offset + i])) << (8 * i);
  }
  return value;
}

void put_value(std::vector<std::byte>& out, double v, Dtype t) {
  if (t == Dtype::F64) {
    put_le(out, std::bit_cast<std::uint64_t>(v));
  } else {
    put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
}

double get_value(std::span<const std::byte> bytes, std::size_t offset, Dtype t) {
  if (t == Dtype::F64) return std::bit_cast<double>(get_le<std::uint64_t>(bytes, offset));
  return static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(bytes, offset)));
}

void put_matrix(std::vector<std::byte>& out, const Matrix& m, Dtype t) {
  for (double v : m.data()) put_value(out, v, t);
}

Matrix get_matrix(std::span<const std::byte> bytes, std::size_t offset, std::size_t rows,
                  std::size_t cols, Dtype t) {
  const std::size_t step = dtype_size(t);
  std::vector<double> data(rows * cols);
  for (std::size_t k = 0; k < data.size(); ++k) data[k] = get_value(bytes, offset + k * step, t);
  try {
    return Matrix(rows, cols, std::move(data));
  } catch (const Error& e) {
    format_error(std::string("stored matrix: ") + e.what());
  }
}

Dtype parse_dtype(const std::string& s) {
  if (s == "f32") return Dtype::F32;
  if (s == "f64") return Dtype::F64;
  format_error("unknown dtype '" + s + "', expected f32|f64");
}

std::uint64_t read_unsigned(const ordered_json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number_unsigned()) {
    format_error(where + ": missing or non-integer field '" + key + "'");
  }
  return j.at(key).get<std::uint64_t>();
}

std::string read_string(const ordered_json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    format_error(where + ": missing or non-string field '" + key + "'");
  }
  return j.at(key).get<std::string>();
}

ordered_json parse_json(std::string_view text, const std::string& what) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    format_error(what + ": invalid JSON: " + e.what());
  }
}

std::string_view as_text(std::span<const std::byte> bytes) {
  return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

}  // namespace

std::string_view to_string(Dtype t) { return t == Dtype::F32 ? "f32" : "f64"; }

std::size_t dtype_size(Dtype t) { return t == Dtype::F32 ? 4 : 8; }

std::uint64_t fnv1a64(std::span<const std::byte> bytes, std::uint64_t state) {
  for (std::byte b : bytes) {
    state ^= std::to_integer<std::uint8_t>(b);
    state *= 0x100000001b3ULL;
  }
  return state;
}

std::string checksum_hex(std::uint64_t h) {
  std::ostringstream s;
  s << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

std::vector<std::byte> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) format_error("cannot open '" + path.string() + "'");
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::byte> bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) format_error("short read from '" + path.string() + "'");
  return bytes;
}

void write_file_bytes(const fs::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Usage, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Usage, "write failed for '" + path.string() + "'");
}

// --- weight container ------------------------------------------------------

void write_weight_container(const fs::path& manifest_path, const std::string& blob_name,
                            std::span<const NamedLayer> layers, Dtype dtype) {
  std::vector<std::byte> blob;
  ordered_json manifest;
  manifest["format_version"] = 1;
  manifest["blob"] = blob_name;
  manifest["layers"] = ordered_json::array();
  for (const NamedLayer& layer : layers) {
    ordered_json entry;
    entry["layer_id"] = layer.layer_id;
    entry["d"] = layer.weights.d();
    entry["dtype"] = std::string(to_string(dtype));
    ordered_json offsets;
    offsets["w_q"] = blob.size();
    put_matrix(blob, layer.weights.w_q, dtype);
    offsets["w_k"] = blob.size();
    put_matrix(blob, layer.weights.w_k, dtype);
    offsets["w_v"] = blob.size();
    put_matrix(blob, layer.weights.w_v, dtype);
    entry["offsets"] = offsets;
    manifest["layers"].push_back(entry);
  }
  const std::string text = manifest.dump(2) + "\n";
  write_file_bytes(manifest_path, std::as_bytes(std::span(text.data(), text.size())));
  write_file_bytes(manifest_path.parent_path() / blob_name, blob);
}

WeightContainer WeightContainer::open(const fs::path& manifest_path) {
  const auto manifest_bytes = read_file_bytes(manifest_path);
  const ordered_json manifest = parse_json(as_text(manifest_bytes), "manifest");
  if (!manifest.is_object()) format_error("manifest: top level is not an object");
  if (read_unsigned(manifest, "format_version", "manifest") != 1) {
    format_error("manifest: unsupported format_version");
  }
  const std::string blob_name = read_string(manifest, "blob", "manifest");

  WeightContainer c;
  c.blob_ = read_file_bytes(manifest_path.parent_path() / blob_name);
  c.checksum_ = checksum_hex(fnv1a64(c.blob_, fnv1a64(manifest_bytes)));

  if (!manifest.contains("layers") || !manifest.at("layers").is_array()) {
    format_error("manifest: missing 'layers' array");
  }
  std::set<std::string> seen;
  for (const auto& j : manifest.at("layers")) {
    LayerEntry e;
    e.layer_id = read_string(j, "layer_id", "layer");
    const std::string where = "layer '" + e.layer_id + "'";
    if (!seen.insert(e.layer_id).second) format_error("manifest: duplicate " + where);
    e.d = read_unsigned(j, "d", where);
    if (e.d == 0 || e.d > (1u << 20)) format_error(where + ": d out of range");
    e.dtype = parse_dtype(read_string(j, "dtype", where));
    if (!j.contains("offsets") || !j.at("offsets").is_object()) {
      format_error(where + ": missing 'offsets' object");
    }
    const auto& off = j.at("offsets");
    e.offset_q = read_unsigned(off, "w_q", where);
    e.offset_k = read_unsigned(off, "w_k", where);
    e.offset_v = read_unsigned(off, "w_v", where);
    const std::uint64_t bytes = static_cast<std::uint64_t>(e.d) * e.d * dtype_size(e.dtype);
    for (std::uint64_t o : {e.offset_q, e.offset_k, e.offset_v}) {
      if (o > c.blob_.size() || bytes > c.blob_.size() - o) {
        format_error(where + ": matrix at offset " + std::to_string(o) + " of " +
                     std::to_string(bytes) + " bytes overruns blob of " +
                     std::to_string(c.blob_.size()) + " bytes");
      }
    }
    c.layers_.push_back(std::move(e));
  }
  return c;
}

std::vector<std::string> WeightContainer::layer_ids() const {
  std::vector<std::string> ids;
  for (const auto& e : layers_) ids.push_back(e.layer_id);
  return ids;
}

AttentionWeights WeightContainer::load(std::string_view layer_id) const {
  for (const LayerEntry& e : layers_) {
    if (e.layer_id != layer_id) continue;
    return AttentionWeights(get_matrix(blob_, e.offset_q, e.d, e.d, e.dtype),
                            get_matrix(blob_, e.offset_k, e.d, e.d, e.dtype),
                            get_matrix(blob_, e.offset_v, e.d, e.d, e.dtype));
  }
  std::string available;
  for (const auto& e : layers_) available += (available.empty() ? "" : ",") + e.layer_id;
  throw Error(ErrorKind::Usage,
              "layer '" + std::string(layer_id) + "' not found; available: [" + available + "]");
}

// --- latent file -------------------------------------------------------------

std::vector<std::byte> encode_latent_file(const LatentFile& file) {
  if (file.samples.empty()) throw Error(ErrorKind::Domain, "latent file needs at least one sample");
  const std::size_t n = file.n_tokens();
  const std::size_t d = file.d();
  std::vector<std::byte> out;
  out.reserve(kLatentHeaderBytes +
              file.samples.size() * (4 + n * d * dtype_size(file.dtype)));
  for (char ch : {'A', 'E', 'L', 'T'}) out.push_back(static_cast<std::byte>(ch));
  put_le<std::uint32_t>(out, kLatentVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(file.samples.size()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(n));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  put_le<std::uint32_t>(out, file.total_steps);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dtype_size(file.dtype)));
  for (const LatentTokens& s : file.samples) {
    if (s.n_tokens() != n || s.d() != d) {
      throw Error(ErrorKind::Dimension, "latent samples have inconsistent shapes");
    }
    if (!s.timestep) throw Error(ErrorKind::Domain, "latent sample without timestep");
    put_le<std::uint32_t>(out, *s.timestep);
    put_matrix(out, s.z, file.dtype);
  }
  return out;
}

LatentFile decode_latent_file(std::span<const std::byte> bytes) {
  if (bytes.size() < kLatentHeaderBytes) format_error("latent file: truncated header");
  if (as_text(bytes.first(4)) != "AELT") format_error("latent file: bad magic");
  const auto version = get_le<std::uint32_t>(bytes, 4);
  if (version != kLatentVersion) {
    format_error("latent file: unsupported version " + std::to_string(version));
  }
  const std::uint64_t n_samples = get_le<std::uint32_t>(bytes, 8);
  const std::uint64_t n = get_le<std::uint32_t>(bytes, 12);
  const std::uint64_t d = get_le<std::uint32_t>(bytes, 16);
  LatentFile file;
  file.total_steps = get_le<std::uint32_t>(bytes, 20);
  const auto elem = get_le<std::uint32_t>(bytes, 24);
  if (elem == 4) {
    file.dtype = Dtype::F32;
  } else if (elem == 8) {
    file.dtype = Dtype::F64;
  } else {
    format_error("latent file: dtype must be 4 or 8, got " + std::to_string(elem));
  }
  if (n_samples == 0 || n == 0 || d == 0) format_error("latent file: zero dimension in header");

  const std::uint64_t per_sample = 4 + n * d * elem;
  const std::uint64_t expected = kLatentHeaderBytes + n_samples * per_sample;
  if (expected != bytes.size()) {
    format_error("latent file: header declares " + std::to_string(expected) +
                 " bytes but file has " + std::to_string(bytes.size()));
  }
  std::size_t offset = kLatentHeaderBytes;
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    const auto t = get_le<std::uint32_t>(bytes, offset);
    file.samples.push_back({get_matrix(bytes, offset + 4, n, d, file.dtype), t});
    offset += per_sample;
  }
  return file;
}

void write_latent_file(const fs::path& path, const LatentFile& file) {
  write_file_bytes(path, encode_latent_file(file));
}

LatentFile read_latent_file(const fs::path& path) {
  return decode_latent_file(read_file_bytes(path));
}

// --- directions file -----------------------------------------------------------

std::string encode_directions(const DirectionsFile& file) {
  ordered_json j;
  j["layer_id"] = file.layer_id;
  j["variant"] = std::string(to_string(file.variant));
  j["d"] = file.d;
  j["directions"] = ordered_json::array();
  for (const EditDirection& dir : file.directions) {
    ordered_json e;
    e["rank"] = dir.rank;
    e["eigenvalue"] = dir.eigenvalue;
    e["vector"] = dir.vector;
    e["degenerate_cluster"] = dir.degenerate_cluster;
    j["directions"].push_back(e);
  }
  ordered_json prov;
  prov["container_checksum"] = file.provenance.container_checksum;
  prov["tool_version"] = file.provenance.tool_version;
  prov["seed"] = file.provenance.seed ? ordered_json(*file.provenance.seed) : ordered_json(nullptr);
  j["provenance"] = prov;
  return j.dump(2) + "\n";
}

DirectionsFile decode_directions(std::string_view text) {
  const ordered_json j = parse_json(text, "directions file");
  if (!j.is_object()) format_error("directions file: top level is not an object");
  DirectionsFile f;
  f.layer_id = read_string(j, "layer_id", "directions file");
  try {
    f.variant = parse_variant(read_string(j, "variant", "directions file"));
  } catch (const Error& e) {
    format_error(std::string("directions file: ") + e.what());
  }
  f.d = read_unsigned(j, "d", "directions file");
  if (f.d == 0) format_error("directions file: d must be positive");
  if (!j.contains("directions") || !j.at("directions").is_array()) {
    format_error("directions file: missing 'directions' array");
  }

  for (const auto& e : j.at("directions")) {
    EditDirection dir;
    dir.layer_id = f.layer_id;
    dir.variant = f.variant;
    const std::string where = "direction " + std::to_string(f.directions.size());
    dir.rank = read_unsigned(e, "rank", where);
    if (!e.contains("eigenvalue") || !e.at("eigenvalue").is_number()) {
      format_error(where + ": missing eigenvalue");
    }
    dir.eigenvalue = e.at("eigenvalue").get<double>();
    if (!e.contains("vector") || !e.at("vector").is_array()) format_error(where + ": missing vector");
    for (const auto& x : e.at("vector")) {
      if (!x.is_number()) format_error(where + ": non-numeric vector entry");
      dir.vector.push_back(x.get<double>());
    }
    if (dir.vector.size() != f.d) {
      format_error(where + ": vector length " + std::to_string(dir.vector.size()) +
                   " differs from d = " + std::to_string(f.d));
    }
    if (std::abs(norm2(dir.vector) - 1.0) > 1e-9) format_error(where + ": vector is not unit norm");
    if (!e.contains("degenerate_cluster") || !e.at("degenerate_cluster").is_boolean()) {
      format_error(where + ": missing degenerate_cluster flag");
    }
    dir.degenerate_cluster = e.at("degenerate_cluster").get<bool>();
    if (!f.directions.empty() && dir.eigenvalue > f.directions.back().eigenvalue) {
      format_error(where + ": eigenvalues are not nonincreasing");
    }
    f.directions.push_back(std::move(dir));
  }

  if (j.contains("provenance") && j.at("provenance").is_object()) {
    const auto& p = j.at("provenance");
    if (p.contains("container_checksum") && p.at("container_checksum").is_string()) {
      f.provenance.container_checksum = p.at("container_checksum").get<std::string>();
    }
    if (p.contains("tool_version") && p.at("tool_version").is_string()) {
      f.provenance.tool_version = p.at("tool_version").get<std::string>();
    }
    if (p.contains("seed") && p.at("seed").is_number_unsigned()) {
      f.provenance.seed = p.at("seed").get<std::uint64_t>();
    }
  }
  return f;
}

void write_directions_file(const fs::path& path, const DirectionsFile& file) {
  const std::string text = encode_directions(file);
  write_file_bytes(path, std::as_bytes(std::span(text.data(), text.size())));
}

DirectionsFile read_directions_file(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  return decode_directions(as_text(bytes));
}

}  // namespace attnedit
