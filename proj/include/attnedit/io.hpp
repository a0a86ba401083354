#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attnedit/attention.hpp"
#include "attnedit/directions.hpp"

namespace attnedit {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class Dtype { F32, F64 };

std::string_view to_string(Dtype t);
std::size_t dtype_size(Dtype t);

/// FNV-1a 64-bit over `bytes`, continuing from `state`.
std::uint64_t fnv1a64(std::span<const std::byte> bytes,
                      std::uint64_t state = 0xcbf29ce484222325ULL);
std::string checksum_hex(std::uint64_t h);

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::byte> bytes);

// ---------------------------------------------------------------------------
// Weight container: a JSON manifest next to one little-endian binary blob.
//
//   {
//     "format_version": 1,
//     "blob": "<file name relative to the manifest>",
//     "layers": [
//       { "layer_id": "...", "d": 64, "dtype": "f32" | "f64",
//         "offsets": { "w_q": <byte>, "w_k": <byte>, "w_v": <byte> } }
//     ]
//   }
//
// Matrices are row-major d x d.
// ---------------------------------------------------------------------------

struct LayerEntry {
  std::string layer_id;
  std::size_t d = 0;
  Dtype dtype = Dtype::F64;
  std::uint64_t offset_q = 0;
  std::uint64_t offset_k = 0;
  std::uint64_t offset_v = 0;
};

struct NamedLayer {
  std::string layer_id;
  AttentionWeights weights;
};

/// Writes `manifest_path` and a blob named `blob_name` in the same directory.
/// Layers are packed back to back in the given order. With Dtype::F32 values
/// are rounded to float.
void write_weight_container(const std::filesystem::path& manifest_path,
                            const std::string& blob_name, std::span<const NamedLayer> layers,
                            Dtype dtype);

class WeightContainer {
 public:
  /// Reads and validates the manifest and blob. Throws Format on any
  /// violated layout invariant.
  static WeightContainer open(const std::filesystem::path& manifest_path);

  const std::vector<LayerEntry>& layers() const noexcept { return layers_; }
  std::vector<std::string> layer_ids() const;

  /// Weights upcast to double. Throws Usage naming the available layers when
  /// `layer_id` is absent.
  AttentionWeights load(std::string_view layer_id) const;

  /// Checksum over manifest and blob bytes.
  const std::string& checksum() const noexcept { return checksum_; }

 private:
  std::vector<LayerEntry> layers_;
  std::vector<std::byte> blob_;
  std::string checksum_;
};

// ---------------------------------------------------------------------------
// Latent file ("AELT"), all integers u32 little-endian:
//   magic "AELT" | version=1 | n_samples | n_tokens | d | total_steps | dtype
//   then per sample: timestep | n_tokens*d values (row-major, f32 or f64)
// dtype is the element size in bytes: 4 or 8.
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t kLatentVersion = 1;
inline constexpr std::size_t kLatentHeaderBytes = 28;

struct LatentFile {
  std::uint32_t total_steps = 1000;
  Dtype dtype = Dtype::F64;
  std::vector<LatentTokens> samples;  // every sample carries a timestep

  std::size_t n_tokens() const { return samples.front().n_tokens(); }
  std::size_t d() const { return samples.front().d(); }
};

std::vector<std::byte> encode_latent_file(const LatentFile& file);
LatentFile decode_latent_file(std::span<const std::byte> bytes);
void write_latent_file(const std::filesystem::path& path, const LatentFile& file);
LatentFile read_latent_file(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Directions file: JSON document with the extracted directions of one layer.
// ---------------------------------------------------------------------------

struct Provenance {
  std::string container_checksum;
  std::string tool_version = std::string(kToolVersion);
  std::optional<std::uint64_t> seed;
};

struct DirectionsFile {
  std::string layer_id;
  CombinedVariant variant = CombinedVariant::FinalExpr;
  std::size_t d = 0;
  std::vector<EditDirection> directions;
  Provenance provenance;
};

std::string encode_directions(const DirectionsFile& file);
/// Validates unit norms (1e-9), vector lengths and nonincreasing eigenvalues.
DirectionsFile decode_directions(std::string_view text);
void write_directions_file(const std::filesystem::path& path, const DirectionsFile& file);
DirectionsFile read_directions_file(const std::filesystem::path& path);

}  // namespace attnedit
