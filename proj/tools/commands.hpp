#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace attnedit::cli {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitFormat = 3,
  kExitValidation = 4,
};

struct ExtractOptions {
  std::filesystem::path weights;
  std::string layer;
  std::size_t top_k = 8;
  std::string variant = "final";
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
};

struct ValidateOptions {
  std::filesystem::path weights;
  std::string layer;
  double alpha = 1e-3;
  std::size_t samples = 256;
  std::size_t tokens = 32;
  std::size_t directions = 200;
  std::size_t dominance_directions = 500;
  std::uint64_t seed = 7;
  bool json = false;
};

struct WhitenOptions {
  std::filesystem::path latents;
  std::filesystem::path weights;
  std::string layer;
  std::size_t rank = 0;
  double alpha = 1e-3;
  std::string variant = "final";
  bool json = false;
};

struct EditOptions {
  std::filesystem::path latents;
  std::filesystem::path directions;
  std::size_t rank = 0;
  double alpha = 0.0;
  double t_low = 0.5;
  double t_high = 0.8;
  /// Falls back to the latent header's T (or 1000 if that is 0).
  std::optional<std::uint32_t> total_steps;
  std::filesystem::path out;
  /// Sweep mode: write one file per alpha in [alpha_min, alpha_max].
  std::optional<std::size_t> sweep_points;
  double alpha_min = -0.4;
  double alpha_max = 0.4;
};

struct SweepSeriesOptions {
  std::filesystem::path latents;
  std::filesystem::path directions;
  std::size_t rank = 0;
  double alpha_min = -0.4;
  double alpha_max = 0.4;
  std::size_t points = 5;
  double t_low = 0.5;
  double t_high = 0.8;
  std::optional<std::uint32_t> total_steps;
  std::size_t sample = 0;
  std::filesystem::path out;
};

struct WeightsFixtureOptions {
  std::string kind = "gaussian";  // gaussian | identity | diag | shift
  std::size_t d = 16;
  std::vector<double> diag;
  std::string layer = "layer0";
  std::string dtype = "f64";
  std::uint64_t seed = 7;
  std::filesystem::path out;
};

struct LatentsFixtureOptions {
  std::string kind = "gaussian";  // gaussian | zero | basis
  std::size_t samples = 64;
  std::size_t tokens = 32;
  std::size_t d = 16;
  std::vector<std::uint32_t> timesteps{600};
  std::uint32_t total_steps = 1000;
  std::string dtype = "f64";
  std::uint64_t seed = 7;
  std::filesystem::path out;
};

void cmd_extract(const ExtractOptions& opt, std::ostream& out);
/// Returns kExitValidation when any check misses its tolerance.
int cmd_validate(const ValidateOptions& opt, std::ostream& out);
void cmd_whiten_report(const WhitenOptions& opt, std::ostream& out);
void cmd_edit(const EditOptions& opt, std::ostream& out);
void cmd_sweep_series(const SweepSeriesOptions& opt, std::ostream& out);
void cmd_fixture_weights(const WeightsFixtureOptions& opt, std::ostream& out);
void cmd_fixture_latents(const LatentsFixtureOptions& opt, std::ostream& out);

/// Parses argv (argv[0] is the program name), runs the subcommand and maps
/// failures to exit codes with a single "error[CODE]: ..." line on `err`.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace attnedit::cli
