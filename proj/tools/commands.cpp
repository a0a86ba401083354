#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "attnedit/attention.hpp"
#include "attnedit/directions.hpp"
#include "attnedit/edit.hpp"
#include "attnedit/error.hpp"
#include "attnedit/io.hpp"
#include "attnedit/random.hpp"
#include "attnedit/whitening.hpp"
#include "json.hpp"

namespace attnedit::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

// Shortest round-trip representation, independent of locale.
std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Dtype parse_dtype_flag(const std::string& s) {
  if (s == "f32") return Dtype::F32;
  if (s == "f64") return Dtype::F64;
  throw Error(ErrorKind::Usage, "unknown dtype '" + s + "', expected f32|f64");
}

std::string file_checksum(const fs::path& p) { return checksum_hex(fnv1a64(read_file_bytes(p))); }

const EditDirection& find_rank(const DirectionsFile& dirs, std::size_t rank) {
  for (const auto& d : dirs.directions) {
    if (d.rank == rank) return d;
  }
  throw Error(ErrorKind::Usage, "rank " + std::to_string(rank) + " not present in directions file (" +
                                    std::to_string(dirs.directions.size()) + " directions)");
}

InjectionSchedule make_schedule(double t_low, double t_high, std::optional<std::uint32_t> flag_steps,
                                std::uint32_t header_steps, double alpha) {
  InjectionSchedule s;
  s.total_steps = flag_steps ? *flag_steps : (header_steps != 0 ? header_steps : 1000);
  s.t_low_frac = t_low;
  s.t_high_frac = t_high;
  s.alpha = alpha;
  s.validate();
  return s;
}

void require_direction_fits(const LatentFile& lat, const EditDirection& dir) {
  if (dir.vector.size() != lat.d()) {
    throw Error(ErrorKind::Dimension, "direction has d = " + std::to_string(dir.vector.size()) +
                                          " but latents have d = " + std::to_string(lat.d()));
  }
}

fs::path sweep_path(const fs::path& out, std::size_t k) {
  fs::path p = out;
  p.replace_filename(out.stem().string() + "." + std::to_string(k) + out.extension().string());
  return p;
}

void write_sidecar(const fs::path& out, const ordered_json& meta) {
  const std::string text = meta.dump(2) + "\n";
  write_file_bytes(fs::path(out.string() + ".json"),
                   std::as_bytes(std::span(text.data(), text.size())));
}

struct Check {
  std::string name;
  bool pass = false;
  std::vector<std::pair<std::string, double>> metrics;
  std::string criterion;
};

// Worst case over a handful of samples of the linearization gap and its
// shrink factor when alpha is halved.
Check first_order_check(const AttentionWeights& w, std::span<const LatentTokens> samples,
                        double alpha, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 10));
  const auto n = PerturbationDirection::normalized(random_unit_vector(w.d(), rng));
  double worst_rel = 0.0;
  double worst_ratio = INFINITY;
  const std::size_t count = std::min<std::size_t>(8, samples.size());
  for (std::size_t i = 0; i < count; ++i) {
    const Matrix exact = delta_attn_exact(samples[i], w, n, alpha);
    const double gap = frobenius_norm(exact - delta_attn_first_order(samples[i], w, n, alpha));
    const double gap_half = frobenius_norm(delta_attn_exact(samples[i], w, n, alpha / 2) -
                                           delta_attn_first_order(samples[i], w, n, alpha / 2));
    worst_rel = std::max(worst_rel, gap / frobenius_norm(exact));
    worst_ratio = std::min(worst_ratio, gap / gap_half);
  }
  return {"first_order_scaling",
          worst_rel <= 5e-3 && worst_ratio >= 3.5,
          {{"max_rel_gap", worst_rel}, {"min_halving_ratio", worst_ratio}},
          "max_rel_gap <= 5e-3 and min_halving_ratio >= 3.5"};
}

// Central differences of the row softmax against the analytic Jacobian, on
// logit rows taken from the layer's own forward passes.
Check jacobian_check(std::span<const PreparedSample> prepared, std::uint64_t seed) {
  constexpr double h = 1e-5;
  constexpr std::size_t kRows = 100;
  Rng rng(derive_seed(seed, 11));
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  std::size_t used = 0;
  for (std::size_t s = 0; s < prepared.size() && used < kRows; ++s) {
    const Matrix& l = prepared[s].trace.logits;
    for (std::size_t i = 0; i < l.rows() && used < kRows; ++i, ++used) {
      const Matrix row = Matrix::row_vector(l.row(i));
      Matrix dl(1, row.cols());
      for (double& x : dl.data()) x = normal(rng);
      const Matrix analytic = softmax_jacobian_apply(row, dl);
      const Matrix fd = (1.0 / (2 * h)) * (softmax_rows(row + h * dl) - softmax_rows(row - h * dl));
      worst = std::max(worst, max_abs_diff(analytic, fd));
    }
  }
  return {"jacobian_finite_difference",
          worst <= 1e-6,
          {{"max_abs_error", worst}, {"rows", static_cast<double>(used)}},
          "max_abs_error <= 1e-6 (h = 1e-5)"};
}

void print_checks(std::ostream& out, const std::vector<Check>& checks) {
  for (const Check& c : checks) {
    out << "check " << c.name << ": " << (c.pass ? "PASS" : "FAIL");
    for (const auto& [k, v] : c.metrics) out << " " << k << "=" << fmt(v);
    out << " [" << c.criterion << "]\n";
  }
}

}  // namespace

void cmd_extract(const ExtractOptions& opt, std::ostream& out) {
  const CombinedVariant variant = parse_variant(opt.variant);
  const WeightContainer container = WeightContainer::open(opt.weights);
  const AttentionWeights w = container.load(opt.layer);
  if (opt.top_k == 0 || opt.top_k > w.d()) {
    throw Error(ErrorKind::Usage, "--top-k must be in [1, " + std::to_string(w.d()) + "]");
  }

  DirectionsFile file;
  file.layer_id = opt.layer;
  file.variant = variant;
  file.d = w.d();
  file.directions = extract_directions(w, opt.top_k, variant, opt.layer);
  file.provenance.container_checksum = container.checksum();
  file.provenance.seed = opt.seed;
  write_directions_file(opt.out, file);

  out << "extracted " << file.directions.size() << " directions from layer '" << opt.layer
      << "' (d=" << w.d() << ", variant=" << to_string(variant) << ")\n";
  for (const auto& d : file.directions) {
    out << "  rank " << d.rank << ": eigenvalue " << fmt(d.eigenvalue)
        << (d.degenerate_cluster ? " (degenerate cluster)" : "") << "\n";
  }
}

int cmd_validate(const ValidateOptions& opt, std::ostream& out) {
  if (!(opt.alpha > 0.0) || !std::isfinite(opt.alpha)) {
    throw Error(ErrorKind::Usage, "validation needs alpha > 0");
  }
  const WeightContainer container = WeightContainer::open(opt.weights);
  const AttentionWeights w = container.load(opt.layer);

  const auto latents =
      whitened_gaussian_samples(opt.samples, opt.tokens, w.d(), derive_seed(opt.seed, 1));
  const auto prepared = prepare_samples(latents, w);

  std::vector<Check> checks;
  checks.push_back(first_order_check(w, latents, opt.alpha, opt.seed));
  checks.push_back(jacobian_check(prepared, opt.seed));

  AuditConfig cfg;
  cfg.alpha = opt.alpha;
  cfg.n_tokens = opt.tokens;
  cfg.m_samples = opt.samples;
  cfg.n_directions = opt.directions;
  cfg.seed = opt.seed;
  const AuditReport audit = variant_audit(w, cfg);
  const VariantScore& best = audit.score(audit.better);
  checks.push_back({"variant_audit",
                    best.spearman >= 0.8,
                    {{"spearman_final", audit.final_expr.spearman},
                     {"spearman_eqc", audit.eqc.spearman},
                     {"pearson_final", audit.final_expr.pearson},
                     {"pearson_eqc", audit.eqc.pearson},
                     {"mre_final", audit.final_expr.mean_relative_error},
                     {"mre_eqc", audit.eqc.mean_relative_error}},
                    "spearman of better variant (" + std::string(to_string(audit.better)) +
                        ") >= 0.8"});

  const DominanceReport dom =
      principal_dominance(w, audit.better, prepared, opt.alpha, opt.dominance_directions, opt.seed);
  checks.push_back({"principal_dominance",
                    dom.percentile >= 0.95,
                    {{"percentile", dom.percentile}, {"principal_empirical", dom.principal_empirical}},
                    "percentile >= 0.95"});

  const auto top = extract_directions(w, 1, audit.better);
  const WhiteningReport wr =
      whitening_report(latents, w, PerturbationDirection(top.front().vector), opt.alpha);
  checks.push_back({"cross_term",
                    wr.cross_term_ratio <= 0.25,
                    {{"cross_term_ratio", wr.cross_term_ratio}},
                    "cross_term_ratio <= 0.25"});

  bool all = true;
  for (const auto& c : checks) all = all && c.pass;

  if (opt.json) {
    ordered_json j;
    j["layer_id"] = opt.layer;
    j["d"] = w.d();
    j["alpha"] = opt.alpha;
    j["samples"] = opt.samples;
    j["tokens"] = opt.tokens;
    j["seed"] = opt.seed;
    j["better_variant"] = std::string(to_string(audit.better));
    j["checks"] = ordered_json::array();
    for (const auto& c : checks) {
      ordered_json e;
      e["name"] = c.name;
      e["pass"] = c.pass;
      e["criterion"] = c.criterion;
      ordered_json m;
      for (const auto& [k, v] : c.metrics) m[k] = v;
      e["metrics"] = m;
      j["checks"].push_back(e);
    }
    j["pass"] = all;
    out << j.dump(2) << "\n";
  } else {
    out << "validate layer=" << opt.layer << " d=" << w.d() << " alpha=" << fmt(opt.alpha)
        << " samples=" << opt.samples << " tokens=" << opt.tokens << " seed=" << opt.seed << "\n";
    print_checks(out, checks);
    out << "better variant: " << to_string(audit.better) << "\n";
    out << "overall: " << (all ? "PASS" : "FAIL") << "\n";
  }
  return all ? kExitOk : kExitValidation;
}

void cmd_whiten_report(const WhitenOptions& opt, std::ostream& out) {
  const LatentFile lat = read_latent_file(opt.latents);
  const WeightContainer container = WeightContainer::open(opt.weights);
  const AttentionWeights w = container.load(opt.layer);
  if (lat.d() != w.d()) {
    throw Error(ErrorKind::Dimension, "latents have d = " + std::to_string(lat.d()) +
                                          " but layer '" + opt.layer + "' has d = " +
                                          std::to_string(w.d()));
  }
  if (opt.rank >= w.d()) throw Error(ErrorKind::Usage, "--rank must be below d");
  const auto dirs = extract_directions(w, opt.rank + 1, parse_variant(opt.variant), opt.layer);
  const WhiteningReport r =
      whitening_report(lat.samples, w, PerturbationDirection(dirs.back().vector), opt.alpha);

  if (opt.json) {
    ordered_json j;
    j["n_samples"] = r.n_samples;
    j["dev_zz"] = r.dev_zz;
    j["dev_vv"] = r.dev_vv;
    j["dev_ss"] = r.dev_ss;
    j["cross_term_ratio"] = r.cross_term_ratio;
    out << j.dump(2) << "\n";
  } else {
    out << "n_samples=" << r.n_samples << "\n"
        << "dev_zz=" << fmt(r.dev_zz) << "\n"
        << "dev_vv=" << fmt(r.dev_vv) << "\n"
        << "dev_ss=" << fmt(r.dev_ss) << " (E[S^T S] rescaled to trace N)\n"
        << "cross_term_ratio=" << fmt(r.cross_term_ratio) << "\n";
  }
}

void cmd_edit(const EditOptions& opt, std::ostream& out) {
  const LatentFile lat = read_latent_file(opt.latents);
  const DirectionsFile dirs = read_directions_file(opt.directions);
  const EditDirection& dir = find_rank(dirs, opt.rank);
  require_direction_fits(lat, dir);

  ordered_json meta;
  meta["tool_version"] = std::string(kToolVersion);
  meta["source_latents_checksum"] = file_checksum(opt.latents);
  meta["directions_checksum"] = file_checksum(opt.directions);
  meta["layer_id"] = dirs.layer_id;
  meta["variant"] = std::string(to_string(dirs.variant));
  meta["rank"] = opt.rank;

  auto run_one = [&](const InjectionSchedule& sched, const fs::path& path) {
    LatentFile edited;
    edited.total_steps = lat.total_steps;
    edited.dtype = lat.dtype;
    std::size_t changed = 0;
    for (const auto& s : lat.samples) {
      edited.samples.push_back(apply_edit(s, dir, sched));
      if (sched.alpha != 0.0 && sched.active(*s.timestep)) ++changed;
    }
    write_latent_file(path, edited);
    ordered_json m = meta;
    m["alpha"] = sched.alpha;
    m["t_low"] = sched.t_low_frac;
    m["t_high"] = sched.t_high_frac;
    m["total_steps"] = sched.total_steps;
    m["edited_samples"] = changed;
    write_sidecar(path, m);
    out << "wrote " << path.string() << " (alpha=" << fmt(sched.alpha) << ", " << changed << "/"
        << lat.samples.size() << " samples edited)\n";
  };

  if (opt.sweep_points) {
    SweepSpec sweep{opt.alpha_min, opt.alpha_max, *opt.sweep_points};
    const auto alphas = sweep.alphas();
    for (std::size_t k = 0; k < alphas.size(); ++k) {
      run_one(make_schedule(opt.t_low, opt.t_high, opt.total_steps, lat.total_steps, alphas[k]),
              sweep_path(opt.out, k));
    }
  } else {
    run_one(make_schedule(opt.t_low, opt.t_high, opt.total_steps, lat.total_steps, opt.alpha),
            opt.out);
  }
}

void cmd_sweep_series(const SweepSeriesOptions& opt, std::ostream& out) {
  const LatentFile lat = read_latent_file(opt.latents);
  const DirectionsFile dirs = read_directions_file(opt.directions);
  const EditDirection& dir = find_rank(dirs, opt.rank);
  require_direction_fits(lat, dir);
  if (opt.sample >= lat.samples.size()) {
    throw Error(ErrorKind::Usage, "--sample " + std::to_string(opt.sample) + " out of range");
  }
  const LatentTokens& base = lat.samples[opt.sample];
  const InjectionSchedule sched =
      make_schedule(opt.t_low, opt.t_high, opt.total_steps, lat.total_steps, 0.0);
  const auto points = sweep_edits(base, dir, sched, SweepSpec{opt.alpha_min, opt.alpha_max, opt.points});

  std::ostringstream csv;
  csv << "alpha,delta_norm,predicted_sensitivity\n";
  for (const auto& p : points) {
    csv << fmt(p.alpha) << "," << fmt(frobenius_norm(p.tokens.z - base.z)) << ","
        << fmt(p.alpha * p.alpha * dir.eigenvalue) << "\n";
  }
  const std::string text = csv.str();
  write_file_bytes(opt.out, std::as_bytes(std::span(text.data(), text.size())));
  out << "wrote " << points.size() << " rows to " << opt.out.string() << "\n";
}

void cmd_fixture_weights(const WeightsFixtureOptions& opt, std::ostream& out) {
  const Dtype dtype = parse_dtype_flag(opt.dtype);
  std::size_t d = opt.kind == "diag" ? opt.diag.size() : opt.d;
  if (d == 0) throw Error(ErrorKind::Usage, "fixture dimension must be positive");

  std::optional<AttentionWeights> w;
  if (opt.kind == "gaussian") {
    w = random_attention_weights(d, opt.seed);
  } else if (opt.kind == "identity") {
    w.emplace(Matrix::identity(d), Matrix::identity(d), Matrix::identity(d));
  } else if (opt.kind == "diag") {
    w.emplace(Matrix::diagonal(opt.diag), Matrix(d, d), Matrix(d, d));
  } else if (opt.kind == "shift") {
    // Gaussian query/key with a strongly non-normal value map 3 * upper shift.
    const AttentionWeights g = random_attention_weights(d, opt.seed);
    Matrix v(d, d);
    for (std::size_t i = 0; i + 1 < d; ++i) v(i, i + 1) = 3.0;
    w.emplace(g.w_q, g.w_k, std::move(v));
  } else {
    throw Error(ErrorKind::Usage, "unknown fixture kind '" + opt.kind +
                                      "', expected gaussian|identity|diag|shift");
  }
  const std::vector<NamedLayer> layers{{opt.layer, *w}};
  write_weight_container(opt.out, opt.out.stem().string() + ".bin", layers, dtype);
  out << "wrote container " << opt.out.string() << " (layer '" << opt.layer << "', d=" << d
      << ", " << opt.dtype << ")\n";
}

void cmd_fixture_latents(const LatentsFixtureOptions& opt, std::ostream& out) {
  if (opt.samples == 0 || opt.tokens == 0 || opt.d == 0) {
    throw Error(ErrorKind::Usage, "fixture sizes must be positive");
  }
  if (opt.timesteps.empty()) throw Error(ErrorKind::Usage, "at least one timestep is required");
  LatentFile file;
  file.total_steps = opt.total_steps;
  file.dtype = parse_dtype_flag(opt.dtype);

  std::vector<LatentTokens> samples;
  if (opt.kind == "gaussian") {
    samples = whitened_gaussian_samples(opt.samples, opt.tokens, opt.d, opt.seed);
  } else if (opt.kind == "zero") {
    samples.assign(opt.samples, LatentTokens{Matrix(opt.tokens, opt.d), std::nullopt});
  } else if (opt.kind == "basis") {
    if (opt.tokens != opt.d) throw Error(ErrorKind::Usage, "basis latents need --tokens == --d");
    samples.assign(opt.samples, LatentTokens{Matrix::identity(opt.d), std::nullopt});
  } else {
    throw Error(ErrorKind::Usage,
                "unknown fixture kind '" + opt.kind + "', expected gaussian|zero|basis");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].timestep = opt.timesteps[i % opt.timesteps.size()];
  }
  file.samples = std::move(samples);
  write_latent_file(opt.out, file);
  out << "wrote " << opt.samples << " latent samples to " << opt.out.string() << "\n";
}

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Editing directions from self-attention weights", "attnedit"};
  app.require_subcommand(1);

  ExtractOptions ex;
  auto* extract = app.add_subcommand("extract", "Eigen-decompose a layer's combined matrix");
  extract->add_option("--weights", ex.weights, "Weight container manifest")->required();
  extract->add_option("--layer", ex.layer, "Layer id")->required();
  extract->add_option("--top-k", ex.top_k, "Number of directions")->capture_default_str();
  extract->add_option("--variant", ex.variant, "final|eqc")->capture_default_str();
  extract->add_option("--out", ex.out, "Directions file to write")->required();
  extract->add_option("--seed", ex.seed, "Recorded in provenance");

  ValidateOptions va;
  auto* validate = app.add_subcommand("validate", "Audit the first-order sensitivity derivation");
  validate->add_option("--weights", va.weights)->required();
  validate->add_option("--layer", va.layer)->required();
  validate->add_option("--alpha", va.alpha)->capture_default_str();
  validate->add_option("--samples", va.samples, "Monte-Carlo latent samples")->capture_default_str();
  validate->add_option("--tokens", va.tokens)->capture_default_str();
  validate->add_option("--directions", va.directions, "Random directions for the audit")
      ->capture_default_str();
  validate->add_option("--dominance-directions", va.dominance_directions)->capture_default_str();
  validate->add_option("--seed", va.seed)->capture_default_str();
  validate->add_flag("--json", va.json, "Machine-readable report");

  WhitenOptions wh;
  auto* whiten = app.add_subcommand("whiten-report", "Measure latent whitening diagnostics");
  whiten->add_option("--latents", wh.latents)->required();
  whiten->add_option("--weights", wh.weights)->required();
  whiten->add_option("--layer", wh.layer)->required();
  whiten->add_option("--rank", wh.rank)->capture_default_str();
  whiten->add_option("--alpha", wh.alpha)->capture_default_str();
  whiten->add_option("--variant", wh.variant)->capture_default_str();
  whiten->add_flag("--json", wh.json);

  EditOptions ed;
  auto* edit = app.add_subcommand("edit", "Apply a direction with timestep gating");
  edit->add_option("--latents", ed.latents)->required();
  edit->add_option("--directions", ed.directions)->required();
  edit->add_option("--rank", ed.rank)->capture_default_str();
  edit->add_option("--alpha", ed.alpha)->capture_default_str();
  edit->add_option("--t-low", ed.t_low)->capture_default_str();
  edit->add_option("--t-high", ed.t_high)->capture_default_str();
  edit->add_option("--total-steps", ed.total_steps, "Defaults to the latent header's T");
  edit->add_option("--out", ed.out)->required();
  edit->add_option("--sweep-points", ed.sweep_points, "Write one file per sweep alpha");
  edit->add_option("--alpha-min", ed.alpha_min)->capture_default_str();
  edit->add_option("--alpha-max", ed.alpha_max)->capture_default_str();

  SweepSeriesOptions sw;
  auto* series = app.add_subcommand("sweep-series", "Tabulate edit norm and predicted sensitivity");
  series->add_option("--latents", sw.latents)->required();
  series->add_option("--directions", sw.directions)->required();
  series->add_option("--rank", sw.rank)->capture_default_str();
  series->add_option("--alpha-min", sw.alpha_min)->capture_default_str();
  series->add_option("--alpha-max", sw.alpha_max)->capture_default_str();
  series->add_option("--points", sw.points)->capture_default_str();
  series->add_option("--t-low", sw.t_low)->capture_default_str();
  series->add_option("--t-high", sw.t_high)->capture_default_str();
  series->add_option("--total-steps", sw.total_steps);
  series->add_option("--sample", sw.sample)->capture_default_str();
  series->add_option("--out", sw.out)->required();

  auto* fixture = app.add_subcommand("fixture", "Generate synthetic inputs");
  fixture->require_subcommand(1);
  WeightsFixtureOptions fw;
  auto* fweights = fixture->add_subcommand("weights", "Write a weight container");
  fweights->add_option("--kind", fw.kind, "gaussian|identity|diag|shift")->capture_default_str();
  fweights->add_option("--d", fw.d)->capture_default_str();
  fweights->add_option("--diag", fw.diag, "Diagonal of W_Q for --kind diag")->delimiter(',');
  fweights->add_option("--layer", fw.layer)->capture_default_str();
  fweights->add_option("--dtype", fw.dtype)->capture_default_str();
  fweights->add_option("--seed", fw.seed)->capture_default_str();
  fweights->add_option("--out", fw.out)->required();
  LatentsFixtureOptions fl;
  auto* flatents = fixture->add_subcommand("latents", "Write an AELT latent file");
  flatents->add_option("--kind", fl.kind, "gaussian|zero|basis")->capture_default_str();
  flatents->add_option("--samples", fl.samples)->capture_default_str();
  flatents->add_option("--tokens", fl.tokens)->capture_default_str();
  flatents->add_option("--d", fl.d)->capture_default_str();
  flatents->add_option("--timesteps", fl.timesteps, "Cycled across samples")->delimiter(',');
  flatents->add_option("--total-steps", fl.total_steps)->capture_default_str();
  flatents->add_option("--dtype", fl.dtype)->capture_default_str();
  flatents->add_option("--seed", fl.seed)->capture_default_str();
  flatents->add_option("--out", fl.out)->required();

  std::vector<const char*> cargv;
  for (const auto& a : argv) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error[E_USAGE]: " << msg << "\n";
    return kExitUsage;
  }

  try {
    if (extract->parsed()) {
      cmd_extract(ex, out);
    } else if (validate->parsed()) {
      return cmd_validate(va, out);
    } else if (whiten->parsed()) {
      cmd_whiten_report(wh, out);
    } else if (edit->parsed()) {
      cmd_edit(ed, out);
    } else if (series->parsed()) {
      cmd_sweep_series(sw, out);
    } else if (fweights->parsed()) {
      cmd_fixture_weights(fw, out);
    } else if (flatents->parsed()) {
      cmd_fixture_latents(fl, out);
    }
  } catch (const Error& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error[" << e.code() << "]: " << msg << "\n";
    switch (e.kind()) {
      case ErrorKind::Format:
      case ErrorKind::Dimension:
        return kExitFormat;
      case ErrorKind::Validation:
        return kExitValidation;
      case ErrorKind::Usage:
      case ErrorKind::Domain:
        return kExitUsage;
    }
  } catch (const std::exception& e) {
    err << "error[E_INTERNAL]: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}

}  // namespace attnedit::cli
