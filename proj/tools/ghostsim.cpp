// Command-line front end for the ghost-imaging simulation and
// reconstruction toolkit: simulate correlated frame stacks, reconstruct
// transmission maps, measure SNR/NRF, sweep parameters and fit the channel
// efficiency against measured curves.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ghostsim/analytic.hpp"
#include "ghostsim/calib.hpp"
#include "ghostsim/estimators.hpp"
#include "ghostsim/experiment.hpp"
#include "ghostsim/io.hpp"
#include "ghostsim/parallel.hpp"
#include "ghostsim/rng.hpp"
#include "ghostsim/scene.hpp"
#include "ghostsim/simulator.hpp"

namespace {

using namespace ghostsim;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitNoConvergence = 4;

SourceKind parse_kind(const std::string& s) {
  if (s == "twin") return SourceKind::Twin;
  if (s == "thermal") return SourceKind::Thermal;
  throw std::invalid_argument("--kind must be 'twin' or 'thermal'");
}

Protocol parse_protocol(const std::string& s) {
  if (s == "gi") return Protocol::GI;
  if (s == "dgi") return Protocol::DGI;
  if (s == "sk") return Protocol::Sk;
  if (s == "odgi") return Protocol::ODGI;
  throw std::invalid_argument("--protocol must be gi, dgi, sk or odgi");
}

std::string protocol_name(Protocol p) {
  switch (p) {
    case Protocol::GI: return "gi";
    case Protocol::DGI: return "dgi";
    case Protocol::Sk: return "sk";
    case Protocol::ODGI: return "odgi";
  }
  return "?";
}

/// Scene mini-grammar:
///   binary:WxH:eps=E:tplus=A:tminus=B:layout=left|rectangle
///   mask:path.pgm:tplus=A:tminus=B
TransmissionMap parse_scene_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::string token;
  std::stringstream in(spec);
  while (std::getline(in, token, ':')) parts.push_back(token);
  if (parts.empty()) throw std::invalid_argument("empty scene spec");

  auto value_of = [&](const std::string& key) -> std::optional<std::string> {
    for (std::size_t i = 1; i < parts.size(); ++i) {
      if (parts[i].rfind(key + "=", 0) == 0) {
        return parts[i].substr(key.size() + 1);
      }
    }
    return std::nullopt;
  };
  auto num_of = [&](const std::string& key, double fallback) {
    const auto v = value_of(key);
    return v ? std::stod(*v) : fallback;
  };

  if (parts[0] == "binary") {
    if (parts.size() < 2) {
      throw std::invalid_argument("binary scene needs WxH, e.g. binary:28x34");
    }
    int width = 0;
    int height = 0;
    if (std::sscanf(parts[1].c_str(), "%dx%d", &width, &height) != 2) {
      throw std::invalid_argument("bad scene dimensions: " + parts[1]);
    }
    const double eps = num_of("eps", 0.5);
    const double tplus = num_of("tplus", 1.0);
    const double tminus = num_of("tminus", 0.0);
    SceneLayout layout = SceneLayout::LeftBlock;
    if (const auto l = value_of("layout")) {
      if (*l == "left") {
        layout = SceneLayout::LeftBlock;
      } else if (*l == "rectangle" || *l == "rect") {
        layout = SceneLayout::Rectangle;
      } else {
        throw std::invalid_argument("unknown layout: " + *l);
      }
    }
    return make_binary_scene(width, height, eps, tplus, tminus, layout);
  }
  if (parts[0] == "mask") {
    if (parts.size() < 2) {
      throw std::invalid_argument("mask scene needs a path, e.g. mask:obj.pgm");
    }
    return scene_from_mask(parts[1], num_of("tplus", 1.0),
                           num_of("tminus", 0.0));
  }
  throw std::invalid_argument("scene spec must start with 'binary' or 'mask'");
}

std::vector<Eigen::Index> mask_from_pgm(const std::string& path,
                                        int expect_pixels) {
  const io::PgmImage img = io::read_pgm(path);
  if (expect_pixels >= 0 && img.width * img.height != expect_pixels) {
    throw std::invalid_argument("mask size does not match image: " + path);
  }
  std::vector<Eigen::Index> mask;
  const int threshold = img.maxval / 2;
  for (std::size_t i = 0; i < img.samples.size(); ++i) {
    if (img.samples[i] > threshold) mask.push_back(static_cast<Eigen::Index>(i));
  }
  return mask;
}

void write_mask_pgm(const std::string& path,
                    const std::vector<Eigen::Index>& cells, int width,
                    int height) {
  std::vector<std::uint16_t> samples(
      static_cast<std::size_t>(width) * height, 0);
  for (const Eigen::Index j : cells) {
    samples[static_cast<std::size_t>(j)] = 65535;
  }
  io::write_pgm16(path, samples, width, height);
}

io::ImageFormat format_from_path(const std::string& path) {
  const auto ext = std::filesystem::path(path).extension().string();
  if (ext == ".pgm") return io::ImageFormat::Pgm16;
  if (ext == ".csv") return io::ImageFormat::Csv;
  throw std::invalid_argument("image output must end in .pgm or .csv: " + path);
}

struct SourceFlags {
  std::string kind = "twin";
  double n2 = 0.0;
  double modes = 0.0;
  double eta = 0.0;
  double delta_el = 0.0;

  void attach(CLI::App* cmd, bool required = true) {
    cmd->add_option("--kind", kind, "Source kind: twin | thermal")
        ->check(CLI::IsMember({"twin", "thermal"}));
    auto* o1 = cmd->add_option("--n2", n2,
                               "Mean detected photons per reference pixel "
                               "per frame");
    auto* o2 = cmd->add_option("--modes", modes,
                               "Spatio-temporal modes per pixel per frame");
    auto* o3 = cmd->add_option("--eta", eta, "Channel efficiency in (0, 1]");
    cmd->add_option("--delta-el", delta_el,
                    "Electronic noise rms (electrons/pixel/frame)");
    if (required) {
      o1->required();
      o2->required();
      o3->required();
    }
  }

  SourceParams params() const {
    SourceParams p;
    p.kind = parse_kind(kind);
    p.n2 = n2;
    p.modes = modes;
    p.eta = eta;
    p.delta_el = delta_el;
    p.validate();
    return p;
  }
};

int cmd_simulate(const SourceFlags& src, const std::string& scene_spec,
                 std::int64_t frames, std::uint64_t seed,
                 const std::string& out_probe, const std::string& out_ref,
                 const std::string& out_scene, const std::string& out_mask_plus,
                 const std::string& out_mask_minus, int threads) {
  const SourceParams params = src.params();
  const TransmissionMap scene = parse_scene_spec(scene_spec);
  const SceneStats stats = scene_stats(scene);

  const auto [probe, reference] =
      simulate_pair(params, scene, frames, seed, threads);
  io::write_stack(out_probe, probe);
  io::write_stack(out_ref, reference);
  if (!out_scene.empty()) {
    io::export_image(out_scene, scene.t, scene.width, scene.height,
                     io::ImageFormat::Pgm16);
  }
  if (!out_mask_plus.empty()) {
    write_mask_pgm(out_mask_plus, plus_cells(scene), scene.width,
                   scene.height);
  }
  if (!out_mask_minus.empty()) {
    write_mask_pgm(out_mask_minus, minus_cells(scene), scene.width,
                   scene.height);
  }
  std::printf("scene %dx%d  t_bar=%.6f  t2_bar=%.6f", scene.width,
              scene.height, stats.t_bar, stats.t2_bar);
  if (stats.binary) {
    std::printf("  epsilon=%.6f (realized)  t_plus=%.4f  t_minus=%.4f",
                stats.epsilon, stats.t_plus, stats.t_minus);
  }
  std::printf("\nwrote %s and %s (%lld frames)\n", out_probe.c_str(),
              out_ref.c_str(), static_cast<long long>(frames));
  return kExitOk;
}

int cmd_reconstruct(const std::string& protocol_name_in,
                    std::optional<double> k, const std::string& k_source,
                    const std::string& tiles, const std::string& probe_path,
                    const std::string& ref_path, const std::string& out,
                    const SourceFlags& src) {
  const Protocol protocol = parse_protocol(protocol_name_in);
  const io::ImageFormat format = format_from_path(out);
  const FrameStack probe = io::read_stack(probe_path);
  const FrameStack reference = io::read_stack(ref_path);

  std::optional<double> k_used = k;
  std::string k_source_used = "empirical";
  if (protocol == Protocol::Sk) {
    if (!k) throw std::invalid_argument("protocol sk requires --k");
    k_source_used = "fixed";
  } else if (protocol == Protocol::ODGI) {
    if (k) {
      k_source_used = "fixed";
    } else if (k_source == "analytic") {
      // Closed-form weight from calibrated (eta, delta_el, M); the photon
      // level and mean transmission are measured from the data itself.
      SourceParams params;
      params.kind = parse_kind(src.kind);
      params.eta = src.eta;
      params.modes = src.modes;
      params.delta_el = src.delta_el;
      params.n2 = reference.values.mean();
      params.validate();
      const double t_bar = probe.values.mean() / params.n2;
      k_used = analytic::k_opt(params, std::clamp(t_bar, 0.0, 1.0));
      k_source_used = "analytic";
    }
  } else if (protocol == Protocol::GI || protocol == Protocol::DGI) {
    k_used.reset();
  }

  int tile_rows = 1;
  int tile_cols = 1;
  if (!tiles.empty() &&
      std::sscanf(tiles.c_str(), "%dx%d", &tile_rows, &tile_cols) != 2) {
    throw std::invalid_argument("bad --tiles, expected RxC: " + tiles);
  }

  const Reconstruction recon =
      (tile_rows == 1 && tile_cols == 1)
          ? reconstruct(probe, reference, protocol, k_used)
          : tiled_reconstruct(probe, reference, protocol, tile_rows,
                              tile_cols, k_used);
  io::export_image(out, recon.values, recon.width, recon.height, format);

  json meta;
  meta["protocol"] = protocol_name(protocol);
  meta["k_source"] = k_source_used;
  meta["k_used"] = recon.k_used;
  meta["frames_used"] = recon.frames_used;
  meta["width"] = recon.width;
  meta["height"] = recon.height;
  meta["tiles"] = {recon.tile_rows, recon.tile_cols};
  meta["tile_k"] = recon.tile_k;
  std::ofstream(out + ".json") << meta.dump(2) << "\n";

  if (recon.tile_k.size() == 1) {
    std::printf("reconstructed %s (k=%s, k_source=%s) -> %s\n",
                protocol_name(protocol).c_str(),
                io::format_double(recon.k_used).c_str(),
                k_source_used.c_str(), out.c_str());
  } else {
    std::printf("reconstructed %s (%zu tiles, k_source=%s) -> %s\n",
                protocol_name(protocol).c_str(), recon.tile_k.size(),
                k_source_used.c_str(), out.c_str());
  }
  return kExitOk;
}

int cmd_snr(const std::string& recon_path, const std::string& mask_plus_path,
            const std::string& mask_minus_path, const std::string& table,
            const std::string& meta_path, const SourceFlags& src,
            double epsilon, double t_plus, double t_minus) {
  int width = 0;
  int height = 0;
  Reconstruction recon;
  recon.values = io::read_image_csv(recon_path, width, height);
  recon.width = width;
  recon.height = height;

  const auto mask_plus = mask_from_pgm(mask_plus_path, width * height);
  const auto mask_minus = mask_from_pgm(mask_minus_path, width * height);
  const SnrReport report = measure_snr(recon, mask_plus, mask_minus);

  std::printf("snr=%.6g%s  mean+=%.6g mean-=%.6g  var+=%.6g var-=%.6g  "
              "n+=%lld n-=%lld\n",
              report.snr,
              report.degenerate ? " (degenerate: zero variance)" : "",
              report.mean_plus, report.mean_minus, report.var_plus,
              report.var_minus, static_cast<long long>(report.n_plus),
              static_cast<long long>(report.n_minus));

  if (!table.empty()) {
    double frames = std::numeric_limits<double>::quiet_NaN();
    std::string protocol = "unknown";
    if (!meta_path.empty()) {
      json meta;
      std::ifstream in(meta_path);
      if (!in) {
        throw io::StackIoError(io::StackError::OpenFailed,
                               "cannot open " + meta_path);
      }
      in >> meta;
      frames = meta.value("frames_used", frames);
      protocol = meta.value("protocol", protocol);
    }
    std::vector<io::ResultRow> rows;
    if (std::filesystem::exists(table)) {
      rows = io::read_results_table(table);
    }
    io::ResultRow row;
    row.protocol = protocol;
    row.eta = src.eta;
    row.n2 = src.n2;
    row.modes = src.modes;
    row.delta_el = src.delta_el;
    row.n_pixels = static_cast<double>(width) * height;
    row.frames = frames;
    row.epsilon = epsilon;
    row.t_plus = t_plus;
    row.t_minus = t_minus;
    row.snr = report.snr;
    row.snr_err = 0.0;
    rows.push_back(row);
    io::write_results_table(table, rows);
    std::printf("appended to %s\n", table.c_str());
  }
  return kExitOk;
}

int cmd_nrf(const std::string& probe_path, const std::string& ref_path,
            const std::string& region_path) {
  const FrameStack probe = io::read_stack(probe_path);
  const FrameStack reference = io::read_stack(ref_path);
  const auto region = mask_from_pgm(region_path, probe.width * probe.height);
  const NrfReport report = measure_nrf(probe, reference, region);
  std::printf("nrf=%.6f +- %.6f over %lld pairs: %s\n", report.nrf,
              report.std_error, static_cast<long long>(report.pairs),
              report.nonclassical()
                  ? "non-classical correlation witnessed (nrf + 3 sigma < 1)"
                  : "no non-classicality witnessed");
  return kExitOk;
}

int cmd_sweep(const std::string& vary, const std::string& range,
              const std::string& protocols_csv, int seeds,
              std::uint64_t master_seed, const SourceFlags& src,
              const std::string& scene_spec, std::int64_t frames,
              const std::string& out, const std::string& k_source_name,
              int threads) {
  double lo = 0.0;
  double hi = 0.0;
  int n = 0;
  if (std::sscanf(range.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3 || n < 1) {
    throw std::invalid_argument("bad --range, expected a:b:n: " + range);
  }
  if (seeds < 1) throw std::invalid_argument("--seeds must be >= 1");
  std::vector<Protocol> protocols;
  {
    std::stringstream in(protocols_csv);
    std::string tok;
    while (std::getline(in, tok, ',')) protocols.push_back(parse_protocol(tok));
  }
  if (protocols.empty()) throw std::invalid_argument("no protocols given");
  const KSource k_source = k_source_name == "analytic" ? KSource::Analytic
                                                       : KSource::Empirical;

  const SourceParams base = src.params();
  const TransmissionMap base_scene = parse_scene_spec(scene_spec);
  const SceneStats base_stats = scene_stats(base_scene);
  if (!base_stats.binary) {
    throw std::invalid_argument("sweeps need a two-level scene");
  }

  std::vector<io::ResultRow> rows;
  for (int i = 0; i < n; ++i) {
    const double x = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    SourceParams params = base;
    TransmissionMap scene = base_scene;
    if (vary == "epsilon") {
      scene = make_binary_scene(base_scene.width, base_scene.height, x,
                                base_stats.t_plus, base_stats.t_minus);
    } else if (vary == "tminus") {
      scene = make_binary_scene(base_scene.width, base_scene.height,
                                base_stats.epsilon, base_stats.t_plus, x);
    } else {
      params.eta = x;
      params.validate();
    }
    const SceneStats stats = scene_stats(scene);
    const auto snr = snr_over_seeds(
        params, scene, frames,
        derive_seed(master_seed, static_cast<std::uint64_t>(i)), seeds,
        protocols, k_source, threads);
    for (std::size_t p = 0; p < protocols.size(); ++p) {
      const SampleSummary s = summarize(snr[p]);
      io::ResultRow row;
      row.protocol = protocol_name(protocols[p]);
      row.eta = params.eta;
      row.n2 = params.n2;
      row.modes = params.modes;
      row.delta_el = params.delta_el;
      row.n_pixels = static_cast<double>(scene.pixels());
      row.frames = static_cast<double>(frames);
      row.epsilon = stats.epsilon;
      row.t_plus = stats.t_plus;
      row.t_minus = stats.t_minus;
      row.snr = s.mean;
      row.snr_err = s.std_error;
      row.snr_analytic = analytic::snr(
          params, stats.epsilon, stats.t_plus, stats.t_minus,
          static_cast<double>(scene.pixels()), static_cast<double>(frames),
          protocols[p]);
      rows.push_back(row);
    }
    std::printf("point %d/%d (%s=%.6g) done\n", i + 1, n, vary.c_str(), x);
  }
  io::write_results_table(out, rows);
  std::printf("wrote %zu rows to %s\n", rows.size(), out.c_str());
  return kExitOk;
}

int cmd_fit(const std::string& data, const std::string& curve,
            const std::string& protocol_name_in, const std::string& kind,
            const std::vector<std::string>& fixes,
            const std::string& out_band) {
  const Protocol protocol = parse_protocol(protocol_name_in);
  CurveKind curve_kind;
  if (curve == "snr-vs-eps") {
    curve_kind = CurveKind::SnrVsEpsilon;
  } else if (curve == "snr-vs-tminus") {
    curve_kind = CurveKind::SnrVsTminus;
  } else {
    throw std::invalid_argument("--curve must be snr-vs-eps or snr-vs-tminus");
  }

  const auto all_rows = io::read_results_table(data);
  std::vector<io::ResultRow> rows;
  for (const auto& r : all_rows) {
    if (r.protocol == protocol_name_in) rows.push_back(r);
  }
  if (rows.size() < 3) {
    throw std::invalid_argument("need >= 3 data rows for protocol " +
                                protocol_name_in);
  }

  FitConfig config;
  config.kind = parse_kind(kind);
  config.protocol = protocol;
  config.curve = curve_kind;
  config.n2 = rows.front().n2;
  config.modes = rows.front().modes;
  config.delta_el = rows.front().delta_el;
  config.pixels = rows.front().n_pixels;
  config.frames = rows.front().frames;
  config.t_plus = rows.front().t_plus;
  config.t_minus = rows.front().t_minus;
  config.epsilon = rows.front().epsilon;
  for (const auto& fix : fixes) {
    const auto eq = fix.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--fix entries must be name=value: " + fix);
    }
    const std::string name = fix.substr(0, eq);
    const double value = std::stod(fix.substr(eq + 1));
    if (name == "n2") config.n2 = value;
    else if (name == "M") config.modes = value;
    else if (name == "delta_el") config.delta_el = value;
    else if (name == "N") config.pixels = value;
    else if (name == "H") config.frames = value;
    else if (name == "t_plus") config.t_plus = value;
    else if (name == "t_minus") config.t_minus = value;
    else if (name == "epsilon") config.epsilon = value;
    else throw std::invalid_argument("unknown --fix name: " + name);
  }

  std::vector<FitPoint> points;
  for (const auto& r : rows) {
    FitPoint p;
    p.x = curve_kind == CurveKind::SnrVsEpsilon ? r.epsilon : r.t_minus;
    p.snr = r.snr;
    p.sigma = r.snr_err;
    points.push_back(p);
  }

  const FitResult fit = fit_eta(points, config);
  std::printf("eta_hat=%.6f +- %.6f  residual=%.6g  points=%zu%s%s\n",
              fit.eta_hat, fit.std_error, fit.residual_sum, points.size(),
              fit.converged ? "" : "  [NOT CONVERGED]",
              fit.at_boundary ? "  [boundary fit]" : "");
  if (!out_band.empty()) {
    std::string buf = "x,snr_fit,band_low,band_high\n";
    for (const auto& row : fit.band) {
      buf += io::format_double(row[0]) + "," + io::format_double(row[1]) +
             "," + io::format_double(row[1] - row[2]) + "," +
             io::format_double(row[1] + row[2]) + "\n";
    }
    std::ofstream(out_band) << buf;
    std::printf("wrote 1-sigma band to %s\n", out_band.c_str());
  }
  return fit.converged ? kExitOk : kExitNoConvergence;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "ghostsim: simulation, reconstruction and validation toolkit for "
      "ghost imaging with twin-beam and split-thermal sources"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand(
      "simulate", "Generate a correlated probe/reference frame-stack pair");
  SourceFlags sim_src;
  sim_src.attach(sim);
  std::string sim_scene;
  std::int64_t sim_frames = 0;
  std::uint64_t sim_seed = 1;
  std::string sim_out_probe;
  std::string sim_out_ref;
  std::string sim_out_scene;
  std::string sim_out_mask_plus;
  std::string sim_out_mask_minus;
  int sim_threads = 0;
  sim->add_option("--scene", sim_scene,
                  "Scene spec: binary:WxH:eps=E:tplus=A:tminus=B:layout=left"
                  "|rectangle or mask:path.pgm:tplus=A:tminus=B")
      ->required();
  sim->add_option("--frames", sim_frames, "Number of frames H")->required();
  sim->add_option("--seed", sim_seed, "Master RNG seed");
  sim->add_option("--out-probe", sim_out_probe, "Probe stack output (.gfs)")
      ->required();
  sim->add_option("--out-ref", sim_out_ref, "Reference stack output (.gfs)")
      ->required();
  sim->add_option("--out-scene", sim_out_scene,
                  "Optional PGM export of the transmission map");
  sim->add_option("--out-mask-plus", sim_out_mask_plus,
                  "Optional PGM mask of the t_plus cells");
  sim->add_option("--out-mask-minus", sim_out_mask_minus,
                  "Optional PGM mask of the t_minus cells");
  sim->add_option("--threads", sim_threads,
                  "Worker threads (0 = auto, capped by GHOSTSIM_THREADS)");

  auto* rec = app.add_subcommand(
      "reconstruct", "Reconstruct an image from a simulated stack pair");
  std::string rec_protocol;
  double rec_k = 0.0;
  std::string rec_k_source = "empirical";
  std::string rec_tiles;
  std::string rec_probe;
  std::string rec_ref;
  std::string rec_out;
  SourceFlags rec_src;
  rec->add_option("--protocol", rec_protocol, "gi | dgi | sk | odgi")
      ->required();
  auto* rec_k_opt = rec->add_option(
      "--k", rec_k, "Bucket weight (required for sk, optional for odgi)");
  rec->add_option("--k-source", rec_k_source,
                  "odgi weight source: empirical (default) or analytic "
                  "(needs --eta, --modes, --delta-el)")
      ->check(CLI::IsMember({"empirical", "analytic"}));
  rec->add_option("--tiles", rec_tiles,
                  "Tile grid RxC; each tile reconstructed with its own "
                  "bucket");
  rec->add_option("--probe", rec_probe, "Probe stack (.gfs)")->required();
  rec->add_option("--ref", rec_ref, "Reference stack (.gfs)")->required();
  rec->add_option("--out", rec_out, "Output image (.csv raw or .pgm scaled)")
      ->required();
  rec_src.attach(rec, /*required=*/false);

  auto* snr = app.add_subcommand(
      "snr", "Measure the SNR of a reconstruction over t+/t- masks");
  std::string snr_recon;
  std::string snr_mask_plus;
  std::string snr_mask_minus;
  std::string snr_table;
  std::string snr_meta;
  SourceFlags snr_src;
  double snr_eps = std::numeric_limits<double>::quiet_NaN();
  double snr_tplus = std::numeric_limits<double>::quiet_NaN();
  double snr_tminus = std::numeric_limits<double>::quiet_NaN();
  snr->add_option("--recon", snr_recon, "Reconstruction CSV")->required();
  snr->add_option("--mask-plus", snr_mask_plus, "PGM mask of t_plus cells")
      ->required();
  snr->add_option("--mask-minus", snr_mask_minus, "PGM mask of t_minus cells")
      ->required();
  snr->add_option("--table", snr_table, "Append a row to this results CSV");
  snr->add_option("--meta", snr_meta,
                  "Reconstruction sidecar JSON (protocol, frames)");
  snr_src.attach(snr, /*required=*/false);
  snr->add_option("--epsilon", snr_eps, "Scene epsilon for the table row");
  snr->add_option("--t-plus", snr_tplus, "Scene t_plus for the table row");
  snr->add_option("--t-minus", snr_tminus, "Scene t_minus for the table row");

  auto* nrf = app.add_subcommand(
      "nrf", "Measure the noise reduction factor over a t=1 region");
  std::string nrf_probe;
  std::string nrf_ref;
  std::string nrf_region;
  nrf->add_option("--probe", nrf_probe, "Probe stack (.gfs)")->required();
  nrf->add_option("--ref", nrf_ref, "Reference stack (.gfs)")->required();
  nrf->add_option("--region", nrf_region, "PGM mask of the t=1 region")
      ->required();

  auto* sweep = app.add_subcommand(
      "sweep",
      "Simulate-reconstruct-measure over a parameter grid, with analytic "
      "overlay columns");
  std::string sweep_vary;
  std::string sweep_range;
  std::string sweep_protocols = "gi,dgi,odgi";
  int sweep_seeds = 10;
  std::uint64_t sweep_seed = 1;
  SourceFlags sweep_src;
  std::string sweep_scene;
  std::int64_t sweep_frames = 0;
  std::string sweep_out;
  std::string sweep_k_source = "empirical";
  int sweep_threads = 0;
  sweep->add_option("--vary", sweep_vary, "epsilon | tminus | eta")
      ->required()
      ->check(CLI::IsMember({"epsilon", "tminus", "eta"}));
  sweep->add_option("--range", sweep_range, "Grid a:b:n")->required();
  sweep->add_option("--protocols", sweep_protocols,
                    "Comma-separated protocols (default gi,dgi,odgi)");
  sweep->add_option("--seeds", sweep_seeds,
                    "Repetitions per grid point (std error from seed "
                    "resampling)");
  sweep->add_option("--seed", sweep_seed, "Master seed");
  sweep_src.attach(sweep);
  sweep->add_option("--scene", sweep_scene, "Base scene spec")->required();
  sweep->add_option("--frames", sweep_frames, "Frames per repetition")
      ->required();
  sweep->add_option("--out", sweep_out, "Results CSV")->required();
  sweep->add_option("--k-source", sweep_k_source,
                    "odgi weight source: empirical | analytic")
      ->check(CLI::IsMember({"empirical", "analytic"}));
  sweep->add_option("--threads", sweep_threads, "Worker threads (0 = auto)");

  auto* fit = app.add_subcommand(
      "fit", "Fit the channel efficiency eta to a measured SNR curve");
  std::string fit_data;
  std::string fit_curve;
  std::string fit_protocol;
  std::string fit_kind = "twin";
  std::vector<std::string> fit_fixes;
  std::string fit_band;
  fit->add_option("--data", fit_data, "Results CSV (sweep output)")
      ->required();
  fit->add_option("--curve", fit_curve, "snr-vs-eps | snr-vs-tminus")
      ->required();
  fit->add_option("--protocol", fit_protocol, "gi | dgi | odgi")->required();
  fit->add_option("--kind", fit_kind, "twin | thermal");
  fit->add_option("--fix", fit_fixes,
                  "Override fixed quantities, e.g. n2=1000,M=5e10,"
                  "delta_el=5,N=952,H=30000,t_plus=1,t_minus=0,epsilon=0.5")
      ->delimiter(',');
  fit->add_option("--out-band", fit_band, "CSV for the 1-sigma band");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (sim->parsed()) {
      return cmd_simulate(sim_src, sim_scene, sim_frames, sim_seed,
                          sim_out_probe, sim_out_ref, sim_out_scene,
                          sim_out_mask_plus, sim_out_mask_minus, sim_threads);
    }
    if (rec->parsed()) {
      std::optional<double> k;
      if (rec_k_opt->count() > 0) k = rec_k;
      return cmd_reconstruct(rec_protocol, k, rec_k_source, rec_tiles,
                             rec_probe, rec_ref, rec_out, rec_src);
    }
    if (snr->parsed()) {
      return cmd_snr(snr_recon, snr_mask_plus, snr_mask_minus, snr_table,
                     snr_meta, snr_src, snr_eps, snr_tplus, snr_tminus);
    }
    if (nrf->parsed()) return cmd_nrf(nrf_probe, nrf_ref, nrf_region);
    if (sweep->parsed()) {
      return cmd_sweep(sweep_vary, sweep_range, sweep_protocols, sweep_seeds,
                       sweep_seed, sweep_src, sweep_scene, sweep_frames,
                       sweep_out, sweep_k_source, sweep_threads);
    }
    if (fit->parsed()) {
      return cmd_fit(fit_data, fit_curve, fit_protocol, fit_kind, fit_fixes,
                     fit_band);
    }
  } catch (const io::StackIoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
