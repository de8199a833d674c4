// Command-line front end: experiment runs, superposition sweeps, one-shot NFT
// of a signal file, and report re-rendering. See docs/formats.md for the file
// formats this tool reads and writes.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "nftsim/analysis.hpp"
#include "nftsim/config.hpp"
#include "nftsim/experiment.hpp"
#include "nftsim/fiber.hpp"
#include "nftsim/io.hpp"
#include "nftsim/nft.hpp"

namespace fs = std::filesystem;
using namespace nftsim;

namespace {

std::vector<double> parse_range(const std::string& spec, const std::string& what) {
  // "min:max:step" or a single value
  const auto parts = io::split_list(spec, ':');
  if (parts.size() == 1) return {io::parse_double(parts[0], what)};
  if (parts.size() != 3) throw std::invalid_argument(what + ": expected value or min:max:step");
  const double lo = io::parse_double(parts[0], what);
  const double hi = io::parse_double(parts[1], what);
  const double step = io::parse_double(parts[2], what);
  if (!(step > 0.0) || hi < lo) throw std::invalid_argument(what + ": bad range");
  std::vector<double> out;
  for (double v = lo; v <= hi + 1e-12; v += step) out.push_back(v);
  return out;
}

int cmd_run(const std::string& config_path, const std::string& preset, std::uint64_t seed,
            bool seed_set, const std::string& out_dir, bool paper_scale, bool noiseless,
            bool quiet) {
  experiment::ExperimentConfig cfg;
  if (!config_path.empty()) {
    cfg = experiment::config_from_ini(io::parse_ini_file(config_path));
  } else {
    const auto p = experiment::preset_from_name(preset.empty() ? "sim2" : preset);
    cfg = paper_scale ? experiment::make_paper_scale(p) : experiment::make_preset(p);
  }
  if (seed_set) cfg.seed = seed;
  if (paper_scale) cfg.paper_scale = true;
  if (noiseless) cfg.noise_on = false;

  fs::create_directories(out_dir);
  auto progress = quiet ? std::function<void(const std::string&)>{}
                        : [](const std::string& m) { std::cerr << "  " << m << "\n"; };
  experiment::RunReport report = experiment::run_experiment(cfg, progress);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";

  experiment::write_report_csv(report, out_dir + "/report.csv");
  experiment::write_collision_csv(report.collisions, out_dir + "/collisions.csv");
  const std::string text = experiment::render_report(report);
  std::ofstream(out_dir + "/report.txt") << text;
  std::cout << text;
  return 0;
}

int cmd_sweep(const std::string& kind, const std::string& dk_spec, const std::string& dt_spec,
              const std::string& dphi_spec, bool all_phases, const std::string& out_dir) {
  fs::create_directories(out_dir);
  analysis::ClassifierOptions opt;
  if (kind == "two-eigen") {
    const auto dks = parse_range(dk_spec.empty() ? "0.5:1.0:0.05" : dk_spec, "--dk");
    const auto dts = parse_range(dt_spec.empty() ? "0.6" : dt_spec, "--dt");
    const auto dps = parse_range(dphi_spec.empty() ? "0:337.5:22.5" : dphi_spec, "--dphi");
    const auto points = analysis::sweep_two(dks, dts, dps, opt);
    io::CsvWriter csv(out_dir + "/two_eigen.csv",
                      {"delta_k", "delta_t_fwhm", "delta_phi_deg", "outcome",
                       "continuum_energy_fraction", "post_eigenvalues"});
    for (const auto& p : points) {
      std::string eig;
      for (const auto& l : p.label.post_eigenvalues) {
        if (!eig.empty()) eig += ' ';
        eig += io::fmt_num(l.real()) + (l.imag() >= 0 ? "+" : "") + io::fmt_num(l.imag()) + "j";
      }
      csv.write_row({io::fmt_num(p.delta_k), io::fmt_num(p.delta_t_fwhm),
                     io::fmt_num(p.delta_phi_deg), analysis::outcome_name(p.label.kind),
                     io::fmt_num(p.label.continuum_energy_fraction), eig});
    }
    std::cout << "wrote " << out_dir << "/two_eigen.csv (" << points.size() << " rows)\n";
    return 0;
  }
  if (kind == "four-eigen") {
    const auto dts = parse_range(dt_spec.empty() ? "0.05:2.0:0.05" : dt_spec, "--dt");
    std::vector<std::vector<double>> phase_sets;
    if (all_phases) {
      phase_sets = analysis::qpsk_phase_combinations();
    } else {
      const double dphi = dphi_spec.empty() ? 0.0 : io::parse_double(dphi_spec, "--dphi");
      phase_sets = {{0.0, dphi, 2 * dphi, 3 * dphi}};
    }
    const auto rows = analysis::sweep_four(dts, phase_sets, opt);
    io::CsvWriter csv(out_dir + "/four_eigen.csv",
                      {"delta_t_fwhm", "phi0", "phi1", "phi2", "phi3", "n_eigenvalues",
                       "post_eigenvalues"});
    for (const auto& r : rows) {
      std::string eig;
      for (const auto& l : r.post_eigenvalues) {
        if (!eig.empty()) eig += ' ';
        eig += io::fmt_num(l.real()) + (l.imag() >= 0 ? "+" : "") + io::fmt_num(l.imag()) + "j";
      }
      csv.write_row({io::fmt_num(r.delta_t_fwhm), io::fmt_num(r.phases_deg[0]),
                     io::fmt_num(r.phases_deg[1]), io::fmt_num(r.phases_deg[2]),
                     io::fmt_num(r.phases_deg[3]), std::to_string(r.post_eigenvalues.size()), eig});
    }
    std::cout << "wrote " << out_dir << "/four_eigen.csv (" << rows.size() << " rows)\n";
    return 0;
  }
  std::cerr << "unknown sweep kind '" << kind << "' (two-eigen|four-eigen)\n";
  return 1;
}

int cmd_nft(const std::string& in_path, double t0_ps, double p0_w, int n_xi,
            const std::string& out_path) {
  fiber::SignalFile sf = fiber::read_signal_file(in_path);
  SampledField q = sf.field;
  if (t0_ps > 0.0 && p0_w > 0.0) {
    norm::NormScales s;
    s.t0_ps = t0_ps;
    s.p0_w = p0_w;
    q = norm::to_normalized(q, s);
  }
  nft::SearchRegion region;
  region.im_max = 4.0;
  auto eigs = nft::find_eigenvalues(q, std::span<const cplx>{}, region);
  std::cout << "# " << in_path << ": span " << sf.span_index << ", center "
            << io::fmt_num(sf.center_frequency_ghz) << " GHz, " << q.size() << " samples\n";
  std::cout << "# discrete eigenvalues (" << eigs.size() << ")\n";
  for (const auto& d : eigs) {
    std::cout << "lambda = " << io::fmt_num(d.lambda.real()) << " + "
              << io::fmt_num(d.lambda.imag()) << "j   |b| = " << io::fmt_num(std::abs(d.b))
              << "  arg b = " << io::fmt_num(std::arg(d.b))
              << "  q~ = " << io::fmt_num(std::abs(d.q_tilde())) << "\n";
  }
  nft::NftSpectrum spec;
  spec.discrete = eigs;
  spec.continuous = nft::continuous_spectrum(q, nft::default_xi_grid(q, n_xi));
  const auto e = nft::energy_decomposition(q, spec);
  std::cout << "# energy: total " << io::fmt_num(e.total) << ", discrete "
            << io::fmt_num(e.discrete) << ", continuous " << io::fmt_num(e.continuous) << "\n";
  if (!out_path.empty()) {
    io::CsvWriter csv(out_path, {"xi", "qhat_re", "qhat_im"});
    for (std::size_t i = 0; i < spec.continuous->xi.size(); ++i)
      csv.write_row({io::fmt_num(spec.continuous->xi[i]),
                     io::fmt_num(spec.continuous->q_hat[i].real()),
                     io::fmt_num(spec.continuous->q_hat[i].imag())});
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

int cmd_report(const std::string& in_path) {
  std::ifstream f(in_path);
  if (!f) {
    std::cerr << "cannot open " << in_path << "\n";
    return 1;
  }
  std::string line;
  std::getline(f, line);  // header
  std::cout << "  distance_km  ch   equalizer        ber          SD-FEC  HD-FEC\n";
  while (std::getline(f, line)) {
    const auto cells = io::split_list(line);
    if (cells.size() < 11) continue;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "  %11s  %3s  %-15s  %-11s  %-6s  %-6s\n", cells[0].c_str(),
                  cells[1].c_str(), cells[2].c_str(), cells[5].c_str(),
                  cells[9] == "1" ? "pass" : "FAIL", cells[10] == "1" ? "pass" : "FAIL");
    std::cout << buf;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DWDM soliton transmission simulator based on the nonlinear Fourier transform"};
  app.require_subcommand(1);

  // run
  std::string config_path, preset, out_dir = "out";
  std::uint64_t seed = 1;
  bool paper_scale = false, noiseless = false, quiet = false;
  auto* run = app.add_subcommand("run", "run a transmission experiment");
  run->add_option("--config", config_path, "INI config file");
  run->add_option("--preset", preset, "sim1|sim2|sim3");
  auto* seed_opt = run->add_option("--seed", seed, "experiment seed");
  run->add_option("--out", out_dir, "output directory");
  run->add_flag("--paper-scale", paper_scale, "320k bits, taps every span to 3000 km");
  run->add_flag("--noiseless", noiseless, "disable all ASE noise");
  run->add_flag("--quiet", quiet, "suppress progress output");

  // sweep
  std::string kind, dk_spec, dt_spec, dphi_spec, sweep_out = "out";
  bool all_phases = false;
  auto* sweep = app.add_subcommand("sweep", "superposition analysis sweeps");
  sweep->add_option("--kind", kind, "two-eigen|four-eigen")->required();
  sweep->add_option("--dk", dk_spec, "delta_k value or min:max:step");
  sweep->add_option("--dt", dt_spec, "delta_T/T_FWHM value or min:max:step");
  sweep->add_option("--dphi", dphi_spec, "phase difference (deg), value or range");
  sweep->add_flag("--all-phases", all_phases, "all 256 QPSK phase combinations (four-eigen)");
  sweep->add_option("--out", sweep_out, "output directory");

  // nft
  std::string nft_in, nft_out;
  double t0_ps = 0.0, p0_w = 0.0;
  int n_xi = 512;
  auto* nftc = app.add_subcommand("nft", "transform a raw signal file");
  nftc->add_option("--in", nft_in, "signal file (see docs/formats.md)")->required();
  nftc->add_option("--t0-ps", t0_ps, "normalize times by T0 before the transform");
  nftc->add_option("--p0-w", p0_w, "normalize amplitudes by sqrt(P0)");
  nftc->add_option("--xi", n_xi, "continuous-spectrum grid size");
  nftc->add_option("--out", nft_out, "continuous-spectrum CSV path");

  // report
  std::string report_in;
  auto* rep = app.add_subcommand("report", "re-render a report CSV");
  rep->add_option("--in", report_in, "report.csv path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run)
      return cmd_run(config_path, preset, seed, seed_opt->count() > 0, out_dir, paper_scale,
                     noiseless, quiet);
    if (*sweep) return cmd_sweep(kind, dk_spec, dt_spec, dphi_spec, all_phases, sweep_out);
    if (*nftc) return cmd_nft(nft_in, t0_ps, p0_w, n_xi, nft_out);
    if (*rep) return cmd_report(report_in);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
