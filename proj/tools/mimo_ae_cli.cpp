// SPDX-License-Identifier: Apache-2.0
//
// mimo_ae train | sweep | report | selftest
//
// Exit codes: 0 success, 1 failed check, 2 usage, configuration or I/O error.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "mimo_ae/evaluation.hpp"
#include "mimo_ae/fronthaul.hpp"
#include "mimo_ae/run_config.hpp"
#include "mimo_ae/selftest.hpp"

namespace fs = std::filesystem;
using namespace mimo_ae;

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool paper_scale = false;
  std::optional<std::string> scenarios, ndiv, snr;
  std::optional<int> blocks, epochs, threads;
};

RunConfig resolve(const Overrides& o) {
  RunConfig rc;
  if (!o.config.empty()) rc = load_run_config(fs::path(o.config), rc);
  if (o.paper_scale) rc.apply_paper_scale();
  if (o.seed) rc.system.master_seed = *o.seed;
  if (o.scenarios) rc.scenarios = parse_scenario_list(*o.scenarios);
  if (o.ndiv) rc.ndiv = parse_int_list(*o.ndiv);
  if (o.snr) rc.snr_db = parse_double_list(*o.snr);
  if (o.blocks) rc.blocks = *o.blocks;
  if (o.epochs) rc.ae.hyper.max_epochs = *o.epochs;
  if (o.threads) rc.threads = *o.threads;
  rc.validate();
  return rc;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

fs::path with_suffix(const fs::path& csv, const std::string& suffix) {
  fs::path p = csv;
  p.replace_extension();
  return p.string() + suffix;
}

int cmd_train(const RunConfig& rc, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " +
                                   ec.message());
  const SystemConfig& sys = rc.system;
  std::ostringstream manifest;
  manifest << "block_id,n_div,file,training_snr_db,epochs,stop,final_loss\n";
  for (int b = 0; b < rc.blocks; ++b) {
    const auto id = static_cast<std::uint64_t>(b);
    const CoherenceBlock block =
        build_coherence_block(sys, rc.ae.fixed_training_snr_db, id);
    std::vector<WireFrame> frames;
    char name[32];
    std::snprintf(name, sizeof name, "block_%06d.maef", b);
    for (int d : rc.ndiv) {
      AutoencoderConfig hyper = rc.ae.hyper;
      hyper.input_dim = 2 * sys.M;
      hyper.n_div = d;
      const RMatrix X = rotation_augmented(
          block.rx.entries.leftCols(sys.n_cbw), rc.ae.rotations);
      Rng rng(substream_seed(sys.master_seed, id, StreamTag::kAeInit,
                             static_cast<std::uint64_t>(d)));
      TrainingReport rep;
      const auto [enc, dec] = split(train(X, hyper, rng, &rep));
      frames.push_back(to_frame(enc, id, sys.M, d));
      frames.push_back(to_frame(dec, id, sys.M, d));
      char loss[32];
      std::snprintf(loss, sizeof loss, "%.10g", rep.final_loss);
      manifest << id << ',' << d << ',' << name << ','
               << rc.ae.fixed_training_snr_db << ',' << rep.epochs << ','
               << to_string(rep.stop) << ',' << loss << '\n';
    }
    write_frames(out_dir / name, frames);
  }
  write_text(out_dir / "manifest.csv", manifest.str());
  std::cout << "trained " << rc.blocks * static_cast<int>(rc.ndiv.size())
            << " model(s) into " << out_dir.string() << '\n';
  return kOk;
}

int cmd_sweep(const RunConfig& rc, const fs::path& out_csv, bool plot) {
  const auto records = sweep(rc.to_sweep());
  if (out_csv.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(out_csv.parent_path(), ec);
  }
  emit_csv(records, out_csv);
  const std::string report = emit_report(records);
  write_text(with_suffix(out_csv, ".report.txt"), report);
  if (plot) emit_plot_csv(records, with_suffix(out_csv, ".plot.csv"));
  std::cout << report;
  return kOk;
}

int cmd_report(const fs::path& csv, bool strict) {
  const auto records = read_csv(csv);
  std::cout << emit_report(records);
  if (strict)
    for (const auto& r : evaluate_remarks(records))
      if (r.evaluated && !r.pass) return kCheckFailed;
  return kOk;
}

int cmd_selftest(std::uint64_t seed) {
  bool ok = true;
  for (const auto& r : run_selftest(seed)) {
    std::cout << (r.pass ? "PASS  " : "FAIL  ") << r.name << "  (" << r.detail
              << ")\n";
    ok = ok && r.pass;
  }
  return ok ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Autoencoder fronthaul compression for massive MIMO uplink"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  std::string out;
  app.add_option("--config", o.config, "INI configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "master seed");
  app.add_flag("--paper-scale", o.paper_scale, "M=512, K=40");
  app.add_option("--out", out, "output path");
  app.add_option("--scenarios", o.scenarios,
                 "comma list of full_bw, ae, array_reduced, admm");
  app.add_option("--ndiv", o.ndiv, "comma list of reduction factors");
  app.add_option("--snr", o.snr, "comma list of SNR points in dB");
  app.add_option("--blocks", o.blocks, "coherence blocks per SNR point");
  app.add_option("--epochs", o.epochs, "autoencoder epoch cap");
  app.add_option("--threads", o.threads, "worker threads (0: default)");

  auto* train_cmd =
      app.add_subcommand("train", "train one model per block and n_div");
  auto* sweep_cmd = app.add_subcommand("sweep", "EVM vs SNR sweep");
  bool plot = false;
  sweep_cmd->add_flag("--plot", plot, "also write <out>.plot.csv");
  auto* report_cmd = app.add_subcommand("report", "summarize a sweep CSV");
  std::string report_csv;
  bool strict = false;
  report_cmd->add_option("csv", report_csv, "sweep CSV")->required();
  report_cmd->add_flag("--strict", strict, "exit 1 when a remark fails");
  auto* selftest_cmd = app.add_subcommand("selftest", "fast invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*selftest_cmd) return cmd_selftest(o.seed.value_or(1));
    if (*report_cmd) return cmd_report(report_csv, strict);
    const RunConfig rc = resolve(o);
    if (*train_cmd) return cmd_train(rc, out.empty() ? "models" : out);
    if (*sweep_cmd) return cmd_sweep(rc, out.empty() ? "sweep.csv" : out, plot);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
