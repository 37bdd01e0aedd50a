// qfb: weak-measurement feedback-control simulator.
//
//   qfb protocol [--theta T] [--p P] [--scheme dn|helstrom|optimal|all | --chi C [--eta E]] [--shots N --seed S]
//   qfb sweep [grid flags] [--tolerance TOL] [--threads N] [--summary-out F] [--crossover-out F]
//   qfb experiment-model [--cos-chi LIST | --scan N] [--rh R] [--rv R] [--reoptimize-eta]
//   qfb tomography --seed S [--rate R] [--duration T] [--resamples N] [--model ideal|ppbs] [--clip]
//
// Common: --format csv|json, --out FILE (relative paths resolve against
// $QFB_OUTPUT_DIR), --degrees.  Exit codes: 0 ok, 2 invalid input, 3 runtime.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qfb/cli.hpp"

namespace {

namespace fs = std::filesystem;
using namespace qfb;
using namespace qfb::cli;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct OutputOptions {
  std::string format = "csv";
  std::string out;
  bool degrees = false;
};

double angle(double value, bool degrees) { return degrees ? value * std::numbers::pi / 180.0 : value; }

fs::path resolve_output(const std::string& path) {
  fs::path p(path);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("QFB_OUTPUT_DIR"); dir && *dir) return fs::path(dir) / p;
  }
  return p;
}

std::string render(const ResultEnvelope& env, const std::string& format) {
  std::ostringstream os;
  if (format == "json") {
    report::write_json(env, os);
  } else {
    report::write_csv(env, os);
  }
  return os.str();
}

/// Pending writes are collected first so a failure leaves no partial output.
struct Emitter {
  std::vector<std::pair<std::optional<fs::path>, std::string>> files;

  void add(const std::string& path, std::string contents) {
    files.emplace_back(path.empty() ? std::nullopt : std::optional<fs::path>(resolve_output(path)),
                       std::move(contents));
  }

  void flush() const {
    for (const auto& [path, contents] : files) {
      if (path) {
        report::write_atomically(*path, contents);
      } else {
        std::cout << contents;
      }
    }
    std::cout.flush();
  }
};

void add_common(CLI::App* cmd, OutputOptions& out) {
  cmd->add_option("--format", out.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--out", out.out, "Output file (stdout if omitted)");
  cmd->add_flag("--degrees", out.degrees, "Interpret angle arguments in degrees");
}

std::string default_sidecar(const std::string& out, const char* suffix) { return out.empty() ? "" : out + suffix; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak-measurement feedback control of a qubit"};
  app.set_version_flag("--version", std::string(report::kToolVersion));
  app.require_subcommand(1);

  // protocol
  OutputOptions proto_out;
  double proto_theta = kExperimentPoint.theta;
  double proto_p = kExperimentPoint.p;
  std::string proto_scheme;
  std::optional<double> proto_chi;
  std::optional<double> proto_eta;
  std::optional<std::uint64_t> proto_shots;
  std::optional<std::uint64_t> proto_seed;
  CLI::App* protocol = app.add_subcommand("protocol", "Exact (and optional Monte-Carlo) protocol evaluation");
  add_common(protocol, proto_out);
  protocol->add_option("--theta", proto_theta, "Input-state angle theta");
  protocol->add_option("--p", proto_p, "Phase-flip probability");
  auto* scheme_opt = protocol->add_option("--scheme", proto_scheme, "Preset scheme")
                         ->check(CLI::IsMember({"dn", "helstrom", "optimal", "all"}));
  auto* chi_opt_flag = protocol->add_option("--chi", proto_chi, "Measurement angle chi");
  protocol->add_option("--eta", proto_eta, "Correction angle eta (default: optimal for chi)")->needs(chi_opt_flag);
  scheme_opt->excludes(chi_opt_flag);
  protocol->add_option("--shots", proto_shots, "Monte-Carlo shots");
  protocol->add_option("--seed", proto_seed, "Random seed");

  // sweep
  OutputOptions sweep_out;
  SweepConfig sweep_cfg;
  std::string summary_out;
  std::string crossover_out;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Closed-form optima over the (theta, p) plane");
  add_common(sweep_cmd, sweep_out);
  sweep_cmd->add_option("--theta-min", sweep_cfg.grid.theta_min);
  sweep_cmd->add_option("--theta-max", sweep_cfg.grid.theta_max);
  sweep_cmd->add_option("--n-theta", sweep_cfg.grid.n_theta);
  sweep_cmd->add_option("--p-min", sweep_cfg.grid.p_min);
  sweep_cmd->add_option("--p-max", sweep_cfg.grid.p_max);
  sweep_cmd->add_option("--n-p", sweep_cfg.grid.n_p);
  sweep_cmd->add_option("--tolerance", sweep_cfg.tolerance, "Refinement tolerance for the maximum search");
  sweep_cmd->add_option("--threads", sweep_cfg.threads, "Worker threads (0: all cores)");
  sweep_cmd->add_option("--crossover-samples", sweep_cfg.crossover_samples);
  sweep_cmd->add_option("--summary-out", summary_out, "Summary JSON (default <out>.summary.json)");
  sweep_cmd->add_option("--crossover-out", crossover_out, "Crossover CSV/JSON");

  // experiment-model
  OutputOptions model_out;
  ModelConfig model_cfg;
  std::vector<double> cos_chi;
  std::optional<std::size_t> scan;
  bool reoptimize = false;
  CLI::App* model = app.add_subcommand("experiment-model", "Imperfect photonic gate against the ideal protocol");
  add_common(model, model_out);
  model->add_option("--theta", model_cfg.theta);
  model->add_option("--p", model_cfg.p);
  auto* cos_opt = model->add_option("--cos-chi", cos_chi, "Measurement strengths cos(chi)")->delimiter(',');
  model->add_option("--scan", scan, "Evenly spaced strengths over [0, 1]")->excludes(cos_opt);
  model->add_option("--rh", model_cfg.ppbs.r_h, "PPBS reflectivity for H");
  model->add_option("--rv", model_cfg.ppbs.r_v, "PPBS reflectivity for V");
  model->add_flag("--reoptimize-eta", reoptimize, "Re-optimize eta against the imperfect gate");

  // tomography
  OutputOptions tomo_out;
  TomographyConfig tomo_cfg;
  std::string tomo_scheme = "optimal";
  std::optional<double> tomo_chi;
  std::optional<double> tomo_eta;
  std::string tomo_model = "ideal";
  std::string counts_out;
  CLI::App* tomo = app.add_subcommand("tomography", "Simulated tomography of the protocol output");
  add_common(tomo, tomo_out);
  tomo->add_option("--theta", tomo_cfg.theta);
  tomo->add_option("--p", tomo_cfg.p);
  auto* tomo_scheme_opt =
      tomo->add_option("--scheme", tomo_scheme)->check(CLI::IsMember({"dn", "helstrom", "optimal"}));
  auto* tomo_chi_opt = tomo->add_option("--chi", tomo_chi);
  tomo->add_option("--eta", tomo_eta)->needs(tomo_chi_opt);
  tomo_scheme_opt->excludes(tomo_chi_opt);
  tomo->add_option("--rate", tomo_cfg.rate, "Coincidences per second");
  tomo->add_option("--duration", tomo_cfg.duration, "Integration time per setting and ensemble member [s]");
  tomo->add_option("--resamples", tomo_cfg.resamples, "Bootstrap resamples");
  tomo->add_option("--seed", tomo_cfg.seed, "Random seed");
  tomo->add_option("--model", tomo_model)->check(CLI::IsMember({"ideal", "ppbs"}));
  tomo->add_option("--rh", tomo_cfg.ppbs.r_h);
  tomo->add_option("--rv", tomo_cfg.ppbs.r_v);
  tomo->add_flag("--clip", tomo_cfg.clip, "Clip negative eigenvalues of the reconstruction");
  tomo->add_option("--counts-out", counts_out, "Count records (long format)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  auto scheme_kind = [](const std::string& name) {
    if (name == "dn") return SchemeKind::do_nothing;
    if (name == "helstrom") return SchemeKind::helstrom;
    return SchemeKind::optimal;
  };

  try {
    Emitter emit;
    if (*protocol) {
      const bool deg = proto_out.degrees;
      ProtocolConfig cfg;
      cfg.theta = angle(proto_theta, deg);
      cfg.p = proto_p;
      cfg.shots = proto_shots;
      cfg.seed = proto_seed;
      if (proto_chi) {
        SchemeChoice c{SchemeKind::custom, angle(*proto_chi, deg), std::nullopt};
        if (proto_eta) c.eta = angle(*proto_eta, deg);
        cfg.schemes = {c};
      } else if (proto_scheme == "all") {
        cfg.schemes = {SchemeChoice::preset(SchemeKind::do_nothing), SchemeChoice::preset(SchemeKind::helstrom),
                       SchemeChoice::preset(SchemeKind::optimal)};
      } else if (!proto_scheme.empty()) {
        cfg.schemes = {SchemeChoice::preset(scheme_kind(proto_scheme))};
      }
      emit.add(proto_out.out, render(cmd_protocol(cfg), proto_out.format));
    } else if (*sweep_cmd) {
      const bool deg = sweep_out.degrees;
      sweep_cfg.grid.theta_min = angle(sweep_cfg.grid.theta_min, deg);
      sweep_cfg.grid.theta_max = angle(sweep_cfg.grid.theta_max, deg);
      if (deg && sweep_cmd->count("--theta-max") == 0) sweep_cfg.grid.theta_max = kHalfPi;
      const SweepOutput out = cmd_sweep(sweep_cfg);
      emit.add(sweep_out.out, render(out.result, sweep_out.format));
      const std::string summary_path =
          summary_out.empty() ? default_sidecar(sweep_out.out, ".summary.json") : summary_out;
      if (!summary_path.empty()) {
        report::Json s = report::to_json(out.result);
        s.erase("rows");
        emit.add(summary_path, s.dump(2) + "\n");
      }
      if (!crossover_out.empty()) emit.add(crossover_out, render(out.crossover, sweep_out.format));
    } else if (*model) {
      if (scan) {
        model_cfg.strengths = strength_scan(*scan);
      } else if (!cos_chi.empty()) {
        model_cfg.strengths = cos_chi;
      }
      model_cfg.theta = angle(model_cfg.theta, model_out.degrees);
      model_cfg.mode = reoptimize ? CorrectionMode::reoptimized : CorrectionMode::ideal_theory;
      emit.add(model_out.out, render(cmd_experiment_model(model_cfg), model_out.format));
    } else if (*tomo) {
      const bool deg = tomo_out.degrees;
      tomo_cfg.theta = angle(tomo_cfg.theta, deg);
      if (tomo_chi) {
        tomo_cfg.scheme = {SchemeKind::custom, angle(*tomo_chi, deg), std::nullopt};
        if (tomo_eta) tomo_cfg.scheme.eta = angle(*tomo_eta, deg);
      } else {
        tomo_cfg.scheme = SchemeChoice::preset(scheme_kind(tomo_scheme));
      }
      tomo_cfg.model = tomo_model == "ppbs" ? GateModel::ppbs : GateModel::ideal;
      const TomographyOutput out = cmd_tomography(tomo_cfg);
      emit.add(tomo_out.out, render(out.result, tomo_out.format));
      if (!counts_out.empty()) emit.add(counts_out, render(out.counts, tomo_out.format));
    }
    emit.flush();
  } catch (const std::invalid_argument& e) {  // ValidationError
    std::cerr << "qfb: invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::domain_error& e) {  // DomainError
    std::cerr << "qfb: invalid input: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "qfb: error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
