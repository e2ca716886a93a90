// cvqkd: key rates and security thresholds for a two-mode-squeezed-state
// CV-QKD protocol, plus purification, Monte-Carlo simulation and covariance
// estimation. See README.md for conventions (SNU, interleaved ordering,
// channel-input-referred excess noise).

#include <cmath>
#include <iostream>

#include <CLI11.hpp>

#include "cvqkd/io.hpp"

namespace {

using cvqkd::json;

constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_unphysical = 3;
constexpr int exit_numerical = 4;

const double unset = std::nan("");
inline bool given(double v) { return !std::isnan(v); }

// Options shared by the parameterized subcommands. Unset-detection uses NaN
// sentinels so mutually exclusive spellings (SNU vs dB, eta vs distance) can
// be rejected instead of silently guessed.
struct ParamFlags {
  double v0 = unset, dv0 = unset, v0_db = unset, anti_db = unset;
  double modulation = 0.0, gain = 0.0, g_max = 1.5;
  bool optimize_gain = false;
  double eta = unset, distance_km = unset, epsilon = 0.0, db_per_km = 0.2;
  double bob_eff = 1.0, bob_el = 0.0, bob_noise = 0.0;
  bool optimize_bob_noise = false;
};

void add_param_options(CLI::App* cmd, ParamFlags& f) {
  cmd->add_option("--v0", f.v0, "Squeezed quadrature variance V0 (SNU)");
  cmd->add_option("--dv0", f.dv0, "Excess antisqueezing noise dV0 (SNU)");
  cmd->add_option("--v0-db,--tms-db", f.v0_db, "Squeezing in dB (>= 0)");
  cmd->add_option("--anti-db", f.anti_db, "Antisqueezing in dB (>= 0)");
  cmd->add_option("--modulation", f.modulation, "Coherent modulation variance dV (SNU)");
  cmd->add_option("--gain", f.gain, "Gain weight g for Alice's homodyne data");
  cmd->add_option("--g-max", f.g_max, "Upper bound of the gain search range");
  cmd->add_flag("--optimize-gain", f.optimize_gain, "Optimize g over [0, g-max]");
  cmd->add_option("--eta", f.eta, "Channel transmittance in [0,1]");
  cmd->add_option("--distance-km", f.distance_km, "Channel length (km)");
  cmd->add_option("--db-per-km", f.db_per_km, "Fiber loss per km (dB)");
  cmd->add_option("--epsilon", f.epsilon, "Channel excess noise at channel input (SNU)");
  cmd->add_option("--bob-eff", f.bob_eff, "Bob's detection efficiency in (0,1]");
  cmd->add_option("--bob-el", f.bob_el, "Bob's electronic noise (SNU)");
  cmd->add_option("--bob-noise", f.bob_noise, "Bob's trusted added noise (SNU)");
  cmd->add_flag("--optimize-bob-noise", f.optimize_bob_noise,
                "Optimize the trusted added noise over [0, 50] SNU");
}

cvqkd::ProtocolParams resolve_protocol(const ParamFlags& f) {
  cvqkd::ProtocolParams p;
  if (given(f.v0_db) && given(f.v0))
    throw std::invalid_argument("--v0 and --v0-db/--tms-db are mutually exclusive");
  if (given(f.anti_db) && given(f.dv0))
    throw std::invalid_argument("--dv0 and --anti-db are mutually exclusive");
  if (given(f.anti_db) && !given(f.v0_db))
    throw std::invalid_argument("--anti-db requires --v0-db/--tms-db");
  if (given(f.v0_db)) {
    const cvqkd::EprSpec spec{f.v0_db, given(f.anti_db) ? f.anti_db : f.v0_db};
    const cvqkd::SqueezedSourceSpec s = cvqkd::epr_spec_to_source(spec);
    p.v0 = s.v0;
    p.delta_v0 = s.delta_v0;
  } else {
    p.v0 = given(f.v0) ? f.v0 : 1.0;
    p.delta_v0 = given(f.dv0) ? f.dv0 : 0.0;
  }
  p.delta_v = f.modulation;
  p.g = f.gain;
  p.g_max = f.g_max;
  return p;
}

cvqkd::ChannelParams resolve_channel(const ParamFlags& f) {
  if (given(f.eta) && given(f.distance_km))
    throw std::invalid_argument("--eta and --distance-km are mutually exclusive");
  cvqkd::ChannelParams c;
  c.eta = given(f.distance_km) ? cvqkd::distance_to_transmittance(f.distance_km, f.db_per_km)
                               : (given(f.eta) ? f.eta : 1.0);
  c.epsilon = f.epsilon;
  return c;
}

cvqkd::DetectorParams resolve_detector(const ParamFlags& f) {
  return {f.bob_eff, f.bob_el, f.bob_noise};
}

json params_json(const cvqkd::ProtocolParams& p, const cvqkd::ChannelParams& c,
                 const cvqkd::DetectorParams& d) {
  return {{"v0", p.v0},
          {"delta_v0", p.delta_v0},
          {"delta_v", p.delta_v},
          {"g", p.g},
          {"g_max", p.g_max},
          {"eta", c.eta},
          {"epsilon", c.epsilon},
          {"bob_efficiency", d.efficiency},
          {"bob_electronic_noise", d.electronic_noise},
          {"bob_trusted_added_noise", d.trusted_added_noise}};
}

void emit_with_manifest(const std::string& output_path, const std::string& content,
                        cvqkd::RunManifest manifest) {
  if (output_path.empty()) {
    std::cout << content;
    return;
  }
  cvqkd::write_text_file(output_path, content);
  manifest.outputs.push_back(output_path);
  cvqkd::save_manifest(output_path + ".manifest.json", manifest);
}

int run_cli(const std::vector<std::string>& args, int depth);

int dispatch(const std::vector<std::string>& args, int depth) {
  CLI::App app{"CV-QKD key-rate and security-threshold calculator"};
  app.require_subcommand(1);

  ParamFlags f;
  std::string output_path, covariance_path, input_path, manifest_path, sweep_variable;
  double sweep_min = 0.0, sweep_max = 1.0;
  int sweep_points = 2;
  bool sweep_log = false, no_opt_g = false, no_opt_noise = false;
  bool binary = false, interleave = false;
  std::uint64_t n_samples = 200000, seed = 0;
  double est_gain = 0.0;

  auto* keyrate = app.add_subcommand("keyrate", "Key rate for one configuration");
  add_param_options(keyrate, f);
  keyrate->add_option("--covariance", covariance_path,
                      "Two-mode covariance JSON file measured at Bob's detector output");
  keyrate->add_option("-o,--output", output_path, "Write the JSON report here (default stdout)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Key-rate curve over one swept variable");
  add_param_options(sweep_cmd, f);
  sweep_cmd
      ->add_option("--variable", sweep_variable,
                   "Swept variable: distance_km|eta|epsilon|modulation|squeezing_db")
      ->required();
  sweep_cmd->add_option("--min", sweep_min, "Sweep range minimum")->required();
  sweep_cmd->add_option("--max", sweep_max, "Sweep range maximum")->required();
  sweep_cmd->add_option("--points", sweep_points, "Number of points (>= 2)")->required();
  sweep_cmd->add_flag("--log", sweep_log, "Logarithmic spacing");
  sweep_cmd->add_option("-o,--output", output_path, "Write the CSV table here (default stdout)");

  auto* tn = app.add_subcommand("threshold-noise", "Maximal tolerable channel excess noise");
  add_param_options(tn, f);
  tn->add_flag("--no-optimize-gain", no_opt_g, "Keep g fixed during the threshold search");
  tn->add_flag("--no-optimize-bob-noise", no_opt_noise,
               "Keep Bob's added noise fixed during the threshold search");
  tn->add_option("-o,--output", output_path, "Write the JSON result here (default stdout)");

  auto* tl = app.add_subcommand("threshold-loss", "Maximal tolerable channel loss (dB, km)");
  add_param_options(tl, f);
  tl->add_flag("--no-optimize-gain", no_opt_g, "Keep g fixed during the threshold search");
  tl->add_flag("--no-optimize-bob-noise", no_opt_noise,
               "Keep Bob's added noise fixed during the threshold search");
  tl->add_option("-o,--output", output_path, "Write the JSON result here (default stdout)");

  auto* purify = app.add_subcommand("purify", "4-mode purification of a measured two-mode matrix");
  purify->add_option("--covariance", covariance_path, "Two-mode covariance JSON file")->required();
  purify->add_option("-o,--output", output_path, "Write the JSON result here (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "Seeded Monte-Carlo sample generation");
  add_param_options(simulate, f);
  simulate->add_option("--samples", n_samples, "Number of samples");
  simulate->add_option("--seed", seed, "64-bit RNG seed");
  simulate->add_flag("--binary", binary, "Emit the binary sample frame instead of CSV");
  simulate->add_flag("--interleave", interleave, "Alternate x/p per sample instead of two blocks");
  simulate->add_option("-o,--output", output_path, "Output sample file")->required();

  auto* estimate = app.add_subcommand("estimate", "Covariance estimate from a sample file");
  estimate->add_option("--input", input_path, "Sample file (CSV, or binary with --binary)")
      ->required();
  estimate->add_flag("--binary", binary, "Input is a binary sample frame");
  estimate->add_option("--gain", est_gain, "Gain g for Alice's weighted variable")->required();
  estimate->add_option("-o,--output", output_path,
                       "Write the covariance JSON file here (default stdout)");

  auto* replay = app.add_subcommand("replay", "Re-run a stored run manifest");
  replay->add_option("--manifest", manifest_path, "Manifest JSON emitted by a previous run")
      ->required();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the error message
    return code == 0 ? exit_ok : exit_usage;
  }

  cvqkd::RunManifest manifest;
  manifest.argv = args;
  manifest.seed = seed;

  if (*replay) {
    if (depth > 0) throw std::invalid_argument("replay: manifests must not chain replays");
    const cvqkd::RunManifest m = cvqkd::load_manifest(manifest_path);
    return run_cli(m.argv, depth + 1);
  }

  if (*keyrate) {
    manifest.subcommand = "keyrate";
    const cvqkd::ChannelParams c = resolve_channel(f);
    const cvqkd::DetectorParams d = resolve_detector(f);
    cvqkd::SecurityReport report;
    if (!covariance_path.empty()) {
      if (f.optimize_gain || f.optimize_bob_noise)
        throw std::invalid_argument(
            "--optimize-gain/--optimize-bob-noise do not apply to a measured covariance");
      const cvqkd::CovarianceFile cf = cvqkd::load_covariance(covariance_path);
      if (cvqkd::mode_count(cf.matrix) != 2)
        throw std::invalid_argument("keyrate: covariance file must contain a two-mode matrix");
      const auto m = cvqkd::MeasuredTwoModeMatrix::from_matrix(cf.matrix);
      report = cvqkd::key_rate_from_covariance(m, c, d, cf.label);
      manifest.params = {{"covariance", covariance_path},
                         {"eta", c.eta},
                         {"epsilon", c.epsilon},
                         {"bob_efficiency", d.efficiency},
                         {"bob_electronic_noise", d.electronic_noise},
                         {"bob_trusted_added_noise", d.trusted_added_noise}};
      manifest.inputs.push_back(
          {{"path", covariance_path}, {"fnv1a64", cvqkd::file_digest(covariance_path)}});
    } else {
      cvqkd::ProtocolParams p = resolve_protocol(f);
      cvqkd::DetectorParams dd = d;
      if (f.optimize_gain || f.optimize_bob_noise) {
        const cvqkd::OptimizedRate r =
            cvqkd::optimize_rate(p, c, d, f.optimize_gain, f.optimize_bob_noise);
        p.g = r.g;
        dd.trusted_added_noise = r.bob_noise;
      }
      report = cvqkd::key_rate(p, c, dd);
      manifest.params = params_json(p, c, dd);
    }
    emit_with_manifest(output_path, cvqkd::report_to_json(report).dump(2) + "\n", manifest);
    return exit_ok;
  }

  if (*sweep_cmd) {
    manifest.subcommand = "sweep";
    cvqkd::SweepSpec spec;
    if (sweep_variable == "distance_km")
      spec.variable = cvqkd::SweepVariable::distance_km;
    else if (sweep_variable == "eta")
      spec.variable = cvqkd::SweepVariable::eta;
    else if (sweep_variable == "epsilon")
      spec.variable = cvqkd::SweepVariable::epsilon;
    else if (sweep_variable == "modulation")
      spec.variable = cvqkd::SweepVariable::modulation;
    else if (sweep_variable == "squeezing_db")
      spec.variable = cvqkd::SweepVariable::squeezing_db;
    else
      throw std::invalid_argument("sweep: unknown --variable " + sweep_variable);
    spec.min = sweep_min;
    spec.max = sweep_max;
    spec.points = sweep_points;
    spec.log_spacing = sweep_log;
    spec.protocol = resolve_protocol(f);
    spec.channel = resolve_channel(f);
    spec.detector = resolve_detector(f);
    spec.optimize_g = f.optimize_gain;
    spec.optimize_bob_noise = f.optimize_bob_noise;
    spec.db_per_km = f.db_per_km;
    manifest.params = params_json(spec.protocol, spec.channel, spec.detector);
    manifest.params["variable"] = sweep_variable;
    manifest.params["min"] = spec.min;
    manifest.params["max"] = spec.max;
    manifest.params["points"] = spec.points;
    manifest.params["log"] = spec.log_spacing;
    emit_with_manifest(output_path, cvqkd::sweep_csv(cvqkd::sweep(spec), sweep_variable), manifest);
    return exit_ok;
  }

  if (*tn || *tl) {
    manifest.subcommand = *tn ? "threshold-noise" : "threshold-loss";
    const cvqkd::ProtocolParams p = resolve_protocol(f);
    const cvqkd::ChannelParams c = resolve_channel(f);
    const cvqkd::DetectorParams d = resolve_detector(f);
    manifest.params = params_json(p, c, d);
    manifest.params["optimize_gain"] = !no_opt_g;
    manifest.params["optimize_bob_noise"] = !no_opt_noise;
    cvqkd::ThresholdResult t;
    std::string kind;
    if (*tn) {
      t = cvqkd::tolerable_excess_noise(p, d, c.eta, !no_opt_g, !no_opt_noise);
      kind = "epsilon";
    } else {
      t = cvqkd::max_tolerable_loss(p, d, c.epsilon, !no_opt_g, !no_opt_noise, 0.01, f.db_per_km);
      kind = "loss_db";
    }
    emit_with_manifest(output_path, cvqkd::threshold_to_json(t, kind).dump(2) + "\n", manifest);
    return exit_ok;
  }

  if (*purify) {
    manifest.subcommand = "purify";
    const cvqkd::CovarianceFile cf = cvqkd::load_covariance(covariance_path);
    if (cvqkd::mode_count(cf.matrix) != 2)
      throw std::invalid_argument("purify: covariance file must contain a two-mode matrix");
    const auto m = cvqkd::MeasuredTwoModeMatrix::from_matrix(cf.matrix);
    const cvqkd::PurificationSolve sol = cvqkd::solve_purification(m);
    const cvqkd::Mat g4 = cvqkd::four_mode_matrix(sol.params);
    json eigs = json::array();
    for (double nu : cvqkd::symplectic_eigenvalues(g4)) eigs.push_back(nu);
    const json out = {{"params",
                       {{"r1", sol.params.r1},
                        {"r2", sol.params.r2},
                        {"v1", sol.params.v1},
                        {"v2", sol.params.v2},
                        {"t1", sol.params.t1},
                        {"t2", sol.params.t2}}},
                      {"residual", sol.residual},
                      {"start_index", sol.start_index},
                      {"iterations", sol.iterations},
                      {"symplectic_eigenvalues", eigs}};
    manifest.inputs.push_back(
        {{"path", covariance_path}, {"fnv1a64", cvqkd::file_digest(covariance_path)}});
    emit_with_manifest(output_path, out.dump(2) + "\n", manifest);
    return exit_ok;
  }

  if (*simulate) {
    manifest.subcommand = "simulate";
    cvqkd::RunConfig cfg;
    cfg.protocol = resolve_protocol(f);
    cfg.channel = resolve_channel(f);
    cfg.detector = resolve_detector(f);
    cfg.n_samples = n_samples;
    cfg.seed = seed;
    cfg.interleave_bases = interleave;
    manifest.params = params_json(cfg.protocol, cfg.channel, cfg.detector);
    manifest.params["n_samples"] = cfg.n_samples;
    manifest.params["interleave"] = cfg.interleave_bases;
    manifest.params["binary"] = binary;
    const cvqkd::SampleBlock block = cvqkd::simulate_run(cfg);
    if (binary)
      cvqkd::save_samples_binary(output_path, block);
    else
      cvqkd::write_text_file(output_path, cvqkd::samples_csv(block));
    manifest.outputs.push_back(output_path);
    cvqkd::save_manifest(output_path + ".manifest.json", manifest);
    return exit_ok;
  }

  if (*estimate) {
    manifest.subcommand = "estimate";
    cvqkd::SampleBlock block;
    if (binary) {
      block = cvqkd::load_samples_binary(input_path);
    } else {
      std::ifstream in(input_path);
      if (!in) throw std::invalid_argument("estimate: cannot open " + input_path);
      block = cvqkd::samples_from_csv(in);
    }
    const cvqkd::CovarianceEstimate est = cvqkd::estimate_covariance(block, est_gain);
    json meta = {{"label", "estimate:" + input_path},
                 {"gain", est_gain},
                 {"n_x", est.n_x},
                 {"n_p", est.n_p},
                 {"standard_error",
                  {{"v_a_x", est.standard_error.v_a_x},
                   {"v_a_p", est.standard_error.v_a_p},
                   {"v_b_x", est.standard_error.v_b_x},
                   {"v_b_p", est.standard_error.v_b_p},
                   {"c_x", est.standard_error.c_x},
                   {"c_p", est.standard_error.c_p}}}};
    manifest.inputs.push_back({{"path", input_path}, {"fnv1a64", cvqkd::file_digest(input_path)}});
    manifest.params = {{"gain", est_gain}, {"binary", binary}};
    emit_with_manifest(output_path,
                       cvqkd::covariance_to_json(est.matrix.to_matrix(), "interleaved", meta)
                               .dump(2) +
                           "\n",
                       manifest);
    return exit_ok;
  }

  return exit_usage;  // unreachable: require_subcommand enforces one
}

int run_cli(const std::vector<std::string>& args, int depth) {
  try {
    return dispatch(args, depth);
  } catch (const cvqkd::unphysical_error& e) {
    std::cerr << "error (unphysical input): " << e.what() << "\n";
    return exit_unphysical;
  } catch (const cvqkd::numerical_error& e) {
    std::cerr << "error (numerical failure): " << e.what() << "\n";
    return exit_numerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error (usage): " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_numerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  return run_cli(std::vector<std::string>(argv + 1, argv + argc), 0);
}
