#include "laserguard/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <json.hpp>
#include <map>
#include <sstream>
#include <thread>

#include "io_util.hpp"
#include "laserguard/audio.hpp"
#include "laserguard/dataset.hpp"
#include "laserguard/dwt.hpp"
#include "laserguard/error.hpp"
#include "laserguard/eval.hpp"
#include "laserguard/features.hpp"
#include "laserguard/stats.hpp"
#include "laserguard/svm.hpp"

namespace laserguard::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Options {
  std::uint64_t seed = 1;
  unsigned jobs = 0;

  // shared front-end settings
  std::string scheme = "dwt";
  std::string wavelet = "db4";
  int level = 5;
  std::string boundary = "symmetric";
  features::CepstralConfig cepstral;

  // svm
  double C = 1.0;
  std::string gamma = "scale";
  bool no_standardize = false;

  // paths
  std::string manifest;
  std::string out;
  std::string model;
  std::string wav;
  std::string features_csv;
  std::string report;

  // synth
  dataset::SynthConfig synth;

  // eval / train / robustness
  std::string protocol;
  std::string protocols = "sd_td,si_td,si_ti";
  std::string schemes = "dwt";
  int n_seeds = 1;
  bool resubstitution = false;
  std::string snr_list = "inf,30,20,10";
  std::string band = "0,2000";

  // frame scan
  double boundary_s = -1.0;
  double frame_s = 1.0;
  double hop_s = 0.5;

  // spectrum / subbands
  std::size_t segment = 1024;
  std::string fit;
};

std::string data_dir() {
  const char* env = std::getenv("LASERGUARD_DATA_DIR");
  return env != nullptr && *env != '\0' ? env : "data";
}

std::string default_manifest(const std::string& given) {
  return given.empty() ? (fs::path(data_dir()) / "manifest.csv").string() : given;
}

unsigned resolve_jobs(unsigned jobs) {
  if (jobs != 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (const auto& item : detail::split(s, ',')) {
    auto t = detail::trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

double parse_number(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::InvalidArgument, what + ": not a number: '" + s + "'");
  }
}

std::pair<double, double> parse_band(const std::string& s) {
  const auto parts = split_list(s);
  if (parts.size() != 2) throw Error(ErrorCode::InvalidBand, "band must be 'lo,hi': " + s);
  return {parse_number(parts[0], "band"), parse_number(parts[1], "band")};
}

features::FeatureConfig feature_config(const Options& o, const std::string& scheme) {
  features::FeatureConfig cfg;
  cfg.scheme = features::parse_scheme(scheme);
  cfg.wavelet.family = dwt::parse_family(o.wavelet);
  cfg.wavelet.level = o.level;
  cfg.wavelet.boundary = dwt::parse_boundary(o.boundary);
  cfg.wavelet.validate();
  cfg.cepstral = o.cepstral;
  cfg.cepstral.validate(audio::kCanonicalRate);
  return cfg;
}

svm::SvmConfig svm_config(const Options& o) {
  svm::SvmConfig cfg;
  cfg.C = o.C;
  if (o.gamma != "scale") cfg.gamma = parse_number(o.gamma, "--gamma");
  cfg.standardize = !o.no_standardize;
  cfg.validate();
  return cfg;
}

eval::ExperimentConfig experiment_config(const Options& o, const std::string& scheme) {
  eval::ExperimentConfig cfg;
  cfg.features = feature_config(o, scheme);
  cfg.svm = svm_config(o);
  cfg.resubstitution = o.resubstitution;
  return cfg;
}

void print_hash(std::ostream& err, json config, const std::string& command, std::uint64_t seed) {
  config["command"] = command;
  config["seed"] = seed;
  err << "config_hash=" << detail::hash_hex(config.dump()) << "\n";
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") out << text;
  else detail::write_file_atomic(path, text);
}

void warn_clamped(const std::vector<dataset::ClipRecord>& records, const eval::FeatureTable& table,
                  std::ostream& err) {
  for (auto i : table.clamped_rows) {
    err << "warning: " << records[i].clip_id << " is too short for DWT level " << table.config.wavelet.level
        << "; decomposed at a lower level and zero-padded\n";
  }
}

// -- commands -------------------------------------------------------------------

int cmd_synth(const Options& o, std::ostream& out, std::ostream& err) {
  auto cfg = o.synth;
  cfg.seed = o.seed;
  cfg.validate();
  const std::string dir = o.out.empty() ? data_dir() : o.out;
  json j = {{"out", dir},
            {"n_speakers", cfg.n_speakers},
            {"n_utterances", cfg.n_utterances},
            {"clip_seconds", cfg.clip_seconds},
            {"cutoff_hz", cfg.cutoff_hz},
            {"lf_noise_snr_db", cfg.lf_noise_snr_db},
            {"rt60_s", cfg.rt60_s},
            {"acoustic_noise_snr_db", cfg.acoustic_noise_snr_db}};
  print_hash(err, j, "synth", o.seed);
  const auto records = dataset::synth_corpus(cfg, dir, resolve_jobs(o.jobs));
  out << "wrote " << records.size() << " clips and " << (fs::path(dir) / "manifest.csv").string() << "\n";
  return kExitOk;
}

std::string feature_csv(const std::vector<dataset::ClipRecord>& records, const eval::FeatureTable& table) {
  const std::size_t dim = table.values.cols();
  std::string text = "clip_id,scheme,dim";
  for (std::size_t k = 0; k < dim; ++k) text += ",v" + std::to_string(k);
  text += "\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    text += records[i].clip_id + "," + features::to_string(table.config.scheme) + "," + std::to_string(dim);
    for (double v : table.values.row(i)) text += "," + detail::format_double(v);
    text += "\n";
  }
  return text;
}

/// Reads a feature CSV back, ordered to match `records`.
Matrix read_feature_csv(const std::string& path, const std::vector<dataset::ClipRecord>& records,
                        const features::FeatureConfig& cfg) {
  const auto bytes = detail::read_file_bytes(path);
  const auto lines = detail::split(std::string(bytes.begin(), bytes.end()), '\n');
  std::map<std::string, std::vector<double>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto line = detail::trim(lines[i]);
    if (line.empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() < 3) throw Error(ErrorCode::MalformedRow, path + ": line " + std::to_string(i + 1));
    if (f[1] != features::to_string(cfg.scheme)) {
      throw Error(ErrorCode::DimensionMismatch, path + ": scheme " + f[1] + " does not match --scheme");
    }
    std::vector<double> v;
    for (std::size_t k = 3; k < f.size(); ++k) v.push_back(parse_number(f[k], path));
    if (v.size() != cfg.dim()) throw Error(ErrorCode::DimensionMismatch, path + ": row " + f[0] + " has wrong dimension");
    if (!rows.emplace(f[0], std::move(v)).second) throw Error(ErrorCode::DuplicateKey, path + ": " + f[0]);
  }
  Matrix m(records.size(), cfg.dim());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto it = rows.find(records[i].clip_id);
    if (it == rows.end()) throw Error(ErrorCode::NotFound, path + ": no features for " + records[i].clip_id);
    std::copy(it->second.begin(), it->second.end(), m.row(i).begin());
  }
  return m;
}

int cmd_featurize(const Options& o, std::ostream& out, std::ostream& err) {
  const auto cfg = feature_config(o, o.scheme);
  const auto manifest = default_manifest(o.manifest);
  print_hash(err, {{"manifest", manifest}, {"features", json::parse(eval::feature_config_json(cfg))}}, "featurize",
             o.seed);
  const auto records = dataset::load_manifest(manifest);
  const auto table = eval::featurize_corpus(records, cfg, resolve_jobs(o.jobs));
  warn_clamped(records, table, err);
  emit(o.out, feature_csv(records, table), out);
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  const auto cfg = experiment_config(o, o.scheme);
  if (o.model.empty()) throw Error(ErrorCode::InvalidArgument, "--model is required");
  const auto manifest = default_manifest(o.manifest);
  const std::string protocol = o.protocol.empty() ? "all" : o.protocol;
  if (protocol != "all") (void)dataset::parse_protocol(protocol);
  print_hash(err,
             {{"manifest", manifest},
              {"protocol", protocol},
              {"features_csv", o.features_csv},
              {"experiment", json::parse(cfg.to_json())}},
             "train", o.seed);

  const auto records = dataset::load_manifest(manifest);
  eval::FeatureTable table{cfg.features, Matrix(), {}};
  if (o.features_csv.empty()) {
    table = eval::featurize_corpus(records, cfg.features, resolve_jobs(o.jobs));
    warn_clamped(records, table, err);
  } else table.values = read_feature_csv(o.features_csv, records, cfg.features);

  std::vector<std::size_t> train;
  if (protocol == "all") {
    for (std::size_t i = 0; i < records.size(); ++i) train.push_back(i);
  } else {
    train = dataset::make_partition(records, dataset::parse_protocol(protocol), o.seed).train;
  }
  const auto result = eval::fit_model(table, eval::labels_of(records), train, cfg.svm);
  if (!result.converged) err << "warning: SMO stopped at the iteration limit\n";
  svm::save_model(o.model, result.model);
  out << "trained on " << train.size() << " clips, " << result.model.n_support() << " support vectors -> "
      << o.model << "\n";
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
  const auto schemes = split_list(o.schemes);
  const auto protocol_names = split_list(o.protocols);
  if (schemes.empty() || protocol_names.empty()) throw Error(ErrorCode::InvalidArgument, "empty scheme or protocol list");
  if (o.n_seeds < 1) throw Error(ErrorCode::InvalidArgument, "--seeds must be at least 1");
  std::vector<eval::ExperimentConfig> configs;
  for (const auto& s : schemes) configs.push_back(experiment_config(o, s));
  std::vector<dataset::Protocol> protocols;
  for (const auto& p : protocol_names) protocols.push_back(dataset::parse_protocol(p));

  const auto manifest = default_manifest(o.manifest);
  json cj = json::array();
  for (const auto& c : configs) cj.push_back(json::parse(c.to_json()));
  print_hash(err,
             {{"manifest", manifest}, {"protocols", protocol_names}, {"seeds", o.n_seeds}, {"experiments", cj}},
             "eval", o.seed);

  const auto records = dataset::load_manifest(manifest);
  const unsigned jobs = resolve_jobs(o.jobs);
  std::vector<eval::EvalReport> reports;
  for (const auto& cfg : configs) {
    const auto table = eval::featurize_corpus(records, cfg.features, jobs);
    warn_clamped(records, table, err);
    for (auto protocol : protocols) {
      // Only the shuffled protocol depends on the seed.
      const int runs = protocol == dataset::Protocol::SD_TD ? o.n_seeds : 1;
      for (int r = 0; r < runs; ++r) {
        reports.push_back(eval::run_experiment(records, table, protocol, cfg, o.seed + static_cast<std::uint64_t>(r)));
      }
    }
  }
  for (const auto& r : reports) {
    out << dataset::to_string(r.protocol) << "\t" << features::to_string(r.scheme) << "\tseed=" << r.seed
        << "\taccuracy=" << detail::format_double(r.accuracy) << "\n";
  }
  out << eval::report_table(reports);
  if (!o.report.empty()) eval::write_report(reports, o.report);
  return kExitOk;
}

int cmd_detect(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.model.empty() || o.wav.empty()) throw Error(ErrorCode::InvalidArgument, "detect needs --model and a WAV path");
  const auto model = svm::load_model(o.model);
  print_hash(err, {{"model", o.model}, {"features", json::parse(model.feature_config)}}, "detect", o.seed);
  const auto cfg = eval::feature_config_from_json(model.feature_config);
  const auto fv = features::featurize(audio::load_canonical(o.wav), cfg);
  const auto p = model.predict(fv.values);
  const bool laser = p.label == svm::kLaser;
  out << o.wav << "\t" << (laser ? "laser" : "acoustic") << "\t" << detail::format_double(p.score) << "\n";
  return laser ? kExitLaser : kExitOk;
}

int cmd_frame_scan(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.model.empty() || o.wav.empty()) throw Error(ErrorCode::InvalidArgument, "frame-scan needs --model and --wav");
  if (o.boundary_s < 0.0) throw Error(ErrorCode::InvalidArgument, "--boundary-s is required");
  const auto model = svm::load_model(o.model);
  print_hash(err,
             {{"model", o.model}, {"wav", o.wav}, {"boundary_s", o.boundary_s}, {"frame_s", o.frame_s},
              {"hop_s", o.hop_s}},
             "frame-scan", o.seed);
  const auto result = eval::frame_scan(model, audio::load_canonical(o.wav), o.boundary_s, o.frame_s, o.hop_s);
  emit(o.out, eval::frame_scan_csv(result), out);
  auto show = [&](const char* name, const std::optional<double>& v) {
    err << name << "=" << (v ? detail::format_double(*v) : std::string("n/a")) << "\n";
  };
  show("accuracy_all", result.accuracy_all);
  show("accuracy_bordering", result.accuracy_bordering);
  show("accuracy_non_bordering", result.accuracy_non_bordering);
  return kExitOk;
}

int cmd_spectrum(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.wav.empty()) throw Error(ErrorCode::InvalidArgument, "spectrum needs a WAV path");
  print_hash(err, {{"wav", o.wav}, {"segment", o.segment}}, "spectrum", o.seed);
  const auto s = features::log_spectrum(audio::load_canonical(o.wav), o.segment);
  std::string text = "freq_hz,mag_db\n";
  for (std::size_t i = 0; i < s.freq_hz.size(); ++i) {
    text += detail::format_double(s.freq_hz[i]) + "," + detail::format_double(s.magnitude_db[i]) + "\n";
  }
  emit(o.out, text, out);
  return kExitOk;
}

int cmd_robustness(const Options& o, std::ostream& out, std::ostream& err) {
  const auto cfg = experiment_config(o, o.scheme);
  const auto protocol = dataset::parse_protocol(o.protocol.empty() ? "si_ti" : o.protocol);
  std::vector<double> snrs;
  for (const auto& s : split_list(o.snr_list)) snrs.push_back(parse_number(s, "--snr-list"));
  if (snrs.empty()) throw Error(ErrorCode::InvalidArgument, "--snr-list is empty");
  const auto band = parse_band(o.band);
  if (!(band.first >= 0.0) || !(band.second > band.first) || band.second > audio::kCanonicalRate / 2.0) {
    throw Error(ErrorCode::InvalidBand, "band must satisfy 0 <= lo < hi <= Nyquist: " + o.band);
  }
  const auto manifest = default_manifest(o.manifest);
  print_hash(err,
             {{"manifest", manifest},
              {"protocol", dataset::to_string(protocol)},
              {"snr_list", o.snr_list},
              {"band", {band.first, band.second}},
              {"experiment", json::parse(cfg.to_json())}},
             "robustness", o.seed);
  const auto records = dataset::load_manifest(manifest);
  const auto rows = eval::robustness_sweep(records, protocol, cfg, snrs, band, o.seed, resolve_jobs(o.jobs));
  emit(o.out, eval::robustness_csv(rows), out);
  return kExitOk;
}

int cmd_subbands(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.wav.empty()) throw Error(ErrorCode::InvalidArgument, "subbands needs a WAV path");
  dwt::WaveletSpec spec;
  spec.family = dwt::parse_family(o.wavelet);
  spec.level = o.level;
  spec.boundary = dwt::parse_boundary(o.boundary);
  spec.validate();
  std::optional<stats::DistributionKind> fit;
  if (o.fit == "cauchy") fit = stats::DistributionKind::Cauchy;
  else if (o.fit == "lognormal") fit = stats::DistributionKind::Lognormal;
  else if (!o.fit.empty()) throw Error(ErrorCode::InvalidArgument, "--fit must be cauchy or lognormal");
  print_hash(err, {{"wav", o.wav}, {"wavelet", o.wavelet}, {"level", o.level}, {"boundary", o.boundary}, {"fit", o.fit}},
             "subbands", o.seed);

  const auto dec = dwt::dwt_multilevel(audio::load_canonical(o.wav), spec);
  if (dec.clamped()) {
    err << "warning: clip too short for level " << dec.requested_level << ", decomposed at level " << dec.level()
        << "\n";
  }
  std::vector<std::pair<std::string, const std::vector<double>*>> bands;
  bands.emplace_back("CA" + std::to_string(dec.level()), &dec.approx);
  for (std::size_t k = 0; k < dec.details.size(); ++k) {
    bands.emplace_back("CD" + std::to_string(dec.level() - static_cast<int>(k)), &dec.details[k]);
  }
  std::string text = "band,index,value\n";
  for (const auto& [name, coeffs] : bands) {
    for (std::size_t i = 0; i < coeffs->size(); ++i) {
      text += name + "," + std::to_string(i) + "," + detail::format_double((*coeffs)[i]) + "\n";
    }
  }
  emit(o.out, text, out);
  if (fit) {
    for (const auto& [name, coeffs] : bands) {
      try {
        const auto f = stats::fit_distribution(*coeffs, *fit);
        err << name << "\t" << stats::to_string(*fit) << "\tlocation=" << detail::format_double(f.location)
            << "\tscale=" << detail::format_double(f.scale) << "\tks=" << detail::format_double(f.ks) << "\n";
      } catch (const Error& e) {
        err << name << "\t" << e.what() << "\n";
      }
    }
  }
  return kExitOk;
}

void add_frontend_options(CLI::App* cmd, Options& o, bool multi_scheme = false) {
  if (multi_scheme) {
    cmd->add_option("--scheme,--schemes", o.schemes, "Comma-separated feature schemes (dwt, mfcc, lfcc, cqcc)")
        ->capture_default_str();
  } else {
    cmd->add_option("--scheme", o.scheme, "Feature scheme: dwt, mfcc, lfcc or cqcc")->capture_default_str();
  }
  cmd->add_option("--wavelet", o.wavelet, "Wavelet family: haar or db4")->capture_default_str();
  cmd->add_option("--level", o.level, "Decomposition level")->capture_default_str();
  cmd->add_option("--boundary", o.boundary, "Boundary mode: symmetric or zero")->capture_default_str();
  cmd->add_option("--frame-ms", o.cepstral.frame_ms, "Cepstral frame length")->capture_default_str();
  cmd->add_option("--hop-ms", o.cepstral.hop_ms, "Cepstral hop")->capture_default_str();
  cmd->add_option("--n-filters", o.cepstral.n_filters, "Filterbank size")->capture_default_str();
  cmd->add_option("--n-coeffs", o.cepstral.n_coeffs, "Cepstral coefficients kept")->capture_default_str();
}

void add_svm_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--C", o.C, "SVM soft-margin penalty")->capture_default_str();
  cmd->add_option("--gamma", o.gamma, "RBF gamma, or 'scale'")->capture_default_str();
  cmd->add_flag("--no-standardize", o.no_standardize, "Skip per-dimension z-scoring");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Laser-injection attack detector for voice-controlled systems", "laserguard"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML or INI file with option defaults");
  app.add_option("--seed", o.seed, "Master seed for all randomness")->envname("LASERGUARD_SEED")->capture_default_str();
  app.add_option("--jobs", o.jobs, "Worker threads (0 = all cores)")->capture_default_str();

  auto* synth = app.add_subcommand("synth", "Generate the synthetic acoustic/laser corpus");
  synth->add_option("--out", o.out, "Output directory (default $LASERGUARD_DATA_DIR or ./data)");
  synth->add_option("--speakers", o.synth.n_speakers)->capture_default_str();
  synth->add_option("--utterances", o.synth.n_utterances)->capture_default_str();
  synth->add_option("--clip-seconds", o.synth.clip_seconds)->capture_default_str();
  synth->add_option("--cutoff-hz", o.synth.cutoff_hz, "Laser channel low-pass cutoff")->capture_default_str();
  synth->add_option("--lf-noise-snr-db", o.synth.lf_noise_snr_db)->capture_default_str();
  synth->add_option("--rt60", o.synth.rt60_s)->capture_default_str();
  synth->add_option("--acoustic-snr-db", o.synth.acoustic_noise_snr_db)->capture_default_str();

  auto* featurize = app.add_subcommand("featurize", "Write clip-level feature vectors as CSV");
  featurize->add_option("--manifest", o.manifest, "Manifest CSV (default <data dir>/manifest.csv)");
  featurize->add_option("--out", o.out, "Output CSV (stdout if omitted)");
  add_frontend_options(featurize, o);

  auto* train = app.add_subcommand("train", "Fit a detector and save the model");
  train->add_option("--manifest", o.manifest, "Manifest CSV (default <data dir>/manifest.csv)");
  train->add_option("--features", o.features_csv, "Use precomputed features from this CSV");
  train->add_option("--protocol", o.protocol, "Train on this protocol's training split, or 'all'");
  train->add_option("--model", o.model, "Output model file")->required();
  add_frontend_options(train, o);
  add_svm_options(train, o);

  auto* evaluate = app.add_subcommand("eval", "Run schemes x protocols and report accuracy");
  evaluate->add_option("--manifest", o.manifest, "Manifest CSV (default <data dir>/manifest.csv)");
  evaluate->add_option("--protocol,--protocols", o.protocols, "Comma-separated protocols")->capture_default_str();
  evaluate->add_option("--seeds", o.n_seeds, "Number of shuffles averaged for sd_td")->capture_default_str();
  evaluate->add_option("--report", o.report, "Write <base>.csv, <base>.txt and <base>.jsonl");
  evaluate->add_flag("--resubstitution", o.resubstitution, "Diagnostic: test on the training clips");
  add_frontend_options(evaluate, o, true);
  add_svm_options(evaluate, o);

  auto* detect = app.add_subcommand("detect", "Classify one clip (exit 0 acoustic, 2 laser)");
  detect->add_option("--model", o.model, "Model file")->required();
  detect->add_option("wav", o.wav, "WAV file")->required();

  auto* scan = app.add_subcommand("frame-scan", "Classify sliding frames of a spliced clip");
  scan->add_option("--model", o.model, "Model file")->required();
  scan->add_option("--wav", o.wav, "WAV file")->required();
  scan->add_option("--boundary-s", o.boundary_s, "Where laser audio starts")->required();
  scan->add_option("--frame-s", o.frame_s)->capture_default_str();
  scan->add_option("--hop-s", o.hop_s)->capture_default_str();
  scan->add_option("--out", o.out, "Output CSV (stdout if omitted)");

  auto* spectrum = app.add_subcommand("spectrum", "Welch log spectrum of one clip");
  spectrum->add_option("wav", o.wav, "WAV file")->required();
  spectrum->add_option("--out", o.out, "Output CSV (stdout if omitted)");
  spectrum->add_option("--segment", o.segment, "Welch segment length")->capture_default_str();

  auto* robust = app.add_subcommand("robustness", "Accuracy under added band-limited noise");
  robust->add_option("--manifest", o.manifest, "Manifest CSV (default <data dir>/manifest.csv)");
  robust->add_option("--protocol", o.protocol, "Protocol (default si_ti)");
  robust->add_option("--snr-list", o.snr_list, "Comma-separated SNRs in dB; 'inf' = clean")->capture_default_str();
  robust->add_option("--band", o.band, "Noise band 'lo,hi' in Hz")->capture_default_str();
  robust->add_option("--out", o.out, "Output CSV (stdout if omitted)");
  add_frontend_options(robust, o);
  add_svm_options(robust, o);

  auto* subbands = app.add_subcommand("subbands", "Export wavelet coefficients of one clip");
  subbands->add_option("wav", o.wav, "WAV file")->required();
  subbands->add_option("--wavelet", o.wavelet)->capture_default_str();
  subbands->add_option("--level", o.level)->capture_default_str();
  subbands->add_option("--boundary", o.boundary)->capture_default_str();
  subbands->add_option("--fit", o.fit, "Also fit cauchy or lognormal per band");
  subbands->add_option("--out", o.out, "Output CSV (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* failed = &app;
    for (auto* sub : app.get_subcommands()) failed = sub;
    err << failed->help();
    return kExitError;
  }

  try {
    if (synth->parsed()) return cmd_synth(o, out, err);
    if (featurize->parsed()) return cmd_featurize(o, out, err);
    if (train->parsed()) return cmd_train(o, out, err);
    if (evaluate->parsed()) return cmd_eval(o, out, err);
    if (detect->parsed()) return cmd_detect(o, out, err);
    if (scan->parsed()) return cmd_frame_scan(o, out, err);
    if (spectrum->parsed()) return cmd_spectrum(o, out, err);
    if (robust->parsed()) return cmd_robustness(o, out, err);
    if (subbands->parsed()) return cmd_subbands(o, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  err << app.help();
  return kExitError;
}

}  // namespace laserguard::cli
