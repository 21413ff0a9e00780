#include "laserguard/eval.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <set>

#include "io_util.hpp"
#include "laserguard/error.hpp"
#include "laserguard/dwt.hpp"
#include "laserguard/parallel.hpp"
#include "laserguard/random.hpp"

namespace laserguard::eval {

namespace {

using nlohmann::json;

constexpr std::uint64_t kNoiseStream = 0x4e4f49;

json svm_json(const svm::SvmConfig& c) {
  json j;
  j["C"] = c.C;
  j["gamma"] = c.gamma ? json(*c.gamma) : json("scale");
  j["kkt_tol"] = c.kkt_tol;
  j["max_iterations"] = c.max_iterations;
  j["standardize"] = c.standardize;
  return j;
}

EvalReport score_test_set(const svm::SvmModel& model, const Matrix& test_features,
                          const std::vector<std::string>& test_ids, const std::vector<int>& test_labels) {
  EvalReport report;
  for (std::size_t i = 0; i < test_features.rows(); ++i) {
    const auto p = model.predict(test_features.row(i));
    report.confusion.add(test_labels[i], p.label);
    report.verdicts.push_back({test_ids[i], test_labels[i], p.label, p.score});
  }
  report.accuracy = report.confusion.accuracy();
  return report;
}

Matrix select_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(m.row(rows[i]).begin(), m.row(rows[i]).end(), out.row(i).begin());
  return out;
}

std::string hash_config(const ExperimentConfig& cfg, dataset::Protocol protocol, std::string& json_out) {
  json j = json::parse(cfg.to_json());
  j["protocol"] = dataset::to_string(protocol);
  json_out = j.dump();
  return detail::hash_hex(json_out);
}

}  // namespace

void Confusion::add(int truth, int predicted) {
  if (truth > 0) (predicted > 0 ? tp : fn)++;
  else (predicted > 0 ? fp : tn)++;
}

std::string feature_config_json(const features::FeatureConfig& cfg) {
  json j;
  j["scheme"] = features::to_string(cfg.scheme);
  j["wavelet"] = {{"family", dwt::to_string(cfg.wavelet.family)},
                  {"level", cfg.wavelet.level},
                  {"boundary", dwt::to_string(cfg.wavelet.boundary)},
                  {"clamp_short_signals", cfg.wavelet.clamp_short_signals}};
  const auto& c = cfg.cepstral;
  j["cepstral"] = {{"frame_ms", c.frame_ms},
                   {"hop_ms", c.hop_ms},
                   {"fft_size", c.fft_size},
                   {"n_filters", c.n_filters},
                   {"n_coeffs", c.n_coeffs},
                   {"cqt_bins_per_octave", c.cqt_bins_per_octave},
                   {"cqt_octaves", c.cqt_octaves},
                   {"cqcc_resample_period", c.cqcc_resample_period},
                   {"aggregation", "mean+std"}};
  return j.dump();
}

features::FeatureConfig feature_config_from_json(const std::string& text) {
  features::FeatureConfig cfg;
  if (text.empty()) return cfg;
  try {
    const json j = json::parse(text);
    cfg.scheme = features::parse_scheme(j.at("scheme").get<std::string>());
    const auto& w = j.at("wavelet");
    cfg.wavelet.family = dwt::parse_family(w.at("family").get<std::string>());
    cfg.wavelet.level = w.at("level").get<int>();
    cfg.wavelet.boundary = dwt::parse_boundary(w.at("boundary").get<std::string>());
    cfg.wavelet.clamp_short_signals = w.at("clamp_short_signals").get<bool>();
    const auto& c = j.at("cepstral");
    cfg.cepstral.frame_ms = c.at("frame_ms").get<double>();
    cfg.cepstral.hop_ms = c.at("hop_ms").get<double>();
    cfg.cepstral.fft_size = c.at("fft_size").get<std::size_t>();
    cfg.cepstral.n_filters = c.at("n_filters").get<std::size_t>();
    cfg.cepstral.n_coeffs = c.at("n_coeffs").get<std::size_t>();
    cfg.cepstral.cqt_bins_per_octave = c.at("cqt_bins_per_octave").get<std::size_t>();
    cfg.cepstral.cqt_octaves = c.at("cqt_octaves").get<std::size_t>();
    cfg.cepstral.cqcc_resample_period = c.at("cqcc_resample_period").get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptModel, std::string("feature configuration: ") + e.what());
  }
  return cfg;
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["features"] = json::parse(feature_config_json(features));
  j["svm"] = svm_json(svm);
  j["resubstitution"] = resubstitution;
  return j.dump();
}

FeatureTable featurize_corpus(const std::vector<dataset::ClipRecord>& records, const features::FeatureConfig& cfg,
                              unsigned jobs) {
  FeatureTable table{cfg, Matrix(records.size(), cfg.dim()), {}};
  std::vector<char> clamped(records.size(), 0);
  parallel_for(records.size(), jobs, [&](std::size_t i) {
    const auto clip = audio::load_canonical(records[i].path);
    clamped[i] = cfg.scheme == features::Scheme::DWT && dwt::max_level(clip.size()) < cfg.wavelet.level;
    const auto fv = features::featurize(clip, cfg);
    if (fv.dim() != table.values.cols()) {
      throw Error(ErrorCode::DimensionMismatch, records[i].clip_id + ": feature dimension " +
                                                    std::to_string(fv.dim()) + " differs from " +
                                                    std::to_string(table.values.cols()));
    }
    std::copy(fv.values.begin(), fv.values.end(), table.values.row(i).begin());
  });
  for (std::size_t i = 0; i < clamped.size(); ++i) {
    if (clamped[i] != 0) table.clamped_rows.push_back(i);
  }
  return table;
}

std::vector<int> labels_of(const std::vector<dataset::ClipRecord>& records) {
  std::vector<int> y;
  y.reserve(records.size());
  for (const auto& r : records) y.push_back(dataset::to_sign(r.label));
  return y;
}

svm::TrainResult fit_model(const FeatureTable& table, const std::vector<int>& labels,
                           const std::vector<std::size_t>& train, const svm::SvmConfig& cfg) {
  const Matrix x = select_rows(table.values, train);
  std::vector<int> y;
  y.reserve(train.size());
  for (auto i : train) y.push_back(labels[i]);
  auto result = svm::train(x, y, cfg);
  result.model.feature_config = feature_config_json(table.config);
  return result;
}

EvalReport run_experiment(const std::vector<dataset::ClipRecord>& records, const FeatureTable& table,
                          dataset::Protocol protocol, const ExperimentConfig& cfg, std::uint64_t seed) {
  if (table.values.rows() != records.size()) {
    throw Error(ErrorCode::DimensionMismatch, "feature table and manifest differ in length");
  }
  auto part = dataset::make_partition(records, protocol, seed);
  if (cfg.resubstitution) part.test = part.train;

  std::set<std::string> train_ids;
  for (auto i : part.train) train_ids.insert(records[i].clip_id);
  if (!cfg.resubstitution) {
    for (auto i : part.test) {
      if (train_ids.count(records[i].clip_id) != 0) {
        throw Error(ErrorCode::LeakageDetected, "test clip " + records[i].clip_id + " is also in the training set");
      }
    }
  }

  const auto labels = labels_of(records);
  const auto fitted = fit_model(table, labels, part.train, cfg.svm);

  std::vector<std::string> ids;
  std::vector<int> y;
  for (auto i : part.test) {
    ids.push_back(records[i].clip_id);
    y.push_back(labels[i]);
  }
  EvalReport report = score_test_set(fitted.model, select_rows(table.values, part.test), ids, y);
  report.protocol = protocol;
  report.scheme = table.config.scheme;
  report.seed = seed;
  report.train_size = part.train.size();
  ExperimentConfig snapshot = cfg;
  snapshot.features = table.config;
  report.config_hash = hash_config(snapshot, protocol, report.config_json);
  return report;
}

EvalReport run_experiment(const std::vector<dataset::ClipRecord>& records, dataset::Protocol protocol,
                          const ExperimentConfig& cfg, std::uint64_t seed, unsigned jobs) {
  return run_experiment(records, featurize_corpus(records, cfg.features, jobs), protocol, cfg, seed);
}

std::string to_string(Composition c) {
  switch (c) {
    case Composition::PureAcoustic: return "pure_acoustic";
    case Composition::PureLaser: return "pure_laser";
    case Composition::Bordering: return "bordering";
  }
  return "pure_acoustic";
}

Composition frame_composition(std::size_t start, std::size_t end, std::size_t boundary) {
  if (end <= boundary) return Composition::PureAcoustic;
  if (start >= boundary) return Composition::PureLaser;
  return Composition::Bordering;
}

FrameScanResult frame_scan(const svm::SvmModel& model, const audio::AudioBuffer& composite, double boundary_s,
                           double frame_s, double hop_s) {
  if (!(frame_s > 0.0) || !(hop_s > 0.0)) throw Error(ErrorCode::InvalidArgument, "frame and hop must be positive");
  const int fs = composite.sample_rate();
  const auto frame = static_cast<std::size_t>(std::llround(frame_s * fs));
  const auto hop = static_cast<std::size_t>(std::llround(hop_s * fs));
  if (frame == 0 || hop == 0) throw Error(ErrorCode::InvalidArgument, "frame or hop is shorter than one sample");
  if (composite.size() < frame) {
    throw Error(ErrorCode::ClipTooShort, "composite is shorter than one " + detail::format_double(frame_s) + " s frame");
  }
  if (!(boundary_s >= 0.0) || boundary_s > composite.duration_s()) {
    throw Error(ErrorCode::InvalidArgument, "boundary lies outside the composite clip");
  }
  const auto boundary = static_cast<std::size_t>(std::llround(boundary_s * fs));
  const auto cfg = feature_config_from_json(model.feature_config);

  const std::size_t n_frames = features::frame_count(composite.size(), frame, hop);
  FrameScanResult result;
  result.frames.resize(n_frames);
  std::size_t correct[3] = {0, 0, 0};
  std::size_t count[3] = {0, 0, 0};
  for (std::size_t k = 0; k < n_frames; ++k) {
    const std::size_t start = k * hop;
    const auto fv = features::featurize(composite.slice(start, frame), cfg);
    const auto p = model.predict(fv.values);
    FrameVerdict& v = result.frames[k];
    v.frame_index = k;
    v.start_s = static_cast<double>(k) * hop_s;
    v.end_s = v.start_s + frame_s;
    v.predicted = p.label;
    v.score = p.score;
    v.composition = frame_composition(start, start + frame, boundary);
    const int expected = v.composition == Composition::PureAcoustic ? svm::kAcoustic : svm::kLaser;
    const auto kind = static_cast<std::size_t>(v.composition);
    ++count[kind];
    if (p.label == expected) ++correct[kind];
  }

  auto ratio = [](std::size_t c, std::size_t n) -> std::optional<double> {
    if (n == 0) return std::nullopt;
    return static_cast<double>(c) / static_cast<double>(n);
  };
  const auto bordering = static_cast<std::size_t>(Composition::Bordering);
  result.accuracy_all = ratio(correct[0] + correct[1] + correct[2], n_frames);
  result.accuracy_bordering = ratio(correct[bordering], count[bordering]);
  result.accuracy_non_bordering = ratio(correct[0] + correct[1], count[0] + count[1]);
  return result;
}

std::vector<EvalReport> robustness_sweep(const std::vector<dataset::ClipRecord>& records,
                                         dataset::Protocol protocol, const ExperimentConfig& cfg,
                                         const std::vector<double>& snr_list_db, std::pair<double, double> band_hz,
                                         std::uint64_t seed, unsigned jobs) {
  const auto part = dataset::make_partition(records, protocol, seed);
  const auto labels = labels_of(records);

  std::vector<dataset::ClipRecord> train_records;
  for (auto i : part.train) train_records.push_back(records[i]);
  FeatureTable train_table = featurize_corpus(train_records, cfg.features, jobs);
  std::vector<int> train_labels = labels_of(train_records);
  std::vector<std::size_t> all(train_records.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto fitted = fit_model(train_table, train_labels, all, cfg.svm);

  std::vector<audio::AudioBuffer> test_audio(part.test.size());
  parallel_for(part.test.size(), jobs,
               [&](std::size_t i) { test_audio[i] = audio::load_canonical(records[part.test[i]].path); });

  std::vector<std::string> ids;
  std::vector<int> y;
  for (auto i : part.test) {
    ids.push_back(records[i].clip_id);
    y.push_back(labels[i]);
  }

  std::string config_json;
  const std::string config_hash = hash_config(cfg, protocol, config_json);

  std::vector<EvalReport> rows;
  for (double snr : snr_list_db) {
    Matrix test_features(part.test.size(), cfg.features.dim());
    parallel_for(part.test.size(), jobs, [&](std::size_t i) {
      const auto noisy = dataset::add_colored_noise(test_audio[i], band_hz, snr,
                                                    derive_seed({seed, kNoiseStream, part.test[i]}));
      const auto fv = features::featurize(noisy, cfg.features);
      std::copy(fv.values.begin(), fv.values.end(), test_features.row(i).begin());
    });
    EvalReport report = score_test_set(fitted.model, test_features, ids, y);
    report.protocol = protocol;
    report.scheme = cfg.features.scheme;
    report.seed = seed;
    report.snr_db = snr;
    report.train_size = part.train.size();
    report.config_json = config_json;
    report.config_hash = config_hash;
    rows.push_back(std::move(report));
  }
  return rows;
}

}  // namespace laserguard::eval
