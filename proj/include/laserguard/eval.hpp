#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "laserguard/audio.hpp"
#include "laserguard/dataset.hpp"
#include "laserguard/features.hpp"
#include "laserguard/matrix.hpp"
#include "laserguard/svm.hpp"

namespace laserguard::eval {

/// Laser is the positive class.
struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  double accuracy() const noexcept {
    return total() == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(total());
  }
  void add(int truth, int predicted);
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct ClipVerdict {
  std::string clip_id;
  int truth = 0;
  int predicted = 0;
  double score = 0.0;
};

struct ExperimentConfig {
  features::FeatureConfig features;
  svm::SvmConfig svm;
  /// Diagnostic only: train and test on the same clips.
  bool resubstitution = false;

  std::string to_json() const;
};

std::string feature_config_json(const features::FeatureConfig& cfg);
features::FeatureConfig feature_config_from_json(const std::string& json);

struct EvalReport {
  dataset::Protocol protocol = dataset::Protocol::SD_TD;
  features::Scheme scheme = features::Scheme::DWT;
  double accuracy = 0.0;
  Confusion confusion;
  std::vector<ClipVerdict> verdicts;
  std::uint64_t seed = 0;
  /// Canonical JSON of the full configuration and its 64-bit FNV-1a hash.
  std::string config_json;
  std::string config_hash;
  /// Noise condition for robustness rows; +inf for clean.
  double snr_db = dataset::kNoNoise;
  std::size_t train_size = 0;
};

/// Clip-level features for every record, row i <-> records[i].
struct FeatureTable {
  features::FeatureConfig config;
  Matrix values;
  /// Rows whose clip was too short for the configured DWT level.
  std::vector<std::size_t> clamped_rows;
};

FeatureTable featurize_corpus(const std::vector<dataset::ClipRecord>& records, const features::FeatureConfig& cfg,
                              unsigned jobs = 1);

std::vector<int> labels_of(const std::vector<dataset::ClipRecord>& records);

/// Standardizer + SVM fitted on `train` rows only.
svm::TrainResult fit_model(const FeatureTable& table, const std::vector<int>& labels,
                           const std::vector<std::size_t>& train, const svm::SvmConfig& cfg);

EvalReport run_experiment(const std::vector<dataset::ClipRecord>& records, const FeatureTable& table,
                          dataset::Protocol protocol, const ExperimentConfig& cfg, std::uint64_t seed);

EvalReport run_experiment(const std::vector<dataset::ClipRecord>& records, dataset::Protocol protocol,
                          const ExperimentConfig& cfg, std::uint64_t seed, unsigned jobs = 1);

// -- frame-by-frame scan -------------------------------------------------------

enum class Composition { PureAcoustic, PureLaser, Bordering };

std::string to_string(Composition c);

struct FrameVerdict {
  std::size_t frame_index = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  int predicted = 0;
  double score = 0.0;
  Composition composition = Composition::PureAcoustic;
};

struct FrameScanResult {
  std::vector<FrameVerdict> frames;
  /// Fraction correct; a frame holding any laser audio should be flagged.
  /// Unset when no frames of that kind exist.
  std::optional<double> accuracy_all;
  std::optional<double> accuracy_bordering;
  std::optional<double> accuracy_non_bordering;
};

/// Composition of [start, end) relative to an acoustic-then-laser splice at
/// `boundary` (all in samples). Bordering iff start < boundary < end.
Composition frame_composition(std::size_t start, std::size_t end, std::size_t boundary);

/// Slides a t_f window with hop t_h over `composite` (acoustic audio before
/// boundary_s, laser after) and classifies each frame with `model`, using
/// the model's stored feature configuration.
FrameScanResult frame_scan(const svm::SvmModel& model, const audio::AudioBuffer& composite, double boundary_s,
                           double frame_s = 1.0, double hop_s = 0.5);

// -- pre-sensor noise robustness ----------------------------------------------

/// Trains once on clean training clips, then re-scores the test clips with
/// band-limited noise added at each SNR. Rows follow snr_list order.
std::vector<EvalReport> robustness_sweep(const std::vector<dataset::ClipRecord>& records,
                                         dataset::Protocol protocol, const ExperimentConfig& cfg,
                                         const std::vector<double>& snr_list_db, std::pair<double, double> band_hz,
                                         std::uint64_t seed, unsigned jobs = 1);

// -- reports ------------------------------------------------------------------

/// Column order of the machine-readable report.
inline constexpr const char* kReportCsvHeader = "protocol,scheme,accuracy,tp,fp,tn,fn,seed,config_hash";

std::string report_csv(const std::vector<EvalReport>& reports);
std::vector<EvalReport> parse_report_csv(const std::string& text);

/// Accuracy grid (schemes x protocols), averaging repeated seeds.
std::string report_table(const std::vector<EvalReport>& reports);

/// One JSON object per report with the configuration snapshot and
/// per-clip verdicts.
std::string report_jsonl(const std::vector<EvalReport>& reports);

/// Accuracy-vs-SNR table: "snr_db," followed by the report columns.
std::string robustness_csv(const std::vector<EvalReport>& rows);

/// Writes <base>.csv, <base>.txt and <base>.jsonl atomically.
void write_report(const std::vector<EvalReport>& reports, const std::filesystem::path& base);

inline constexpr const char* kFrameCsvHeader = "frame_index,start_s,label_pred,composition";
std::string frame_scan_csv(const FrameScanResult& result);

}  // namespace laserguard::eval
