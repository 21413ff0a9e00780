#include "laserguard/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "fft.hpp"
#include "io_util.hpp"
#include "laserguard/error.hpp"
#include "laserguard/random.hpp"

namespace laserguard::dataset {

namespace {

constexpr std::string_view kManifestHeader = "clip_id,speaker_id,utterance_id,label,path";
constexpr int kSiSpeakers = 19;
constexpr int kSiTrainSpeakers = 14;
constexpr int kSiUtterances = 5;
constexpr int kSiTrainUtterances = 3;

int parse_positive(const std::string& field, const std::string& what, std::size_t line_no) {
  const std::string t = detail::trim(field);
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != t.size() || v < 1) {
    throw Error(ErrorCode::MalformedRow,
                "line " + std::to_string(line_no) + ": " + what + " '" + t + "' is not a positive integer");
  }
  return v;
}

}  // namespace

std::string to_string(Label l) { return l == Label::Laser ? "laser" : "acoustic"; }

Label parse_label(const std::string& s) {
  std::string lower = detail::trim(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "acoustic") return Label::Acoustic;
  if (lower == "laser") return Label::Laser;
  throw Error(ErrorCode::UnknownLabel, "label '" + s + "'");
}

int to_sign(Label l) { return l == Label::Laser ? +1 : -1; }

std::string to_string(Protocol p) {
  switch (p) {
    case Protocol::SD_TD: return "sd_td";
    case Protocol::SI_TD: return "si_td";
    case Protocol::SI_TI: return "si_ti";
  }
  return "sd_td";
}

Protocol parse_protocol(const std::string& s) {
  std::string lower = s;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "sd_td") return Protocol::SD_TD;
  if (lower == "si_td") return Protocol::SI_TD;
  if (lower == "si_ti") return Protocol::SI_TI;
  throw Error(ErrorCode::InvalidArgument, "unknown protocol '" + s + "'");
}

std::vector<ClipRecord> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, path.string());
  const auto base = path.parent_path();

  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<ClipRecord> records;
  std::set<std::string> ids;
  std::set<std::tuple<int, int, Label>> keys;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (!header_seen) {
      if (t != kManifestHeader) {
        throw Error(ErrorCode::MalformedRow, path.string() + ": expected header '" + std::string(kManifestHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = detail::split(t, ',');
    if (fields.size() != 5) {
      throw Error(ErrorCode::MalformedRow,
                  "line " + std::to_string(line_no) + ": expected 5 fields, got " + std::to_string(fields.size()));
    }
    ClipRecord r;
    r.clip_id = detail::trim(fields[0]);
    if (r.clip_id.empty()) throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": empty clip_id");
    r.speaker_id = parse_positive(fields[1], "speaker_id", line_no);
    r.utterance_id = parse_positive(fields[2], "utterance_id", line_no);
    r.label = parse_label(fields[3]);
    const std::filesystem::path p = detail::trim(fields[4]);
    if (p.empty()) throw Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": empty path");
    r.path = p.is_absolute() || base.empty() ? p : base / p;

    if (!ids.insert(r.clip_id).second) throw Error(ErrorCode::DuplicateKey, "clip_id " + r.clip_id);
    if (!keys.insert({r.speaker_id, r.utterance_id, r.label}).second) {
      throw Error(ErrorCode::DuplicateKey, "speaker " + std::to_string(r.speaker_id) + " utterance " +
                                               std::to_string(r.utterance_id) + " " + to_string(r.label));
    }
    records.push_back(std::move(r));
  }
  if (!header_seen) throw Error(ErrorCode::MalformedRow, path.string() + ": missing header");
  return records;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ClipRecord>& records) {
  const auto base = path.parent_path();
  std::ostringstream out;
  out << kManifestHeader << '\n';
  for (const auto& r : records) {
    std::filesystem::path p = r.path;
    if (!base.empty()) {
      const auto rel = p.lexically_relative(base);
      if (!rel.empty() && *rel.begin() != "..") p = rel;
    }
    out << r.clip_id << ',' << r.speaker_id << ',' << r.utterance_id << ',' << to_string(r.label) << ','
        << p.generic_string() << '\n';
  }
  detail::write_file_atomic(path, out.str());
}

Partition make_partition(const std::vector<ClipRecord>& records, Protocol protocol, std::uint64_t seed) {
  Partition part;
  part.protocol = protocol;
  const std::size_t n = records.size();

  if (protocol == Protocol::SD_TD) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed({seed, 0x5344}));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    const std::size_t n_train = (7 * n) / 10;
    part.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    part.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(part.train.begin(), part.train.end());
    std::sort(part.test.begin(), part.test.end());
    return part;
  }

  std::set<int> speakers;
  std::set<int> utterances;
  std::set<std::tuple<int, int, Label>> keys;
  for (const auto& r : records) {
    speakers.insert(r.speaker_id);
    utterances.insert(r.utterance_id);
    keys.insert({r.speaker_id, r.utterance_id, r.label});
  }
  const bool complete = speakers.size() == kSiSpeakers && utterances.size() == kSiUtterances &&
                        keys.size() == static_cast<std::size_t>(kSiSpeakers * kSiUtterances * 2) &&
                        n == keys.size();
  if (!complete) {
    throw Error(ErrorCode::IncompleteCorpus,
                to_string(protocol) + " needs 19 speakers x 5 utterances x 2 labels; got " +
                    std::to_string(speakers.size()) + " speakers, " + std::to_string(utterances.size()) +
                    " utterances, " + std::to_string(n) + " clips");
  }
  const std::vector<int> spk(speakers.begin(), speakers.end());
  const std::vector<int> utt(utterances.begin(), utterances.end());
  const std::set<int> train_spk(spk.begin(), spk.begin() + kSiTrainSpeakers);
  const std::set<int> train_utt(utt.begin(), utt.begin() + kSiTrainUtterances);

  for (std::size_t i = 0; i < n; ++i) {
    const bool spk_train = train_spk.count(records[i].speaker_id) > 0;
    if (protocol == Protocol::SI_TD) {
      (spk_train ? part.train : part.test).push_back(i);
    } else {
      const bool utt_train = train_utt.count(records[i].utterance_id) > 0;
      if (spk_train && utt_train) part.train.push_back(i);
      else if (!spk_train && !utt_train) part.test.push_back(i);
    }
  }
  return part;
}

audio::AudioBuffer add_colored_noise(const audio::AudioBuffer& buf, std::pair<double, double> band_hz,
                                     double snr_db, std::uint64_t seed) {
  const double nyquist = buf.sample_rate() / 2.0;
  const auto [low, high] = band_hz;
  if (!(low >= 0.0) || !(low < high) || !(high <= nyquist)) {
    throw Error(ErrorCode::InvalidBand, "need 0 <= low < high <= " + detail::format_double(nyquist) + " Hz");
  }
  if (std::isinf(snr_db) && snr_db > 0) return buf;
  if (std::isnan(snr_db)) throw Error(ErrorCode::InvalidArgument, "SNR is NaN");
  if (buf.empty()) throw Error(ErrorCode::EmptyAudio, "cannot add noise to an empty buffer");

  const std::size_t n = buf.size();
  Rng rng(seed);
  std::vector<double> white(n);
  for (double& v : white) v = rng.normal();

  detail::RealFft fft(n);
  const auto spec = fft.forward(white);
  std::vector<std::complex<double>> masked(spec.begin(), spec.end());
  for (std::size_t k = 0; k < masked.size(); ++k) {
    const double f = static_cast<double>(k) * buf.sample_rate() / static_cast<double>(n);
    if (f < low || f > high) masked[k] = 0.0;
  }
  const auto shaped = fft.inverse(masked);

  const auto x = buf.samples();
  double signal_power = 0.0;
  double noise_power = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    signal_power += x[i] * x[i];
    noise_power += shaped[i] * shaped[i];
  }
  signal_power /= static_cast<double>(n);
  noise_power /= static_cast<double>(n);
  const double gain =
      noise_power > 0.0 ? std::sqrt(signal_power / std::pow(10.0, snr_db / 10.0) / noise_power) : 0.0;

  std::vector<double> out(n);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = x[i] + gain * shaped[i];
    peak = std::max(peak, std::abs(out[i]));
  }
  if (peak > 1.0) {
    for (double& v : out) v /= peak;
  }
  return audio::AudioBuffer(std::move(out), buf.sample_rate());
}

audio::AudioBuffer splice(const audio::AudioBuffer& head, const audio::AudioBuffer& tail, double boundary_s) {
  if (head.sample_rate() != tail.sample_rate()) {
    throw Error(ErrorCode::InvalidArgument, "cannot splice clips with different sample rates");
  }
  const auto cut = static_cast<std::size_t>(std::llround(boundary_s * head.sample_rate()));
  if (!(boundary_s > 0.0) || cut > head.size()) {
    throw Error(ErrorCode::InvalidArgument, "boundary lies outside the head clip");
  }
  std::vector<double> out(head.samples().begin(), head.samples().begin() + static_cast<std::ptrdiff_t>(cut));
  out.insert(out.end(), tail.samples().begin(), tail.samples().end());
  return audio::AudioBuffer(std::move(out), head.sample_rate());
}

}  // namespace laserguard::dataset
