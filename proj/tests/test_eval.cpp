#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

#include <json.hpp>
#include <set>
#include <sstream>

#include "laserguard/eval.hpp"

using namespace laserguard;
using dataset::Label;
using dataset::Protocol;
using eval::Composition;

namespace {

const eval::FeatureTable& dwt_table() {
  static const auto table = eval::featurize_corpus(testing::default_corpus(), features::FeatureConfig{}, 4);
  return table;
}

const svm::SvmModel& full_model() {
  static const auto model = [] {
    const auto& recs = testing::default_corpus();
    std::vector<std::size_t> all(recs.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return eval::fit_model(dwt_table(), eval::labels_of(recs), all, svm::SvmConfig{}).model;
  }();
  return model;
}

// Acoustic head from one clip, laser tail from another, boundary where
// the head is cut.
audio::AudioBuffer composite(double boundary_s) {
  const auto& recs = testing::default_corpus();
  const auto head = audio::load_canonical(recs[0].path);  // s01_u1_acoustic
  const auto tail = audio::load_canonical(recs[3].path);  // s01_u2_laser
  REQUIRE(recs[0].label == Label::Acoustic);
  REQUIRE(recs[3].label == Label::Laser);
  const auto first = dataset::splice(head, head, 3.0);  // 6 s of acoustic audio
  return dataset::splice(first, tail, boundary_s);
}

void check_report_invariants(const eval::EvalReport& r, std::size_t test_size) {
  CHECK(r.confusion.total() == test_size);
  CHECK(r.verdicts.size() == test_size);
  CHECK(r.accuracy == static_cast<double>(r.confusion.tp + r.confusion.tn) / static_cast<double>(r.confusion.total()));
  eval::Confusion recount;
  for (const auto& v : r.verdicts) recount.add(v.truth, v.predicted);
  CHECK(recount == r.confusion);
}

}  // namespace

TEST_CASE("confusion counts with laser as positive") {
  eval::Confusion c;
  CHECK(c.accuracy() == 0.0);
  c.add(+1, +1);
  c.add(+1, -1);
  c.add(-1, -1);
  c.add(-1, -1);
  c.add(-1, +1);
  CHECK(c.tp == 1);
  CHECK(c.fn == 1);
  CHECK(c.tn == 2);
  CHECK(c.fp == 1);
  CHECK(c.total() == 5);
  CHECK(c.accuracy() == 3.0 / 5.0);
}

TEST_CASE("feature config json round trip") {
  features::FeatureConfig cfg;
  cfg.scheme = features::Scheme::LFCC;
  cfg.wavelet.family = dwt::Family::Haar;
  cfg.wavelet.level = 3;
  cfg.wavelet.boundary = dwt::Boundary::ZeroPad;
  cfg.cepstral.n_filters = 30;
  cfg.cepstral.n_coeffs = 13;
  const auto back = eval::feature_config_from_json(eval::feature_config_json(cfg));
  CHECK(eval::feature_config_json(back) == eval::feature_config_json(cfg));
  CHECK(back.scheme == features::Scheme::LFCC);
  CHECK(back.wavelet.level == 3);
  CHECK(back.cepstral.n_coeffs == 13);
  CHECK_ERROR_CODE(eval::feature_config_from_json("{not json"), ErrorCode::CorruptModel);
}

TEST_CASE("experiment reports are consistent and deterministic") {
  const auto& recs = testing::default_corpus();
  const auto& table = dwt_table();
  CHECK(table.values.rows() == 190);
  CHECK(table.values.cols() == features::FeatureConfig{}.dim());
  eval::ExperimentConfig cfg;
  const std::pair<Protocol, std::size_t> cases[] = {{Protocol::SD_TD, 57}, {Protocol::SI_TD, 50}, {Protocol::SI_TI, 20}};
  for (const auto& [proto, n_test] : cases) {
    const auto r = eval::run_experiment(recs, table, proto, cfg, 11);
    check_report_invariants(r, n_test);
    CHECK(r.train_size == 190 - n_test - (proto == Protocol::SI_TI ? 86 : 0));
    CHECK(r.protocol == proto);
    CHECK(r.seed == 11);
    CHECK(r.config_hash.size() == 16);
    CHECK(r.accuracy >= 0.9);

    const auto again = eval::run_experiment(recs, table, proto, cfg, 11);
    CHECK(again.accuracy == r.accuracy);
    CHECK(again.confusion == r.confusion);
    CHECK(again.config_hash == r.config_hash);
    for (std::size_t i = 0; i < r.verdicts.size(); ++i) CHECK(again.verdicts[i].score == r.verdicts[i].score);
  }
}

TEST_CASE("config hash tracks the configuration") {
  const auto& recs = testing::default_corpus();
  eval::ExperimentConfig a, b;
  b.svm.C = 10.0;
  const auto ra = eval::run_experiment(recs, dwt_table(), Protocol::SI_TI, a, 1);
  const auto rb = eval::run_experiment(recs, dwt_table(), Protocol::SI_TI, b, 1);
  CHECK(ra.config_hash != rb.config_hash);
  const auto j = nlohmann::json::parse(ra.config_json);
  CHECK(j.contains("features"));
  CHECK(j.contains("svm"));
}

TEST_CASE("the featurizing overload agrees with a precomputed table") {
  const auto& recs = testing::default_corpus();
  eval::ExperimentConfig cfg;
  const auto direct = eval::run_experiment(recs, Protocol::SI_TI, cfg, 3, 2);
  const auto cached = eval::run_experiment(recs, dwt_table(), Protocol::SI_TI, cfg, 3);
  CHECK(direct.confusion == cached.confusion);
  CHECK(direct.config_hash == cached.config_hash);
}

TEST_CASE("resubstitution on the synthetic corpus") {
  eval::ExperimentConfig cfg;
  cfg.resubstitution = true;
  const auto r = eval::run_experiment(testing::default_corpus(), dwt_table(), Protocol::SD_TD, cfg, 1);
  CHECK(r.confusion.total() == 133);
  CHECK(r.accuracy >= 0.99);
}

TEST_CASE("property: test rows never influence the fitted model") {
  const auto& recs = testing::default_corpus();
  const auto labels = eval::labels_of(recs);
  Rng rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const auto part = dataset::make_partition(recs, Protocol::SD_TD, rng.next());
    auto poisoned = dwt_table();
    for (auto i : part.test)
      for (auto& v : poisoned.values.row(i)) v = rng.uniform(-1e3, 1e3);
    const auto clean = eval::fit_model(dwt_table(), labels, part.train, svm::SvmConfig{});
    const auto dirty = eval::fit_model(poisoned, labels, part.train, svm::SvmConfig{});
    CHECK(svm::serialize(clean.model) == svm::serialize(dirty.model));
  }
}

TEST_CASE("leakage guard trips on a clip id shared by train and test") {
  auto recs = testing::default_corpus();
  for (auto& r : recs) r.clip_id = "same";
  eval::FeatureTable table;
  table.values = Matrix(recs.size(), 18);
  CHECK_ERROR_CODE(eval::run_experiment(recs, table, Protocol::SD_TD, {}, 1), ErrorCode::LeakageDetected);

  eval::FeatureTable short_table;
  short_table.values = Matrix(10, 18);
  CHECK_ERROR_CODE(eval::run_experiment(testing::default_corpus(), short_table, Protocol::SD_TD, {}, 1),
                   ErrorCode::DimensionMismatch);
}

TEST_CASE("frame composition by interval arithmetic") {
  CHECK(eval::frame_composition(0, 16000, 48000) == Composition::PureAcoustic);
  CHECK(eval::frame_composition(32000, 48000, 48000) == Composition::PureAcoustic);
  CHECK(eval::frame_composition(48000, 64000, 48000) == Composition::PureLaser);
  CHECK(eval::frame_composition(40000, 56000, 48000) == Composition::Bordering);
  CHECK(eval::to_string(Composition::Bordering) == "bordering");
}

TEST_CASE("property: composition agrees with a brute-force sample count") {
  Rng rng(8);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t start = rng.below(200);
    const std::size_t end = start + 1 + rng.below(100);
    const std::size_t boundary = rng.below(400);
    std::size_t before = 0, after = 0;
    for (std::size_t s = start; s < end; ++s) (s < boundary ? before : after)++;
    const auto expect = after == 0 ? Composition::PureAcoustic
                        : before == 0 ? Composition::PureLaser
                                      : Composition::Bordering;
    CHECK(eval::frame_composition(start, end, boundary) == expect);
  }
}

TEST_CASE("frame count formula") {
  Rng rng(9);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t frame = 1 + rng.below(5000);
    const std::size_t hop = 1 + rng.below(3000);
    const std::size_t n = frame + rng.below(100000);
    CHECK(features::frame_count(n, frame, hop) == (n - frame) / hop + 1);
  }
}

TEST_CASE("frame scan with the boundary on the hop lattice") {
  const auto clip = composite(3.0);
  REQUIRE(clip.duration_s() == doctest::Approx(6.0));
  const auto res = eval::frame_scan(full_model(), clip, 3.0);
  REQUIRE(res.frames.size() == 11);
  std::size_t bordering = 0;
  for (const auto& f : res.frames) {
    CHECK(f.end_s - f.start_s == doctest::Approx(1.0));
    CHECK(f.start_s == doctest::Approx(0.5 * static_cast<double>(f.frame_index)));
    if (f.composition == Composition::Bordering) {
      ++bordering;
      CHECK(f.start_s == doctest::Approx(2.5));
    }
    if (f.start_s >= 3.0) CHECK(f.composition == Composition::PureLaser);
    if (f.end_s <= 3.0) CHECK(f.composition == Composition::PureAcoustic);
  }
  CHECK(bordering == 1);
  REQUIRE(res.accuracy_all.has_value());
  REQUIRE(res.accuracy_bordering.has_value());
  REQUIRE(res.accuracy_non_bordering.has_value());
  std::size_t right = 0, right_nb = 0, n_nb = 0;
  for (const auto& f : res.frames) {
    const bool ok = f.predicted == (f.composition == Composition::PureAcoustic ? svm::kAcoustic : svm::kLaser);
    right += ok;
    if (f.composition != Composition::Bordering) {
      ++n_nb;
      right_nb += ok;
    }
  }
  CHECK(*res.accuracy_all == static_cast<double>(right) / 11.0);
  CHECK(*res.accuracy_non_bordering == static_cast<double>(right_nb) / static_cast<double>(n_nb));

  const auto csv = eval::frame_scan_csv(res);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == eval::kFrameCsvHeader);
  std::size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 11);
  CHECK(csv.find("\n5,2.5,") != std::string::npos);
}

TEST_CASE("frame scan with the boundary off the lattice") {
  const auto clip = composite(2.75);
  const auto res = eval::frame_scan(full_model(), clip, 2.75);
  CHECK(res.frames.size() == 10);  // floor((5.75 - 1) / 0.5) + 1
  std::vector<double> starts;
  for (const auto& f : res.frames)
    if (f.composition == Composition::Bordering) starts.push_back(f.start_s);
  REQUIRE(starts.size() == 2);
  CHECK(starts[0] == doctest::Approx(2.0));
  CHECK(starts[1] == doctest::Approx(2.5));
}

TEST_CASE("frame scan errors") {
  const audio::AudioBuffer tiny(std::vector<double>(8000, 0.1), 16000);
  CHECK_ERROR_CODE(eval::frame_scan(full_model(), tiny, 0.25), ErrorCode::ClipTooShort);
  const auto clip = composite(3.0);
  CHECK_ERROR_CODE(eval::frame_scan(full_model(), clip, 7.0), ErrorCode::InvalidArgument);
  CHECK_ERROR_CODE(eval::frame_scan(full_model(), clip, 3.0, 1.0, 0.0), ErrorCode::InvalidArgument);
}

TEST_CASE("robustness sweep keeps the clean row exact") {
  const auto& recs = testing::default_corpus();
  eval::ExperimentConfig cfg;
  const auto clean = eval::run_experiment(recs, dwt_table(), Protocol::SI_TI, cfg, 5);
  const auto rows =
      eval::robustness_sweep(recs, Protocol::SI_TI, cfg, {dataset::kNoNoise, 20.0, 0.0}, {0.0, 2000.0}, 5, 2);
  REQUIRE(rows.size() == 3);
  CHECK(std::isinf(rows[0].snr_db));
  CHECK(rows[1].snr_db == 20.0);
  CHECK(rows[2].snr_db == 0.0);
  CHECK(rows[0].accuracy == clean.accuracy);
  CHECK(rows[0].confusion == clean.confusion);
  REQUIRE(rows[0].verdicts.size() == clean.verdicts.size());
  for (std::size_t i = 0; i < clean.verdicts.size(); ++i) {
    CHECK(rows[0].verdicts[i].clip_id == clean.verdicts[i].clip_id);
    CHECK(rows[0].verdicts[i].score == clean.verdicts[i].score);
  }
  for (const auto& r : rows) check_report_invariants(r, 20);

  const auto csv = eval::robustness_csv(rows);
  CHECK(csv.rfind(std::string("snr_db,") + eval::kReportCsvHeader + "\n", 0) == 0);
  CHECK(csv.find("\ninf,si_ti,dwt,") != std::string::npos);
  CHECK(csv.find("\n20,si_ti,dwt,") != std::string::npos);
}

TEST_CASE("report csv round trip") {
  Rng rng(10);
  std::vector<eval::EvalReport> reports;
  for (int i = 0; i < 12; ++i) {
    eval::EvalReport r;
    r.protocol = static_cast<Protocol>(i % 3);
    r.scheme = static_cast<features::Scheme>(i / 3);
    r.confusion = {rng.below(30), rng.below(30), rng.below(30), rng.below(30) + 1};
    r.accuracy = r.confusion.accuracy();
    r.seed = rng.next();
    r.config_hash = "00112233445566" + std::to_string(10 + i);
    reports.push_back(r);
  }
  const auto back = eval::parse_report_csv(eval::report_csv(reports));
  REQUIRE(back.size() == reports.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].protocol == reports[i].protocol);
    CHECK(back[i].scheme == reports[i].scheme);
    CHECK(back[i].accuracy == reports[i].accuracy);
    CHECK(back[i].confusion == reports[i].confusion);
    CHECK(back[i].seed == reports[i].seed);
    CHECK(back[i].config_hash == reports[i].config_hash);
  }
  CHECK_ERROR_CODE(eval::parse_report_csv("nope\n"), ErrorCode::MalformedRow);
  CHECK_ERROR_CODE(eval::parse_report_csv(std::string(eval::kReportCsvHeader) + "\nsd_td,dwt,1\n"),
                   ErrorCode::MalformedRow);

  // 4 schemes x 3 protocols
  const auto table = eval::report_table(reports);
  std::istringstream in(table);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 5);
  CHECK(lines[0].find("sd_td") != std::string::npos);
  CHECK(lines[0].find("si_ti") != std::string::npos);
  const char* methods[] = {"dwt+svm", "cqcc+svm", "lfcc+svm", "mfcc+svm"};
  for (int i = 0; i < 4; ++i) {
    CHECK(lines[static_cast<std::size_t>(i) + 1].rfind(methods[i], 0) == 0);
    std::istringstream cells(lines[static_cast<std::size_t>(i) + 1]);
    std::string tok;
    int n = 0;
    while (cells >> tok) ++n;
    CHECK(n == 4);
  }
}

TEST_CASE("table averages repeated seeds") {
  std::vector<eval::EvalReport> reports(2);
  reports[0].accuracy = 0.9;
  reports[1].accuracy = 1.0;
  reports[1].seed = 2;
  const auto t = eval::report_table(reports);
  CHECK(t.find("0.950 (n=2)") != std::string::npos);
}

TEST_CASE("write_report writes all three files, or fails with the path") {
  testing::TempDir dir;
  eval::ExperimentConfig cfg;
  const auto r = eval::run_experiment(testing::default_corpus(), dwt_table(), Protocol::SI_TI, cfg, 1);
  eval::write_report({r}, dir / "table1");
  CHECK(eval::parse_report_csv(testing::read_text(dir / "table1.csv")).size() == 1);
  CHECK(testing::read_text(dir / "table1.txt").find("dwt+svm") != std::string::npos);
  const auto j = nlohmann::json::parse(testing::read_text(dir / "table1.jsonl"));
  CHECK(j["verdicts"].size() == 20);
  CHECK(j["snr_db"].is_null());
  CHECK(j["config"]["svm"]["gamma"] == "scale");

  const auto missing = dir / "no" / "such" / "dir" / "table1";
  bool thrown = false;
  try {
    eval::write_report({r}, missing);
  } catch (const Error& e) {
    thrown = true;
    CHECK(e.code() == ErrorCode::IoError);
    CHECK(std::string(e.what()).find("no/such/dir") != std::string::npos);
  }
  CHECK(thrown);
}
