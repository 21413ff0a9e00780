#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "io_util.hpp"
#include "laserguard/error.hpp"
#include "laserguard/eval.hpp"

namespace laserguard::eval {

namespace {

using nlohmann::json;

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string report_csv(const std::vector<EvalReport>& reports) {
  std::string out = std::string(kReportCsvHeader) + "\n";
  for (const auto& r : reports) {
    out += dataset::to_string(r.protocol) + "," + features::to_string(r.scheme) + "," +
           detail::format_double(r.accuracy) + "," + std::to_string(r.confusion.tp) + "," +
           std::to_string(r.confusion.fp) + "," + std::to_string(r.confusion.tn) + "," +
           std::to_string(r.confusion.fn) + "," + std::to_string(r.seed) + "," + r.config_hash + "\n";
  }
  return out;
}

std::vector<EvalReport> parse_report_csv(const std::string& text) {
  std::vector<EvalReport> out;
  const auto lines = detail::split(text, '\n');
  if (lines.empty() || detail::trim(lines[0]) != kReportCsvHeader) {
    throw Error(ErrorCode::MalformedRow, "report CSV header mismatch");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto line = detail::trim(lines[i]);
    if (line.empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != 9) throw Error(ErrorCode::MalformedRow, "report row " + std::to_string(i) + " has " + std::to_string(f.size()) + " fields");
    EvalReport r;
    try {
      r.protocol = dataset::parse_protocol(f[0]);
      r.scheme = features::parse_scheme(f[1]);
      r.accuracy = std::stod(f[2]);
      r.confusion = {std::stoull(f[3]), std::stoull(f[4]), std::stoull(f[5]), std::stoull(f[6])};
      r.seed = std::stoull(f[7]);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::MalformedRow, "report row " + std::to_string(i) + " has a bad number");
    }
    r.config_hash = f[8];
    out.push_back(std::move(r));
  }
  return out;
}

std::string report_table(const std::vector<EvalReport>& reports) {
  const features::Scheme scheme_order[] = {features::Scheme::DWT, features::Scheme::CQCC, features::Scheme::LFCC,
                                           features::Scheme::MFCC};
  const dataset::Protocol protocol_order[] = {dataset::Protocol::SD_TD, dataset::Protocol::SI_TD,
                                              dataset::Protocol::SI_TI};
  std::string out = "method       sd_td          si_td          si_ti\n";
  for (auto scheme : scheme_order) {
    bool any = false;
    std::string row = features::to_string(scheme) + "+svm";
    row.resize(13, ' ');
    for (auto protocol : protocol_order) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const auto& r : reports) {
        if (r.scheme == scheme && r.protocol == protocol) {
          sum += r.accuracy;
          ++n;
        }
      }
      std::string cell = "-";
      if (n > 0) {
        any = true;
        cell = fixed(sum / static_cast<double>(n), 3);
        if (n > 1) cell += " (n=" + std::to_string(n) + ")";
      }
      cell.resize(15, ' ');
      row += cell;
    }
    if (any) out += detail::trim(row) + "\n";
  }
  return out;
}

std::string report_jsonl(const std::vector<EvalReport>& reports) {
  std::string out;
  for (const auto& r : reports) {
    json j;
    j["protocol"] = dataset::to_string(r.protocol);
    j["scheme"] = features::to_string(r.scheme);
    j["accuracy"] = r.accuracy;
    j["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn}, {"fn", r.confusion.fn}};
    j["seed"] = r.seed;
    j["snr_db"] = std::isinf(r.snr_db) ? json(nullptr) : json(r.snr_db);
    j["train_size"] = r.train_size;
    j["config"] = r.config_json.empty() ? json(nullptr) : json::parse(r.config_json);
    j["config_hash"] = r.config_hash;
    json verdicts = json::array();
    for (const auto& v : r.verdicts) {
      verdicts.push_back({{"clip_id", v.clip_id}, {"truth", v.truth}, {"predicted", v.predicted}, {"score", v.score}});
    }
    j["verdicts"] = std::move(verdicts);
    out += j.dump() + "\n";
  }
  return out;
}

std::string robustness_csv(const std::vector<EvalReport>& rows) {
  const std::string body = report_csv(rows);
  const auto lines = detail::split(body, '\n');
  std::string out = "snr_db," + lines[0] + "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string snr = std::isinf(rows[i].snr_db) ? "inf" : detail::format_double(rows[i].snr_db);
    out += snr + "," + lines[i + 1] + "\n";
  }
  return out;
}

void write_report(const std::vector<EvalReport>& reports, const std::filesystem::path& base) {
  auto with_ext = [&](const char* ext) {
    auto p = base;
    p += ext;
    return p;
  };
  detail::write_file_atomic(with_ext(".csv"), report_csv(reports));
  detail::write_file_atomic(with_ext(".txt"), report_table(reports));
  detail::write_file_atomic(with_ext(".jsonl"), report_jsonl(reports));
}

std::string frame_scan_csv(const FrameScanResult& result) {
  std::string out = std::string(kFrameCsvHeader) + "\n";
  for (const auto& f : result.frames) {
    out += std::to_string(f.frame_index) + "," + detail::format_double(f.start_s) + "," +
           dataset::to_string(f.predicted > 0 ? dataset::Label::Laser : dataset::Label::Acoustic) + "," +
           to_string(f.composition) + "\n";
  }
  return out;
}

}  // namespace laserguard::eval
