#include "krf/run_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <ctime>
#include <limits>
#include <deque>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "krf/errors.hpp"
#include "krf/gauge.hpp"

#ifndef KRF_VERSION
#define KRF_VERSION "0.0.0"
#endif

namespace krf {
namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) raise(ErrorCode::IoError, "cannot open '" + p.string() + "' for writing");
  f << text;
  f.flush();
  if (!f) raise(ErrorCode::IoError, "write failed for '" + p.string() + "'");
}

FileEntry describe(const fs::path& dir, const fs::path& rel) {
  FileEntry e;
  e.path = rel.generic_string();
  e.bytes = fs::file_size(dir / rel);
  e.sha256 = sha256_hex(dir / rel);
  return e;
}

nlohmann::ordered_json to_json(const FileEntry& e) {
  nlohmann::ordered_json j;
  j["path"] = e.path;
  j["bytes"] = e.bytes;
  j["sha256"] = e.sha256;
  return j;
}

// Single-consumer writer fed through a bounded queue.  push() blocks while
// the queue is full, so memory stays bounded when integration outruns I/O.
class SeriesWriter {
 public:
  struct Job {
    std::string csv, jsonl;    // appended to the series files when non-empty
    fs::path file;             // written whole when non-empty
    std::string file_text;
  };

  SeriesWriter(const fs::path& dir, int n, std::size_t capacity)
      : dir_(dir), capacity_(capacity),
        csv_(dir / "series.csv", std::ios::binary | std::ios::trunc),
        jsonl_(dir / "series.jsonl", std::ios::binary | std::ios::trunc) {
    if (!csv_ || !jsonl_) raise(ErrorCode::IoError, "cannot create series files in '" + dir.string() + "'");
    csv_ << csv_header_line(n);
    worker_ = std::thread([this] { loop(); });
  }

  ~SeriesWriter() {
    if (!worker_.joinable()) return;
    try {
      finish();
    } catch (...) {
    }
  }

  void push(Job job) {
    std::unique_lock lk(mu_);
    not_full_.wait(lk, [&] { return q_.size() < capacity_; });
    q_.push_back(std::move(job));
    not_empty_.notify_one();
  }

  // Drains the queue and joins; rethrows the first write failure.
  void finish() {
    {
      std::lock_guard lk(mu_);
      done_ = true;
    }
    not_empty_.notify_one();
    worker_.join();
    csv_.flush();
    jsonl_.flush();
    if (!csv_ || !jsonl_) error_ = error_.empty() ? "write failed for series files" : error_;
    if (!error_.empty()) raise(ErrorCode::IoError, error_);
  }

 private:
  void loop() {
    for (;;) {
      Job job;
      {
        std::unique_lock lk(mu_);
        not_empty_.wait(lk, [&] { return done_ || !q_.empty(); });
        if (q_.empty()) return;
        job = std::move(q_.front());
        q_.pop_front();
        not_full_.notify_one();
      }
      if (!error_.empty()) continue;
      try {
        if (!job.csv.empty()) csv_ << job.csv;
        if (!job.jsonl.empty()) jsonl_ << job.jsonl;
        if (!job.file.empty()) write_text(dir_ / job.file, job.file_text);
      } catch (const std::exception& e) {
        error_ = e.what();
      }
    }
  }

  fs::path dir_;
  std::size_t capacity_;
  std::ofstream csv_, jsonl_;
  std::deque<Job> q_;
  std::mutex mu_;
  std::condition_variable not_full_, not_empty_;
  bool done_ = false;
  std::string error_;
  std::thread worker_;
};

std::string profile_text(const RadialProfile& p) {
  std::ostringstream os;
  write_profile(os, p);
  return os.str();
}

nlohmann::ordered_json config_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["n"] = c.n;
  j["ell"] = c.ell;
  j["N"] = c.N;
  j["initial"] = c.initial;
  j["modes"] = c.modes;
  j["amplitude"] = c.amplitude;
  j["seed"] = c.seed;
  j["flow_kind"] = to_string(c.flow_kind);
  j["scheme"] = to_string(c.scheme);
  j["t_final"] = c.t_final;
  j["sample_dt"] = c.sample_dt;
  j["stop_tol"] = c.stop_tol;
  j["C_cfl"] = c.C_cfl;
  j["checkpoint_every"] = c.checkpoint_every;
  j["output_dir"] = c.output_dir;
  return j;
}

nlohmann::ordered_json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::string sha256_hex(const fs::path& file) {
  std::ifstream f(file, std::ios::binary);
  if (!f) raise(ErrorCode::IoError, "cannot read '" + file.string() + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    raise(ErrorCode::Internal, "SHA-256 initialisation failed");
  }
  char buf[1 << 16];
  while (f) {
    f.read(buf, sizeof buf);
    if (f.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(f.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char h[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(h, sizeof h, "%02x", md[i]);
    hex += h;
  }
  return hex;
}

std::string code_version() { return std::string("krflab ") + KRF_VERSION; }

fs::path resolve_output_dir(const RunConfig& c) {
  fs::path d(c.output_dir);
  if (const char* root = std::getenv(kOutputRootEnv); root && *root && d.is_relative()) return fs::path(root) / d;
  return d;
}

std::string csv_header_line(int n) {
  std::string s;
  const auto h = DiagnosticsRecord::csv_header(n);
  for (std::size_t i = 0; i < h.size(); ++i) s += (i ? "," : "") + h[i];
  return s + "\n";
}

std::string csv_line(const DiagnosticsRecord& r) {
  std::string s;
  char buf[40];
  const auto row = r.csv_row();
  for (std::size_t i = 0; i < row.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", row[i]);
    if (i) s += ',';
    s += buf;
  }
  return s + "\n";
}

std::string jsonl_line(const DiagnosticsRecord& r) { return r.to_json().dump() + "\n"; }

std::vector<FileEntry> emit_series(std::span<const DiagnosticsRecord> records, int n, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) raise(ErrorCode::IoError, "cannot create '" + dir.string() + "': " + ec.message());
  std::string csv = csv_header_line(n), jsonl;
  for (const auto& r : records) {
    csv += csv_line(r);
    jsonl += jsonl_line(r);
  }
  write_text(dir / "series.csv", csv);
  write_text(dir / "series.jsonl", jsonl);
  return {describe(dir, "series.csv"), describe(dir, "series.jsonl")};
}

ExecuteResult execute(const RunConfig& c, std::ostream& log) {
  ExecuteResult res;
  const std::string start = utc_now();
  const fs::path dir = resolve_output_dir(c);
  res.run_dir = dir;

  // Setup failures happen before any output exists: no manifest.
  RunSpec spec;
  try {
    validate(c);
    spec = to_run_spec(c);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) raise(ErrorCode::IoError, "cannot create output directory '" + dir.string() + "': " + ec.message());
    fs::remove(dir / "manifest.json", ec);
    if (c.checkpoint_every > 0) {
      fs::create_directories(dir / "checkpoints", ec);
      if (ec) raise(ErrorCode::IoError, "cannot create checkpoint directory: " + ec.message());
    }
    write_text(dir / "config.ini", to_ini(c));
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    res.exit_code = static_cast<int>(e.code());
    res.termination = to_string(Termination::error);
    return res;
  }

  std::vector<fs::path> produced = {"config.ini", "series.csv", "series.jsonl"};
  std::vector<double> ts, grads;
  DiagnosticsRecord last;
  bool have_last = false;
  RunSummary summary;
  nlohmann::ordered_json err = nullptr;
  int samples = 0;

  auto fail = [&](ErrorCode code, const std::string& what) {
    log << "error: " << what << "\n";
    res.exit_code = static_cast<int>(code);
    res.termination = to_string(Termination::error);
    err = {{"code", static_cast<int>(code)}, {"name", error_name(code)}, {"message", what}};
  };

  try {
    SeriesWriter writer(dir, c.n, 16);
    try {
      summary = run(spec, [&](const FlowState& s) {
        const auto gs = gauge_fit(*s.profile);
        DiagnosticsRecord d = monitors(s, gs);
        SeriesWriter::Job job;
        job.csv = csv_line(d);
        job.jsonl = jsonl_line(d);
        if (c.checkpoint_every > 0 && samples % c.checkpoint_every == 0) {
          char name[48];
          std::snprintf(name, sizeof name, "checkpoints/ckpt_%06d.prof", samples);
          job.file = name;
          job.file_text = profile_text(*s.profile);
          produced.push_back(name);
        }
        writer.push(std::move(job));
        ts.push_back(d.t);
        grads.push_back(d.grad_phidot);
        last = std::move(d);
        have_last = true;
        ++samples;
        return true;
      });
      res.termination = to_string(summary.reason);
      SeriesWriter::Job fin;
      fin.file = "final.prof";
      fin.file_text = profile_text(*summary.final_state.profile);
      produced.push_back("final.prof");
      writer.push(std::move(fin));
    } catch (const Error& e) {
      fail(e.code(), e.what());
    } catch (const std::exception& e) {
      fail(ErrorCode::Internal, e.what());
    }
    writer.finish();
  } catch (const Error& e) {
    // Output directory not writable: nothing trustworthy to describe.
    log << "error: " << e.what() << "\n";
    res.exit_code = static_cast<int>(e.code());
    res.termination = to_string(Termination::error);
    return res;
  }

  double alpha = std::numeric_limits<double>::quiet_NaN();
  try {
    alpha = exp_fit(ts, grads);
  } catch (const Error&) {
  }

  nlohmann::ordered_json m;
  m["code_version"] = code_version();
  m["config"] = config_json(c);
  m["start_time"] = start;
  m["end_time"] = utc_now();
  m["termination"] = res.termination;
  m["error"] = err;
  m["samples"] = samples;
  m["steps"] = summary.steps;
  m["rejections"] = summary.rejections;
  nlohmann::ordered_json head;
  head["final_t"] = have_last ? number_or_null(last.t) : nullptr;
  head["final_E1"] = have_last && last.E.size() > 1 ? number_or_null(last.E[1]) : nullptr;
  head["final_pinch"] = have_last ? number_or_null(last.pinch) : nullptr;
  head["alpha"] = number_or_null(alpha);
  m["headline"] = head;
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  try {
    for (const auto& rel : produced) files.push_back(to_json(describe(dir, rel)));
    m["files"] = files;
    // Written once, last, and atomically.
    write_text(dir / "manifest.json.tmp", m.dump(2) + "\n");
    fs::rename(dir / "manifest.json.tmp", dir / "manifest.json");
    res.manifest_written = true;
  } catch (const std::exception& e) {
    log << "error: manifest: " << e.what() << "\n";
    std::error_code ec;
    fs::remove(dir / "manifest.json.tmp", ec);
    if (res.exit_code == 0) res.exit_code = static_cast<int>(ErrorCode::IoError);
    return res;
  }
  log << "termination: " << res.termination << ", samples: " << samples << ", steps: " << summary.steps
      << ", output: " << dir.string() << "\n";
  return res;
}

int inspect(const fs::path& manifest, std::ostream& out) {
  nlohmann::ordered_json m;
  {
    std::ifstream f(manifest);
    if (!f) {
      out << "error: cannot read '" << manifest.string() << "'\n";
      return static_cast<int>(ErrorCode::IoError);
    }
    try {
      f >> m;
    } catch (const nlohmann::json::exception& e) {
      out << "error: manifest is not valid JSON: " << e.what() << "\n";
      return static_cast<int>(ErrorCode::ParseError);
    }
  }
  const fs::path dir = manifest.parent_path();
  out << "code_version: " << m.value("code_version", "?") << "\n";
  out << "run: " << m.value("start_time", "?") << " .. " << m.value("end_time", "?") << "\n";
  out << "termination: " << m.value("termination", "?") << "\n";
  if (m.contains("error") && !m["error"].is_null()) out << "error: " << m["error"].value("message", "") << "\n";
  if (m.contains("config")) out << "config: " << m["config"].dump() << "\n";
  if (m.contains("headline")) {
    for (const auto& [k, v] : m["headline"].items()) out << "  " << k << " = " << v.dump() << "\n";
  }
  int bad = 0;
  for (const auto& f : m.value("files", nlohmann::ordered_json::array())) {
    const std::string rel = f.value("path", "");
    std::string status = "ok";
    try {
      if (sha256_hex(dir / rel) != f.value("sha256", "")) status = "DIGEST MISMATCH";
    } catch (const Error&) {
      status = "MISSING";
    }
    if (status != "ok") ++bad;
    out << "  " << status << "  " << rel << "\n";
  }
  out << (bad ? "inventory: FAILED (" + std::to_string(bad) + " files)" : std::string("inventory: all digests match"))
      << "\n";
  return bad ? static_cast<int>(ErrorCode::IoError) : 0;
}

}  // namespace krf
