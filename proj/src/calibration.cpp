#include "groupbound/calibration.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "groupbound/errors.hpp"

namespace groupbound {

namespace {
bool same_key(const CalibrationEntry& e, int dim, double alpha) {
  return e.dim == dim && std::abs(e.alpha - alpha) < 1e-12;
}
}  // namespace

const CalibrationEntry* Calibration::find(int dim, double alpha) const {
  for (const auto& e : entries_) {
    if (same_key(e, dim, alpha)) return &e;
  }
  return nullptr;
}

int Calibration::vertex_count(int dim, double alpha) {
  return entry(dim, alpha).m;
}

CalibrationEntry Calibration::entry(int dim, double alpha) {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (const auto* e = find(dim, alpha)) return *e;
  }
  if (!auto_compute_) {
    throw CalibrationMissing("no calibration entry for dim=" +
                             std::to_string(dim) +
                             " alpha=" + std::to_string(alpha));
  }
  CalibrateOptions opt;
  opt.threads = threads_;
  const CalibrationEntry computed = calibrate_m(dim, alpha, reps_, seed_, opt);
  std::lock_guard<std::mutex> lock(mutex_);
  if (const auto* e = find(dim, alpha)) return *e;  // raced with another thread
  entries_.push_back(computed);
  return computed;
}

void Calibration::upsert(const CalibrationEntry& e) {
  std::lock_guard<std::mutex> lock(mutex_);
  for (auto& existing : entries_) {
    if (same_key(existing, e.dim, e.alpha)) {
      existing = e;
      return;
    }
  }
  entries_.push_back(e);
}

bool Calibration::has(int dim, double alpha) const {
  std::lock_guard<std::mutex> lock(mutex_);
  return find(dim, alpha) != nullptr;
}

std::vector<CalibrationEntry> Calibration::entries() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_;
}

std::string Calibration::to_json(const std::vector<CalibrationEntry>& entries) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : entries) {
    arr.push_back({{"dim", e.dim},
                   {"alpha", e.alpha},
                   {"m", e.m},
                   {"reps", e.reps},
                   {"seed", e.seed},
                   {"achieved_coverage", e.achieved_coverage}});
  }
  return arr.dump(2);
}

std::vector<CalibrationEntry> Calibration::from_json(const std::string& text) {
  const nlohmann::json arr = nlohmann::json::parse(text);
  if (!arr.is_array()) {
    throw std::invalid_argument("calibration cache: expected a JSON array");
  }
  std::vector<CalibrationEntry> out;
  for (const auto& item : arr) {
    CalibrationEntry e;
    e.dim = item.at("dim").get<int>();
    e.alpha = item.at("alpha").get<double>();
    e.m = item.at("m").get<int>();
    e.reps = item.value("reps", 0);
    e.seed = item.value("seed", std::uint64_t{0});
    e.achieved_coverage = item.value("achieved_coverage", 0.0);
    out.push_back(e);
  }
  return out;
}

void Calibration::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) return;  // absent cache file is an empty cache
  std::stringstream buf;
  buf << in.rdbuf();
  for (const auto& e : from_json(buf.str())) upsert(e);
}

void Calibration::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("calibration cache: cannot write " + path);
  }
  out << to_json(entries()) << "\n";
}

}  // namespace groupbound
