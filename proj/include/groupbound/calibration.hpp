#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "groupbound/noise_region.hpp"

namespace groupbound {

/// Keyed store of CalibrationEntry records with optional on-the-fly
/// computation. Thread-safe; lookups match on (dim, alpha).
class Calibration {
 public:
  explicit Calibration(int reps = 5000, std::uint64_t seed = 0x9b0u,
                       bool auto_compute = true)
      : reps_(reps), seed_(seed), auto_compute_(auto_compute) {}

  /// Vertex count m for the given dimension and level. Computes and stores
  /// an entry when absent (if auto-compute is enabled), otherwise throws
  /// CalibrationMissing.
  int vertex_count(int dim, double alpha);

  /// Full entry lookup/compute (same policy as vertex_count).
  CalibrationEntry entry(int dim, double alpha);

  void upsert(const CalibrationEntry& e);
  bool has(int dim, double alpha) const;

  std::vector<CalibrationEntry> entries() const;

  /// JSON array persistence. Loading merges into the current table.
  void load(const std::string& path);
  void save(const std::string& path) const;

  static std::string to_json(const std::vector<CalibrationEntry>& entries);
  static std::vector<CalibrationEntry> from_json(const std::string& text);

  int reps() const { return reps_; }
  std::uint64_t seed() const { return seed_; }
  void set_threads(unsigned t) { threads_ = t; }

 private:
  const CalibrationEntry* find(int dim, double alpha) const;

  std::vector<CalibrationEntry> entries_;
  int reps_;
  std::uint64_t seed_;
  bool auto_compute_;
  unsigned threads_ = 1;
  mutable std::mutex mutex_;
};

}  // namespace groupbound
