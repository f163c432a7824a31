#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rydscape/explorer.hpp"
#include "rydscape/landscape.hpp"
#include "rydscape/model.hpp"
#include "rydscape/params.hpp"
#include "rydscape/propagator.hpp"

namespace rydscape {

/// Everything one session needs: the physical model, the search box, the
/// proposal policy, the run budget, the seed, and output settings.
struct ExperimentConfig {
  ModelConfig model;
  Bounds bounds = Bounds::standard();
  AcquisitionPolicy policy;
  int budget = 1000;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  int resolution = 100;
  std::optional<LaserParams> center;

  void validate() const {
    model.validate();
    bounds.validate();
    policy.validate();
    require(budget >= 1, "ExperimentConfig: budget must be >= 1");
    require(resolution >= 2, "ExperimentConfig: resolution must be >= 2");
    require(!output_dir.empty(), "ExperimentConfig: output_dir must be set");
    if (center) {
      center->validate();
      require(bounds.contains(*center),
              "ExperimentConfig: center must lie within bounds");
    }
  }
};

/// Strict parse: unknown keys are rejected with the offending key named;
/// validation failures name the field and constraint.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, const std::string& origin);
void save_config(const ExperimentConfig& config, const std::string& path);

/// Content hash of the parts that define the run stream (model, bounds,
/// policy, seed) — budget and output location may change across resumes.
std::string config_fingerprint(const ExperimentConfig& config);

// --- archive: line-delimited records, crash-safe appends ---

/// Creates the file and writes the meta line (seed + fingerprint).
void create_archive_file(const std::string& path, std::uint64_t seed,
                         const std::string& fingerprint);
void append_archive(const std::string& path, const CostSample& sample);
void save_archive(const Archive& archive, const std::string& path);

/// Reconstructs the archive. A truncated trailing line (interrupted write)
/// is dropped with a warning on stderr; any earlier corruption is an error.
Archive load_archive(const std::string& path);

// --- grids: CSV matrix with a commented metadata header; the std layer and
// failure mask (when present) go to sibling files ---

void export_grid(const LandscapeGrid& grid, const std::string& path,
                 double threshold = kLowCostThreshold);
LandscapeGrid import_grid(const std::string& path);

std::string grid_sibling_path(const std::string& path, const std::string& tag);

void export_contour(const std::vector<ContourSegment>& segments,
                    const std::string& path, double threshold);

// --- trajectory: columns t, p_phi_1..k, Re rho01, Im rho01, D ---

void export_trajectory(const Trajectory& traj, const std::string& path);

// --- measures report ---

void export_measures(const std::vector<MeasureRecord>& records,
                     const std::string& path);

// --- session snapshots ---

struct SessionSnapshot {
  std::string fingerprint;
  int run_count = 0;
  Archive archive;
  GPModel model;
};

void save_snapshot(const SessionSnapshot& snapshot, const std::string& path);

/// Loads and refits the model from its stored training set and
/// hyperparameters. When expected_fingerprint is non-empty a mismatch is
/// refused.
SessionSnapshot load_snapshot(const std::string& path,
                              const std::string& expected_fingerprint = {});

std::string snapshot_path(const std::string& session_dir, int run_count);
std::vector<int> list_snapshot_runs(const std::string& session_dir);

/// Exclusive advisory lock for a session directory; the writer holds it for
/// the duration of learn/scan commands.
class SessionLock {
 public:
  explicit SessionLock(const std::string& dir);
  ~SessionLock();
  SessionLock(const SessionLock&) = delete;
  SessionLock& operator=(const SessionLock&) = delete;

 private:
  std::filesystem::path path_;
};

/// Formats a double with 17 significant digits (lossless round trip).
std::string format_full(double v);

}  // namespace rydscape
