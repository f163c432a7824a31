#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "rydscape/explorer.hpp"
#include "rydscape/gp.hpp"
#include "rydscape/model.hpp"
#include "rydscape/params.hpp"

namespace rydscape {

/// One 2-D slice through the 4-D landscape: two parameters vary over their
/// full bounds on a uniform inclusive grid, the other two sit at the center.
struct CrossSectionSpec {
  LaserParams center;
  std::pair<int, int> varied{0, 1};  // indices per param_name(), first < second
  Bounds bounds;
  int resolution = 100;

  void validate() const;

  /// Grid value of varied axis 0 or 1 at index i (inclusive of both bounds).
  double axis_value(int axis, int i) const;

  /// Full parameter point of grid node (i, j); i indexes the first varied
  /// parameter, j the second.
  LaserParams point(int i, int j) const;

  bool operator==(const CrossSectionSpec&) const = default;
};

enum class GridProvenance { scanned, predicted };

/// Cost values over a cross-section grid. `values` holds raw numbers (a GP
/// mean can leave [0,1]); `clipped()` is what masks and measures consume.
/// Predicted grids carry a std layer; scans may carry a failure mask.
struct LandscapeGrid {
  CrossSectionSpec spec;
  Eigen::MatrixXd values;
  Eigen::MatrixXd std;  // empty unless predicted
  GridProvenance provenance = GridProvenance::scanned;
  int run_count = 0;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> failures;

  bool has_std() const { return std.size() > 0; }
  Eigen::MatrixXd clipped() const {
    return values.cwiseMax(0.0).cwiseMin(1.0);
  }
};

/// The C(4,2) = 6 pairwise cross-sections about a center, in canonical order
/// (omega_p/omega_c, omega_p/delta_p, omega_p/delta_c, omega_c/delta_p,
/// omega_c/delta_c, delta_p/delta_c).
std::vector<CrossSectionSpec> six_cross_sections(const LaserParams& center,
                                                 const Bounds& bounds,
                                                 int resolution = 100);

/// Brute-force scan: the cost oracle at every grid node. Deterministic;
/// per-point failures are recorded as cost 1 with the failure mask set.
LandscapeGrid scan_cross_section(const CrossSectionSpec& spec,
                                 const ModelConfig& config, int workers = 1);

/// As scan_cross_section but against an arbitrary oracle (used for synthetic
/// landscapes).
LandscapeGrid scan_cross_section(const CrossSectionSpec& spec,
                                 const CostOracle& oracle, int workers = 1);

/// GP mean and standard deviation at every grid node.
LandscapeGrid predict_cross_section(const GPModel& model,
                                    const CrossSectionSpec& spec,
                                    int run_count = 0);

/// true where the clipped cost is below the threshold.
Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> contour_mask(
    const LandscapeGrid& grid, double threshold);

struct ContourSegment {
  double x0, y0, x1, y1;  // axis units of the two varied parameters
};

/// Marching-squares iso-lines of the clipped cost at the threshold.
std::vector<ContourSegment> contour_segments(const LandscapeGrid& grid,
                                             double threshold);

/// Size of the 4-connected below-threshold region containing node (i, j);
/// 0 when the node itself is not below threshold.
int contour_region_size(const LandscapeGrid& grid, double threshold, int i, int j);

// ---------------------------------------------------------------------------
// Performance measures over matched lists of cross-section grids.
// ---------------------------------------------------------------------------

/// Point-wise |scan - prediction| averaged over every node of all sections.
double measure_accuracy(const std::vector<LandscapeGrid>& scans,
                        const std::vector<LandscapeGrid>& preds);

/// As measure_accuracy but restricted to nodes whose scanned cost is below
/// the threshold; absent when no node qualifies.
std::optional<double> measure_accuracy_lowcost(
    const std::vector<LandscapeGrid>& scans,
    const std::vector<LandscapeGrid>& preds, double c_l);

/// Distance from each scanned value to the [mean-std, mean+std] band, summed
/// per section, then averaged over the sections.
double measure_penalty(const std::vector<LandscapeGrid>& scans,
                       const std::vector<LandscapeGrid>& preds);

/// Predictive standard deviation averaged over every node of all sections.
double measure_precision(const std::vector<LandscapeGrid>& preds);

/// As measure_precision, restricted to nodes predicted below the threshold.
std::optional<double> measure_precision_lowcost(
    const std::vector<LandscapeGrid>& preds, double c_l);

/// Point-wise |current - previous| averaged over every node of all sections.
double measure_absolute_convergence(const std::vector<LandscapeGrid>& current,
                                    const std::vector<LandscapeGrid>& previous);

/// One row in the measures report. Extrinsic fields (accuracy, low-cost
/// accuracy, penalty) are absent without a scan; the low-cost restrictions
/// are absent when no node qualifies; absolute convergence is absent on the
/// first record.
struct MeasureRecord {
  int run_count = 0;
  std::optional<double> accuracy;
  std::optional<double> accuracy_lowcost;
  std::optional<double> penalty;
  double precision = 0.0;
  std::optional<double> precision_lowcost;
  std::optional<double> absolute_convergence;
  double best_cost = 0.0;
};

using ModelProvider = std::function<GPModel(int run_count)>;

/// Evaluates the seven measures at each run count (the 20-run snapshot
/// cadence): six predicted cross-sections per snapshot, extrinsic fields
/// filled when scans are supplied, best cost from the archive prefix.
std::vector<MeasureRecord> measure_suite(
    const ModelProvider& model_at, const std::vector<int>& run_counts,
    const Archive& archive, const std::vector<CrossSectionSpec>& specs,
    const std::vector<LandscapeGrid>* scans = nullptr, double c_l = 0.2);

inline constexpr double kLowCostThreshold = 0.2;

}  // namespace rydscape
