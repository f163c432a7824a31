#include "rydscape/landscape.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <thread>

namespace rydscape {

void CrossSectionSpec::validate() const {
  center.validate();
  bounds.validate();
  require(varied.first != varied.second,
          "CrossSectionSpec: varied parameters must be distinct");
  require(varied.first >= 0 && varied.first < 4 && varied.second >= 0 &&
              varied.second < 4,
          "CrossSectionSpec: varied indices must be in 0..3");
  require(resolution >= 2, "CrossSectionSpec: resolution must be >= 2");
  require(bounds.contains(center), "CrossSectionSpec: center must be within bounds");
}

double CrossSectionSpec::axis_value(int axis, int i) const {
  const int p = axis == 0 ? varied.first : varied.second;
  const auto [lo, hi] = bounds.ranges[p];
  return lo + (hi - lo) * static_cast<double>(i) / (resolution - 1);
}

LaserParams CrossSectionSpec::point(int i, int j) const {
  auto a = center.as_array();
  a[varied.first] = axis_value(0, i);
  a[varied.second] = axis_value(1, j);
  return LaserParams::from_array(a);
}

std::vector<CrossSectionSpec> six_cross_sections(const LaserParams& center,
                                                 const Bounds& bounds,
                                                 int resolution) {
  std::vector<CrossSectionSpec> specs;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      CrossSectionSpec spec;
      spec.center = center;
      spec.varied = {a, b};
      spec.bounds = bounds;
      spec.resolution = resolution;
      spec.validate();
      specs.push_back(spec);
    }
  return specs;
}

LandscapeGrid scan_cross_section(const CrossSectionSpec& spec,
                                 const CostOracle& oracle, int workers) {
  spec.validate();
  const int res = spec.resolution;
  LandscapeGrid grid;
  grid.spec = spec;
  grid.provenance = GridProvenance::scanned;
  grid.values.resize(res, res);
  grid.failures.setZero(res, res);

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int idx = next.fetch_add(1);
      if (idx >= res * res) return;
      const int i = idx / res, j = idx % res;
      try {
        grid.values(i, j) =
            std::min(std::max(oracle(spec.point(i, j)).cost, 0.0), 1.0);
      } catch (const std::exception&) {
        grid.values(i, j) = 1.0;
        grid.failures(i, j) = 1;
      }
    }
  };
  const int nthreads = std::max(1, workers);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (grid.failures.sum() == 0) grid.failures.resize(0, 0);
  return grid;
}

LandscapeGrid scan_cross_section(const CrossSectionSpec& spec,
                                 const ModelConfig& config, int workers) {
  config.validate();
  return scan_cross_section(
      spec, [&config](const LaserParams& p) { return evaluate_cost(p, config); },
      workers);
}

LandscapeGrid predict_cross_section(const GPModel& model,
                                    const CrossSectionSpec& spec, int run_count) {
  spec.validate();
  const int res = spec.resolution;
  Eigen::MatrixXd queries(res * res, 4);
  for (int i = 0; i < res; ++i)
    for (int j = 0; j < res; ++j) {
      const auto u = spec.bounds.normalize(spec.point(i, j));
      for (int d = 0; d < 4; ++d) queries(i * res + j, d) = u[d];
    }
  Eigen::VectorXd mean, std;
  predict_batch(model, queries, mean, std);

  LandscapeGrid grid;
  grid.spec = spec;
  grid.provenance = GridProvenance::predicted;
  grid.run_count = run_count;
  grid.values.resize(res, res);
  grid.std.resize(res, res);
  for (int i = 0; i < res; ++i)
    for (int j = 0; j < res; ++j) {
      grid.values(i, j) = mean(i * res + j);
      grid.std(i, j) = std(i * res + j);
    }
  return grid;
}

Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> contour_mask(
    const LandscapeGrid& grid, double threshold) {
  const Eigen::MatrixXd v = grid.clipped();
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> mask(v.rows(),
                                                                   v.cols());
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = 0; j < v.cols(); ++j)
      mask(i, j) = v(i, j) < threshold ? 1 : 0;
  return mask;
}

namespace {

// linear interpolation of the threshold crossing between two nodes
double crossing(double a, double b, double t) {
  const double denom = b - a;
  return std::abs(denom) < 1e-300 ? 0.5 : (t - a) / denom;
}

}  // namespace

std::vector<ContourSegment> contour_segments(const LandscapeGrid& grid,
                                             double threshold) {
  const Eigen::MatrixXd v = grid.clipped();
  const int res = grid.spec.resolution;
  std::vector<ContourSegment> segments;
  auto ax = [&](int axis, double idx) {
    const int p = axis == 0 ? grid.spec.varied.first : grid.spec.varied.second;
    const auto [lo, hi] = grid.spec.bounds.ranges[p];
    return lo + (hi - lo) * idx / (res - 1);
  };
  for (int i = 0; i + 1 < res; ++i)
    for (int j = 0; j + 1 < res; ++j) {
      const double c00 = v(i, j), c10 = v(i + 1, j);
      const double c01 = v(i, j + 1), c11 = v(i + 1, j + 1);
      int code = 0;
      if (c00 < threshold) code |= 1;
      if (c10 < threshold) code |= 2;
      if (c11 < threshold) code |= 4;
      if (c01 < threshold) code |= 8;
      if (code == 0 || code == 15) continue;
      // edge midpoints by interpolation: bottom(00-10), right(10-11),
      // top(01-11), left(00-01); coordinates as (x=axis0, y=axis1)
      const double bx = i + crossing(c00, c10, threshold), by = j;
      const double rx = i + 1, ry = j + crossing(c10, c11, threshold);
      const double tx = i + crossing(c01, c11, threshold), ty = j + 1;
      const double lx = i, ly = j + crossing(c00, c01, threshold);
      auto emit = [&](double x0, double y0, double x1, double y1) {
        segments.push_back(
            {ax(0, x0), ax(1, y0), ax(0, x1), ax(1, y1)});
      };
      switch (code) {
        case 1: case 14: emit(bx, by, lx, ly); break;
        case 2: case 13: emit(bx, by, rx, ry); break;
        case 3: case 12: emit(lx, ly, rx, ry); break;
        case 4: case 11: emit(rx, ry, tx, ty); break;
        case 6: case 9:  emit(bx, by, tx, ty); break;
        case 7: case 8:  emit(lx, ly, tx, ty); break;
        case 5: case 10: {
          // saddle: disambiguate with the cell-center average
          const double center = 0.25 * (c00 + c10 + c01 + c11);
          const bool center_low = center < threshold;
          if ((code == 5) == center_low) {
            emit(bx, by, rx, ry);
            emit(lx, ly, tx, ty);
          } else {
            emit(bx, by, lx, ly);
            emit(rx, ry, tx, ty);
          }
          break;
        }
        default: break;
      }
    }
  return segments;
}

int contour_region_size(const LandscapeGrid& grid, double threshold, int i,
                        int j) {
  const auto mask = contour_mask(grid, threshold);
  const int res = grid.spec.resolution;
  require(i >= 0 && i < res && j >= 0 && j < res,
          "contour_region_size: node out of range");
  if (!mask(i, j)) return 0;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> seen =
      Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(res, res);
  std::deque<std::pair<int, int>> queue{{i, j}};
  seen(i, j) = 1;
  int count = 0;
  while (!queue.empty()) {
    const auto [a, b] = queue.front();
    queue.pop_front();
    ++count;
    const int da[4] = {1, -1, 0, 0}, db[4] = {0, 0, 1, -1};
    for (int q = 0; q < 4; ++q) {
      const int na = a + da[q], nb = b + db[q];
      if (na < 0 || na >= res || nb < 0 || nb >= res) continue;
      if (seen(na, nb) || !mask(na, nb)) continue;
      seen(na, nb) = 1;
      queue.emplace_back(na, nb);
    }
  }
  return count;
}

namespace {

void require_matched(const std::vector<LandscapeGrid>& a,
                     const std::vector<LandscapeGrid>& b) {
  require(!a.empty() && a.size() == b.size(),
          "measures: grid lists must be non-empty and the same length");
  for (std::size_t s = 0; s < a.size(); ++s)
    require(a[s].spec == b[s].spec, "measures: cross-section specs must match");
}

}  // namespace

double measure_accuracy(const std::vector<LandscapeGrid>& scans,
                        const std::vector<LandscapeGrid>& preds) {
  require_matched(scans, preds);
  double sum = 0.0;
  long count = 0;
  for (std::size_t s = 0; s < scans.size(); ++s) {
    sum += (scans[s].clipped() - preds[s].clipped()).cwiseAbs().sum();
    count += scans[s].values.size();
  }
  return sum / static_cast<double>(count);
}

std::optional<double> measure_accuracy_lowcost(
    const std::vector<LandscapeGrid>& scans,
    const std::vector<LandscapeGrid>& preds, double c_l) {
  require_matched(scans, preds);
  double sum = 0.0;
  long count = 0;
  for (std::size_t s = 0; s < scans.size(); ++s) {
    const Eigen::MatrixXd sv = scans[s].clipped();
    const Eigen::MatrixXd pv = preds[s].clipped();
    for (Eigen::Index i = 0; i < sv.rows(); ++i)
      for (Eigen::Index j = 0; j < sv.cols(); ++j)
        if (sv(i, j) < c_l) {
          sum += std::abs(sv(i, j) - pv(i, j));
          ++count;
        }
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

double measure_penalty(const std::vector<LandscapeGrid>& scans,
                       const std::vector<LandscapeGrid>& preds) {
  require_matched(scans, preds);
  double total = 0.0;
  for (std::size_t s = 0; s < scans.size(); ++s) {
    require(preds[s].has_std(), "measure_penalty: predictions need a std layer");
    const Eigen::MatrixXd sv = scans[s].clipped();
    const Eigen::MatrixXd pv = preds[s].clipped();
    double section = 0.0;
    for (Eigen::Index i = 0; i < sv.rows(); ++i)
      for (Eigen::Index j = 0; j < sv.cols(); ++j)
        section +=
            std::max(0.0, std::abs(sv(i, j) - pv(i, j)) - preds[s].std(i, j));
    total += section;
  }
  return total / static_cast<double>(scans.size());
}

double measure_precision(const std::vector<LandscapeGrid>& preds) {
  require(!preds.empty(), "measure_precision: no grids");
  double sum = 0.0;
  long count = 0;
  for (const auto& g : preds) {
    require(g.has_std(), "measure_precision: predictions need a std layer");
    sum += g.std.sum();
    count += g.std.size();
  }
  return sum / static_cast<double>(count);
}

std::optional<double> measure_precision_lowcost(
    const std::vector<LandscapeGrid>& preds, double c_l) {
  require(!preds.empty(), "measure_precision_lowcost: no grids");
  double sum = 0.0;
  long count = 0;
  for (const auto& g : preds) {
    require(g.has_std(), "measure_precision_lowcost: predictions need a std layer");
    const Eigen::MatrixXd pv = g.clipped();
    for (Eigen::Index i = 0; i < pv.rows(); ++i)
      for (Eigen::Index j = 0; j < pv.cols(); ++j)
        if (pv(i, j) < c_l) {
          sum += g.std(i, j);
          ++count;
        }
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

double measure_absolute_convergence(const std::vector<LandscapeGrid>& current,
                                    const std::vector<LandscapeGrid>& previous) {
  require_matched(current, previous);
  double sum = 0.0;
  long count = 0;
  for (std::size_t s = 0; s < current.size(); ++s) {
    sum += (current[s].clipped() - previous[s].clipped()).cwiseAbs().sum();
    count += current[s].values.size();
  }
  return sum / static_cast<double>(count);
}

std::vector<MeasureRecord> measure_suite(
    const ModelProvider& model_at, const std::vector<int>& run_counts,
    const Archive& archive, const std::vector<CrossSectionSpec>& specs,
    const std::vector<LandscapeGrid>* scans, double c_l) {
  require(!run_counts.empty(), "measure_suite: no run counts");
  require(!specs.empty(), "measure_suite: no cross-sections");
  if (scans != nullptr) {
    require(scans->size() == specs.size(),
            "measure_suite: scans must match the cross-sections");
    for (std::size_t s = 0; s < specs.size(); ++s)
      require((*scans)[s].spec == specs[s], "measure_suite: scan spec mismatch");
  }

  std::vector<MeasureRecord> records;
  std::vector<LandscapeGrid> previous;
  for (const int rc : run_counts) {
    require(rc >= 1 && rc <= static_cast<int>(archive.samples.size()),
            "measure_suite: run count outside the archive");
    const GPModel model = model_at(rc);
    std::vector<LandscapeGrid> preds;
    preds.reserve(specs.size());
    for (const auto& spec : specs)
      preds.push_back(predict_cross_section(model, spec, rc));

    MeasureRecord rec;
    rec.run_count = rc;
    rec.precision = measure_precision(preds);
    rec.precision_lowcost = measure_precision_lowcost(preds, c_l);
    if (!previous.empty())
      rec.absolute_convergence = measure_absolute_convergence(preds, previous);
    if (scans != nullptr) {
      rec.accuracy = measure_accuracy(*scans, preds);
      rec.accuracy_lowcost = measure_accuracy_lowcost(*scans, preds, c_l);
      rec.penalty = measure_penalty(*scans, preds);
    }
    double best = 1.0;
    for (int i = 0; i < rc; ++i)
      best = std::min(best, archive.samples[i].cost);
    rec.best_cost = best;
    records.push_back(rec);
    previous = std::move(preds);
  }
  return records;
}

}  // namespace rydscape
