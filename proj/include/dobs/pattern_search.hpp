#pragma once

#include <functional>

#include <Eigen/Dense>

namespace dobs {

// Coordinate pattern search with shrinking steps. The objective (spectral
// radius here) is non-smooth, so no gradients: probe +/- step along each
// coordinate, accept strict improvements, halve the step after a sweep with
// no progress, stop at the evaluation budget, the minimum step, or the
// target value.
struct PatternSearchOptions {
  long max_evals = 2000;
  double initial_step = 0.5;
  double min_step = 1e-9;
  double target = -1e300;  // stop as soon as the value drops below this
};

struct PatternSearchResult {
  Eigen::VectorXd point;
  double value = 0;
  long evals = 0;
  bool reached_target = false;
};

inline PatternSearchResult pattern_search(const std::function<double(const Eigen::VectorXd&)>& f,
                                          const Eigen::VectorXd& start,
                                          const PatternSearchOptions& opts) {
  PatternSearchResult res;
  res.point = start;
  res.value = f(start);
  res.evals = 1;
  if (res.value < opts.target) {
    res.reached_target = true;
    return res;
  }
  if (start.size() == 0) return res;

  double step = opts.initial_step;
  Eigen::VectorXd probe = res.point;
  while (res.evals < opts.max_evals && step > opts.min_step) {
    bool improved = false;
    for (Eigen::Index c = 0; c < res.point.size() && res.evals < opts.max_evals; ++c) {
      for (const double sign : {1.0, -1.0}) {
        probe = res.point;
        probe[c] += sign * step;
        double value = f(probe);
        ++res.evals;
        if (value < res.value - 1e-13) {
          res.point = probe;
          res.value = value;
          improved = true;
          // Keep marching along a successful direction while it pays.
          while (res.evals < opts.max_evals && !(res.value < opts.target)) {
            probe[c] += sign * step;
            value = f(probe);
            ++res.evals;
            if (!(value < res.value - 1e-13)) break;
            res.point = probe;
            res.value = value;
          }
          if (res.value < opts.target) {
            res.reached_target = true;
            return res;
          }
          break;
        }
        if (res.evals >= opts.max_evals) break;
      }
    }
    if (!improved) step *= 0.5;
  }
  res.reached_target = res.value < opts.target;
  return res;
}

}  // namespace dobs
