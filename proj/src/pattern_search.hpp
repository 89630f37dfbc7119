#pragma once

#include "depthlab/core.hpp"

#include <utility>

namespace depthlab::detail
{

struct PatternResult
{
	Vector x;
	double value;
};

/// Coordinate pattern search maximizing f. A move is accepted only on strict improvement;
/// the step halves after a sweep without moves and the search stops below min_step.
/// With `on_sphere` set every trial point is rescaled to unit Euclidean length.
template <typename F>
PatternResult pattern_maximize(F &&f, Vector x, double step, double min_step, bool on_sphere = false)
{
	if (on_sphere) x.normalize();
	double best = f(x);
	while (step >= min_step) {
		bool moved = false;
		for (Eigen::Index j = 0; j < x.size(); ++j) {
			for (double sign : {1.0, -1.0}) {
				Vector trial = x;
				trial(j) += sign * step;
				if (on_sphere) {
					double const nrm = trial.norm();
					if (!(nrm > 0)) continue;
					trial /= nrm;
				}
				double const v = f(trial);
				if (v > best) {
					best = v;
					x = std::move(trial);
					moved = true;
				}
			}
		}
		if (!moved) step /= 2;
	}
	return {std::move(x), best};
}

}  // namespace depthlab::detail
