#pragma once

#include "depthlab/core.hpp"
#include "depthlab/models.hpp"

#include <string>
#include <vector>

namespace depthlab
{

enum class DepthMethod
{
	exact1d,  ///< d = 1, directions {-1, +1}
	exact2d,  ///< d = 2, angular sweep; the exact sample infimum
	approx,   ///< k candidate-augmented directions and their antipodes; an upper bound
};

DepthMethod parse_depth_method(const std::string &name);
std::string to_string(DepthMethod m);

struct DepthOptions
{
	DepthMethod method = DepthMethod::approx;
	Eigen::Index directions = 256;
	std::uint64_t seed = 0;
};

/// Population halfspace depth of x for an alpha-symmetric model: 1 - F(||x||_beta),
/// beta the conjugate index of alpha.
double population_hd(const Vector &x, const AlphaModel &model);

/// Sample halfspace depth with closed halfspaces: min_u #{i : <X_i,u> <= <x,u>} / n.
double sample_hd(const Vector &x, const SampleMatrix &sample, const DepthOptions &options);

/// Approximate depth over an explicit direction set (columns) and its antipodes.
double sample_hd(const Vector &x, const SampleMatrix &sample, const DirectionMatrix &directions);

double sample_hd_exact1d(double x, const SampleMatrix &sample);
double sample_hd_exact2d(const Vector &x, const SampleMatrix &sample);

/// Directions used by DepthMethod::approx for the given settings.
DirectionMatrix approx_directions(Eigen::Index d, Eigen::Index k, std::uint64_t seed);

/// Sorted projections of a sample onto a fixed direction set. Depth counts then cost one
/// binary search per direction; evaluation is const and safe to share across threads.
class HalfspaceCounter
{
public:
	HalfspaceCounter(const SampleMatrix &sample, DirectionMatrix directions);

	/// min over directions u and -u of the closed-halfspace count.
	Eigen::Index depth_count(const Vector &x) const { return depth_count_above(x, 0); }

	/// Exact count when it is >= floor; otherwise some value below floor (early exit).
	Eigen::Index depth_count_above(const Vector &x, Eigen::Index floor) const;

	Eigen::Index size() const { return n_; }
	Eigen::Index dim() const { return directions_.rows(); }
	const DirectionMatrix &directions() const { return directions_; }

private:
	DirectionMatrix directions_;
	Eigen::Index n_;
	std::vector<double> sorted_;  // direction-major, n_ entries per direction
};

struct MedianOptions
{
	DepthMethod method = DepthMethod::approx;
	Eigen::Index directions = 256;
	Eigen::Index multistarts = 8;
	Eigen::Index midpoint_cap = 50000;
	std::uint64_t seed = 0;

	DepthOptions depth_options() const { return DepthOptions{method, directions, seed}; }
};

struct MedianResult
{
	Vector point;
	double achieved_depth = 0;  ///< sample depth re-evaluated at `point`
	double pool_max_depth = 0;  ///< best depth seen among candidates
	/// The barycenter left the deepest region: achieved_depth < pool_max_depth.
	bool left_deepest_region = false;
	Eigen::Index candidates_evaluated = 0;
	Eigen::Index maximizers = 0;
};

/// Sample halfspace median: barycenter of all evaluated candidates attaining the largest
/// observed depth. Candidates are the data points, pairwise midpoints (subsampled past
/// midpoint_cap), the coordinatewise median and the iterates of a coordinate pattern search.
MedianResult tukey_median(const SampleMatrix &sample, const MedianOptions &options);

/// Maximum depth over a caller-supplied candidate list (rows), using the median's depth settings.
double max_depth_over(const Matrix &candidates, const SampleMatrix &sample, const DepthOptions &options);

/// Concentration bound eps/(1-eps) + c1 sqrt(d/n) + c2 sqrt(log(1/delta)/n) with the explicit
/// constants c1 = 24 sqrt(2) sqrt(30 pi e / (1 - e^-1)) and c2 = (9 sqrt 2 + 4 sqrt 6) / 4.
struct RateBound
{
	double epsilon = 0;
	Eigen::Index d = 0;
	Eigen::Index n = 0;
	double delta = 0;
	double c1 = 0;
	double c2 = 0;
	double vc_constant = 0;  ///< sqrt(1440 pi e / (1 - e^-1)), the halfspace-class VC constant
	double value = 0;
};

double bound_constant_c1();
double bound_constant_c2();
double bound_vc_constant();

/// Smallest n with sqrt(log(1/delta) / (2n)) < 1/3.
Eigen::Index minimal_admissible_n(double delta);

/// Throws InputError (naming the minimal admissible n) when the side condition fails.
RateBound location_bound_rhs(double epsilon, Eigen::Index d, Eigen::Index n, double delta);

/// D(0; P) - D(mu_hat; P) for a median computed from one contaminated sample.
double max_depth_deviation(const AlphaModel &model, const ContaminatedModel &cm, Eigen::Index n, std::uint64_t seed,
			   const MedianOptions &options);

/// Deviation for an already computed median: D(0; P) - D(point; P).
double max_depth_deviation(const AlphaModel &model, const Vector &median);

}  // namespace depthlab
