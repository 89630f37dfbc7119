#pragma once

#include "depthlab/core.hpp"
#include "depthlab/location_depth.hpp"
#include "depthlab/models.hpp"

#include <optional>
#include <string>

namespace depthlab
{

/// inf and sup of a degree-0 homogeneous ratio over the unit sphere.
struct RatioRange
{
	double inf_value = 0;
	double sup_value = 0;
	Vector argmin;  ///< unit vector attaining inf_value
	Vector argmax;  ///< unit vector attaining sup_value
};

struct SphereSearchOptions
{
	Eigen::Index multistarts = 32;  ///< raised to the candidate-direction count when that is larger
	double step_tolerance = 1e-8;
	std::uint64_t seed = 0;
};

/// Range of sqrt(u'Σu) / ||u||_alpha. Exact for alpha = 2 (eigenvalues) and for Σ = c² I.
RatioRange ratio_range(const ScatterMatrix &sigma, double alpha, const SphereSearchOptions &options = {});

/// Range of ||Σ^{1/2} u||_alpha / ||u||_alpha. Exact for alpha = 2 and when Σ^{1/2}/c is a
/// signed permutation.
RatioRange alpha_ratio_range(const ScatterMatrix &sigma, double alpha, const SphereSearchOptions &options = {});

/// 2 min{F(inf) - 1/2, 1 - F(sup)} over the ratio_range of Σ.
double population_shd(const ScatterMatrix &sigma, const AlphaModel &model);

/// Same with alpha_ratio_range.
double population_alpha_shd(const ScatterMatrix &sigma, const AlphaModel &model);

/// min over directions of min{#{|<X_i - c, u>| <= h_u}, #{|<X_i - c, u>| >= h_u}} / n with
/// h_u = sqrt(u'Σu). Directions are the columns of `dirs`.
double sample_shd(const ScatterMatrix &sigma, const SampleMatrix &sample, const Vector &center, const DirectionMatrix &dirs);

/// As sample_shd with h_u = ||Σ^{1/2} u||_alpha.
double sample_alpha_shd(const ScatterMatrix &sigma, const SampleMatrix &sample, const Vector &center,
			const DirectionMatrix &dirs, double alpha);

/// Root of F(σ d^{1/2 - 1/alpha}) - 1/2 = 1 - F(σ); the sHD median is σ² I.
double population_scatter_sigma(const AlphaModel &model);

/// F^{-1}(3/4); the alpha-sHD median is σ² I.
double population_alpha_scatter_sigma(const AlphaModel &model);

enum class ScatterDepthKind
{
	standard,
	alpha,
};

struct ScatterDepthSpec
{
	ScatterDepthKind kind = ScatterDepthKind::standard;
	double alpha = 2.0;  ///< only used by the alpha kind

	std::string describe() const;
};

/// "standard", "alpha=<a>" or "alpha(<a>)".
ScatterDepthSpec parse_scatter_depth(const std::string &text);

enum class ScatterMode
{
	isotropic,
	diagonal,
	full,
};

ScatterMode parse_scatter_mode(const std::string &name);
std::string to_string(ScatterMode mode);

struct ScatterMedianOptions
{
	ScatterDepthSpec depth;
	ScatterMode mode = ScatterMode::isotropic;
	Eigen::Index directions = 256;
	Eigen::Index multistarts = 4;  ///< diagonal and full modes
	std::uint64_t seed = 0;
	MedianOptions center;  ///< settings for the location median used as center
};

struct ScatterMedianResult
{
	ScatterMatrix matrix = ScatterMatrix::identity(1);
	std::optional<double> sigma;  ///< set in isotropic mode, where matrix = sigma² I
	double achieved_depth = 0;
	ScatterMode mode = ScatterMode::isotropic;
	Vector center;
};

/// Maximizes the chosen sample scatter depth around the sample Tukey median.
ScatterMedianResult sample_scatter_median(const SampleMatrix &sample, const ScatterMedianOptions &options);

/// Same, with the center supplied by the caller.
ScatterMedianResult sample_scatter_median(const SampleMatrix &sample, const Vector &center,
					  const ScatterMedianOptions &options);

/// sup over u != 0 of | ||A^{1/2}u||_alpha - ||B^{1/2}u||_alpha | / ||u||_alpha.
double scatter_pseudometric(const ScatterMatrix &a, const ScatterMatrix &b, double alpha,
			    const SphereSearchOptions &options = {});

/// Same formula and constants as location_bound_rhs.
RateBound scatter_bound_rhs(double epsilon, Eigen::Index d, Eigen::Index n, double delta);

}  // namespace depthlab
