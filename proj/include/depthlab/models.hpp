#pragma once

#include "depthlab/core.hpp"
#include "depthlab/marginal.hpp"

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace depthlab
{

/// alpha-symmetric law on R^d: every projection <X,u> is distributed as ||u||_alpha * X_1.
struct AlphaModel
{
	double alpha = 2.0;
	Eigen::Index dim = 2;
	MarginalLaw marginal = MarginalLaw::gaussian();

	NormOrder order() const { return NormOrder(alpha); }
	std::string describe() const;
};

/// Standard d-variate Gaussian (alpha = 2, N(0,1) marginal). Requires d >= 2.
AlphaModel make_gaussian_spherical(Eigen::Index d);

/// i.i.d. symmetric alpha-stable coordinates, characteristic function exp(-||t||_alpha^alpha).
/// alpha = 1 is the independent Cauchy model; alpha = 2 gives N(0, 2) coordinates.
AlphaModel make_independent_stable(double alpha, Eigen::Index d, double scale = 1.0);

/// Model with every coordinate multiplied by c > 0.
AlphaModel scale_model(const AlphaModel &model, double c);

SampleMatrix sample(const AlphaModel &model, Eigen::Index n, std::uint64_t seed);

/// Contaminating distribution Q: a point mass or a shifted alpha-symmetric model.
class Contaminant
{
public:
	static Contaminant point_mass(Vector location);
	static Contaminant shifted_model(AlphaModel model, Vector shift);
	/// Point mass at offset * scale * (1, ..., 1), scale being the marginal scale of `base`.
	static Contaminant default_for(const AlphaModel &base, double offset = 10.0);

	Vector draw(Rng &rng) const;
	Eigen::Index dim() const { return location_.size(); }
	bool is_point_mass() const { return !model_.has_value(); }
	const Vector &location() const { return location_; }
	const std::optional<AlphaModel> &model() const { return model_; }
	std::string describe() const;

private:
	Vector location_;
	std::optional<AlphaModel> model_;
};

/// Huber mixture (1 - epsilon) P + epsilon Q with 0 <= epsilon < 1/3.
struct ContaminatedModel
{
	ContaminatedModel(AlphaModel base, Contaminant contaminant, double epsilon);

	AlphaModel base;
	Contaminant contaminant;
	double epsilon;
};

struct ContaminatedSample
{
	SampleMatrix sample;
	std::vector<bool> contaminated;  ///< per row
	Eigen::Index contaminated_count = 0;
};

/// Each row comes from Q with probability epsilon, independently.
ContaminatedSample sample_contaminated(const ContaminatedModel &cm, Eigen::Index n, std::uint64_t seed);

struct KsResult
{
	double statistic = 0;
	double critical = 0;
	bool passed = false;
};

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// One-sample statistic against a continuous CDF.
template <typename Cdf>
double ks_one_sample(std::vector<double> xs, Cdf &&cdf)
{
	std::sort(xs.begin(), xs.end());
	double const n = static_cast<double>(xs.size());
	double d = 0;
	for (std::size_t i = 0; i < xs.size(); ++i) {
		double const f = cdf(xs[i]);
		d = std::max({d, (static_cast<double>(i) + 1) / n - f, f - static_cast<double>(i) / n});
	}
	return d;
}

/// Asymptotic 1% critical value 1.63 * sqrt((n + m) / (n m)).
double ks_critical_1pct(std::size_t n, std::size_t m);

/// Compares {<X_i,u>} against ||u||_alpha times fresh marginal draws. Requires n >= 1000.
KsResult projection_law_test(const AlphaModel &model, const Direction &u, Eigen::Index n, std::uint64_t seed);

/// Same comparison for an arbitrary sample assumed to follow `model`.
KsResult projection_law_test(const SampleMatrix &data, const AlphaModel &model, const Direction &u, std::uint64_t seed);

enum class GrowthVariant
{
	A2,  ///< location: inf_{0<|t|<gamma} |F(t) - F(0)| / |t|
	A3,  ///< spherical scatter: inf_{0<|t-sigma^2|<gamma} |F(sqrt t) - F(sigma)| / |t - sigma^2|
	A4,  ///< alpha-scatter: inf_{0<|t-sigma|<gamma} |F(t) - F(sigma)| / |t - sigma|
};

GrowthVariant parse_growth_variant(const std::string &name);
std::string to_string(GrowthVariant v);

struct GrowthCertificate
{
	GrowthVariant variant = GrowthVariant::A2;
	double gamma = 0;
	double kappa = 0;
	double epsilon = 0;
	double witnessed_inf = 0;
	bool range_ok = false;
	bool holds = false;
	/// Empty when the certificate holds; otherwise a short machine-readable code.
	std::string reason;
};

/// Evaluates the variant's difference quotient on 10^4 geometrically spaced offsets that
/// approach the window centre (down to 1e-9 * gamma) and include the window edge.
GrowthCertificate check_growth_condition(const MarginalLaw &marginal, GrowthVariant variant, double gamma,
					 double kappa, std::optional<double> sigma, double epsilon);

/// Parses "gaussian:d=3", "cauchy:d=2", "stable:alpha=0.7,d=3[,scale=2]".
AlphaModel parse_model_spec(const std::string &spec);

}  // namespace depthlab
