#pragma once

#include "depthlab/rng.hpp"

#include <memory>
#include <string>

namespace depthlab
{

enum class MarginalFamily
{
	gaussian,  ///< N(0, scale^2)
	stable,    ///< symmetric alpha-stable, characteristic function exp(-|scale t|^alpha)
};

namespace detail
{
class StableCdfTable;
}

/// Symmetric univariate law of the first coordinate X_1 of an alpha-symmetric vector.
///
/// Scale convention: the stable family has characteristic function exp(-|t|^alpha) at
/// scale 1, so stable(alpha = 2) is N(0, 2), not N(0, 1). The two constructors are kept
/// apart and never substituted for each other.
///
/// For stable alpha outside {1, 2} the CDF is tabulated once per alpha (shared between
/// instances) by quadrature of Zolotarev's integral representation, then interpolated
/// with a monotone cubic; beyond the grid a power-law tail with exponent alpha is used.
class MarginalLaw
{
public:
	static MarginalLaw gaussian(double scale = 1.0);
	static MarginalLaw stable(double alpha, double scale = 1.0);

	MarginalFamily family() const { return family_; }
	/// Stability index; 2 for the Gaussian family.
	double alpha() const { return alpha_; }
	double scale() const { return scale_; }

	double cdf(double t) const;
	/// Inverse CDF on (0, 1); throws InputError outside.
	double quantile(double p) const;
	double sample(Rng &rng) const;

	/// Copy of this law with the scale multiplied by c > 0.
	MarginalLaw scaled(double c) const;

	std::string describe() const;

private:
	MarginalLaw(MarginalFamily family, double alpha, double scale);

	double standard_cdf(double z) const;

	MarginalFamily family_;
	double alpha_;
	double scale_;
	std::shared_ptr<const detail::StableCdfTable> table_;
};

/// Standard symmetric alpha-stable CDF at x >= 0 by direct quadrature of Zolotarev's
/// integral (alpha != 1). Exposed for table construction and diagnostics.
double stable_cdf_zolotarev(double alpha, double x);

}  // namespace depthlab
