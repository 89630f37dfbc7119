#include "depthlab/marginal.hpp"

#include "depthlab/core.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <vector>

namespace depthlab
{

namespace
{

constexpr double pi = boost::math::constants::pi<double>();

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<double>(), p); }

}  // namespace

double stable_cdf_zolotarev(double alpha, double x)
{
	if (!(alpha > 0 && alpha <= 2) || alpha == 1.0) throw InputError("stable_cdf_zolotarev: alpha must be in (0,2], != 1");
	if (x < 0) return 1.0 - stable_cdf_zolotarev(alpha, -x);
	if (x == 0) return 0.5;
	double const e = alpha / (alpha - 1.0);
	double const log_x = std::log(x);
	auto integrand = [&](double theta) {
		// log V(theta) with the cos(theta) powers combined so that neither endpoint produces inf - inf.
		double const log_v = (e - 1.0) * std::log(std::cos(theta)) - e * std::log(std::sin(alpha * theta))
				     + std::log(std::cos((alpha - 1.0) * theta));
		double const arg = e * log_x + log_v;
		if (arg > 700) return 0.0;
		return std::exp(-std::exp(arg));
	};
	double const integral =
		boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, pi / 2, 12, 1e-11);
	return alpha < 1 ? 0.5 + integral / pi : 1.0 - integral / pi;
}

namespace detail
{

class StableCdfTable
{
public:
	explicit StableCdfTable(double alpha) : alpha_(alpha)
	{
		std::vector<double> xs, fs;
		// Dense linear grid through the body, geometric grid through the tail.
		for (int i = 0; i <= 4000; ++i)
			xs.push_back(0.005 * i);
		double const ratio = std::pow(1e6 / 20.0, 1.0 / 400.0);
		for (int i = 1; i <= 400; ++i)
			xs.push_back(20.0 * std::pow(ratio, i));
		fs.reserve(xs.size());
		for (double x : xs)
			fs.push_back(stable_cdf_zolotarev(alpha, x));
		// Quadrature noise must not break monotonicity.
		for (std::size_t i = 1; i < fs.size(); ++i)
			fs[i] = std::max(fs[i], fs[i - 1]);
		x_max_ = xs.back();
		f_max_ = fs.back();
		grid_f_ = fs;
		grid_x_ = xs;
		interp_ = std::make_unique<boost::math::interpolators::pchip<std::vector<double>>>(std::move(xs), std::move(fs));
	}

	double cdf_nonnegative(double x) const
	{
		if (x <= x_max_) return std::clamp((*interp_)(x), 0.5, 1.0);
		return 1.0 - (1.0 - f_max_) * std::pow(x_max_ / x, alpha_);
	}

	double quantile_upper(double p) const
	{
		if (p >= f_max_) return x_max_ * std::pow((1.0 - f_max_) / (1.0 - p), 1.0 / alpha_);
		auto it = std::upper_bound(grid_f_.begin(), grid_f_.end(), p);
		std::size_t const hi = static_cast<std::size_t>(it - grid_f_.begin());
		double lo_x = grid_x_[hi - 1], hi_x = grid_x_[hi];
		for (int iter = 0; iter < 200 && hi_x - lo_x > 1e-15 * std::max(1.0, hi_x); ++iter) {
			double const mid = 0.5 * (lo_x + hi_x);
			if (cdf_nonnegative(mid) < p)
				lo_x = mid;
			else
				hi_x = mid;
		}
		return 0.5 * (lo_x + hi_x);
	}

private:
	double alpha_;
	double x_max_ = 0;
	double f_max_ = 0;
	std::vector<double> grid_x_, grid_f_;
	std::unique_ptr<boost::math::interpolators::pchip<std::vector<double>>> interp_;
};

namespace
{

std::shared_ptr<const StableCdfTable> table_for(double alpha)
{
	static std::mutex mutex;
	static std::map<double, std::shared_ptr<const StableCdfTable>> cache;
	std::lock_guard lock(mutex);
	auto &slot = cache[alpha];
	if (!slot) slot = std::make_shared<const StableCdfTable>(alpha);
	return slot;
}

}  // namespace
}  // namespace detail

MarginalLaw::MarginalLaw(MarginalFamily family, double alpha, double scale)
    : family_(family), alpha_(alpha), scale_(scale)
{
	if (!(scale > 0) || !std::isfinite(scale)) throw InputError("marginal scale must be positive and finite");
	if (family == MarginalFamily::stable && alpha != 1.0 && alpha != 2.0) table_ = detail::table_for(alpha);
}

MarginalLaw MarginalLaw::gaussian(double scale) { return MarginalLaw(MarginalFamily::gaussian, 2.0, scale); }

MarginalLaw MarginalLaw::stable(double alpha, double scale)
{
	if (!(alpha > 0 && alpha <= 2)) throw InputError("stable marginal requires alpha in (0, 2]");
	return MarginalLaw(MarginalFamily::stable, alpha, scale);
}

MarginalLaw MarginalLaw::scaled(double c) const
{
	if (!(c > 0)) throw InputError("scale factor must be positive");
	MarginalLaw out = *this;
	out.scale_ = scale_ * c;
	return out;
}

double MarginalLaw::standard_cdf(double z) const
{
	if (std::isnan(z)) throw InputError("cdf: NaN argument");
	if (family_ == MarginalFamily::gaussian) return normal_cdf(z);
	if (alpha_ == 1.0) return 0.5 + std::atan(z) / pi;
	if (alpha_ == 2.0) return normal_cdf(z / std::sqrt(2.0));
	if (std::isinf(z)) return z > 0 ? 1.0 : 0.0;
	return z >= 0 ? table_->cdf_nonnegative(z) : 1.0 - table_->cdf_nonnegative(-z);
}

double MarginalLaw::cdf(double t) const { return standard_cdf(t / scale_); }

double MarginalLaw::quantile(double p) const
{
	if (!(p > 0 && p < 1)) throw InputError("quantile: probability must lie in (0, 1)");
	if (p == 0.5) return 0.0;
	double z = 0;
	if (family_ == MarginalFamily::gaussian)
		z = normal_quantile(p);
	else if (alpha_ == 1.0)
		z = std::tan(pi * (p - 0.5));
	else if (alpha_ == 2.0)
		z = std::sqrt(2.0) * normal_quantile(p);
	else
		z = p > 0.5 ? table_->quantile_upper(p) : -table_->quantile_upper(1.0 - p);
	return scale_ * z;
}

double MarginalLaw::sample(Rng &rng) const
{
	if (family_ == MarginalFamily::gaussian) return scale_ * std::normal_distribution<double>()(rng);

	// Chambers-Mallows-Stuck, symmetric case.
	std::uniform_real_distribution<double> angle(-pi / 2, pi / 2);
	std::exponential_distribution<double> expo(1.0);
	for (;;) {
		double const v = angle(rng);
		double const w = expo(rng);
		double x;
		if (alpha_ == 1.0) {
			x = std::tan(v);
		} else {
			if (!(w > 0)) continue;
			x = std::sin(alpha_ * v) / std::pow(std::cos(v), 1.0 / alpha_)
			    * std::pow(std::cos(v - alpha_ * v) / w, (1.0 - alpha_) / alpha_);
		}
		if (std::isfinite(x)) return scale_ * x;
	}
}

std::string MarginalLaw::describe() const
{
	std::ostringstream os;
	if (family_ == MarginalFamily::gaussian)
		os << "gaussian";
	else
		os << "stable(alpha=" << alpha_ << ")";
	if (scale_ != 1.0) os << "*" << scale_;
	return os.str();
}

}  // namespace depthlab
