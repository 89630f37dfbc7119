#include "depthlab/models.hpp"

#include "depthlab/norms.hpp"
#include "depthlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace depthlab
{

std::string AlphaModel::describe() const
{
	std::ostringstream os;
	os << marginal.describe() << " alpha=" << alpha << " d=" << dim;
	return os.str();
}

AlphaModel make_gaussian_spherical(Eigen::Index d)
{
	if (d < 2) throw InputError("alpha-symmetric models need d >= 2");
	return AlphaModel{2.0, d, MarginalLaw::gaussian()};
}

AlphaModel make_independent_stable(double alpha, Eigen::Index d, double scale)
{
	if (!(alpha > 0 && alpha <= 2)) throw InputError("independent stable model needs alpha in (0, 2]");
	if (d < 2) throw InputError("alpha-symmetric models need d >= 2");
	return AlphaModel{alpha, d, MarginalLaw::stable(alpha, scale)};
}

AlphaModel scale_model(const AlphaModel &model, double c)
{
	AlphaModel out = model;
	out.marginal = model.marginal.scaled(c);
	return out;
}

SampleMatrix sample(const AlphaModel &model, Eigen::Index n, std::uint64_t seed)
{
	if (n < 1) throw InputError("sample: n must be >= 1");
	Rng rng = make_rng(seed);
	Matrix x(n, model.dim);
	for (Eigen::Index i = 0; i < n; ++i)
		for (Eigen::Index j = 0; j < model.dim; ++j)
			x(i, j) = model.marginal.sample(rng);
	return SampleMatrix(std::move(x));
}

Contaminant Contaminant::point_mass(Vector location)
{
	if (location.size() < 1 || !location.allFinite()) throw InputError("point-mass contaminant needs a finite location");
	Contaminant c;
	c.location_ = std::move(location);
	return c;
}

Contaminant Contaminant::shifted_model(AlphaModel model, Vector shift)
{
	if (shift.size() != model.dim) throw InputError("contaminant shift has the wrong dimension");
	Contaminant c;
	c.location_ = std::move(shift);
	c.model_ = std::move(model);
	return c;
}

Contaminant Contaminant::default_for(const AlphaModel &base, double offset)
{
	return point_mass(Vector::Constant(base.dim, offset * base.marginal.scale()));
}

Vector Contaminant::draw(Rng &rng) const
{
	if (!model_) return location_;
	Vector x(location_.size());
	for (Eigen::Index j = 0; j < x.size(); ++j)
		x(j) = location_(j) + model_->marginal.sample(rng);
	return x;
}

std::string Contaminant::describe() const
{
	std::ostringstream os;
	if (model_)
		os << "shifted " << model_->describe();
	else
		os << "point mass";
	os << " at (";
	for (Eigen::Index j = 0; j < location_.size(); ++j)
		os << (j ? "," : "") << location_(j);
	os << ")";
	return os.str();
}

ContaminatedModel::ContaminatedModel(AlphaModel base_, Contaminant contaminant_, double epsilon_)
    : base(std::move(base_)), contaminant(std::move(contaminant_)), epsilon(epsilon_)
{
	if (!(epsilon >= 0 && epsilon < 1.0 / 3.0)) throw InputError("contamination level must satisfy 0 <= epsilon < 1/3");
	if (contaminant.dim() != base.dim) throw InputError("contaminant dimension does not match the model");
}

ContaminatedSample sample_contaminated(const ContaminatedModel &cm, Eigen::Index n, std::uint64_t seed)
{
	if (n < 1) throw InputError("sample_contaminated: n must be >= 1");
	Rng rng = make_rng(seed);
	std::uniform_real_distribution<double> coin(0.0, 1.0);
	Matrix x(n, cm.base.dim);
	std::vector<bool> mask(static_cast<std::size_t>(n), false);
	Eigen::Index count = 0;
	for (Eigen::Index i = 0; i < n; ++i) {
		if (coin(rng) < cm.epsilon) {
			x.row(i) = cm.contaminant.draw(rng).transpose();
			mask[static_cast<std::size_t>(i)] = true;
			++count;
		} else {
			for (Eigen::Index j = 0; j < cm.base.dim; ++j)
				x(i, j) = cm.base.marginal.sample(rng);
		}
	}
	return ContaminatedSample{SampleMatrix(std::move(x)), std::move(mask), count};
}

double ks_two_sample(std::vector<double> a, std::vector<double> b)
{
	if (a.empty() || b.empty()) throw InputError("ks_two_sample: empty sample");
	std::sort(a.begin(), a.end());
	std::sort(b.begin(), b.end());
	double const na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
	std::size_t i = 0, j = 0;
	double d = 0;
	while (i < a.size() && j < b.size()) {
		double const t = std::min(a[i], b[j]);
		while (i < a.size() && a[i] <= t)
			++i;
		while (j < b.size() && b[j] <= t)
			++j;
		d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
	}
	return d;
}

double ks_critical_1pct(std::size_t n, std::size_t m)
{
	double const dn = static_cast<double>(n), dm = static_cast<double>(m);
	return 1.63 * std::sqrt((dn + dm) / (dn * dm));
}

KsResult projection_law_test(const SampleMatrix &data, const AlphaModel &model, const Direction &u, std::uint64_t seed)
{
	if (u.dim() != data.dim()) throw InputError("projection_law_test: direction dimension mismatch");
	Eigen::Index const n = data.size();
	std::vector<double> projected(static_cast<std::size_t>(n)), reference(static_cast<std::size_t>(n));
	Vector const proj = data.data() * u.coords();
	for (Eigen::Index i = 0; i < n; ++i)
		projected[static_cast<std::size_t>(i)] = proj(i);
	double const factor = alpha_norm(u.coords(), model.order());
	Rng rng = make_rng(mix64(seed ^ 0x5bd1e995ULL));
	for (auto &r : reference)
		r = factor * model.marginal.sample(rng);
	KsResult out;
	out.statistic = ks_two_sample(std::move(projected), std::move(reference));
	out.critical = ks_critical_1pct(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
	out.passed = out.statistic <= out.critical;
	return out;
}

KsResult projection_law_test(const AlphaModel &model, const Direction &u, Eigen::Index n, std::uint64_t seed)
{
	if (n < 1000) throw InputError("projection_law_test: n must be >= 1000");
	return projection_law_test(sample(model, n, seed), model, u, seed);
}

GrowthVariant parse_growth_variant(const std::string &name)
{
	if (name == "A2" || name == "a2") return GrowthVariant::A2;
	if (name == "A3" || name == "a3") return GrowthVariant::A3;
	if (name == "A4" || name == "a4") return GrowthVariant::A4;
	throw InputError("unknown growth condition variant '" + name + "' (expected A2, A3 or A4)");
}

std::string to_string(GrowthVariant v)
{
	switch (v) {
	case GrowthVariant::A2:
		return "A2";
	case GrowthVariant::A3:
		return "A3";
	case GrowthVariant::A4:
		return "A4";
	}
	return "?";
}

GrowthCertificate check_growth_condition(const MarginalLaw &marginal, GrowthVariant variant, double gamma,
					 double kappa, std::optional<double> sigma, double epsilon)
{
	if (!(gamma > 0) || !(kappa > 0)) throw InputError("growth condition needs gamma > 0 and kappa > 0");
	if (!(epsilon >= 0 && epsilon < 1)) throw InputError("growth condition needs epsilon in [0, 1)");

	GrowthCertificate cert;
	cert.variant = variant;
	cert.gamma = gamma;
	cert.kappa = kappa;
	cert.epsilon = epsilon;

	double const gk = gamma * kappa;
	if (variant == GrowthVariant::A2) {
		if (!(epsilon / (1 - epsilon) < gk))
			cert.reason = "range:gamma*kappa<=eps/(1-eps)";
		else if (!(gk < 0.5))
			cert.reason = "range:gamma*kappa>=1/2";
	} else {
		if (!sigma) throw InputError(to_string(variant) + " requires sigma");
		if (!(*sigma > 0)) throw InputError("sigma must be positive");
		if (!(epsilon / (2 * (1 - epsilon)) < gk))
			cert.reason = "range:gamma*kappa<=eps/(2(1-eps))";
		else if (!(gk <= 0.25))
			cert.reason = "range:gamma*kappa>1/4";
	}
	cert.range_ok = cert.reason.empty();

	double center = 0, f_center = 0.5;
	auto value_at = [&](double t) -> double {
		switch (variant) {
		case GrowthVariant::A2:
			return marginal.cdf(t);
		case GrowthVariant::A3:
			return marginal.cdf(std::sqrt(t));
		case GrowthVariant::A4:
			return marginal.cdf(t);
		}
		return 0;
	};
	if (variant == GrowthVariant::A3) center = *sigma * *sigma;
	if (variant == GrowthVariant::A4) center = *sigma;
	f_center = value_at(center);

	constexpr int per_side = 5000;
	double inf = std::numeric_limits<double>::infinity();
	for (int j = 0; j < per_side; ++j) {
		double const h = gamma * std::pow(10.0, -9.0 * j / (per_side - 1));
		for (double t : {center - h, center + h}) {
			if (variant == GrowthVariant::A3 && t < 0) continue;
			inf = std::min(inf, std::abs(value_at(t) - f_center) / h);
		}
	}
	cert.witnessed_inf = inf;
	cert.holds = cert.range_ok && inf >= kappa;
	if (cert.range_ok && !cert.holds) cert.reason = "infimum<kappa";
	return cert;
}

AlphaModel parse_model_spec(const std::string &spec)
{
	auto const colon = spec.find(':');
	std::string const family = spec.substr(0, colon);
	std::map<std::string, double> kv;
	if (colon != std::string::npos) {
		std::stringstream rest(spec.substr(colon + 1));
		std::string item;
		while (std::getline(rest, item, ',')) {
			auto const eq = item.find('=');
			if (eq == std::string::npos) throw InputError("model spec: expected key=value, got '" + item + "'");
			std::string const key = item.substr(0, eq);
			try {
				std::size_t used = 0;
				double const v = std::stod(item.substr(eq + 1), &used);
				if (used != item.size() - eq - 1) throw std::invalid_argument("trailing");
				kv[key] = v;
			} catch (const std::exception &) {
				throw InputError("model spec: bad number in '" + item + "'");
			}
		}
	}
	auto take = [&](const std::string &key, std::optional<double> fallback) -> double {
		auto it = kv.find(key);
		if (it == kv.end()) {
			if (!fallback) throw InputError("model spec '" + spec + "' is missing '" + key + "'");
			return *fallback;
		}
		double v = it->second;
		kv.erase(it);
		return v;
	};
	if (kv.count("dim") && !kv.count("d")) {
		kv["d"] = kv["dim"];
		kv.erase("dim");
	}
	double const d = take("d", std::nullopt);
	if (d != std::floor(d) || d < 2) throw InputError("model spec: d must be an integer >= 2");
	double const scale = take("scale", 1.0);
	AlphaModel model;
	if (family == "gaussian") {
		model = make_gaussian_spherical(static_cast<Eigen::Index>(d));
		if (scale != 1.0) model = scale_model(model, scale);
	} else if (family == "cauchy") {
		model = make_independent_stable(1.0, static_cast<Eigen::Index>(d), scale);
	} else if (family == "stable") {
		model = make_independent_stable(take("alpha", std::nullopt), static_cast<Eigen::Index>(d), scale);
	} else {
		throw InputError("unknown model family '" + family + "' (expected gaussian, cauchy or stable)");
	}
	if (!kv.empty()) throw InputError("model spec: unknown key '" + kv.begin()->first + "'");
	return model;
}

}  // namespace depthlab
