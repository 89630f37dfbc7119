#include "depthlab/scatter_depth.hpp"

#include "depthlab/norms.hpp"
#include "depthlab/rng.hpp"
#include "pattern_search.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace depthlab
{

namespace
{

bool is_scaled_identity(const Matrix &m, double &c2)
{
	c2 = m(0, 0);
	for (Eigen::Index i = 0; i < m.rows(); ++i)
		for (Eigen::Index j = 0; j < m.cols(); ++j)
			if (m(i, j) != (i == j ? c2 : 0.0)) return false;
	return true;
}

DirectionMatrix search_starts(Eigen::Index d, const SphereSearchOptions &options)
{
	Eigen::Index const k = std::min<Eigen::Index>(std::max(options.multistarts, candidate_direction_count(d)), 256);
	return sphere_directions(d, std::max<Eigen::Index>(k, 1), DirectionScheme::candidate_augmented, options.seed);
}

// Multistart search of inf and sup of a degree-0 homogeneous function on the sphere.
// Ties keep the earliest start.
template <typename F>
RatioRange sphere_range(F &&f, Eigen::Index d, const SphereSearchOptions &options)
{
	DirectionMatrix const starts = search_starts(d, options);
	RatioRange r;
	r.inf_value = std::numeric_limits<double>::infinity();
	r.sup_value = -std::numeric_limits<double>::infinity();
	auto neg = [&](const Vector &u) { return -f(u); };
	for (Eigen::Index k = 0; k < starts.cols(); ++k) {
		auto hi = detail::pattern_maximize(f, starts.col(k), 0.25, options.step_tolerance, true);
		if (hi.value > r.sup_value) {
			r.sup_value = hi.value;
			r.argmax = hi.x;
		}
		auto lo = detail::pattern_maximize(neg, starts.col(k), 0.25, options.step_tolerance, true);
		if (-lo.value < r.inf_value) {
			r.inf_value = -lo.value;
			r.argmin = lo.x;
		}
	}
	return r;
}

RatioRange eigen_range(const Matrix &m, bool take_sqrt)
{
	Eigen::SelfAdjointEigenSolver<Matrix> es(m);
	if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
	RatioRange r;
	Eigen::Index const last = m.rows() - 1;
	r.inf_value = take_sqrt ? std::sqrt(es.eigenvalues()(0)) : es.eigenvalues()(0);
	r.sup_value = take_sqrt ? std::sqrt(es.eigenvalues()(last)) : es.eigenvalues()(last);
	r.argmin = es.eigenvectors().col(0);
	r.argmax = es.eigenvectors().col(last);
	return r;
}

double depth_from_range(const RatioRange &r, const MarginalLaw &f)
{
	return 2.0 * std::min(f.cdf(r.inf_value) - 0.5, 1.0 - f.cdf(r.sup_value));
}

inline double dot(const double *a, const double *b, Eigen::Index d)
{
	double s = 0;
	for (Eigen::Index j = 0; j < d; ++j)
		s += a[j] * b[j];
	return s;
}

// Sorted |<X_i - c, u>| per direction; a depth query then needs one half-width per direction.
class SlabCounter
{
public:
	SlabCounter(const SampleMatrix &sample, const Vector &center, const DirectionMatrix &dirs)
	    : dirs_(dirs), n_(sample.size())
	{
		Eigen::Index const d = sample.dim();
		if (center.size() != d) throw InputError("center dimension does not match the sample");
		if (dirs.rows() != d) throw InputError("direction dimension does not match the sample");
		if (dirs.cols() < 1) throw InputError("empty direction set");
		RowMatrix const centered = sample.data().rowwise() - center.transpose();
		abs_.resize(static_cast<std::size_t>(n_ * dirs.cols()));
		for (Eigen::Index k = 0; k < dirs.cols(); ++k) {
			double *out = abs_.data() + k * n_;
			for (Eigen::Index i = 0; i < n_; ++i)
				out[i] = std::abs(dot(centered.row(i).data(), dirs.col(k).data(), d));
			std::sort(out, out + n_);
		}
	}

	Eigen::Index count(const std::vector<double> &half_width) const
	{
		Eigen::Index best = n_;
		for (Eigen::Index k = 0; k < dirs_.cols(); ++k) {
			const double *a = abs_.data() + k * n_;
			double const h = half_width[static_cast<std::size_t>(k)];
			Eigen::Index const inside = std::upper_bound(a, a + n_, h) - a;
			Eigen::Index const outside = n_ - (std::lower_bound(a, a + n_, h) - a);
			best = std::min(best, std::min(inside, outside));
		}
		return best;
	}

	const DirectionMatrix &dirs() const { return dirs_; }
	Eigen::Index size() const { return n_; }

	// All |projection| / weight_k values, for choosing a scan range.
	std::vector<double> pooled(const std::vector<double> &weight) const
	{
		std::vector<double> out(abs_.size());
		for (Eigen::Index k = 0; k < dirs_.cols(); ++k)
			for (Eigen::Index i = 0; i < n_; ++i) {
				std::size_t const idx = static_cast<std::size_t>(k * n_ + i);
				out[idx] = abs_[idx] / weight[static_cast<std::size_t>(k)];
			}
		return out;
	}

private:
	DirectionMatrix dirs_;
	Eigen::Index n_;
	std::vector<double> abs_;
};

std::vector<double> half_widths(const Matrix &sigma, const DirectionMatrix &dirs, const ScatterDepthSpec &spec)
{
	std::vector<double> h(static_cast<std::size_t>(dirs.cols()));
	if (spec.kind == ScatterDepthKind::standard) {
		for (Eigen::Index k = 0; k < dirs.cols(); ++k)
			h[static_cast<std::size_t>(k)] = std::sqrt(dirs.col(k).dot(sigma * dirs.col(k)));
	} else {
		Matrix const root = pd_sqrt(ScatterMatrix(sigma)).matrix();
		NormOrder const order(spec.alpha);
		for (Eigen::Index k = 0; k < dirs.cols(); ++k)
			h[static_cast<std::size_t>(k)] = alpha_norm(root * dirs.col(k), order);
	}
	return h;
}

double quantile_inplace(std::vector<double> &v, double p)
{
	std::size_t const k = static_cast<std::size_t>(std::floor(p * static_cast<double>(v.size() - 1)));
	std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
	return v[k];
}

struct IsotropicFit
{
	double sigma;
	Eigen::Index count;
};

// Depth of s² I is a step function of s; scan log s, zoom into the best run, then place s at
// the midpoint of the maximizing interval.
IsotropicFit fit_isotropic(const SlabCounter &counter, const ScatterDepthSpec &spec)
{
	const DirectionMatrix &dirs = counter.dirs();
	std::vector<double> weight(static_cast<std::size_t>(dirs.cols()));
	for (Eigen::Index k = 0; k < dirs.cols(); ++k)
		weight[static_cast<std::size_t>(k)] = spec.kind == ScatterDepthKind::standard
							      ? dirs.col(k).norm()
							      : alpha_norm(dirs.col(k), NormOrder(spec.alpha));
	auto count_at = [&](double s) {
		std::vector<double> h(weight.size());
		for (std::size_t k = 0; k < h.size(); ++k)
			h[k] = s * weight[k];
		return counter.count(h);
	};

	std::vector<double> pooled = counter.pooled(weight);
	double lo = quantile_inplace(pooled, 0.10);
	double hi = quantile_inplace(pooled, 0.999);
	if (!(lo > 0)) {
		// Many ties at zero: fall back to the smallest positive value.
		double smallest = hi;
		for (double v : pooled)
			if (v > 0) smallest = std::min(smallest, v);
		lo = smallest;
	}
	if (!(hi > lo)) hi = lo > 0 ? 2 * lo : 1.0;
	if (!(lo > 0)) lo = hi / 2;

	struct Point
	{
		double s;
		Eigen::Index c;
	};
	auto scan = [&](double a, double b, int m) {
		std::vector<Point> g(static_cast<std::size_t>(m));
		double const la = std::log(a), lb = std::log(b);
		for (int i = 0; i < m; ++i) {
			double const s = std::exp(la + (lb - la) * i / (m - 1));
			g[static_cast<std::size_t>(i)] = {s, count_at(s)};
		}
		return g;
	};
	// Longest run of the maximal count; ties keep the earliest.
	auto best_run = [](const std::vector<Point> &g, std::size_t &a, std::size_t &b) {
		Eigen::Index top = -1;
		for (const auto &p : g)
			top = std::max(top, p.c);
		std::size_t len = 0;
		for (std::size_t i = 0; i < g.size();) {
			if (g[i].c != top) {
				++i;
				continue;
			}
			std::size_t j = i;
			while (j + 1 < g.size() && g[j + 1].c == top)
				++j;
			if (j - i + 1 > len) {
				len = j - i + 1;
				a = i;
				b = j;
			}
			i = j + 1;
		}
		return top;
	};

	std::vector<Point> grid = scan(lo, hi, 512);
	std::size_t a = 0, b = 0;
	for (int round = 0; round < 3; ++round) {
		best_run(grid, a, b);
		double const left = grid[a > 0 ? a - 1 : 0].s;
		double const right = grid[std::min(b + 1, grid.size() - 1)].s;
		if (!(right > left)) break;
		grid = scan(left, right, 128);
	}
	Eigen::Index const top = best_run(grid, a, b);

	auto edge = [&](double outside, double inside) {
		for (int it = 0; it < 80; ++it) {
			double const mid = 0.5 * (outside + inside);
			if (count_at(mid) >= top)
				inside = mid;
			else
				outside = mid;
		}
		return inside;
	};
	double const left = a > 0 ? edge(grid[a - 1].s, grid[a].s) : grid[a].s;
	double const right = b + 1 < grid.size() ? edge(grid[b + 1].s, grid[b].s) : grid[b].s;
	double const s = 0.5 * (left + right);
	IsotropicFit fit{s, count_at(s)};

	// Small pools: the count only changes at pooled values, so check them all. This catches
	// isolated maxima that the scan steps over.
	if (pooled.size() <= 4096) {
		std::sort(pooled.begin(), pooled.end());
		pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());
		for (double v : pooled) {
			if (!(v > 0)) continue;
			Eigen::Index const c = count_at(v);
			if (c > fit.count) fit = {v, c};
		}
	}
	return fit;
}

Matrix lower_from_params(const Vector &theta, Eigen::Index d)
{
	Matrix l = Matrix::Zero(d, d);
	Eigen::Index p = 0;
	for (Eigen::Index i = 0; i < d; ++i)
		for (Eigen::Index j = 0; j <= i; ++j)
			l(i, j) = i == j ? std::exp(theta(p++)) : theta(p++);
	return l;
}

}  // namespace

RatioRange ratio_range(const ScatterMatrix &sigma, double alpha, const SphereSearchOptions &options)
{
	NormOrder const order(alpha);
	Matrix const &m = sigma.matrix();
	Eigen::Index const d = sigma.dim();
	if (!order.is_infinite() && order.value() == 2.0) return eigen_range(m, true);
	double c2 = 0;
	if (is_scaled_identity(m, c2)) {
		// ||u||_2 and ||u||_alpha differ by at most d^{1/alpha - 1/2}, attained at e_1 and at the sign vectors.
		double const c = std::sqrt(c2);
		double const ratio = std::pow(static_cast<double>(d), 0.5 - order.reciprocal());
		Vector e1 = Vector::Zero(d);
		e1(0) = 1;
		Vector const ones = Vector::Ones(d) / std::sqrt(static_cast<double>(d));
		RatioRange r;
		if (ratio < 1) {
			r = {c * ratio, c, ones, e1};
		} else {
			r = {c, c * ratio, e1, ones};
		}
		return r;
	}
	auto f = [&](const Vector &u) { return std::sqrt(u.dot(m * u)) / alpha_norm(u, order); };
	return sphere_range(f, d, options);
}

RatioRange alpha_ratio_range(const ScatterMatrix &sigma, double alpha, const SphereSearchOptions &options)
{
	NormOrder const order(alpha);
	if (!order.is_infinite() && order.value() == 2.0) return eigen_range(sigma.matrix(), true);
	Matrix const root = pd_sqrt(sigma).matrix();
	Eigen::Index const d = sigma.dim();
	double const c = root.cwiseAbs().maxCoeff();
	if (is_signed_permutation(root / c)) {
		Vector e1 = Vector::Zero(d);
		e1(0) = 1;
		return RatioRange{c, c, e1, e1};
	}
	auto f = [&](const Vector &u) { return alpha_norm(root * u, order) / alpha_norm(u, order); };
	return sphere_range(f, d, options);
}

double population_shd(const ScatterMatrix &sigma, const AlphaModel &model)
{
	if (sigma.dim() != model.dim) throw InputError("scatter dimension does not match the model");
	return depth_from_range(ratio_range(sigma, model.alpha), model.marginal);
}

double population_alpha_shd(const ScatterMatrix &sigma, const AlphaModel &model)
{
	if (sigma.dim() != model.dim) throw InputError("scatter dimension does not match the model");
	return depth_from_range(alpha_ratio_range(sigma, model.alpha), model.marginal);
}

double sample_shd(const ScatterMatrix &sigma, const SampleMatrix &sample, const Vector &center, const DirectionMatrix &dirs)
{
	if (sigma.dim() != sample.dim()) throw InputError("scatter dimension does not match the sample");
	SlabCounter const counter(sample, center, dirs);
	return static_cast<double>(counter.count(half_widths(sigma.matrix(), dirs, ScatterDepthSpec{})))
	       / static_cast<double>(sample.size());
}

double sample_alpha_shd(const ScatterMatrix &sigma, const SampleMatrix &sample, const Vector &center,
			const DirectionMatrix &dirs, double alpha)
{
	if (sigma.dim() != sample.dim()) throw InputError("scatter dimension does not match the sample");
	SlabCounter const counter(sample, center, dirs);
	ScatterDepthSpec const spec{ScatterDepthKind::alpha, alpha};
	return static_cast<double>(counter.count(half_widths(sigma.matrix(), dirs, spec)))
	       / static_cast<double>(sample.size());
}

double population_scatter_sigma(const AlphaModel &model)
{
	const MarginalLaw &f = model.marginal;
	double const shrink = std::pow(static_cast<double>(model.dim), 0.5 - model.order().reciprocal());
	// Increasing in s: the slab side grows while the complement shrinks.
	auto g = [&](double s) { return (f.cdf(s * shrink) - 0.5) - (1.0 - f.cdf(s)); };
	double lo = f.quantile(0.6), hi = f.quantile(0.999);
	int grow = 0;
	while (g(lo) > 0) {
		lo /= 2;
		if (++grow > 60) throw NumericalError("population_scatter_sigma: root not bracketed");
	}
	grow = 0;
	while (g(hi) < 0) {
		hi *= 2;
		if (++grow > 60) throw NumericalError("population_scatter_sigma: root not bracketed");
	}
	for (int it = 0; it < 400 && hi - lo > 1e-13 * hi; ++it) {
		double const mid = 0.5 * (lo + hi);
		if (g(mid) < 0)
			lo = mid;
		else
			hi = mid;
	}
	return 0.5 * (lo + hi);
}

double population_alpha_scatter_sigma(const AlphaModel &model) { return model.marginal.quantile(0.75); }

std::string ScatterDepthSpec::describe() const
{
	if (kind == ScatterDepthKind::standard) return "standard";
	std::ostringstream os;
	os << "alpha=" << alpha;
	return os.str();
}

ScatterDepthSpec parse_scatter_depth(const std::string &text)
{
	if (text == "standard") return {};
	std::string number;
	if (text.rfind("alpha=", 0) == 0)
		number = text.substr(6);
	else if (text.rfind("alpha(", 0) == 0 && text.size() > 7 && text.back() == ')')
		number = text.substr(6, text.size() - 7);
	else
		throw InputError("unknown scatter depth '" + text + "' (expected standard or alpha=<a>)");
	try {
		std::size_t used = 0;
		double const a = std::stod(number, &used);
		if (used != number.size()) throw std::invalid_argument("trailing");
		NormOrder const check(a);
		(void)check;
		return {ScatterDepthKind::alpha, a};
	} catch (const InputError &) {
		throw;
	} catch (const std::exception &) {
		throw InputError("bad alpha in scatter depth '" + text + "'");
	}
}

ScatterMode parse_scatter_mode(const std::string &name)
{
	if (name == "isotropic") return ScatterMode::isotropic;
	if (name == "diagonal") return ScatterMode::diagonal;
	if (name == "full") return ScatterMode::full;
	throw InputError("unknown scatter mode '" + name + "' (expected isotropic, diagonal or full)");
}

std::string to_string(ScatterMode mode)
{
	switch (mode) {
	case ScatterMode::isotropic:
		return "isotropic";
	case ScatterMode::diagonal:
		return "diagonal";
	case ScatterMode::full:
		return "full";
	}
	return "?";
}

ScatterMedianResult sample_scatter_median(const SampleMatrix &sample, const ScatterMedianOptions &options)
{
	if (options.mode == ScatterMode::full && sample.size() < sample.dim() + 1)
		throw InputError("full scatter mode needs n >= d + 1 observations");
	return sample_scatter_median(sample, tukey_median(sample, options.center).point, options);
}

ScatterMedianResult sample_scatter_median(const SampleMatrix &sample, const Vector &center,
					  const ScatterMedianOptions &options)
{
	Eigen::Index const d = sample.dim(), n = sample.size();
	if (options.mode == ScatterMode::full && n < d + 1) throw InputError("full scatter mode needs n >= d + 1 observations");
	if (options.directions < 1) throw InputError("scatter median needs at least one direction");
	if (options.depth.kind == ScatterDepthKind::alpha) (void)NormOrder(options.depth.alpha);

	DirectionMatrix const dirs =
		sphere_directions(d, options.directions, DirectionScheme::candidate_augmented, options.seed);
	SlabCounter const counter(sample, center, dirs);
	IsotropicFit const iso = fit_isotropic(counter, options.depth);

	ScatterMedianResult result;
	result.mode = options.mode;
	result.center = center;
	double const nn = static_cast<double>(n);
	if (options.mode == ScatterMode::isotropic) {
		result.sigma = iso.sigma;
		result.matrix = ScatterMatrix::identity(d, iso.sigma * iso.sigma);
		result.achieved_depth = static_cast<double>(iso.count) / nn;
		return result;
	}

	bool const diagonal = options.mode == ScatterMode::diagonal;
	Eigen::Index const p = diagonal ? d : d * (d + 1) / 2;
	auto to_matrix = [&](const Vector &theta) -> Matrix {
		if (diagonal) return theta.array().exp().square().matrix().asDiagonal();
		Matrix const l = lower_from_params(theta, d);
		return l * l.transpose();
	};
	auto objective = [&](const Vector &theta) -> double {
		Matrix const s = to_matrix(theta);
		if (!s.allFinite()) return -1.0;
		try {
			return static_cast<double>(counter.count(half_widths(s, dirs, options.depth)));
		} catch (const DomainError &) {
			return -1.0;
		}
	};

	Vector base = Vector::Zero(p);
	double const log_s = std::log(iso.sigma);
	if (diagonal) {
		base.setConstant(log_s);
	} else {
		Eigen::Index q = 0;
		for (Eigen::Index i = 0; i < d; ++i)
			for (Eigen::Index j = 0; j <= i; ++j)
				base(q++) = i == j ? log_s : 0.0;
	}

	Vector best_theta = base;
	double best_value = -2.0;
	Eigen::Index const starts = std::max<Eigen::Index>(options.multistarts, 1);
	for (Eigen::Index m = 0; m < starts; ++m) {
		Vector theta = base;
		if (m > 0) {
			Rng rng = make_rng(derive_seed(options.seed, {0x73636174ULL, static_cast<std::uint64_t>(m)}));
			std::normal_distribution<double> jitter(0.0, 0.1);
			for (Eigen::Index j = 0; j < p; ++j)
				theta(j) += jitter(rng);
		}
		auto r = detail::pattern_maximize(objective, theta, 0.25, 1e-4);
		if (r.value > best_value) {
			best_value = r.value;
			best_theta = r.x;
		}
	}
	result.matrix = ScatterMatrix(to_matrix(best_theta));
	result.achieved_depth = best_value / nn;
	return result;
}

double scatter_pseudometric(const ScatterMatrix &a, const ScatterMatrix &b, double alpha, const SphereSearchOptions &options)
{
	if (a.dim() != b.dim()) throw InputError("pseudometric: dimension mismatch");
	NormOrder const order(alpha);
	double ca = 0, cb = 0;
	if (is_scaled_identity(a.matrix(), ca) && is_scaled_identity(b.matrix(), cb))
		return std::abs(std::sqrt(ca) - std::sqrt(cb));
	Matrix const ra = pd_sqrt(a).matrix(), rb = pd_sqrt(b).matrix();
	auto f = [&](const Vector &u) {
		return std::abs(alpha_norm(ra * u, order) - alpha_norm(rb * u, order)) / alpha_norm(u, order);
	};
	return sphere_range(f, a.dim(), options).sup_value;
}

RateBound scatter_bound_rhs(double epsilon, Eigen::Index d, Eigen::Index n, double delta)
{
	return location_bound_rhs(epsilon, d, n, delta);
}

}  // namespace depthlab
