#include "depthlab/location_depth.hpp"

#include "depthlab/norms.hpp"
#include "depthlab/rng.hpp"

#include <boost/math/constants/constants.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <unordered_set>
#include <utility>

namespace depthlab
{

namespace
{

constexpr double pi = boost::math::constants::pi<double>();
constexpr double two_pi = 2.0 * pi;

// Critical angles closer than this are treated as one event.
constexpr double angle_merge_tol = 1e-12;

// Every projection (data or query point) goes through this loop so that equal inputs give
// bit-identical projections and ties are counted consistently.
inline double dot(const double *a, const double *b, Eigen::Index d)
{
	double s = 0;
	for (Eigen::Index j = 0; j < d; ++j)
		s += a[j] * b[j];
	return s;
}

double wrap_angle(double t)
{
	t = std::fmod(t, two_pi);
	if (t < 0) t += two_pi;
	return t;
}

void check_point(const Vector &x, const SampleMatrix &sample)
{
	if (x.size() != sample.dim()) throw InputError("point dimension does not match the sample");
	if (!x.allFinite()) throw InputError("point has non-finite coordinates");
}

}  // namespace

DepthMethod parse_depth_method(const std::string &name)
{
	if (name == "exact1d") return DepthMethod::exact1d;
	if (name == "exact2d") return DepthMethod::exact2d;
	if (name == "approx") return DepthMethod::approx;
	throw InputError("unknown depth method '" + name + "' (expected exact1d, exact2d or approx)");
}

std::string to_string(DepthMethod m)
{
	switch (m) {
	case DepthMethod::exact1d:
		return "exact1d";
	case DepthMethod::exact2d:
		return "exact2d";
	case DepthMethod::approx:
		return "approx";
	}
	return "?";
}

double population_hd(const Vector &x, const AlphaModel &model)
{
	if (x.size() != model.dim) throw InputError("population_hd: point dimension does not match the model");
	return 1.0 - model.marginal.cdf(alpha_norm(x, conjugate_index(model.alpha)));
}

DirectionMatrix approx_directions(Eigen::Index d, Eigen::Index k, std::uint64_t seed)
{
	if (k < 1) throw InputError("approximate depth needs at least one direction");
	return sphere_directions(d, k, DirectionScheme::candidate_augmented, seed);
}

HalfspaceCounter::HalfspaceCounter(const SampleMatrix &sample, DirectionMatrix directions)
    : directions_(std::move(directions)), n_(sample.size())
{
	Eigen::Index const d = sample.dim();
	if (directions_.rows() != d) throw InputError("direction dimension does not match the sample");
	if (directions_.cols() < 1) throw InputError("empty direction set");
	RowMatrix const rows = sample.data();
	sorted_.resize(static_cast<std::size_t>(n_ * directions_.cols()));
	for (Eigen::Index k = 0; k < directions_.cols(); ++k) {
		double *out = sorted_.data() + k * n_;
		const double *u = directions_.col(k).data();
		for (Eigen::Index i = 0; i < n_; ++i)
			out[i] = dot(rows.row(i).data(), u, d);
		std::sort(out, out + n_);
	}
}

Eigen::Index HalfspaceCounter::depth_count_above(const Vector &x, Eigen::Index floor) const
{
	if (x.size() != dim()) throw InputError("point dimension does not match the counter");
	Eigen::Index best = n_;
	for (Eigen::Index k = 0; k < directions_.cols(); ++k) {
		const double *s = sorted_.data() + k * n_;
		double const t = dot(x.data(), directions_.col(k).data(), dim());
		auto const le = std::upper_bound(s, s + n_, t) - s;
		auto const ge = n_ - (std::lower_bound(s, s + n_, t) - s);
		best = std::min<Eigen::Index>(best, std::min<Eigen::Index>(le, ge));
		if (best < floor) return best;
	}
	return best;
}

double sample_hd_exact1d(double x, const SampleMatrix &sample)
{
	if (sample.dim() != 1) throw InputError("exact1d requires d = 1");
	if (!std::isfinite(x)) throw InputError("point has non-finite coordinates");
	Eigen::Index le = 0, ge = 0;
	for (Eigen::Index i = 0; i < sample.size(); ++i) {
		double const v = sample.data()(i, 0);
		le += v <= x;
		ge += v >= x;
	}
	return static_cast<double>(std::min(le, ge)) / static_cast<double>(sample.size());
}

double sample_hd_exact2d(const Vector &x, const SampleMatrix &sample)
{
	if (sample.dim() != 2) throw InputError("exact2d requires d = 2");
	check_point(x, sample);
	Eigen::Index const n = sample.size();

	// Point i lies in the closed halfplane {<y,u> <= <x,u>} exactly when the angle of u is in
	// the closed arc [phi_i + pi/2, phi_i + 3pi/2], phi_i the angle of X_i - x.
	Eigen::Index zero = 0;
	std::vector<std::pair<double, int>> events;
	std::vector<std::array<double, 2>> offsets;
	events.reserve(static_cast<std::size_t>(2 * n));
	offsets.reserve(static_cast<std::size_t>(n));
	for (Eigen::Index i = 0; i < n; ++i) {
		double const vx = sample.data()(i, 0) - x(0);
		double const vy = sample.data()(i, 1) - x(1);
		if (vx == 0 && vy == 0) {
			++zero;
			continue;
		}
		double const phi = std::atan2(vy, vx);
		events.emplace_back(wrap_angle(phi + pi / 2), +1);
		events.emplace_back(wrap_angle(phi + 3 * pi / 2), -1);
		offsets.push_back({vx, vy});
	}
	if (offsets.empty()) return 1.0;
	std::sort(events.begin(), events.end());

	// Start the sweep inside the widest gap between consecutive critical angles.
	std::size_t const m = events.size();
	auto angle_at = [&](std::size_t j) { return events[j % m].first + (j >= m ? two_pi : 0.0); };
	std::size_t cut = 0;
	double widest = -1;
	for (std::size_t j = 0; j < m; ++j) {
		double const gap = angle_at(j + 1) - angle_at(j);
		if (gap > widest) {
			widest = gap;
			cut = j;
		}
	}
	double const theta0 = angle_at(cut) + widest / 2;
	double const c0 = std::cos(theta0), s0 = std::sin(theta0);
	Eigen::Index count = 0;
	for (const auto &v : offsets)
		count += v[0] * c0 + v[1] * s0 <= 0;

	// Counts are evaluated on the open intervals between grouped critical angles; at a critical
	// angle itself the closed arcs of both neighbours overlap, so it is never smaller.
	Eigen::Index lowest = count;
	std::size_t j = cut + 1;
	std::size_t const stop = cut + 1 + m;
	while (j < stop) {
		int delta = 0;
		double prev;
		do {
			delta += events[j % m].second;
			prev = angle_at(j);
			++j;
		} while (j < stop && angle_at(j) - prev <= angle_merge_tol);
		count += delta;
		lowest = std::min(lowest, count);
	}
	return static_cast<double>(zero + lowest) / static_cast<double>(n);
}

double sample_hd(const Vector &x, const SampleMatrix &sample, const DirectionMatrix &directions)
{
	check_point(x, sample);
	HalfspaceCounter const counter(sample, directions);
	return static_cast<double>(counter.depth_count(x)) / static_cast<double>(sample.size());
}

double sample_hd(const Vector &x, const SampleMatrix &sample, const DepthOptions &options)
{
	check_point(x, sample);
	switch (options.method) {
	case DepthMethod::exact1d:
		if (sample.dim() != 1) throw InputError("exact1d requires d = 1");
		return sample_hd_exact1d(x(0), sample);
	case DepthMethod::exact2d:
		return sample_hd_exact2d(x, sample);
	case DepthMethod::approx:
		return sample_hd(x, sample, approx_directions(sample.dim(), options.directions, options.seed));
	}
	throw InputError("unknown depth method");
}

namespace
{

// Depth counts under one method, with optional early exit below a floor.
class DepthEvaluator
{
public:
	DepthEvaluator(const SampleMatrix &sample, const DepthOptions &options) : sample_(sample), method_(options.method)
	{
		Eigen::Index const d = sample.dim();
		switch (method_) {
		case DepthMethod::exact1d:
			if (d != 1) throw InputError("exact1d requires d = 1");
			counter_.emplace(sample, DirectionMatrix::Ones(1, 1));
			break;
		case DepthMethod::exact2d:
			if (d != 2) throw InputError("exact2d requires d = 2");
			break;
		case DepthMethod::approx:
			counter_.emplace(sample, approx_directions(d, options.directions, options.seed));
			break;
		}
	}

	Eigen::Index count_above(const Vector &x, Eigen::Index floor) const
	{
		if (counter_) return counter_->depth_count_above(x, floor);
		return static_cast<Eigen::Index>(
			std::llround(sample_hd_exact2d(x, sample_) * static_cast<double>(sample_.size())));
	}

private:
	const SampleMatrix &sample_;
	DepthMethod method_;
	std::optional<HalfspaceCounter> counter_;
};

double quantile_of(std::vector<double> v, double p)
{
	std::size_t const k = static_cast<std::size_t>(std::floor(p * static_cast<double>(v.size() - 1)));
	std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
	return v[k];
}

Vector coordinatewise_median(const Matrix &x)
{
	Vector m(x.cols());
	for (Eigen::Index j = 0; j < x.cols(); ++j) {
		std::vector<double> col(x.col(j).data(), x.col(j).data() + x.rows());
		std::sort(col.begin(), col.end());
		std::size_t const n = col.size();
		m(j) = n % 2 ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
	}
	return m;
}

double spread_scale(const Matrix &x)
{
	double scale = 0;
	for (Eigen::Index j = 0; j < x.cols(); ++j) {
		std::vector<double> col(x.col(j).data(), x.col(j).data() + x.rows());
		scale = std::max(scale, quantile_of(col, 0.75) - quantile_of(col, 0.25));
	}
	if (scale > 0) return scale;
	for (Eigen::Index j = 0; j < x.cols(); ++j)
		scale = std::max(scale, x.col(j).maxCoeff() - x.col(j).minCoeff());
	return scale > 0 ? scale : 1.0;
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> midpoint_pairs(Eigen::Index n, Eigen::Index cap, std::uint64_t seed)
{
	std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
	if (n < 2 || cap < 1) return pairs;
	double const total = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
	if (total <= static_cast<double>(cap)) {
		for (Eigen::Index i = 0; i < n; ++i)
			for (Eigen::Index j = i + 1; j < n; ++j)
				pairs.emplace_back(i, j);
		return pairs;
	}
	Rng rng = make_rng(mix64(seed ^ 0x6d696470ULL));
	std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
	std::unordered_set<std::uint64_t> seen;
	seen.reserve(static_cast<std::size_t>(2 * cap));
	while (static_cast<Eigen::Index>(pairs.size()) < cap) {
		Eigen::Index i = pick(rng), j = pick(rng);
		if (i == j) continue;
		if (i > j) std::swap(i, j);
		if (seen.insert(static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(j)).second)
			pairs.emplace_back(i, j);
	}
	return pairs;
}

}  // namespace

MedianResult tukey_median(const SampleMatrix &sample, const MedianOptions &options)
{
	if (options.multistarts < 0) throw InputError("multistarts must be >= 0");
	if (options.midpoint_cap < 0) throw InputError("midpoint cap must be >= 0");
	DepthEvaluator const eval(sample, options.depth_options());
	Matrix const &x = sample.data();
	Eigen::Index const n = sample.size(), d = sample.dim();
	double const scale = spread_scale(x);

	MedianResult result;
	Eigen::Index best = -1;
	Vector sum = Vector::Zero(d);
	Eigen::Index ties = 0;
	std::vector<Vector> starts;
	Eigen::Index const max_starts = std::max<Eigen::Index>(options.multistarts, 1);

	// Returns the exact count whenever it reaches the current maximum.
	auto consider = [&](const Vector &c, Eigen::Index floor) -> Eigen::Index {
		Eigen::Index const v = eval.count_above(c, std::max<Eigen::Index>(floor, 0));
		++result.candidates_evaluated;
		if (v > best) {
			best = v;
			sum = c;
			ties = 1;
			starts.assign(1, c);
		} else if (v == best) {
			sum += c;
			++ties;
			if (static_cast<Eigen::Index>(starts.size()) < max_starts) starts.push_back(c);
		}
		return v;
	};

	consider(coordinatewise_median(x), best);
	for (Eigen::Index i = 0; i < n; ++i)
		consider(x.row(i).transpose(), best);
	for (auto [i, j] : midpoint_pairs(n, options.midpoint_cap, options.seed))
		consider(0.5 * (x.row(i) + x.row(j)).transpose(), best);

	// Coordinate pattern search from the barycenter and the first maximizers found.
	std::vector<Vector> seeds;
	seeds.push_back(sum / static_cast<double>(ties));
	for (const auto &s : starts) {
		if (static_cast<Eigen::Index>(seeds.size()) >= max_starts) break;
		seeds.push_back(s);
	}
	if (options.multistarts > 0) {
		for (Vector cur : seeds) {
			Eigen::Index level = consider(cur, best);
			double step = scale;
			while (step >= 1e-6 * scale) {
				bool moved = false;
				for (Eigen::Index j = 0; j < d; ++j) {
					for (double sign : {1.0, -1.0}) {
						Vector trial = cur;
						trial(j) += sign * step;
						Eigen::Index const v = consider(trial, std::min(level + 1, best));
						if (v > level) {
							cur = std::move(trial);
							level = v;
							moved = true;
						}
					}
				}
				if (!moved) step /= 2;
			}
		}
	}

	double const nn = static_cast<double>(n);
	result.point = sum / static_cast<double>(ties);
	result.maximizers = ties;
	result.pool_max_depth = static_cast<double>(best) / nn;
	result.achieved_depth = static_cast<double>(eval.count_above(result.point, 0)) / nn;
	result.left_deepest_region = result.achieved_depth < result.pool_max_depth;
	return result;
}

double max_depth_over(const Matrix &candidates, const SampleMatrix &sample, const DepthOptions &options)
{
	if (candidates.cols() != sample.dim()) throw InputError("candidate dimension does not match the sample");
	if (candidates.rows() < 1) throw InputError("empty candidate list");
	DepthEvaluator const eval(sample, options);
	Eigen::Index best = 0;
	for (Eigen::Index i = 0; i < candidates.rows(); ++i)
		best = std::max(best, eval.count_above(candidates.row(i).transpose(), best));
	return static_cast<double>(best) / static_cast<double>(sample.size());
}

double bound_constant_c1()
{
	double const e = boost::math::constants::e<double>();
	return 24.0 * std::sqrt(2.0) * std::sqrt(30.0 * pi * e / (1.0 - 1.0 / e));
}

double bound_constant_c2() { return (9.0 * std::sqrt(2.0) + 4.0 * std::sqrt(6.0)) / 4.0; }

double bound_vc_constant()
{
	double const e = boost::math::constants::e<double>();
	return std::sqrt(1440.0 * pi * e / (1.0 - 1.0 / e));
}

Eigen::Index minimal_admissible_n(double delta)
{
	if (!(delta > 0 && delta < 1)) throw InputError("delta must lie in (0, 1)");
	// sqrt(log(1/delta)/(2n)) < 1/3  <=>  n > 4.5 log(1/delta)
	double const limit = 4.5 * std::log(1.0 / delta);
	Eigen::Index n = static_cast<Eigen::Index>(std::floor(limit)) + 1;
	return std::max<Eigen::Index>(n, 1);
}

RateBound location_bound_rhs(double epsilon, Eigen::Index d, Eigen::Index n, double delta)
{
	if (!(epsilon >= 0 && epsilon < 1.0 / 3.0)) throw InputError("bound requires 0 <= epsilon < 1/3");
	if (d < 1) throw InputError("bound requires d >= 1");
	if (n < 1) throw InputError("bound requires n >= 1");
	if (!(delta > 0 && delta < 0.5)) throw InputError("bound requires delta in (0, 1/2)");
	double const log_term = std::log(1.0 / delta);
	if (!(std::sqrt(log_term / (2.0 * static_cast<double>(n))) < 1.0 / 3.0))
		throw InputError("side condition sqrt(log(1/delta)/(2n)) < 1/3 fails for n = " + std::to_string(n)
				 + "; the minimal admissible n is " + std::to_string(minimal_admissible_n(delta)));
	RateBound b;
	b.epsilon = epsilon;
	b.d = d;
	b.n = n;
	b.delta = delta;
	b.c1 = bound_constant_c1();
	b.c2 = bound_constant_c2();
	b.vc_constant = bound_vc_constant();
	double const nn = static_cast<double>(n);
	b.value = epsilon / (1.0 - epsilon) + b.c1 * std::sqrt(static_cast<double>(d) / nn) + b.c2 * std::sqrt(log_term / nn);
	return b;
}

double max_depth_deviation(const AlphaModel &model, const Vector &median)
{
	return population_hd(Vector::Zero(model.dim), model) - population_hd(median, model);
}

double max_depth_deviation(const AlphaModel &model, const ContaminatedModel &cm, Eigen::Index n, std::uint64_t seed,
			   const MedianOptions &options)
{
	if (cm.base.dim != model.dim || cm.base.alpha != model.alpha)
		throw InputError("contaminated model must have the given model as its base");
	ContaminatedSample const cs = sample_contaminated(cm, n, seed);
	return max_depth_deviation(model, tukey_median(cs.sample, options).point);
}

}  // namespace depthlab
