#include "depthlab/experiments.hpp"

#include "depthlab/norms.hpp"
#include "depthlab/rng.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace depthlab
{

ExperimentKind parse_experiment_kind(const std::string &name)
{
	if (name == "location_rate") return ExperimentKind::location_rate;
	if (name == "maxdepth_coverage") return ExperimentKind::maxdepth_coverage;
	if (name == "scatter_rate") return ExperimentKind::scatter_rate;
	throw InputError("unknown experiment '" + name + "' (expected location_rate, maxdepth_coverage or scatter_rate)");
}

std::string to_string(ExperimentKind kind)
{
	switch (kind) {
	case ExperimentKind::location_rate:
		return "location_rate";
	case ExperimentKind::maxdepth_coverage:
		return "maxdepth_coverage";
	case ExperimentKind::scatter_rate:
		return "scatter_rate";
	}
	return "?";
}

AlphaModel ModelSpec::build(Eigen::Index d) const
{
	if (family == "gaussian") return scale == 1.0 ? make_gaussian_spherical(d) : scale_model(make_gaussian_spherical(d), scale);
	if (family == "cauchy") return make_independent_stable(1.0, d, scale);
	if (family == "stable") return make_independent_stable(alpha, d, scale);
	throw InputError("unknown model family '" + family + "' (expected gaussian, cauchy or stable)");
}

Contaminant ContaminantSpec::build(const AlphaModel &base) const
{
	Eigen::Index const d = base.dim;
	if (family == "point_mass") {
		if (location) {
			if (static_cast<Eigen::Index>(location->size()) != d)
				throw InputError("contaminant location has the wrong dimension");
			return Contaminant::point_mass(Eigen::Map<const Vector>(location->data(), d));
		}
		return Contaminant::default_for(base, offset);
	}
	Vector const centre = Vector::Constant(d, shift);
	if (family == "gaussian") {
		AlphaModel m = make_gaussian_spherical(d);
		if (scale != 1.0) m = scale_model(m, scale);
		return Contaminant::shifted_model(m, centre);
	}
	if (family == "cauchy") return Contaminant::shifted_model(make_independent_stable(1.0, d, scale), centre);
	if (family == "stable") return Contaminant::shifted_model(make_independent_stable(alpha, d, scale), centre);
	throw InputError("unknown contaminant family '" + family + "' (expected point_mass, gaussian, cauchy or stable)");
}

void ExperimentConfig::validate() const
{
	if (n_grid.empty() || d_grid.empty() || epsilon_grid.empty()) throw InputError("experiment grids must be nonempty");
	if (replications < 1) throw InputError("replications must be >= 1");
	if (!(delta > 0 && delta < 0.5)) throw InputError("delta must lie in (0, 1/2)");
	for (double e : epsilon_grid)
		if (!(e >= 0 && e < 1.0 / 3.0)) throw InputError("epsilon grid must lie in [0, 1/3)");
	for (auto d : d_grid)
		if (d < 2) throw InputError("experiment dimensions must be >= 2");
	for (auto n : n_grid) {
		if (n < 1) throw InputError("sample sizes must be >= 1");
		if (!(std::sqrt(std::log(1.0 / delta) / (2.0 * static_cast<double>(n))) < 1.0 / 3.0))
			throw InputError("n = " + std::to_string(n) + " fails sqrt(log(1/delta)/(2n)) < 1/3; the minimal admissible n is "
					 + std::to_string(minimal_admissible_n(delta)));
	}
	if (directions < 1 || scatter_directions < 1) throw InputError("direction counts must be >= 1");
	if (pool_cap < 0 || multistarts < 0) throw InputError("pool_cap and multistarts must be >= 0");
	(void)model.build(d_grid.front());
}

bool ExperimentRecord::same_columns(const ExperimentRecord &o) const
{
	return n == o.n && d == o.d && epsilon == o.epsilon && delta == o.delta && replication == o.replication
	       && seed == o.seed && deviation == o.deviation && bound == o.bound && within_bound == o.within_bound
	       && achieved_depth == o.achieved_depth && sigma_hat == o.sigma_hat;
}

bool ExperimentReport::all_coverage_ok() const
{
	return std::all_of(cells.begin(), cells.end(), [](const CellSummary &c) { return c.coverage_ok; });
}

unsigned worker_count()
{
	if (const char *env = std::getenv("DEPTHLAB_THREADS")) {
		char *end = nullptr;
		long const v = std::strtol(env, &end, 10);
		if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
	}
	return std::max(1u, std::thread::hardware_concurrency());
}

std::uint64_t replication_seed(std::uint64_t master, Eigen::Index n, Eigen::Index d, double epsilon, Eigen::Index rep)
{
	return derive_seed(master, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(d),
				    std::bit_cast<std::uint64_t>(epsilon), static_cast<std::uint64_t>(rep)});
}

namespace
{

struct Cell
{
	Eigen::Index n;
	Eigen::Index d;
	double epsilon;
};

std::vector<Cell> cells_of(const ExperimentConfig &c)
{
	std::vector<Cell> out;
	for (auto d : c.d_grid)
		for (auto n : c.n_grid)
			for (double e : c.epsilon_grid)
				out.push_back({n, d, e});
	return out;
}

// Runs fn(i) for i in [0, count) on the configured workers; slots are written by index so the
// result does not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t count, Fn &&fn)
{
	unsigned const workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), std::max<std::size_t>(count, 1)));
	std::atomic<std::size_t> next{0};
	std::exception_ptr error;
	std::mutex error_mutex;
	auto work = [&] {
		for (;;) {
			std::size_t const i = next.fetch_add(1);
			if (i >= count) return;
			try {
				fn(i);
			} catch (...) {
				std::lock_guard lock(error_mutex);
				if (!error) error = std::current_exception();
				next.store(count);
			}
		}
	};
	if (workers <= 1) {
		work();
	} else {
		std::vector<std::thread> pool;
		for (unsigned w = 0; w < workers; ++w)
			pool.emplace_back(work);
		for (auto &t : pool)
			t.join();
	}
	if (error) std::rethrow_exception(error);
}

MedianOptions median_options(const ExperimentConfig &c, std::uint64_t seed)
{
	MedianOptions mo;
	mo.method = DepthMethod::approx;
	mo.directions = c.directions;
	mo.multistarts = c.multistarts;
	mo.midpoint_cap = c.pool_cap;
	mo.seed = derive_seed(seed, {1});
	return mo;
}

void require_growth(const ExperimentConfig &c)
{
	if (!c.gamma || !c.kappa)
		throw InputError(to_string(c.kind) + " needs a certified growth condition: set [growth] gamma and kappa");
}

std::map<Eigen::Index, AlphaModel> models_by_dim(const ExperimentConfig &c)
{
	std::map<Eigen::Index, AlphaModel> m;
	for (auto d : c.d_grid)
		m.emplace(d, c.model.build(d));
	return m;
}

ExperimentReport run_location_like(const ExperimentConfig &config, bool rate)
{
	config.validate();
	auto const models = models_by_dim(config);
	if (rate) {
		require_growth(config);
		for (const auto &[d, model] : models)
			for (double e : config.epsilon_grid) {
				auto const cert = check_growth_condition(model.marginal, GrowthVariant::A2, *config.gamma, *config.kappa,
									 std::nullopt, e);
				if (!cert.holds)
					throw InputError("A2 growth condition not certified for " + model.describe() + " at epsilon="
							 + std::to_string(e) + " (" + cert.reason
							 + ", witnessed infimum " + std::to_string(cert.witnessed_inf) + ")");
			}
	}
	auto const cells = cells_of(config);
	std::size_t const reps = static_cast<std::size_t>(config.replications);
	ExperimentReport report;
	report.config = config;
	report.records.resize(cells.size() * reps);
	parallel_for(report.records.size(), [&](std::size_t i) {
		Cell const &cell = cells[i / reps];
		Eigen::Index const rep = static_cast<Eigen::Index>(i % reps);
		const AlphaModel &model = models.at(cell.d);
		std::uint64_t const seed = replication_seed(config.seed, cell.n, cell.d, cell.epsilon, rep);
		ContaminatedModel const cm(model, config.contaminant.build(model), cell.epsilon);
		ContaminatedSample const cs = sample_contaminated(cm, cell.n, seed);
		MedianResult const med = tukey_median(cs.sample, median_options(config, seed));

		ExperimentRecord r;
		r.n = cell.n;
		r.d = cell.d;
		r.epsilon = cell.epsilon;
		r.delta = config.delta;
		r.replication = rep;
		r.seed = seed;
		r.bound = location_bound_rhs(cell.epsilon, cell.d, cell.n, config.delta).value;
		double const depth_gap = max_depth_deviation(model, med.point);
		r.deviation = rate ? alpha_norm(med.point, conjugate_index(model.alpha)) : depth_gap;
		// The rate theorem's constant is not explicit, so coverage is judged on the depth gap.
		r.within_bound = depth_gap <= r.bound;
		r.achieved_depth = med.achieved_depth;
		r.contaminated = cs.contaminated_count;
		report.records[i] = r;
	});
	report.cells = summarize_cells(report.records, config.delta, config);
	return report;
}

}  // namespace

ExperimentReport run_location_rate(const ExperimentConfig &config) { return run_location_like(config, true); }

ExperimentReport run_maxdepth_coverage(const ExperimentConfig &config) { return run_location_like(config, false); }

ExperimentReport run_scatter_rate(const ExperimentConfig &config)
{
	config.validate();
	require_growth(config);
	auto const models = models_by_dim(config);
	bool const alpha_kind = config.depth_kind.kind == ScatterDepthKind::alpha;

	std::map<Eigen::Index, double> target;
	for (const auto &[d, model] : models) {
		double const sigma = alpha_kind ? population_alpha_scatter_sigma(model) : population_scatter_sigma(model);
		target[d] = sigma;
		GrowthVariant const variant = alpha_kind ? GrowthVariant::A4 : GrowthVariant::A3;
		for (double e : config.epsilon_grid) {
			auto const cert = check_growth_condition(model.marginal, variant, *config.gamma, *config.kappa, sigma, e);
			if (!cert.holds)
				throw InputError(to_string(variant) + " growth condition not certified for " + model.describe()
						 + " at epsilon=" + std::to_string(e) + " (" + cert.reason + ", witnessed infimum "
						 + std::to_string(cert.witnessed_inf) + ")");
		}
	}
	bool const interval = config.interval_check && !alpha_kind;

	auto const cells = cells_of(config);
	std::size_t const reps = static_cast<std::size_t>(config.replications);
	ExperimentReport report;
	report.config = config;
	report.records.resize(cells.size() * reps);
	parallel_for(report.records.size(), [&](std::size_t i) {
		Cell const &cell = cells[i / reps];
		Eigen::Index const rep = static_cast<Eigen::Index>(i % reps);
		const AlphaModel &model = models.at(cell.d);
		double const sigma = target.at(cell.d);
		std::uint64_t const seed = replication_seed(config.seed, cell.n, cell.d, cell.epsilon, rep);
		ContaminatedModel const cm(model, config.contaminant.build(model), cell.epsilon);
		ContaminatedSample const cs = sample_contaminated(cm, cell.n, seed);
		MedianOptions const mo = median_options(config, seed);
		Vector const center = tukey_median(cs.sample, mo).point;

		ScatterMedianOptions so;
		so.depth = config.depth_kind;
		so.mode = ScatterMode::isotropic;
		so.directions = config.scatter_directions;
		so.multistarts = config.multistarts;
		so.seed = derive_seed(seed, {2});
		so.center = mo;
		ScatterMedianResult const res = sample_scatter_median(cs.sample, center, so);
		double const s = *res.sigma;
		ScatterMatrix const truth = ScatterMatrix::identity(cell.d, sigma * sigma);

		ExperimentRecord r;
		r.n = cell.n;
		r.d = cell.d;
		r.epsilon = cell.epsilon;
		r.delta = config.delta;
		r.replication = rep;
		r.seed = seed;
		r.bound = scatter_bound_rhs(cell.epsilon, cell.d, cell.n, config.delta).value;
		r.deviation = alpha_kind ? scatter_pseudometric(res.matrix, truth, config.depth_kind.alpha) : std::abs(s * s - sigma * sigma);
		double const depth_gap = alpha_kind ? population_alpha_shd(truth, model) - population_alpha_shd(res.matrix, model)
						    : population_shd(truth, model) - population_shd(res.matrix, model);
		r.within_bound = depth_gap <= r.bound;
		r.achieved_depth = res.achieved_depth;
		r.sigma_hat = s;
		r.contaminated = cs.contaminated_count;
		if (interval) {
			double const shrink = std::pow(static_cast<double>(cell.d), 0.5 - model.order().reciprocal());
			double const lo = model.marginal.cdf(sigma * shrink) - r.bound / 2;
			double const hi = model.marginal.cdf(sigma) + r.bound / 2;
			DirectionMatrix const dirs =
				sphere_directions(cell.d, so.directions, DirectionScheme::candidate_augmented, so.seed);
			bool ok = true;
			for (Eigen::Index k = 0; k < dirs.cols() && ok; ++k) {
				double const f = model.marginal.cdf(std::sqrt(dirs.col(k).dot(res.matrix.matrix() * dirs.col(k))));
				ok = f >= lo && f <= hi;
			}
			r.interval_ok = ok;
		}
		report.records[i] = r;
	});
	report.cells = summarize_cells(report.records, config.delta, config);
	return report;
}

ExperimentReport run_experiment(const ExperimentConfig &config)
{
	switch (config.kind) {
	case ExperimentKind::location_rate:
		return run_location_rate(config);
	case ExperimentKind::maxdepth_coverage:
		return run_maxdepth_coverage(config);
	case ExperimentKind::scatter_rate:
		return run_scatter_rate(config);
	}
	throw InputError("unknown experiment kind");
}

namespace
{

double sorted_quantile(const std::vector<double> &s, double p)
{
	double const h = p * static_cast<double>(s.size() - 1);
	std::size_t const lo = static_cast<std::size_t>(std::floor(h));
	std::size_t const hi = std::min(lo + 1, s.size() - 1);
	return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

}  // namespace

std::vector<CellSummary> summarize_cells(const std::vector<ExperimentRecord> &records, double delta,
					 const std::optional<ExperimentConfig> &config)
{
	std::vector<CellSummary> out;
	std::vector<std::vector<const ExperimentRecord *>> groups;
	for (const auto &r : records) {
		auto it = std::find_if(out.begin(), out.end(),
				       [&](const CellSummary &c) { return c.n == r.n && c.d == r.d && c.epsilon == r.epsilon; });
		if (it == out.end()) {
			CellSummary c;
			c.n = r.n;
			c.d = r.d;
			c.epsilon = r.epsilon;
			out.push_back(c);
			groups.emplace_back();
			it = out.end() - 1;
		}
		groups[static_cast<std::size_t>(it - out.begin())].push_back(&r);
	}
	for (std::size_t g = 0; g < out.size(); ++g) {
		CellSummary &c = out[g];
		const auto &rs = groups[g];
		c.replications = static_cast<Eigen::Index>(rs.size());
		std::vector<double> dev;
		double sum = 0;
		Eigen::Index within = 0, judged = 0, events = 0, interval_ok = 0, interval_judged = 0;
		double const nn = static_cast<double>(c.n);
		double const threshold = c.epsilon / (1 - c.epsilon) + 4.5 * std::sqrt(std::log(1.0 / delta) / (2.0 * nn));
		for (const auto *r : rs) {
			dev.push_back(r->deviation);
			sum += r->deviation;
			c.bound = r->bound;
			if (r->within_bound) {
				++judged;
				within += *r->within_bound;
			}
			if (r->interval_ok) {
				++interval_judged;
				interval_ok += *r->interval_ok;
			}
			Eigen::Index const n2 = r->contaminated, n1 = c.n - n2;
			if (n1 > 0) {
				double const ratio = static_cast<double>(n2) / static_cast<double>(n1);
				if (ratio <= threshold) {
					++events;
					if (ratio >= 2) ++c.ratio_event_violations;
				}
			}
		}
		std::sort(dev.begin(), dev.end());
		c.median_deviation = sorted_quantile(dev, 0.5);
		c.q10_deviation = sorted_quantile(dev, 0.1);
		c.q90_deviation = sorted_quantile(dev, 0.9);
		c.mean_deviation = sum / static_cast<double>(rs.size());
		c.ratio_event_frequency = static_cast<double>(events) / static_cast<double>(rs.size());
		if (judged > 0) {
			c.coverage = static_cast<double>(within) / static_cast<double>(judged);
			c.coverage_ok = *c.coverage >= 1.0 - 2.0 * delta;
		}
		if (interval_judged > 0) c.interval_frequency = static_cast<double>(interval_ok) / static_cast<double>(interval_judged);
		if (config && config->kind == ExperimentKind::location_rate && config->gamma && config->kappa) {
			double const lhs = bound_constant_c1() * std::sqrt(static_cast<double>(c.d) / nn)
					   + bound_constant_c2() * std::sqrt(std::log(1.0 / delta) / nn);
			c.rate_condition_holds = lhs < *config->gamma * *config->kappa - c.epsilon / (1 - c.epsilon);
		}
	}
	return out;
}

SlopeFit rate_slope(const ExperimentReport &report, SlopeAxis axis, const SlopeFilter &filter)
{
	std::map<double, std::vector<double>> by_axis;
	std::set<std::pair<double, double>> others;
	for (const auto &r : report.records) {
		if (filter.n && r.n != *filter.n) continue;
		if (filter.d && r.d != *filter.d) continue;
		if (filter.epsilon && r.epsilon != *filter.epsilon) continue;
		double const x = axis == SlopeAxis::n ? static_cast<double>(r.n) : r.epsilon;
		by_axis[x].push_back(r.deviation);
		others.emplace(static_cast<double>(r.d), axis == SlopeAxis::n ? r.epsilon : static_cast<double>(r.n));
	}
	if (others.size() > 1) throw InputError("rate_slope: the axes not being fitted take several values; add a filter");
	if (by_axis.size() < 3) throw InputError("rate_slope: need at least 3 distinct axis values");
	std::vector<double> xs, ys;
	for (auto &[x, devs] : by_axis) {
		std::sort(devs.begin(), devs.end());
		double const med = sorted_quantile(devs, 0.5);
		if (!(x > 0) || !(med > 0)) throw InputError("rate_slope: axis values and median deviations must be positive");
		xs.push_back(std::log(x));
		ys.push_back(std::log(med));
	}
	double const m = static_cast<double>(xs.size());
	double mx = 0, my = 0;
	for (std::size_t i = 0; i < xs.size(); ++i) {
		mx += xs[i] / m;
		my += ys[i] / m;
	}
	double sxx = 0, sxy = 0;
	for (std::size_t i = 0; i < xs.size(); ++i) {
		sxx += (xs[i] - mx) * (xs[i] - mx);
		sxy += (xs[i] - mx) * (ys[i] - my);
	}
	SlopeFit fit;
	fit.points = xs.size();
	fit.slope = sxy / sxx;
	fit.intercept = my - fit.slope * mx;
	double rss = 0;
	for (std::size_t i = 0; i < xs.size(); ++i) {
		double const e = ys[i] - fit.intercept - fit.slope * xs[i];
		rss += e * e;
	}
	fit.standard_error = std::sqrt(rss / (m - 2) / sxx);
	double const t = boost::math::quantile(boost::math::students_t_distribution<double>(m - 2), 0.975);
	fit.lower = fit.slope - t * fit.standard_error;
	fit.upper = fit.slope + t * fit.standard_error;
	return fit;
}

std::string coverage_table(const ExperimentReport &report)
{
	std::ostringstream os;
	os << "n\td\tepsilon\treps\tmedian_dev\tbound\tcoverage\tratio_event\tstatus\n";
	for (const auto &c : report.cells) {
		os << c.n << '\t' << c.d << '\t' << c.epsilon << '\t' << c.replications << '\t' << c.median_deviation << '\t'
		   << c.bound << '\t';
		if (c.coverage)
			os << *c.coverage;
		else
			os << '-';
		os << '\t' << c.ratio_event_frequency << '\t' << (c.coverage_ok ? "ok" : "FAIL") << '\n';
	}
	return os.str();
}

}  // namespace depthlab
