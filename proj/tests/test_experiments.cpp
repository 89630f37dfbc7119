#include "depthlab/experiments.hpp"

#include <doctest.h>

#include <cstdlib>

using namespace depthlab;

namespace
{

ExperimentConfig small_coverage()
{
	ExperimentConfig c;
	c.kind = ExperimentKind::maxdepth_coverage;
	c.n_grid = {200, 400};
	c.d_grid = {2};
	c.epsilon_grid = {0.0, 0.1};
	c.replications = 12;
	c.directions = 32;
	c.pool_cap = 300;
	c.multistarts = 2;
	c.seed = 42;
	return c;
}

struct ThreadsGuard
{
	explicit ThreadsGuard(const char *value) { setenv("DEPTHLAB_THREADS", value, 1); }
	~ThreadsGuard() { unsetenv("DEPTHLAB_THREADS"); }
};

}  // namespace

TEST_CASE("coverage experiment: records, bounds and summaries")
{
	ExperimentConfig const c = small_coverage();
	ExperimentReport const r = run_experiment(c);
	REQUIRE(r.records.size() == 4 * 12);
	REQUIRE(r.cells.size() == 4);
	for (const auto &rec : r.records) {
		CHECK(rec.bound == location_bound_rhs(rec.epsilon, rec.d, rec.n, rec.delta).value);
		REQUIRE(rec.within_bound);
		CHECK(*rec.within_bound);
		CHECK(rec.deviation >= 0);
		CHECK(rec.seed == replication_seed(c.seed, rec.n, rec.d, rec.epsilon, rec.replication));
	}
	for (const auto &cell : r.cells) {
		REQUIRE(cell.coverage);
		CHECK(*cell.coverage >= 0);
		CHECK(*cell.coverage <= 1);
		CHECK(cell.coverage_ok);
		CHECK(cell.q10_deviation <= cell.median_deviation);
		CHECK(cell.median_deviation <= cell.q90_deviation);
		CHECK(cell.ratio_event_violations == 0);
		CHECK(cell.ratio_event_frequency >= 1 - c.delta);
	}
	CHECK(r.all_coverage_ok());
	// Cells are ordered by d, then n, then epsilon.
	CHECK(r.cells[0].n == 200);
	CHECK(r.cells[1].epsilon == 0.1);
	CHECK(r.cells[2].n == 400);
}

TEST_CASE("determinism across worker counts and isolated cells")
{
	ExperimentConfig const c = small_coverage();
	std::string one, four;
	{
		ThreadsGuard g("1");
		CHECK(worker_count() == 1);
		one = summarize(run_experiment(c), ReportFormat::csv);
	}
	{
		ThreadsGuard g("4");
		CHECK(worker_count() == 4);
		four = summarize(run_experiment(c), ReportFormat::csv);
	}
	CHECK(one == four);

	// A single cell rerun on its own reproduces its records.
	ExperimentConfig iso = c;
	iso.n_grid = {400};
	iso.epsilon_grid = {0.1};
	auto const full = parse_records_csv(one);
	auto const alone = run_experiment(iso).records;
	std::size_t matched = 0;
	for (const auto &a : alone)
		for (const auto &f : full)
			if (f.n == a.n && f.epsilon == a.epsilon && f.replication == a.replication) {
				CHECK(f.same_columns(a));
				++matched;
			}
	CHECK(matched == alone.size());
}

TEST_CASE("CSV and JSON round trips")
{
	ExperimentReport empty;
	CHECK(summarize(empty, ReportFormat::csv)
	      == "n,d,epsilon,delta,replication,seed,deviation,bound,within_bound,achieved_depth,sigma_hat\n");
	CHECK(parse_records_csv(summarize(empty, ReportFormat::csv)).empty());

	ExperimentReport const r = run_experiment(small_coverage());
	std::string const json = summarize(r, ReportFormat::json);
	ExperimentReport const back = parse_report_json(json);
	REQUIRE(back.records.size() == r.records.size());
	for (std::size_t i = 0; i < r.records.size(); ++i)
		CHECK(back.records[i].same_columns(r.records[i]));
	CHECK(back.version == depthlab_version);
	CHECK(back.cells.size() == r.cells.size());
	CHECK(json.find("\"config\"") != std::string::npos);

	// json -> csv -> json
	ExperimentReport via;
	via.records = parse_records_csv(summarize(back, ReportFormat::csv));
	ExperimentReport const again = parse_report_json(summarize(via, ReportFormat::json));
	REQUIRE(again.records.size() == r.records.size());
	for (std::size_t i = 0; i < r.records.size(); ++i)
		CHECK(again.records[i].same_columns(r.records[i]));

	ExperimentRecord odd;
	odd.n = 5;
	odd.d = 2;
	odd.epsilon = 0.1;
	odd.delta = 0.05;
	odd.deviation = 1.0 / 3.0;
	odd.bound = 1e-300;
	odd.sigma_hat = 0.6744897501960817;
	ExperimentReport one;
	one.records.push_back(odd);
	CHECK(parse_records_csv(summarize(one, ReportFormat::csv))[0].same_columns(odd));
	CHECK(parse_report_json(summarize(one, ReportFormat::json)).records[0].same_columns(odd));

	CHECK_THROWS_AS(parse_records_csv("n,d\n1,2\n"), InputError);
	CHECK_THROWS_AS(parse_records_csv(std::string(summarize(empty, ReportFormat::csv)) + "1,2,x,0,0,0,0,0,,,\n"), InputError);
	CHECK_THROWS_AS(parse_report_json("{"), InputError);
}

TEST_CASE("slope of a synthetic power law")
{
	ExperimentReport r;
	for (Eigen::Index n : {500, 2000, 8000, 32000})
		for (int rep = 0; rep < 3; ++rep) {
			ExperimentRecord rec;
			rec.n = n;
			rec.d = 2;
			rec.deviation = 3.0 / std::sqrt(static_cast<double>(n));
			r.records.push_back(rec);
		}
	SlopeFit const f = rate_slope(r, SlopeAxis::n);
	CHECK(std::abs(f.slope + 0.5) < 1e-9);
	CHECK(f.points == 4);
	CHECK(f.lower <= f.slope);
	CHECK(f.upper >= f.slope);

	ExperimentReport eps;
	for (double e : {0.05, 0.1, 0.2}) {
		ExperimentRecord rec;
		rec.n = 1000;
		rec.d = 2;
		rec.epsilon = e;
		rec.deviation = 0.7 * e;
		eps.records.push_back(rec);
	}
	CHECK(rate_slope(eps, SlopeAxis::epsilon).slope == doctest::Approx(1.0).epsilon(1e-12));

	ExperimentReport two;
	two.records = {r.records[0], r.records[3]};
	CHECK_THROWS_AS(rate_slope(two, SlopeAxis::n), InputError);
	ExperimentReport mixed = r;
	mixed.records[0].d = 3;
	CHECK_THROWS_AS(rate_slope(mixed, SlopeAxis::n), InputError);
	CHECK_NOTHROW(rate_slope(mixed, SlopeAxis::n, SlopeFilter{std::nullopt, 2, std::nullopt}));
}

TEST_CASE("config parsing and validation")
{
	ExperimentConfig const c = parse_experiment_config(R"(
experiment = "location_rate"
seed = 7
replications = 10
delta = 0.05
n = [500, 2000]
d = 2
epsilon = [0.0, 0.1]

[model]
family = "gaussian"

[contaminant]
family = "point_mass"
offset = 12.0

[growth]
gamma = 1.0
kappa = 0.3

[method]
directions = 64
pool_cap = 1000
)");
	CHECK(c.kind == ExperimentKind::location_rate);
	CHECK(c.seed == 7);
	CHECK(c.n_grid == std::vector<Eigen::Index>{500, 2000});
	CHECK(c.d_grid == std::vector<Eigen::Index>{2});
	CHECK(c.contaminant.offset == 12.0);
	CHECK(*c.gamma == 1.0);
	CHECK(c.directions == 64);

	try {
		parse_experiment_config("experiment = \"maxdepth_coverage\"\nn = [5, 100]\n");
		FAIL("expected an error");
	} catch (const InputError &e) {
		CHECK(std::string(e.what()).find("minimal admissible n is 14") != std::string::npos);
	}
	CHECK_THROWS_AS(parse_experiment_config("experiment = \"maxdepth_coverage\"\nepsilon = 0.4\n"), InputError);
	CHECK_THROWS_AS(parse_experiment_config("experiment = \"maxdepth_coverage\"\nunknown = 1\n"), InputError);
	CHECK_THROWS_AS(parse_experiment_config("experiment = \"nonsense\"\n"), InputError);
	CHECK_THROWS_AS(parse_experiment_config("seed = 1\n"), InputError);
	try {
		parse_experiment_config("experiment = \"maxdepth_coverage\"\n\nn = [1,\n");
		FAIL("expected an error");
	} catch (const InputError &e) {
		CHECK(std::string(e.what()).find("line") != std::string::npos);
	}

	ModelFile const mf = parse_model_file(R"(
family = "stable"
alpha = 1.5
dim = 3
[contaminant]
family = "point_mass"
location = [5.0, 5.0, 5.0]
epsilon = 0.1
)");
	CHECK(mf.model.alpha == 1.5);
	CHECK(mf.model.dim == 3);
	CHECK(mf.epsilon == 0.1);
	REQUIRE(mf.contaminant);
	CHECK(mf.contaminant->build(mf.model).location()(2) == 5.0);
	CHECK_THROWS_AS(parse_model_file("family = \"gaussian\"\n"), InputError);
	CHECK_THROWS_AS(parse_model_file("family = \"gaussian\"\ndim = 2\n[contaminant]\nepsilon = 0.5\n"), InputError);
}

TEST_CASE("uncertified growth conditions are refused")
{
	ExperimentConfig c = small_coverage();
	c.kind = ExperimentKind::location_rate;
	CHECK_THROWS_AS(run_experiment(c), InputError);
	c.gamma = 1.0;
	c.kappa = 0.45;  // above the Gaussian infimum Phi(1) - 1/2
	CHECK_THROWS_AS(run_experiment(c), InputError);
	c.kappa = 0.3;
	CHECK_NOTHROW(run_experiment(c));

	ExperimentConfig s = small_coverage();
	s.kind = ExperimentKind::scatter_rate;
	s.gamma = 0.4;
	s.kappa = 0.9;
	CHECK_THROWS_AS(run_experiment(s), InputError);
}

TEST_CASE("location rate: records and rate-condition flag")
{
	ExperimentConfig c = small_coverage();
	c.kind = ExperimentKind::location_rate;
	c.gamma = 1.0;
	c.kappa = 0.3;
	ExperimentReport const r = run_experiment(c);
	for (const auto &rec : r.records) {
		REQUIRE(rec.within_bound);
		CHECK(rec.achieved_depth);
		CHECK(rec.deviation >= 0);
	}
	for (const auto &cell : r.cells) {
		REQUIRE(cell.rate_condition_holds);
		CHECK_FALSE(*cell.rate_condition_holds);  // c1 sqrt(d/n) is far above gamma*kappa at this n
		REQUIRE(cell.coverage);
		CHECK(cell.coverage_ok);
	}
}

TEST_CASE("deviation grows with contamination")
{
	ExperimentConfig c = small_coverage();
	c.kind = ExperimentKind::location_rate;
	c.gamma = 1.0;
	c.kappa = 0.3;
	c.n_grid = {2000};
	c.epsilon_grid = {0.0, 0.1, 0.2};
	c.replications = 200;
	ExperimentReport const r = run_experiment(c);
	REQUIRE(r.cells.size() == 3);
	int inversions = 0;
	for (std::size_t i = 1; i < r.cells.size(); ++i)
		inversions += r.cells[i].median_deviation < r.cells[i - 1].median_deviation;
	CHECK(inversions <= 1);
	CHECK(r.cells[2].median_deviation > r.cells[0].median_deviation);
}

TEST_CASE("scatter rate experiment")
{
	ExperimentConfig c = small_coverage();
	c.kind = ExperimentKind::scatter_rate;
	c.gamma = 0.4;
	c.kappa = 0.16;
	c.n_grid = {400};
	c.replications = 6;
	c.scatter_directions = 64;
	ExperimentReport const r = run_experiment(c);
	for (const auto &rec : r.records) {
		REQUIRE(rec.sigma_hat);
		CHECK(*rec.sigma_hat > 0);
		REQUIRE(rec.within_bound);
	}

	ExperimentConfig a = c;
	a.model.family = "cauchy";
	a.depth_kind = ScatterDepthSpec{ScatterDepthKind::alpha, 1.0};
	a.gamma = 0.5;
	a.kappa = 0.12;
	ExperimentReport const ra = run_experiment(a);
	for (const auto &rec : ra.records)
		CHECK(rec.deviation >= 0);

	ExperimentConfig iv = c;
	iv.model.family = "cauchy";
	iv.epsilon_grid = {0.0};
	iv.gamma = 1.0;
	iv.kappa = 0.04;
	iv.interval_check = true;
	ExperimentReport const ri = run_experiment(iv);
	for (const auto &cell : ri.cells) {
		REQUIRE(cell.interval_frequency);
		CHECK(*cell.interval_frequency >= 1 - 2 * c.delta);
	}
}
