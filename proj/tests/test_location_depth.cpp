#include "depthlab/location_depth.hpp"
#include "depthlab/norms.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

using namespace depthlab;

namespace
{

SampleMatrix rows(std::initializer_list<std::initializer_list<double>> values)
{
	Matrix m(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values.begin()->size()));
	Eigen::Index i = 0;
	for (const auto &r : values) {
		Eigen::Index j = 0;
		for (double v : r)
			m(i, j++) = v;
		++i;
	}
	return SampleMatrix(m);
}

Vector vec(std::initializer_list<double> values)
{
	Vector v(static_cast<Eigen::Index>(values.size()));
	Eigen::Index i = 0;
	for (double x : values)
		v(i++) = x;
	return v;
}

SampleMatrix gaussian_sample(Eigen::Index n, Eigen::Index d, std::uint64_t seed)
{
	if (d >= 2) return sample(make_gaussian_spherical(d), n, seed);
	Rng rng = make_rng(seed);
	std::normal_distribution<double> g;
	Matrix m(n, d);
	for (Eigen::Index i = 0; i < n; ++i)
		m(i, 0) = g(rng);
	return SampleMatrix(m);
}

}  // namespace

TEST_CASE("population depth")
{
	AlphaModel const g2 = make_gaussian_spherical(2);
	CHECK(population_hd(Vector::Zero(2), g2) == 0.5);
	AlphaModel const c2 = make_independent_stable(1.0, 2);
	CHECK(population_hd(vec({1, 1}), c2) == doctest::Approx(0.25).epsilon(1e-14));
	AlphaModel const g3 = make_gaussian_spherical(3);
	double const q = oracle::normal_quantile(0.75);
	CHECK(population_hd(vec({q, 0, 0}), g3) == doctest::Approx(0.25).epsilon(1e-10));

	// alpha = 1.5 has conjugate index 3.
	AlphaModel const s = make_independent_stable(1.5, 2);
	Vector const x = vec({0.4, -1.1});
	CHECK(population_hd(x, s) == doctest::Approx(1 - s.marginal.cdf(oracle::lp_norm(x, 3.0))).epsilon(1e-12));

	// Below 1/2 away from the origin.
	Rng rng = make_rng(4);
	std::normal_distribution<double> n01;
	for (int rep = 0; rep < 200; ++rep) {
		Vector y(2);
		y << n01(rng), n01(rng);
		CHECK(population_hd(y, c2) < 0.5);
		CHECK(population_hd(y, g2) < 0.5);
	}
	CHECK_THROWS_AS(population_hd(Vector::Zero(3), g2), InputError);
}

TEST_CASE("sample depth: small cases")
{
	SampleMatrix const one = rows({{1}, {2}, {3}});
	DepthOptions exact1{DepthMethod::exact1d, 0, 0};
	CHECK(sample_hd(vec({2}), one, exact1) == doctest::Approx(2.0 / 3.0));
	CHECK(sample_hd(vec({1.5}), one, exact1) == doctest::Approx(1.0 / 3.0));
	CHECK(sample_hd(vec({0}), one, exact1) == 0);
	CHECK(sample_hd_exact1d(3, one) == doctest::Approx(1.0 / 3.0));
	DepthOptions approx{DepthMethod::approx, 8, 1};
	CHECK(sample_hd(vec({2}), one, approx) == doctest::Approx(2.0 / 3.0));

	SampleMatrix const cross = rows({{1, 0}, {-1, 0}, {0, 1}, {0, -1}});
	CHECK(sample_hd_exact2d(Vector::Zero(2), cross) == 0.5);
	CHECK(sample_hd_exact2d(vec({3, 3}), cross) == 0);
	CHECK(sample_hd(vec({3, 3}), cross, DepthOptions{}) == 0);
	CHECK(sample_hd_exact2d(vec({1, 0}), cross) == 0.25);

	CHECK_THROWS_AS(sample_hd(vec({0, 0}), cross, exact1), InputError);
	CHECK_THROWS_AS(sample_hd(vec({0}), one, DepthOptions{DepthMethod::exact2d, 0, 0}), InputError);
	CHECK_THROWS_AS(sample_hd(vec({0, 0, 0}), cross, DepthOptions{}), InputError);
	CHECK_THROWS_AS(sample_hd(vec({0, 0}), cross, DepthOptions{DepthMethod::approx, 0, 0}), InputError);
	CHECK(parse_depth_method("exact2d") == DepthMethod::exact2d);
	CHECK_THROWS_AS(parse_depth_method("exact3d"), InputError);
}

TEST_CASE("exact2d agrees with direction enumeration")
{
	Rng rng = make_rng(123);
	std::normal_distribution<double> g;
	std::uniform_int_distribution<int> size(1, 50);
	std::uniform_int_distribution<int> grid(-3, 3);
	int mismatches = 0;
	for (int rep = 0; rep < 500; ++rep) {
		int const n = size(rng);
		bool const lattice = rep % 3 == 0;  // integer points produce ties and collinear triples
		Matrix m(n, 2);
		for (int i = 0; i < n; ++i)
			for (int j = 0; j < 2; ++j)
				m(i, j) = lattice ? grid(rng) : g(rng);
		Vector x(2);
		if (lattice)
			x << grid(rng), grid(rng);
		else if (rep % 3 == 1)
			x = m.row(0).transpose();
		else
			x << 0.5 * g(rng), 0.5 * g(rng);
		SampleMatrix const s(m);
		double const a = sample_hd_exact2d(x, s);
		double const b = oracle::halfspace_depth_2d(x, m);
		if (a != b) {
			++mismatches;
			MESSAGE("rep " << rep << ": exact2d " << a << " oracle " << b);
		}
	}
	CHECK(mismatches == 0);
}

TEST_CASE("approximate depth: upper bound and monotone refinement")
{
	SampleMatrix const s = gaussian_sample(300, 2, 8);
	Rng rng = make_rng(9);
	std::normal_distribution<double> g;
	for (int rep = 0; rep < 50; ++rep) {
		Vector x(2);
		x << g(rng), g(rng);
		double const exact = sample_hd_exact2d(x, s);
		double prev = 1.0;
		for (Eigen::Index k : {8, 32, 128, 512}) {
			double const a = sample_hd(x, s, DepthOptions{DepthMethod::approx, k, 77});
			CHECK(a >= exact);
			CHECK(a <= prev);
			prev = a;
		}
	}

	SampleMatrix const s3 = gaussian_sample(200, 4, 3);
	DirectionMatrix const big = approx_directions(4, 300, 5);
	DirectionMatrix const small = big.leftCols(40);
	for (int rep = 0; rep < 30; ++rep) {
		Vector x(4);
		for (int j = 0; j < 4; ++j)
			x(j) = g(rng);
		CHECK(sample_hd(x, s3, big) <= sample_hd(x, s3, small));
	}
}

TEST_CASE("counter early exit")
{
	SampleMatrix const s = gaussian_sample(500, 3, 21);
	HalfspaceCounter const c(s, approx_directions(3, 64, 1));
	Rng rng = make_rng(2);
	std::normal_distribution<double> g;
	for (int rep = 0; rep < 100; ++rep) {
		Vector x(3);
		for (int j = 0; j < 3; ++j)
			x(j) = 0.5 * g(rng);
		Eigen::Index const full = c.depth_count(x);
		for (Eigen::Index floor : {0L, full / 2, full, full + 1, 400L}) {
			Eigen::Index const v = c.depth_count_above(x, floor);
			if (full >= floor)
				CHECK(v == full);
			else
				CHECK(v < floor);
		}
	}
}

TEST_CASE("signed-permutation equivariance of sample depth")
{
	Rng rng = make_rng(31);
	std::normal_distribution<double> g;
	for (int rep = 0; rep < 40; ++rep) {
		Eigen::Index const d = 2 + rep % 3;
		SampleMatrix const s = gaussian_sample(120, d, 100 + static_cast<std::uint64_t>(rep));
		Matrix const a = oracle::random_signed_permutation(d, rng);
		SampleMatrix const t(s.data() * a.transpose());
		Vector x(d);
		for (Eigen::Index j = 0; j < d; ++j)
			x(j) = 0.3 * g(rng);
		// The canonical candidates alone form a set closed under signed permutations.
		DirectionMatrix const dirs = sphere_directions(d, candidate_direction_count(d), DirectionScheme::candidate_augmented, 0);
		CHECK(sample_hd(x, s, dirs) == sample_hd(a * x, t, dirs));
		if (d == 2) CHECK(sample_hd_exact2d(x, s) == sample_hd_exact2d(a * x, t));
	}
}

TEST_CASE("Tukey median: small cases")
{
	MedianOptions o1;
	o1.method = DepthMethod::exact1d;
	MedianResult const m1 = tukey_median(rows({{1}, {2}, {5}}), o1);
	CHECK(m1.point(0) == doctest::Approx(2.0));
	CHECK(m1.achieved_depth == doctest::Approx(2.0 / 3.0));

	MedianOptions o2;
	o2.method = DepthMethod::exact2d;
	SampleMatrix const cross = rows({{1, 0}, {-1, 0}, {0, 1}, {0, -1}});
	MedianResult const m2 = tukey_median(cross, o2);
	CHECK(m2.point.norm() < 1e-12);
	CHECK(m2.achieved_depth == 0.5);
	CHECK_FALSE(m2.left_deepest_region);
	AlphaModel const g2 = make_gaussian_spherical(2);
	CHECK(max_depth_deviation(g2, m2.point) == doctest::Approx(0.0).epsilon(1e-12));

	MedianResult const m3 = tukey_median(cross, MedianOptions{});
	CHECK(m3.point.norm() < 1e-9);
	CHECK(m3.achieved_depth == 0.5);

	MedianResult const single = tukey_median(rows({{3, 4}}), MedianOptions{});
	CHECK((single.point - vec({3, 4})).norm() == 0);
	CHECK(single.achieved_depth == 1.0);
}

TEST_CASE("Tukey median: consistency for the Gaussian")
{
	MedianOptions o;
	o.directions = 64;
	o.midpoint_cap = 2000;
	o.multistarts = 2;
	int close = 0;
	for (std::uint64_t seed = 0; seed < 100; ++seed) {
		o.seed = seed;
		MedianResult const m = tukey_median(gaussian_sample(4000, 2, 1000 + seed), o);
		close += m.point.norm() <= 0.1;
	}
	CHECK(close >= 95);
}

TEST_CASE("Tukey median: achieved depth is honest and the pool bound holds")
{
	for (std::uint64_t seed = 0; seed < 10; ++seed) {
		SampleMatrix const s = gaussian_sample(150, 2, 50 + seed);
		MedianOptions o;
		o.method = DepthMethod::exact2d;
		o.seed = seed;
		MedianResult const m = tukey_median(s, o);
		CHECK(m.achieved_depth == sample_hd_exact2d(m.point, s));
		CHECK(m.achieved_depth <= m.pool_max_depth);
		CHECK(m.left_deepest_region == (m.achieved_depth < m.pool_max_depth));
		CHECK(m.pool_max_depth >= 1.0 / 3.0);  // centerpoint theorem
		CHECK(m.maximizers >= 1);
	}
}

TEST_CASE("affine invariance of the pool maximum")
{
	Rng rng = make_rng(5);
	std::normal_distribution<double> g;
	for (int rep = 0; rep < 20; ++rep) {
		SampleMatrix const s = gaussian_sample(60, 2, 400 + static_cast<std::uint64_t>(rep));
		Matrix a(2, 2);
		do {
			a << g(rng), g(rng), g(rng), g(rng);
		} while (std::abs(a.determinant()) < 0.2);
		Vector const mu = vec({g(rng), g(rng)});
		Matrix pool(40, 2);
		for (int i = 0; i < 40; ++i)
			pool.row(i) << 0.5 * g(rng), 0.5 * g(rng);
		SampleMatrix const t(((s.data() * a.transpose()).rowwise() + mu.transpose()).eval());
		Matrix const mapped = ((pool * a.transpose()).rowwise() + mu.transpose()).eval();
		DepthOptions const o{DepthMethod::exact2d, 0, 0};
		CHECK(max_depth_over(pool, s, o) == max_depth_over(mapped, t, o));
	}
}

TEST_CASE("bound constants")
{
	using big = boost::multiprecision::cpp_bin_float_50;
	big const pi = boost::math::constants::pi<big>();
	big const e = boost::math::constants::e<big>();
	big const c1 = 24 * sqrt(big(2)) * sqrt(30 * pi * e / (1 - 1 / e));
	big const c2 = (9 * sqrt(big(2)) + 4 * sqrt(big(6))) / 4;
	CHECK(bound_constant_c1() == doctest::Approx(c1.convert_to<double>()).epsilon(1e-14));
	CHECK(bound_constant_c2() == doctest::Approx(c2.convert_to<double>()).epsilon(1e-14));
	CHECK(std::abs(bound_constant_c1() - 683.296) < 1e-3);
	CHECK(std::abs(bound_constant_c2() - 5.63147) < 1e-5);
	CHECK(bound_constant_c2() > 5);
	CHECK(bound_vc_constant() == doctest::Approx(bound_constant_c1() / (24 * std::sqrt(2.0)) * std::sqrt(48.0)));

	RateBound const b = location_bound_rhs(0.1, 2, 10000, 0.05);
	CHECK(b.value == doctest::Approx(0.1 / 0.9 + b.c1 * std::sqrt(2e-4) + b.c2 * std::sqrt(std::log(20.0) / 1e4)));

	double prev = INFINITY;
	for (Eigen::Index n = 100; n <= 100000000; n *= 10) {
		double const v = location_bound_rhs(0, 1, n, 0.05).value;
		CHECK(v < prev);
		prev = v;
	}
	CHECK(prev < 0.1);
}

TEST_CASE("side condition")
{
	CHECK(minimal_admissible_n(0.05) == 14);
	CHECK_NOTHROW(location_bound_rhs(0, 2, 14, 0.05));
	try {
		location_bound_rhs(0, 2, 13, 0.05);
		FAIL("expected an error");
	} catch (const InputError &e) {
		CHECK(std::string(e.what()).find("14") != std::string::npos);
	}
	CHECK_THROWS_AS(location_bound_rhs(1.0 / 3.0, 2, 100, 0.05), InputError);
	CHECK_THROWS_AS(location_bound_rhs(0, 2, 100, 0.5), InputError);
	CHECK_THROWS_AS(location_bound_rhs(0, 0, 100, 0.05), InputError);
}

TEST_CASE("max-depth deviation under contamination stays below the bound")
{
	AlphaModel const g2 = make_gaussian_spherical(2);
	ContaminatedModel const cm(g2, Contaminant::default_for(g2), 0.2);
	MedianOptions o;
	o.directions = 64;
	o.midpoint_cap = 2000;
	double const dev = max_depth_deviation(g2, cm, 2000, 17, o);
	CHECK(dev >= 0);
	CHECK(dev <= location_bound_rhs(0.2, 2, 2000, 0.05).value);

	ContaminatedModel const clean(g2, Contaminant::default_for(g2), 0.0);
	CHECK(max_depth_deviation(g2, clean, 20000, 3, o) <= 0.05);
	CHECK_THROWS_AS(max_depth_deviation(make_gaussian_spherical(3), cm, 100, 1, o), InputError);
}
