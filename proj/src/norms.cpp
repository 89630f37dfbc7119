#include "depthlab/norms.hpp"

#include "depthlab/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace depthlab
{

NormOrder conjugate_index(double alpha)
{
	if (!(alpha > 0)) throw InputError("conjugate_index: alpha must be positive");
	if (std::isinf(alpha)) return NormOrder(1.0);
	if (alpha <= 1.0) return NormOrder::infinity();
	return NormOrder(alpha / (alpha - 1.0));
}

NormOrder conjugate_index(NormOrder alpha)
{
	if (alpha.is_infinite()) return NormOrder(1.0);
	return conjugate_index(alpha.value());
}

ScatterMatrix pd_sqrt(const ScatterMatrix &sigma)
{
	Eigen::SelfAdjointEigenSolver<Matrix> es(sigma.matrix());
	if (es.info() != Eigen::Success) throw NumericalError("pd_sqrt: eigendecomposition failed");
	Vector const lambda = es.eigenvalues();
	double const trace = sigma.matrix().trace();
	if (lambda.minCoeff() <= 1e-12 * trace) throw DomainError("pd_sqrt: matrix is not positive definite");
	Matrix const &q = es.eigenvectors();
	Matrix r = q * lambda.cwiseSqrt().asDiagonal() * q.transpose();
	return ScatterMatrix(0.5 * (r + r.transpose()));
}

bool is_signed_permutation(const Matrix &a)
{
	if (a.rows() != a.cols()) return false;
	Eigen::Index const d = a.rows();
	Eigen::VectorXi row_count = Eigen::VectorXi::Zero(d), col_count = Eigen::VectorXi::Zero(d);
	for (Eigen::Index i = 0; i < d; ++i) {
		for (Eigen::Index j = 0; j < d; ++j) {
			double const v = a(i, j);
			if (!std::isfinite(v)) return false;
			double const r = std::round(v);
			if (std::abs(v - r) > 1e-12) return false;
			if (r == 0.0) continue;
			if (std::abs(r) != 1.0) return false;
			++row_count(i);
			++col_count(j);
		}
	}
	return (row_count.array() == 1).all() && (col_count.array() == 1).all();
}

ZeroMatrixCheck zero_matrix_lemma_check(const Matrix &a)
{
	Eigen::Index const d = a.rows();
	if (a.cols() != d || d == 0) throw InputError("zero_matrix_lemma_check: matrix must be square");
	if (d > 20) throw InputError("zero_matrix_lemma_check: d > 20 is too large for enumeration");
	if (!a.allFinite()) throw InputError("zero_matrix_lemma_check: non-finite entry");
	if (a.diagonal().cwiseAbs().maxCoeff() != 0.0) throw InputError("zero_matrix_lemma_check: nonzero diagonal");
	if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * a.cwiseAbs().maxCoeff())
		throw InputError("zero_matrix_lemma_check: matrix is not symmetric");

	ZeroMatrixCheck out;
	Vector v(d);
	std::uint64_t const total = std::uint64_t{1} << d;
	for (std::uint64_t mask = 0; mask < total; ++mask) {
		for (Eigen::Index i = 0; i < d; ++i)
			v(i) = (mask >> i) & 1U ? -1.0 : 1.0;
		double const q = v.dot(a * v);
		if (q < 0) {
			out.all_nonnegative = false;
			out.counterexample = v;
			out.counterexample_value = q;
			break;
		}
	}
	out.lemma_violated = out.all_nonnegative && a.cwiseAbs().maxCoeff() != 0.0;
	return out;
}

DirectionScheme parse_direction_scheme(const std::string &name)
{
	if (name == "uniform-random" || name == "uniform_random") return DirectionScheme::uniform_random;
	if (name == "antipodal-pairs" || name == "antipodal_pairs") return DirectionScheme::antipodal_pairs;
	if (name == "candidate-augmented" || name == "candidate_augmented") return DirectionScheme::candidate_augmented;
	throw InputError("unknown direction scheme '" + name + "'");
}

Eigen::Index candidate_direction_count(Eigen::Index d)
{
	// Sign vectors are only enumerated while 2^d stays small.
	Eigen::Index const signs = d <= 16 ? (Eigen::Index{1} << d) : 0;
	return 2 * d + signs;
}

namespace
{

Vector gaussian_direction(Eigen::Index d, Rng &rng)
{
	std::normal_distribution<double> normal;
	Vector v(d);
	do {
		for (Eigen::Index i = 0; i < d; ++i)
			v(i) = normal(rng);
	} while (v.norm() == 0.0);
	return v / v.norm();
}

}  // namespace

DirectionMatrix sphere_directions(Eigen::Index d, Eigen::Index k, DirectionScheme scheme, std::uint64_t seed)
{
	if (d < 1 || k < 1) throw InputError("sphere_directions: need d >= 1 and k >= 1");
	Rng rng = make_rng(seed);
	DirectionMatrix out(d, k);
	Eigen::Index col = 0;

	switch (scheme) {
	case DirectionScheme::uniform_random:
		break;
	case DirectionScheme::antipodal_pairs:
		for (; col + 1 < k; col += 2) {
			out.col(col) = gaussian_direction(d, rng);
			out.col(col + 1) = -out.col(col);
		}
		break;
	case DirectionScheme::candidate_augmented: {
		for (Eigen::Index i = 0; i < d && col < k; ++i) {
			out.col(col++) = Vector::Unit(d, i);
			if (col < k) out.col(col++) = -Vector::Unit(d, i);
		}
		if (d <= 16) {
			double const inv = 1.0 / std::sqrt(static_cast<double>(d));
			std::uint64_t const total = std::uint64_t{1} << d;
			for (std::uint64_t mask = 0; mask < total && col < k; ++mask) {
				for (Eigen::Index i = 0; i < d; ++i)
					out(i, col) = ((mask >> i) & 1U ? -1.0 : 1.0) * inv;
				++col;
			}
		}
		break;
	}
	}
	for (; col < k; ++col)
		out.col(col) = gaussian_direction(d, rng);
	return out;
}

}  // namespace depthlab
