#pragma once

#include "depthlab/core.hpp"

#include <optional>

namespace depthlab
{

/// (sum |x_i|^p)^(1/p), or max |x_i| for p = inf. For p < 1 this is not a norm
/// (no triangle inequality) but the name is kept.
template <typename Derived>
typename Derived::Scalar alpha_norm(const Eigen::MatrixBase<Derived> &x, NormOrder p)
{
	using Scalar = typename Derived::Scalar;
	if (!x.allFinite()) throw InputError("alpha_norm: non-finite entry");
	if (x.size() == 0) return Scalar(0);
	Scalar const m = x.cwiseAbs().maxCoeff();
	if (p.is_infinite() || m == Scalar(0)) return m;
	double const a = p.value();
	if (a == 2.0) return x.norm();
	if (a == 1.0) return x.cwiseAbs().sum();
	// Scale by the max entry to keep |x_i|^p in range.
	Scalar s(0);
	for (Eigen::Index i = 0; i < x.size(); ++i)
		s += std::pow(std::abs(x(i)) / m, a);
	return m * std::pow(s, Scalar(1.0 / a));
}

/// alpha/(alpha-1) for alpha > 1, infinity for 0 < alpha <= 1.
NormOrder conjugate_index(double alpha);
NormOrder conjugate_index(NormOrder alpha);

/// Unique symmetric positive definite R with R*R = sigma.
/// Throws DomainError when an eigenvalue falls below 1e-12 * trace.
ScatterMatrix pd_sqrt(const ScatterMatrix &sigma);

/// One nonzero entry per row and column, each equal to +-1 (after rounding within 1e-12).
bool is_signed_permutation(const Matrix &a);

struct ZeroMatrixCheck
{
	bool all_nonnegative = true;     ///< v'Av >= 0 for every v in {-1,1}^d
	bool lemma_violated = false;     ///< all_nonnegative while A != 0; must never happen
	std::optional<Vector> counterexample;
	double counterexample_value = 0.0;
};

/// Brute force over the 2^d sign vectors of a symmetric zero-diagonal matrix (d <= 20).
ZeroMatrixCheck zero_matrix_lemma_check(const Matrix &a);

enum class DirectionScheme
{
	uniform_random,
	antipodal_pairs,
	candidate_augmented,
};

DirectionScheme parse_direction_scheme(const std::string &name);

/// k unit directions in R^d as the columns of a d x k matrix, deterministic per seed.
/// candidate_augmented lists +-e_i, then the normalized sign vectors (+-1,...,+-1), then
/// uniform directions; it is truncated to k when k is smaller than the candidate count.
DirectionMatrix sphere_directions(Eigen::Index d, Eigen::Index k, DirectionScheme scheme, std::uint64_t seed);

/// Number of canonical candidates (+-e_i and sign vectors) for dimension d.
Eigen::Index candidate_direction_count(Eigen::Index d);

}  // namespace depthlab
