#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace depthlab
{

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Columns are unit directions; a d x k matrix holds k directions in R^d.
using DirectionMatrix = Eigen::MatrixXd;

// Error categories map onto the CLI exit codes: InputError -> 1, NumericalError -> 2.
class InputError : public std::invalid_argument
{
public:
	using std::invalid_argument::invalid_argument;
};

class DomainError : public std::domain_error
{
public:
	using std::domain_error::domain_error;
};

class NumericalError : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

/// Index of an l_p "norm": a positive real or infinity. Infinity is a tag, never a large float.
class NormOrder
{
public:
	constexpr NormOrder() = default;

	/// Throws InputError unless p > 0 (p may be +inf, which maps to infinity()).
	explicit NormOrder(double p)
	{
		if (std::isinf(p) && p > 0) {
			infinite_ = true;
			return;
		}
		if (!(p > 0) || !std::isfinite(p))
			throw InputError("norm index must be positive or infinity, got " + std::to_string(p));
		value_ = p;
	}

	static constexpr NormOrder infinity()
	{
		NormOrder o;
		o.infinite_ = true;
		return o;
	}

	constexpr bool is_infinite() const { return infinite_; }

	/// Finite value; calling this on infinity() is a logic error.
	double value() const
	{
		if (infinite_) throw std::logic_error("NormOrder::value() on infinity");
		return value_;
	}

	/// 1/p, with 1/inf = 0.
	double reciprocal() const { return infinite_ ? 0.0 : 1.0 / value_; }

	friend bool operator==(const NormOrder &a, const NormOrder &b)
	{
		return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
	}

	std::string to_string() const { return infinite_ ? std::string("inf") : std::to_string(value_); }

private:
	double value_ = 2.0;
	bool infinite_ = false;
};

/// Unit vector on the Euclidean sphere.
class Direction
{
public:
	/// Normalizes `v`; throws InputError for a zero or non-finite vector.
	static Direction normalized(const Vector &v)
	{
		double const n = v.norm();
		if (!(n > 0) || !std::isfinite(n)) throw InputError("cannot normalize a zero or non-finite vector");
		return Direction(v / n);
	}

	const Vector &coords() const { return coords_; }
	Eigen::Index dim() const { return coords_.size(); }

private:
	explicit Direction(Vector v) : coords_(std::move(v)) {}
	Vector coords_;
};

/// Symmetric positive definite d x d matrix.
class ScatterMatrix
{
public:
	/// Validates symmetry (relative 1e-12) and positive definiteness; symmetrizes the stored copy.
	explicit ScatterMatrix(const Matrix &m);

	static ScatterMatrix identity(Eigen::Index d, double scale = 1.0)
	{
		return ScatterMatrix(scale * Matrix::Identity(d, d));
	}

	const Matrix &matrix() const { return m_; }
	Eigen::Index dim() const { return m_.rows(); }

private:
	Matrix m_;
};

/// n x d observation matrix; rows are observations.
class SampleMatrix
{
public:
	explicit SampleMatrix(Matrix data);

	const Matrix &data() const { return data_; }
	Eigen::Index size() const { return data_.rows(); }
	Eigen::Index dim() const { return data_.cols(); }
	auto row(Eigen::Index i) const { return data_.row(i); }

private:
	Matrix data_;
};

}  // namespace depthlab
