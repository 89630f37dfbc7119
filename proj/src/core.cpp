#include "depthlab/core.hpp"

#include <Eigen/Eigenvalues>

namespace depthlab
{

ScatterMatrix::ScatterMatrix(const Matrix &m)
{
	if (m.rows() != m.cols() || m.rows() == 0) throw InputError("scatter matrix must be square and nonempty");
	if (!m.allFinite()) throw InputError("scatter matrix has non-finite entries");
	double const scale = m.cwiseAbs().maxCoeff();
	if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
		throw InputError("scatter matrix is not symmetric");
	m_ = 0.5 * (m + m.transpose());
	Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
	if (!(es.eigenvalues().minCoeff() > 0)) throw DomainError("scatter matrix is not positive definite");
}

SampleMatrix::SampleMatrix(Matrix data) : data_(std::move(data))
{
	if (data_.rows() < 1 || data_.cols() < 1) throw InputError("sample must have n >= 1 rows and d >= 1 columns");
	if (!data_.allFinite()) throw InputError("sample contains non-finite entries");
}

}  // namespace depthlab
