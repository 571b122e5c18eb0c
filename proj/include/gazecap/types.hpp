#ifndef GAZECAP_TYPES_HPP
#define GAZECAP_TYPES_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace gazecap {

using Real = double;
using Index = Eigen::Index;

// Row-major throughout: row vectors are the natural shape for per-region and
// per-step quantities (x * W convention).
template <typename Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using RowVectorT = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
template <typename Scalar>
using ColVectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixT<Real>;
using RowVector = RowVectorT<Real>;
using ColVector = ColVectorT<Real>;

/// Thrown when operand shapes are incompatible.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a value that must be finite is not (gradients, losses).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file, bad record, or out-of-range argument.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gazecap

#endif  // GAZECAP_TYPES_HPP
