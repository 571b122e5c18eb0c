#ifndef GAZECAP_TENSOR_HPP
#define GAZECAP_TENSOR_HPP

#include "gazecap/types.hpp"

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

namespace gazecap {

class Tape;

namespace detail {

struct TensorData {
    std::vector<Index> shape;  // rank 1 or 2; rank-1 tensors are stored as one row
    Matrix value;
    Matrix grad;               // empty until touched by a backward pass
    bool requires_grad = false;
    std::uint64_t tape_id = 0; // 0: leaf, not produced by any tape
    std::size_t node = 0;

    void accumulate(const Matrix& g);
    /// grad += a^T * g, without a temporary.
    void accumulate_at_b(const Matrix& a, const Matrix& g);
    /// grad += g * b^T, without a temporary.
    void accumulate_a_bt(const Matrix& g, const Matrix& b);
};

}  // namespace detail

/// Dense 64-bit tensor handle. Copies share storage; leaves are either
/// constants or trainable parameters, everything else is produced by a Tape.
class Tensor {
public:
    Tensor() = default;

    static Tensor constant(Matrix value);
    static Tensor parameter(Matrix value);
    /// Rank-1 constant.
    static Tensor vector(const std::vector<Real>& values);
    static Tensor scalar(Real v);

    bool defined() const { return data_ != nullptr; }
    const std::vector<Index>& shape() const { return data_->shape; }
    Index rows() const { return data_->value.rows(); }
    Index cols() const { return data_->value.cols(); }
    Index size() const { return data_->value.size(); }

    const Matrix& value() const { return data_->value; }
    /// Mutable access for in-place parameter updates; never call on a taped node.
    Matrix& mutable_value() { return data_->value; }
    /// Gradient buffer; parameters always have one, intermediates only once reached.
    const Matrix& grad() const { return data_->grad; }
    Matrix& mutable_grad() { return data_->grad; }
    bool requires_grad() const { return data_->requires_grad; }
    Real item() const;

    void zero_grad();
    /// Adds `g` into the shared gradient buffer.
    void accumulate_grad(const Matrix& g) const;
    bool on_tape(const Tape& tape) const;

    std::string shape_string() const;

private:
    friend class Tape;
    friend Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
    explicit Tensor(std::shared_ptr<detail::TensorData> d) : data_(std::move(d)) {}
    std::shared_ptr<detail::TensorData> data_;
};

/// Records primitive operations for reverse-mode differentiation. Nodes are
/// appended in evaluation order, so parents always precede children and the
/// backward sweep is a plain reverse iteration.
///
/// An inference tape evaluates the same ops without recording anything.
class Tape {
public:
    enum class Mode { record, inference };

    explicit Tape(Mode mode = Mode::record);
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    bool recording() const { return mode_ == Mode::record; }
    std::size_t size() const { return nodes_.size(); }
    std::uint64_t id() const { return id_; }

    /// Populates grad on every tensor reachable from `loss` (accumulating into
    /// parameter grads). `loss` must be a 1x1 tensor produced on this tape.
    void backward(const Tensor& loss);

    using BackwardFn = std::function<void(const Matrix& grad_out)>;

    /// Low-level hook used by the primitive ops.
    Tensor push(Matrix value, std::vector<Index> shape, std::initializer_list<const Tensor*> inputs,
                BackwardFn backward);
    Tensor push(Matrix value, std::vector<Index> shape, bool needs_grad, BackwardFn backward);

private:
    struct Node {
        std::shared_ptr<detail::TensorData> out;
        BackwardFn backward;
    };
    Mode mode_;
    std::uint64_t id_;
    std::vector<Node> nodes_;
};

// Primitive ops. All shape checks throw ShapeError naming the op and shapes.

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
/// b may match a, be a 1xN row (added to every row) or 1x1.
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
/// Elementwise; b may match a or be 1x1.
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
/// s * a + c
Tensor affine(Tape& tape, const Tensor& a, Real s, Real c);
Tensor tanh(Tape& tape, const Tensor& a);
Tensor sigmoid(Tape& tape, const Tensor& a);
Tensor exp(Tape& tape, const Tensor& a);
Tensor log(Tape& tape, const Tensor& a);
/// axis 0 collapses rows (result 1xC), axis 1 collapses columns (result Rx1).
Tensor sum(Tape& tape, const Tensor& a, int axis);
Tensor sum_all(Tape& tape, const Tensor& a);
/// Concatenate along columns; all parts must share the row count.
Tensor concat(Tape& tape, const std::vector<Tensor>& parts);
Tensor slice_cols(Tape& tape, const Tensor& a, Index start, Index count);
Tensor row_lookup(Tape& tape, const Tensor& table, Index row);
Tensor softmax(Tape& tape, const Tensor& a, int axis);
Tensor transpose(Tape& tape, const Tensor& a);
/// Single element as a 1x1 tensor.
Tensor select(Tape& tape, const Tensor& a, Index row, Index col);

/// softmax along `axis` of a plain matrix, max-subtracted.
Matrix softmax_values(const Matrix& x, int axis);

}  // namespace gazecap

#endif  // GAZECAP_TENSOR_HPP
