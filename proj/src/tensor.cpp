#include "gazecap/tensor.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

namespace gazecap {

namespace {

std::atomic<std::uint64_t> next_tape_id{1};

std::string fmt_shape(const Tensor& t) { return t.shape_string(); }

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
    throw ShapeError(std::string(op) + ": incompatible shapes " + fmt_shape(a) + " and " + fmt_shape(b));
}

std::vector<Index> shape2(Index r, Index c) { return {r, c}; }

}  // namespace

void detail::TensorData::accumulate(const Matrix& g) {
    if (grad.size() == 0) {
        grad = g;
    } else {
        grad += g;
    }
}

void detail::TensorData::accumulate_at_b(const Matrix& a, const Matrix& g) {
    if (grad.size() == 0) {
        grad.noalias() = a.transpose() * g;
    } else {
        grad.noalias() += a.transpose() * g;
    }
}

void detail::TensorData::accumulate_a_bt(const Matrix& g, const Matrix& b) {
    if (grad.size() == 0) {
        grad.noalias() = g * b.transpose();
    } else {
        grad.noalias() += g * b.transpose();
    }
}

Tensor Tensor::constant(Matrix value) {
    auto d = std::make_shared<detail::TensorData>();
    d->shape = shape2(value.rows(), value.cols());
    d->value = std::move(value);
    return Tensor(std::move(d));
}

Tensor Tensor::parameter(Matrix value) {
    auto d = std::make_shared<detail::TensorData>();
    d->shape = shape2(value.rows(), value.cols());
    d->grad = Matrix::Zero(value.rows(), value.cols());
    d->value = std::move(value);
    d->requires_grad = true;
    return Tensor(std::move(d));
}

Tensor Tensor::vector(const std::vector<Real>& values) {
    Matrix m(1, static_cast<Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) m(0, static_cast<Index>(i)) = values[i];
    Tensor t = constant(std::move(m));
    t.data_->shape = {static_cast<Index>(values.size())};
    return t;
}

Tensor Tensor::scalar(Real v) { return constant(Matrix::Constant(1, 1, v)); }

Real Tensor::item() const {
    if (size() != 1) throw ShapeError("item: tensor " + shape_string() + " is not a scalar");
    return data_->value(0, 0);
}

void Tensor::zero_grad() { data_->grad = Matrix::Zero(rows(), cols()); }

void Tensor::accumulate_grad(const Matrix& g) const { data_->accumulate(g); }

bool Tensor::on_tape(const Tape& tape) const { return data_->tape_id == tape.id(); }

std::string Tensor::shape_string() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < data_->shape.size(); ++i) {
        if (i) os << 'x';
        os << data_->shape[i];
    }
    os << ']';
    return os.str();
}

Tape::Tape(Mode mode) : mode_(mode), id_(next_tape_id.fetch_add(1)) {}

Tensor Tape::push(Matrix value, std::vector<Index> shape, std::initializer_list<const Tensor*> inputs,
                  BackwardFn backward) {
    bool needs = false;
    for (const Tensor* in : inputs) needs = needs || in->requires_grad();
    return push(std::move(value), std::move(shape), needs, std::move(backward));
}

Tensor Tape::push(Matrix value, std::vector<Index> shape, bool needs_grad, BackwardFn backward) {
    auto d = std::make_shared<detail::TensorData>();
    d->value = std::move(value);
    d->shape = std::move(shape);
    const bool needs = needs_grad;
    if (recording() && needs) {
        d->requires_grad = true;
        d->tape_id = id_;
        d->node = nodes_.size();
        nodes_.push_back(Node{d, std::move(backward)});
    }
    return Tensor(std::move(d));
}

void Tape::backward(const Tensor& loss) {
    if (!loss.defined() || loss.size() != 1) {
        throw ShapeError("backward: loss must be a scalar, got " + (loss.defined() ? loss.shape_string() : "[]"));
    }
    if (!loss.requires_grad()) return;  // no parameter reachable
    if (!loss.on_tape(*this)) throw std::logic_error("backward: loss was not produced on this tape");
    loss.data_->grad = Matrix::Ones(1, 1);
    for (std::size_t i = loss.data_->node + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (n.out->grad.size() == 0) continue;
        n.backward(n.out->grad);
    }
}

namespace {

void acc(const Tensor& t, const Matrix& g) {
    if (t.requires_grad()) t.accumulate_grad(g);
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) shape_fail("matmul", a, b);
    Matrix out = a.value() * b.value();
    return tape.push(std::move(out), shape2(a.rows(), b.cols()), {&a, &b}, [a, b](const Matrix& g) {
        if (a.requires_grad()) a.data_->accumulate_a_bt(g, b.value());
        if (b.requires_grad()) b.data_->accumulate_at_b(a.value(), g);
    });
}

namespace {

enum class Broadcast { same, row, scalar };

Broadcast broadcast_kind(const char* op, const Tensor& a, const Tensor& b, bool allow_row) {
    if (a.rows() == b.rows() && a.cols() == b.cols()) return Broadcast::same;
    if (b.rows() == 1 && b.cols() == 1) return Broadcast::scalar;
    if (allow_row && b.rows() == 1 && b.cols() == a.cols()) return Broadcast::row;
    shape_fail(op, a, b);
}

Matrix expand(const Matrix& b, Broadcast kind, Index rows, Index cols) {
    switch (kind) {
        case Broadcast::same: return b;
        case Broadcast::row: return b.replicate(rows, 1);
        case Broadcast::scalar: return Matrix::Constant(rows, cols, b(0, 0));
    }
    return b;
}

Matrix reduce(const Matrix& g, Broadcast kind) {
    switch (kind) {
        case Broadcast::same: return g;
        case Broadcast::row: return g.colwise().sum();
        case Broadcast::scalar: return Matrix::Constant(1, 1, g.sum());
    }
    return g;
}

}  // namespace

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
    const Broadcast kind = broadcast_kind("add", a, b, true);
    Matrix out = a.value() + expand(b.value(), kind, a.rows(), a.cols());
    return tape.push(std::move(out), a.shape(), {&a, &b}, [a, b, kind](const Matrix& g) {
        acc(a, g);
        if (b.requires_grad()) acc(b, reduce(g, kind));
    });
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
    const Broadcast kind = broadcast_kind("sub", a, b, true);
    Matrix out = a.value() - expand(b.value(), kind, a.rows(), a.cols());
    return tape.push(std::move(out), a.shape(), {&a, &b}, [a, b, kind](const Matrix& g) {
        acc(a, g);
        if (b.requires_grad()) acc(b, -reduce(g, kind));
    });
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
    const Broadcast kind = broadcast_kind("mul", a, b, false);
    Matrix bx = expand(b.value(), kind, a.rows(), a.cols());
    Matrix out = a.value().cwiseProduct(bx);
    return tape.push(std::move(out), a.shape(), {&a, &b}, [a, b, kind, bx](const Matrix& g) {
        if (a.requires_grad()) acc(a, g.cwiseProduct(bx));
        if (b.requires_grad()) acc(b, reduce(g.cwiseProduct(a.value()), kind));
    });
}

Tensor affine(Tape& tape, const Tensor& a, Real s, Real c) {
    Matrix out = (a.value() * s).array() + c;
    return tape.push(std::move(out), a.shape(), {&a}, [a, s](const Matrix& g) { acc(a, g * s); });
}

Tensor tanh(Tape& tape, const Tensor& a) {
    Matrix out = a.value().array().tanh();
    Matrix y = out;
    return tape.push(std::move(out), a.shape(), {&a}, [a, y](const Matrix& g) {
        acc(a, (g.array() * (1.0 - y.array().square())).matrix());
    });
}

Tensor sigmoid(Tape& tape, const Tensor& a) {
    Matrix out = (1.0 + (-a.value().array()).exp()).inverse();
    Matrix y = out;
    return tape.push(std::move(out), a.shape(), {&a}, [a, y](const Matrix& g) {
        acc(a, (g.array() * y.array() * (1.0 - y.array())).matrix());
    });
}

Tensor exp(Tape& tape, const Tensor& a) {
    Matrix out = a.value().array().exp();
    Matrix y = out;
    return tape.push(std::move(out), a.shape(), {&a}, [a, y](const Matrix& g) { acc(a, g.cwiseProduct(y)); });
}

Tensor log(Tape& tape, const Tensor& a) {
    Matrix out = a.value().array().log();
    return tape.push(std::move(out), a.shape(), {&a}, [a](const Matrix& g) {
        acc(a, (g.array() / a.value().array()).matrix());
    });
}

Tensor sum(Tape& tape, const Tensor& a, int axis) {
    if (axis != 0 && axis != 1) throw ShapeError("sum: axis must be 0 or 1");
    const Index r = a.rows();
    const Index c = a.cols();
    if (axis == 0) {
        Matrix out = a.value().colwise().sum();
        return tape.push(std::move(out), shape2(1, c), {&a}, [a, r](const Matrix& g) { acc(a, g.replicate(r, 1)); });
    }
    Matrix out = a.value().rowwise().sum();
    return tape.push(std::move(out), shape2(r, 1), {&a}, [a, c](const Matrix& g) { acc(a, g.replicate(1, c)); });
}

Tensor sum_all(Tape& tape, const Tensor& a) {
    Matrix out = Matrix::Constant(1, 1, a.value().sum());
    return tape.push(std::move(out), shape2(1, 1), {&a}, [a](const Matrix& g) {
        acc(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
    });
}

Tensor concat(Tape& tape, const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ShapeError("concat: no inputs");
    const Index r = parts.front().rows();
    Index c = 0;
    for (const Tensor& p : parts) {
        if (p.rows() != r) shape_fail("concat", parts.front(), p);
        c += p.cols();
    }
    Matrix out(r, c);
    Index off = 0;
    for (const Tensor& p : parts) {
        out.middleCols(off, p.cols()) = p.value();
        off += p.cols();
    }
    bool needs = false;
    for (const Tensor& p : parts) needs = needs || p.requires_grad();
    auto d = std::make_shared<std::vector<Tensor>>(parts);
    return tape.push(std::move(out), shape2(r, c), needs, [d](const Matrix& g) {
        Index o = 0;
        for (const Tensor& p : *d) {
            if (p.requires_grad()) acc(p, g.middleCols(o, p.cols()));
            o += p.cols();
        }
    });
}

Tensor slice_cols(Tape& tape, const Tensor& a, Index start, Index count) {
    if (start < 0 || count < 0 || start + count > a.cols()) {
        throw ShapeError("slice_cols: range [" + std::to_string(start) + ", " + std::to_string(start + count) +
                         ") outside " + a.shape_string());
    }
    Matrix out = a.value().middleCols(start, count);
    return tape.push(std::move(out), shape2(a.rows(), count), {&a}, [a, start, count](const Matrix& g) {
        Matrix full = Matrix::Zero(a.rows(), a.cols());
        full.middleCols(start, count) = g;
        acc(a, full);
    });
}

Tensor row_lookup(Tape& tape, const Tensor& table, Index row) {
    if (row < 0 || row >= table.rows()) {
        throw ShapeError("row_lookup: index " + std::to_string(row) + " outside " + table.shape_string());
    }
    Matrix out = table.value().row(row);
    return tape.push(std::move(out), shape2(1, table.cols()), {&table}, [table, row](const Matrix& g) {
        Matrix full = Matrix::Zero(table.rows(), table.cols());
        full.row(row) = g;
        acc(table, full);
    });
}

Matrix softmax_values(const Matrix& x, int axis) {
    Matrix y(x.rows(), x.cols());
    if (axis == 1) {
        for (Index i = 0; i < x.rows(); ++i) {
            const Real m = x.row(i).maxCoeff();
            y.row(i) = (x.row(i).array() - m).exp();
            y.row(i) /= y.row(i).sum();
        }
    } else if (axis == 0) {
        for (Index j = 0; j < x.cols(); ++j) {
            const Real m = x.col(j).maxCoeff();
            y.col(j) = (x.col(j).array() - m).exp();
            y.col(j) /= y.col(j).sum();
        }
    } else {
        throw ShapeError("softmax: axis must be 0 or 1");
    }
    return y;
}

Tensor softmax(Tape& tape, const Tensor& a, int axis) {
    Matrix out = softmax_values(a.value(), axis);
    Matrix y = out;
    return tape.push(std::move(out), a.shape(), {&a}, [a, y, axis](const Matrix& g) {
        Matrix gy = g.cwiseProduct(y);
        if (axis == 1) {
            ColVector s = gy.rowwise().sum();
            acc(a, gy - (y.array().colwise() * s.array()).matrix());
        } else {
            RowVector s = gy.colwise().sum();
            acc(a, gy - (y.array().rowwise() * s.array()).matrix());
        }
    });
}

Tensor transpose(Tape& tape, const Tensor& a) {
    Matrix out = a.value().transpose();
    return tape.push(std::move(out), shape2(a.cols(), a.rows()), {&a},
                     [a](const Matrix& g) { acc(a, g.transpose()); });
}

Tensor select(Tape& tape, const Tensor& a, Index row, Index col) {
    if (row < 0 || row >= a.rows() || col < 0 || col >= a.cols()) {
        throw ShapeError("select: (" + std::to_string(row) + ", " + std::to_string(col) + ") outside " +
                         a.shape_string());
    }
    Matrix out = Matrix::Constant(1, 1, a.value()(row, col));
    return tape.push(std::move(out), shape2(1, 1), {&a}, [a, row, col](const Matrix& g) {
        Matrix full = Matrix::Zero(a.rows(), a.cols());
        full(row, col) = g(0, 0);
        acc(a, full);
    });
}

}  // namespace gazecap
