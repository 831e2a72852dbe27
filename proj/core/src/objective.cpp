#include "sketchdesc/objective.hpp"

#include "sketchdesc/error.hpp"

namespace sketchdesc {

QuadraticObjective::QuadraticObjective(Form form, Index n, Matrix data, double shift, Vector c, double c0)
    : form_(form), n_(n), data_(std::move(data)), shift_(shift), c_(std::move(c)), c0_(c0) {
    if (c_.size() == 0) c_ = Vector::Zero(n_);
    if (c_.size() != n_) fail(ErrorCode::InvalidShape, "quadratic objective: linear term has wrong length");
    linalg::require_finite(data_, "quadratic objective");
    linalg::require_finite(c_, "quadratic objective linear term");
}

std::shared_ptr<QuadraticObjective> QuadraticObjective::dense(Matrix h, Vector c, double c0) {
    if (h.rows() != h.cols()) fail(ErrorCode::InvalidShape, "quadratic objective: H must be square");
    const Index n = h.rows();
    return std::shared_ptr<QuadraticObjective>(
        new QuadraticObjective(Form::Dense, n, linalg::symmetrize(h), 0.0, std::move(c), c0));
}

std::shared_ptr<QuadraticObjective> QuadraticObjective::diagonal(Vector d, Vector c, double c0) {
    const Index n = d.size();
    return std::shared_ptr<QuadraticObjective>(
        new QuadraticObjective(Form::Diagonal, n, Matrix(d), 0.0, std::move(c), c0));
}

std::shared_ptr<QuadraticObjective> QuadraticObjective::factored(Matrix f, double shift, Vector c, double c0) {
    const Index n = f.cols();
    return std::shared_ptr<QuadraticObjective>(
        new QuadraticObjective(Form::Factored, n, std::move(f), shift, std::move(c), c0));
}

Vector QuadraticObjective::hessian_times(const Vector& x) const {
    if (x.size() != n_) fail(ErrorCode::InvalidShape, "quadratic objective: dimension mismatch");
    switch (form_) {
        case Form::Dense: return data_ * x;
        case Form::Diagonal: return data_.col(0).cwiseProduct(x);
        case Form::Factored: {
            Vector out = data_.transpose() * (data_ * x);
            if (shift_ != 0.0) out += shift_ * x;
            return out;
        }
    }
    return {};
}

void QuadraticObjective::add_hessian_columns(Vector& out, std::span<const Index> idx, const Vector& delta) const {
    switch (form_) {
        case Form::Dense:
            for (std::size_t j = 0; j < idx.size(); ++j) out.noalias() += delta[Index(j)] * data_.col(idx[j]);
            return;
        case Form::Diagonal:
            for (std::size_t j = 0; j < idx.size(); ++j) out[idx[j]] += data_(idx[j], 0) * delta[Index(j)];
            return;
        case Form::Factored: {
            Vector fd = Vector::Zero(data_.rows());
            for (std::size_t j = 0; j < idx.size(); ++j) fd.noalias() += delta[Index(j)] * data_.col(idx[j]);
            out.noalias() += data_.transpose() * fd;
            if (shift_ != 0.0) {
                for (std::size_t j = 0; j < idx.size(); ++j) out[idx[j]] += shift_ * delta[Index(j)];
            }
            return;
        }
    }
}

double QuadraticObjective::value_with(const Vector& x, const Vector& hx) const {
    return 0.5 * x.dot(hx) + c_.dot(x) + c0_;
}

double QuadraticObjective::value(const Vector& x) const { return value_with(x, hessian_times(x)); }

Vector QuadraticObjective::gradient(const Vector& x) const { return hessian_times(x) + c_; }

Matrix QuadraticObjective::hessian() const {
    switch (form_) {
        case Form::Dense: return data_;
        case Form::Diagonal: return data_.col(0).asDiagonal();
        case Form::Factored: {
            Matrix h = data_.transpose() * data_;
            h.diagonal().array() += shift_;
            return h;
        }
    }
    return {};
}

FunctionObjective::FunctionObjective(Index n, ValueFn value, GradientFn gradient)
    : n_(n), value_(std::move(value)), gradient_(std::move(gradient)) {
    if (!value_ || !gradient_) fail(ErrorCode::InvalidInput, "function objective needs value and gradient callables");
}

}  // namespace sketchdesc
