#pragma once

#include "sketchdesc/linalg.hpp"

#include <functional>
#include <memory>
#include <span>

namespace sketchdesc {

class QuadraticObjective;

/// Smooth objective f: value and gradient oracle.
class Objective {
public:
    virtual ~Objective() = default;

    virtual Index dim() const = 0;
    virtual double value(const Vector& x) const = 0;
    virtual Vector gradient(const Vector& x) const = 0;

    /// Non-null when f is quadratic; solvers then use cached Hessian products.
    virtual const QuadraticObjective* as_quadratic() const { return nullptr; }
};

/// f(x) = ½ xᵀHx + cᵀx + c0 with H dense, diagonal, or FᵀF + shift·I.
class QuadraticObjective final : public Objective {
public:
    enum class Form { Dense, Diagonal, Factored };

    static std::shared_ptr<QuadraticObjective> dense(Matrix h, Vector c = {}, double c0 = 0.0);
    static std::shared_ptr<QuadraticObjective> diagonal(Vector d, Vector c = {}, double c0 = 0.0);
    static std::shared_ptr<QuadraticObjective> factored(Matrix f, double shift, Vector c = {}, double c0 = 0.0);

    Index dim() const override { return n_; }
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    const QuadraticObjective* as_quadratic() const override { return this; }

    Form form() const noexcept { return form_; }
    const Vector& linear() const noexcept { return c_; }
    double constant() const noexcept { return c0_; }

    Vector hessian_times(const Vector& x) const;
    /// out += H[:, idx] · delta.
    void add_hessian_columns(Vector& out, std::span<const Index> idx, const Vector& delta) const;
    /// Value given a precomputed Hx.
    double value_with(const Vector& x, const Vector& hx) const;
    /// Dense H.
    Matrix hessian() const;

    /// Diagonal of H, or the factor F.
    const Matrix& factor() const noexcept { return data_; }
    double shift() const noexcept { return shift_; }

private:
    QuadraticObjective(Form form, Index n, Matrix data, double shift, Vector c, double c0);

    Form form_;
    Index n_;
    Matrix data_;  // H, diag(H) as a column, or F
    double shift_ = 0.0;
    Vector c_;
    double c0_ = 0.0;
};

/// Objective from callables.
class FunctionObjective final : public Objective {
public:
    using ValueFn = std::function<double(const Vector&)>;
    using GradientFn = std::function<Vector(const Vector&)>;

    FunctionObjective(Index n, ValueFn value, GradientFn gradient);

    Index dim() const override { return n_; }
    double value(const Vector& x) const override { return value_(x); }
    Vector gradient(const Vector& x) const override { return gradient_(x); }

private:
    Index n_;
    ValueFn value_;
    GradientFn gradient_;
};

}  // namespace sketchdesc
