#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace rflab {

/// Real values at the nodes of a metric's grid (a single node on the sphere).
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(std::size_t n, double value = 0.0) : values_(n, value) {}
    explicit ScalarField(std::vector<double> values) : values_(std::move(values)) {}
    ScalarField(std::initializer_list<double> values) : values_(values) {}

    std::size_t size() const { return values_.size(); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }
    auto begin() { return values_.begin(); }
    auto end() { return values_.end(); }
    auto begin() const { return values_.begin(); }
    auto end() const { return values_.end(); }
    std::span<const double> view() const { return values_; }
    const std::vector<double>& values() const { return values_; }

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(double c);
    ScalarField& operator+=(double c);

    bool all_finite() const;
    double max_abs() const;
    double min() const;
    double max() const;

    friend bool operator==(const ScalarField&, const ScalarField&) = default;

private:
    std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double c, ScalarField a);
/// Pointwise product.
ScalarField hadamard(const ScalarField& a, const ScalarField& b);
/// a + c*b
ScalarField axpy(const ScalarField& a, double c, const ScalarField& b);

/// Covariant symmetric 2-tensor field.
///
/// On the conformal torus xx, xy, yy are coordinate components at every node.
/// On the round sphere only constant multiples of the metric occur; xx then
/// holds that multiple as a single value and xy, yy are zero.
struct SymTensorField {
    ScalarField xx;
    ScalarField xy;
    ScalarField yy;

    friend bool operator==(const SymTensorField&, const SymTensorField&) = default;
};

SymTensorField operator+(const SymTensorField& a, const SymTensorField& b);
SymTensorField operator-(const SymTensorField& a, const SymTensorField& b);

}  // namespace rflab
