#include "rflab/fields.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace rflab {

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    assert(o.size() == size());
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
    assert(o.size() == size());
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
}

ScalarField& ScalarField::operator*=(double c) {
    for (auto& v : values_) v *= c;
    return *this;
}

ScalarField& ScalarField::operator+=(double c) {
    for (auto& v : values_) v += c;
    return *this;
}

bool ScalarField::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double c, ScalarField a) { return a *= c; }

ScalarField hadamard(const ScalarField& a, const ScalarField& b) {
    assert(a.size() == b.size());
    ScalarField out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

ScalarField axpy(const ScalarField& a, double c, const ScalarField& b) {
    assert(a.size() == b.size());
    ScalarField out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + c * b[i];
    return out;
}

SymTensorField operator+(const SymTensorField& a, const SymTensorField& b) {
    return {a.xx + b.xx, a.xy + b.xy, a.yy + b.yy};
}

SymTensorField operator-(const SymTensorField& a, const SymTensorField& b) {
    return {a.xx - b.xx, a.xy - b.xy, a.yy - b.yy};
}

}  // namespace rflab
