// field.hpp - cohomogeneity-one tensor fields sampled on a t-grid
#pragma once

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "gklab/geom.hpp"
#include "gklab/grid.hpp"

namespace gklab {

// Coordinate gradient of t = 2((b/a) x1 - x2); every partial derivative of a
// reduced field is c_axis * d/dt.
struct FrameConstants {
    Vec4 c = Vec4::Zero();

    static FrameConstants from_ab(double a, double b) {
        FrameConstants f;
        f.c << 2.0 * b / a, 0.0, -2.0, 0.0;
        return f;
    }
    Form1 dt() const { return as_form(c); }
};

// Everything a field operation needs besides the samples themselves.
struct Domain {
    Grid grid;
    FrameConstants frame;
    double a = -1.0, b = -1.0;
    // Volume of the (y1, y2, tau) fibre over dt: (2 pi)^2 |a| / 2.
    double c_deck = 0.0;

    Domain(GridSpec spec, double a_, double b_)
        : grid(spec), frame(FrameConstants::from_ab(a_, b_)), a(a_), b(b_),
          c_deck(4.0 * std::numbers::pi * std::numbers::pi * std::abs(a_) / 2.0) {}
};
using DomainPtr = std::shared_ptr<const Domain>;

inline DomainPtr make_domain(GridSpec spec, double a, double b) {
    return std::make_shared<const Domain>(spec, a, b);
}

// Flat component access for every pointwise value type.
template <class T>
struct Components;

template <>
struct Components<double> {
    static constexpr int size = 1;
    static double* data(double& x) { return &x; }
    static const double* data(const double& x) { return &x; }
    static constexpr const char* kind = "scalar";
};
template <int R, int C>
struct Components<Eigen::Matrix<double, R, C>> {
    static constexpr int size = R * C;
    static double* data(Eigen::Matrix<double, R, C>& x) { return x.data(); }
    static const double* data(const Eigen::Matrix<double, R, C>& x) { return x.data(); }
    static constexpr const char* kind = (C == 1) ? "vector" : "endo";
};
template <int K>
struct Components<AltForm<K>> {
    static constexpr int size = AltForm<K>::size;
    static double* data(AltForm<K>& x) { return x.c.data(); }
    static const double* data(const AltForm<K>& x) { return x.c.data(); }
    static constexpr const char* kind = K == 0 ? "form0" : K == 1 ? "form1" : K == 2 ? "form2" : K == 3 ? "form3" : "form4";
};
template <>
struct Components<Tensor3> {
    static constexpr int size = 64;
    static double* data(Tensor3& x) { return x.c.data(); }
    static const double* data(const Tensor3& x) { return x.c.data(); }
    static constexpr const char* kind = "tensor3";
};
template <>
struct Components<Bivector> {
    static constexpr int size = 16;
    static double* data(Bivector& x) { return x.c.data(); }
    static const double* data(const Bivector& x) { return x.c.data(); }
    static constexpr const char* kind = "bivector";
};

template <class T>
double max_abs_value(const T& x) {
    const double* d = Components<T>::data(x);
    double m = 0.0;
    for (int k = 0; k < Components<T>::size; ++k) m = std::max(m, std::abs(d[k]));
    return m;
}

// A tensor field depending on t alone: one pointwise value per grid sample.
// `kind` records rank and variance ("scalar", "vector", "endo", "sym2",
// "form1".."form4", "bivector", "tensor3").
template <class T>
struct ReducedField {
    DomainPtr dom;
    std::vector<T> v;
    std::string kind = Components<T>::kind;

    ReducedField() = default;
    explicit ReducedField(DomainPtr d, std::string k = Components<T>::kind)
        : dom(std::move(d)), v(dom->grid.size()), kind(std::move(k)) {
        if constexpr (std::is_arithmetic_v<T>)
            std::fill(v.begin(), v.end(), T{0});
        else if constexpr (requires(T x) { x.setZero(); })
            for (auto& x : v) x.setZero();
    }
    ReducedField(DomainPtr d, std::vector<T> vals, std::string k = Components<T>::kind)
        : dom(std::move(d)), v(std::move(vals)), kind(std::move(k)) {
        if (static_cast<int>(v.size()) != dom->grid.size())
            throw std::invalid_argument("field: sample count does not match the grid");
    }

    int size() const { return static_cast<int>(v.size()); }
    T& operator[](int i) { return v[i]; }
    const T& operator[](int i) const { return v[i]; }
    const Grid& grid() const { return dom->grid; }
    const Vec4& c() const { return dom->frame.c; }

    // Sup-norm over the interior (outermost 2% excluded at each end).
    double interior_sup() const {
        double m = 0.0;
        for (int i = grid().interior_begin(); i < grid().interior_end(); ++i)
            m = std::max(m, max_abs_value(v[i]));
        return m;
    }
    double sup() const {
        double m = 0.0;
        for (const auto& x : v) m = std::max(m, max_abs_value(x));
        return m;
    }
};

using ScalarField = ReducedField<double>;
using VectorField = ReducedField<Vec4>;
using EndoField = ReducedField<Mat4>;

inline void require_same_domain(const DomainPtr& a, const DomainPtr& b) {
    if (a.get() != b.get() &&
        (a->grid.size() != b->grid.size() || a->grid.spec().t_max != b->grid.spec().t_max ||
         a->grid.spec().scheme != b->grid.spec().scheme || a->a != b->a || a->b != b->b))
        throw std::invalid_argument("field: grid mismatch between operands");
}

// Pointwise transforms.
template <class T, class Fn>
auto map(const ReducedField<T>& f, Fn&& fn, std::string kind = "") {
    using R = std::decay_t<decltype(fn(f.v[0]))>;
    ReducedField<R> out(f.dom, kind.empty() ? std::string(Components<R>::kind) : kind);
    for (int i = 0; i < f.size(); ++i) out.v[i] = fn(f.v[i]);
    return out;
}

template <class A, class B, class Fn>
auto zip(const ReducedField<A>& f, const ReducedField<B>& g, Fn&& fn, std::string kind = "") {
    require_same_domain(f.dom, g.dom);
    using R = std::decay_t<decltype(fn(f.v[0], g.v[0]))>;
    ReducedField<R> out(f.dom, kind.empty() ? std::string(Components<R>::kind) : kind);
    for (int i = 0; i < f.size(); ++i) out.v[i] = fn(f.v[i], g.v[i]);
    return out;
}

template <class Fn>
ScalarField tabulate(const DomainPtr& dom, Fn&& fn) {
    ScalarField out(dom);
    for (int i = 0; i < out.size(); ++i) out.v[i] = fn(dom->grid.t(i));
    return out;
}

template <class T>
ReducedField<T> operator+(const ReducedField<T>& a, const ReducedField<T>& b) {
    return zip(a, b, [](const T& x, const T& y) -> T { return x + y; }, a.kind);
}
template <class T>
ReducedField<T> operator-(const ReducedField<T>& a, const ReducedField<T>& b) {
    return zip(a, b, [](const T& x, const T& y) -> T { return x - y; }, a.kind);
}
template <class T>
ReducedField<T> operator*(double s, const ReducedField<T>& a) {
    return map(a, [s](const T& x) -> T { return s * x; }, a.kind);
}

// Componentwise d/dt with the grid's scheme.
template <class T>
ReducedField<T> ddt(const ReducedField<T>& f) {
    ReducedField<T> out(f.dom, f.kind);
    constexpr int m = Components<T>::size;
    const int n = f.size();
    if (n == 0) return out;
    static_assert(sizeof(T) == m * sizeof(double), "field samples must be packed doubles");
    f.grid().derivative_block(Components<T>::data(f.v[0]), m, Components<T>::data(out.v[0]));
    return out;
}

}  // namespace gklab
