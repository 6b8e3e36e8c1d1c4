// geom.hpp - pointwise multilinear algebra on a 4-dimensional real tangent space
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace gklab {

using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using CVec4 = Eigen::Matrix<std::complex<double>, 4, 1>;
using CMat4 = Eigen::Matrix<std::complex<double>, 4, 4>;

// Endomorphisms act on column vectors: (AX)^i = A(i,j) X^j.
using Endo4 = Mat4;
// Metric components g_ij in the coordinate frame (x1, y1, x2, y2).
using Metric4 = Mat4;

struct DegenerateMetric : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr int ipow4(int k) { return k == 0 ? 1 : 4 * ipow4(k - 1); }

// Fully antisymmetric covariant k-tensor, stored as all 4^k components
// alpha(e_{i1}, ..., e_{ik}) with the first index varying slowest.
template <int K>
struct AltForm {
    static_assert(K >= 0 && K <= 4, "form rank must lie in 0..4");
    static constexpr int rank = K;
    static constexpr int size = ipow4(K);
    std::array<double, size> c{};

    template <class... Ix>
    double& operator()(Ix... ix) {
        static_assert(sizeof...(Ix) == K);
        return c[flat(ix...)];
    }
    template <class... Ix>
    double operator()(Ix... ix) const {
        static_assert(sizeof...(Ix) == K);
        return c[flat(ix...)];
    }

    template <class... Ix>
    static constexpr int flat(Ix... ix) {
        int f = 0;
        ((f = 4 * f + static_cast<int>(ix)), ...);
        return f;
    }

    AltForm& operator+=(const AltForm& o) {
        for (int i = 0; i < size; ++i) c[i] += o.c[i];
        return *this;
    }
    AltForm& operator-=(const AltForm& o) {
        for (int i = 0; i < size; ++i) c[i] -= o.c[i];
        return *this;
    }
    AltForm& operator*=(double s) {
        for (auto& x : c) x *= s;
        return *this;
    }
    friend AltForm operator+(AltForm a, const AltForm& b) { return a += b; }
    friend AltForm operator-(AltForm a, const AltForm& b) { return a -= b; }
    friend AltForm operator*(double s, AltForm a) { return a *= s; }
    friend AltForm operator*(AltForm a, double s) { return a *= s; }
    friend AltForm operator-(AltForm a) { return a *= -1.0; }

    double max_abs() const {
        double m = 0.0;
        for (double x : c) m = std::max(m, std::abs(x));
        return m;
    }
};

using Form1 = AltForm<1>;
using Form2 = AltForm<2>;
using Form3 = AltForm<3>;
using Form4 = AltForm<4>;

// Contravariant antisymmetric 2-tensor; c(i,j) = sigma(dx^i, dx^j).
struct Bivector {
    Mat4 c = Mat4::Zero();

    // The map xi -> sigma(xi, .) from covectors to vectors.
    Mat4 first_slot_map() const { return c.transpose(); }
    Vec4 contract_first(const Vec4& xi) const { return c.transpose() * xi; }
    Vec4 contract_second(const Vec4& xi) const { return c * xi; }
    double operator()(const Vec4& xi, const Vec4& eta) const { return xi.dot(c * eta); }

    static Bivector from_first_slot_map(const Mat4& S) { return Bivector{S.transpose()}; }
};

// Rank-3 coordinate array, used for Christoffel symbols and the Nijenhuis tensor.
struct Tensor3 {
    std::array<double, 64> c{};
    double& operator()(int i, int j, int k) { return c[16 * i + 4 * j + k]; }
    double operator()(int i, int j, int k) const { return c[16 * i + 4 * j + k]; }
    double max_abs() const {
        double m = 0.0;
        for (double x : c) m = std::max(m, std::abs(x));
        return m;
    }
};

namespace detail {

// Signed permutations of {0..n-1}, n <= 4, generated once.
struct PermTable {
    std::array<std::array<int, 4>, 24> perm{};
    std::array<int, 24> sign{};
    int count = 0;
};

inline PermTable make_perms(int n) {
    PermTable t;
    std::array<int, 4> p{0, 1, 2, 3};
    int fact = 1;
    for (int i = 2; i <= n; ++i) fact *= i;
    std::array<int, 4> q = p;
    int k = 0;
    do {
        int inv = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (q[i] > q[j]) ++inv;
        t.perm[k] = q;
        t.sign[k] = (inv % 2 == 0) ? 1 : -1;
        ++k;
    } while (std::next_permutation(q.begin(), q.begin() + n));
    t.count = fact;
    return t;
}

inline const PermTable& perms(int n) {
    static const std::array<PermTable, 5> tables{make_perms(0), make_perms(1), make_perms(2),
                                                 make_perms(3), make_perms(4)};
    return tables[n];
}

constexpr int factorial(int n) { return n <= 1 ? 1 : n * factorial(n - 1); }

template <int K>
void unflatten(int f, std::array<int, 4>& ix) {
    for (int s = K - 1; s >= 0; --s) {
        ix[s] = f % 4;
        f /= 4;
    }
}

template <int K>
int flatten(const std::array<int, 4>& ix) {
    int f = 0;
    for (int s = 0; s < K; ++s) f = 4 * f + ix[s];
    return f;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Endomorphisms

inline Endo4 commutator(const Endo4& A, const Endo4& B) { return A * B - B * A; }

// Angle function -tr(IJ)/4.
inline double angle(const Endo4& I, const Endo4& J) { return -0.25 * (I * J).trace(); }

inline Metric4 sym_part(const Mat4& T) { return 0.5 * (T + T.transpose()); }

inline bool is_complex_structure(const Endo4& A, double tol = 1e-12) {
    return (A * A + Mat4::Identity()).cwiseAbs().maxCoeff() <= tol;
}

// Nearest almost complex structure by the Newton sign iteration K <- (K - K^{-1})/2,
// which drives every eigenvalue i*s to i and leaves exact complex structures fixed.
inline Endo4 project_complex_structure(const Endo4& A, int max_iter = 12) {
    Endo4 K = A;
    for (int it = 0; it < max_iter; ++it) {
        if ((K * K + Mat4::Identity()).cwiseAbs().maxCoeff() < 1e-15) break;
        K = 0.5 * (K - K.inverse());
    }
    return K;
}

// ---------------------------------------------------------------------------
// Musical isomorphisms

inline void require_positive(const Metric4& g) {
    Eigen::LLT<Mat4> llt(g);
    if (llt.info() != Eigen::Success)
        throw DegenerateMetric("metric is not positive definite");
}

inline Vec4 sharp(const Metric4& g, const Form1& a) {
    Eigen::LLT<Mat4> llt(g);
    if (llt.info() != Eigen::Success)
        throw DegenerateMetric("sharp: metric is not positive definite");
    Vec4 v(a.c[0], a.c[1], a.c[2], a.c[3]);
    return llt.solve(v);
}

inline Form1 flat(const Metric4& g, const Vec4& X) {
    Vec4 v = g * X;
    return Form1{{v(0), v(1), v(2), v(3)}};
}

inline Vec4 as_vec(const Form1& a) { return Vec4(a.c[0], a.c[1], a.c[2], a.c[3]); }
inline Form1 as_form(const Vec4& v) { return Form1{{v(0), v(1), v(2), v(3)}}; }

// ---------------------------------------------------------------------------
// 2-forms and matrices

inline Mat4 as_matrix(const Form2& F) {
    Mat4 m;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m(i, j) = F(i, j);
    return m;
}

inline Form2 as_form2(const Mat4& m) {
    Form2 F;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) F(i, j) = 0.5 * (m(i, j) - m(j, i));
    return F;
}

// The 2-form (X, Y) -> g(AX, Y); for a compatible complex structure this is its
// fundamental form.
inline Form2 form_from_endo(const Endo4& A, const Metric4& g) {
    return as_form2(A.transpose() * g);
}

// The covariant 2-tensor F(A., .), written "F A" in product notation.
inline Mat4 precompose_tensor(const Form2& F, const Endo4& A) {
    return A.transpose() * as_matrix(F);
}

// ---------------------------------------------------------------------------
// Exterior algebra

// (I alpha)(X1..Xk) = (-1)^k alpha(I X1, ..., I Xk).
template <int K>
AltForm<K> act_on_form(const Endo4& A, const AltForm<K>& a) {
    AltForm<K> cur = a;
    for (int slot = 0; slot < K; ++slot) {
        AltForm<K> nxt;
        std::array<int, 4> ix{};
        for (int f = 0; f < AltForm<K>::size; ++f) {
            detail::unflatten<K>(f, ix);
            const int target = ix[slot];
            double s = 0.0;
            for (int j = 0; j < 4; ++j) {
                ix[slot] = j;
                s += cur.c[detail::flatten<K>(ix)] * A(j, target);
            }
            nxt.c[f] = s;
        }
        cur = nxt;
    }
    if (K % 2 == 1) cur *= -1.0;
    return cur;
}

// Linear extension of the 1-form action to any endomorphism: (A alpha) = -alpha o A.
inline Form1 act_linear(const Endo4& A, const Form1& a) { return act_on_form<1>(A, a); }

// Rank overflow (J + K > 4) is rejected at compile time.
template <int J, int K>
AltForm<J + K> wedge(const AltForm<J>& a, const AltForm<K>& b) {
    static_assert(J + K <= 4, "wedge: rank overflow");
    {
        constexpr int N = J + K;
        AltForm<N> out;
        const auto& pt = detail::perms(N);
        const double norm = 1.0 / (detail::factorial(J) * detail::factorial(K));
        std::array<int, 4> ix{}, ia{}, ib{};
        for (int f = 0; f < AltForm<N>::size; ++f) {
            detail::unflatten<N>(f, ix);
            bool repeated = false;
            for (int i = 0; i < N && !repeated; ++i)
                for (int j = i + 1; j < N; ++j)
                    if (ix[i] == ix[j]) {
                        repeated = true;
                        break;
                    }
            if (repeated) continue;
            double s = 0.0;
            for (int q = 0; q < pt.count; ++q) {
                const auto& pm = pt.perm[q];
                for (int i = 0; i < J; ++i) ia[i] = ix[pm[i]];
                for (int i = 0; i < K; ++i) ib[i] = ix[pm[J + i]];
                s += pt.sign[q] * a.c[detail::flatten<J>(ia)] * b.c[detail::flatten<K>(ib)];
            }
            out.c[f] = s * norm;
        }
        return out;
    }
}

template <int K>
AltForm<K - 1> interior(const Vec4& X, const AltForm<K>& a) {
    static_assert(K >= 1, "interior product needs a form of positive rank");
    AltForm<K - 1> out;
    constexpr int stride = AltForm<K - 1>::size;
    for (int f = 0; f < stride; ++f) {
        double s = 0.0;
        for (int i = 0; i < 4; ++i) s += X(i) * a.c[i * stride + f];
        out.c[f] = s;
    }
    return out;
}

// Coefficient of F^2/2 against dx1^dy1^dx2^dy2, i.e. the Pfaffian of F.
inline double top_density(const Form2& F) {
    return F(0, 1) * F(2, 3) - F(0, 2) * F(1, 3) + F(0, 3) * F(1, 2);
}

// Basis covector dx^i as a 1-form.
inline Form1 basis1(int i) {
    Form1 e;
    e.c[i] = 1.0;
    return e;
}

// Norm squared of a k-form with indices raised by g^{-1}, normalized so that an
// orthonormal coframe wedge has unit norm.
template <int K>
double form_norm2(const Metric4& ginv, const AltForm<K>& a) {
    // Raise all indices then contract, dividing by k!.
    AltForm<K> up = a;
    for (int slot = 0; slot < K; ++slot) {
        AltForm<K> nxt;
        std::array<int, 4> ix{};
        for (int f = 0; f < AltForm<K>::size; ++f) {
            detail::unflatten<K>(f, ix);
            const int target = ix[slot];
            double s = 0.0;
            for (int j = 0; j < 4; ++j) {
                ix[slot] = j;
                s += ginv(target, j) * up.c[detail::flatten<K>(ix)];
            }
            nxt.c[f] = s;
        }
        up = nxt;
    }
    double s = 0.0;
    for (int f = 0; f < AltForm<K>::size; ++f) s += up.c[f] * a.c[f];
    return s / detail::factorial(K);
}

// Coordinate expression of dw1 and dw2 as complex covectors.
inline CVec4 dw1() { return CVec4(1.0, std::complex<double>(0, 1), 0.0, 0.0); }
inline CVec4 dw2() { return CVec4(0.0, 0.0, 1.0, std::complex<double>(0, 1)); }

}  // namespace gklab
