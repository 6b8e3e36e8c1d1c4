// calculus.hpp - exterior, Lie and Riemannian calculus reduced to d/dt
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "gklab/field.hpp"

namespace gklab {

// ---------------------------------------------------------------------------
// Partial derivatives and exterior calculus

template <class T>
ReducedField<T> partial(const ReducedField<T>& f, int axis) {
    if (axis < 0 || axis > 3) throw std::out_of_range("partial: axis must be 0..3");
    return f.c()(axis) * ddt(f);
}

inline ReducedField<Form1> exterior_d(const ScalarField& f) {
    const ScalarField df = ddt(f);
    const Vec4 c = f.c();
    return map(df, [&](double x) { return as_form(x * c); });
}

// d alpha = dt ^ alpha' because every component depends on t alone.
template <int K>
ReducedField<AltForm<K + 1>> exterior_d(const ReducedField<AltForm<K>>& a) {
    const auto da = ddt(a);
    const Form1 dt = a.dom->frame.dt();
    return map(da, [&](const AltForm<K>& x) { return wedge(dt, x); });
}

// d^c_I = I o d with the (-1)^k pullback action on forms.
inline ReducedField<Form1> d_c(const EndoField& I, const ScalarField& f) {
    return zip(I, exterior_d(f), [](const Mat4& A, const Form1& x) { return act_on_form(A, x); });
}

template <int K>
ReducedField<AltForm<K + 1>> d_c(const EndoField& I, const ReducedField<AltForm<K>>& a) {
    return zip(I, exterior_d(a),
               [](const Mat4& A, const AltForm<K + 1>& x) { return act_on_form(A, x); });
}

template <int K>
ReducedField<AltForm<K - 1>> interior(const VectorField& X, const ReducedField<AltForm<K>>& a) {
    return zip(X, a, [](const Vec4& x, const AltForm<K>& y) { return interior(x, y); });
}

template <int J, int K>
ReducedField<AltForm<J + K>> wedge(const ReducedField<AltForm<J>>& a,
                                   const ReducedField<AltForm<K>>& b) {
    return zip(a, b, [](const AltForm<J>& x, const AltForm<K>& y) { return wedge(x, y); });
}

template <int K>
ReducedField<AltForm<K>> act_on_form(const EndoField& I, const ReducedField<AltForm<K>>& a) {
    return zip(I, a, [](const Mat4& A, const AltForm<K>& x) { return act_on_form(A, x); });
}

// ---------------------------------------------------------------------------
// Lie derivatives. With X = X(t), the Jacobian is dX = X' c^T and X^k d_k = (X.c) d/dt.

inline ScalarField lie_derivative(const VectorField& X, const ScalarField& f) {
    const ScalarField df = ddt(f);
    return zip(X, df, [c = f.c()](const Vec4& x, double d) { return x.dot(c) * d; });
}

inline VectorField lie_derivative(const VectorField& X, const VectorField& Y) {
    const VectorField dX = ddt(X), dY = ddt(Y);
    const Vec4 c = X.c();
    VectorField out(X.dom);
    for (int i = 0; i < X.size(); ++i)
        out.v[i] = X.v[i].dot(c) * dY.v[i] - Y.v[i].dot(c) * dX.v[i];
    return out;
}

// Matrix-valued fields: the variance is read from `kind`. "endo" is a (1,1)
// tensor, "sym2"/"cov2" a covariant 2-tensor.
inline EndoField lie_derivative(const VectorField& X, const EndoField& T) {
    require_same_domain(X.dom, T.dom);
    const VectorField dX = ddt(X);
    const EndoField dT = ddt(T);
    const Vec4 c = X.c();
    EndoField out(T.dom, T.kind);
    const bool endo = T.kind == "endo";
    if (!endo && T.kind != "sym2" && T.kind != "cov2")
        throw std::invalid_argument("lie_derivative: unsupported matrix field kind '" + T.kind + "'");
    for (int i = 0; i < T.size(); ++i) {
        const Mat4 J = dX.v[i] * c.transpose();
        const double s = X.v[i].dot(c);
        if (endo)
            out.v[i] = s * dT.v[i] - J * T.v[i] + T.v[i] * J;
        else
            out.v[i] = s * dT.v[i] + J.transpose() * T.v[i] + T.v[i] * J;
    }
    return out;
}

inline ReducedField<Bivector> lie_derivative(const VectorField& X, const ReducedField<Bivector>& B) {
    const VectorField dX = ddt(X);
    const auto dB = ddt(B);
    const Vec4 c = X.c();
    ReducedField<Bivector> out(B.dom);
    for (int i = 0; i < B.size(); ++i) {
        const Mat4 J = dX.v[i] * c.transpose();
        out.v[i].c = X.v[i].dot(c) * dB.v[i].c - J * B.v[i].c - B.v[i].c * J.transpose();
    }
    return out;
}

template <int K>
ReducedField<AltForm<K>> lie_derivative(const VectorField& X, const ReducedField<AltForm<K>>& a) {
    const VectorField dX = ddt(X);
    const auto da = ddt(a);
    const Vec4 c = X.c();
    ReducedField<AltForm<K>> out(a.dom);
    for (int i = 0; i < a.size(); ++i) {
        const Mat4 J = dX.v[i] * c.transpose();
        AltForm<K> r = X.v[i].dot(c) * da.v[i];
        std::array<int, 4> ix{};
        for (int f = 0; f < AltForm<K>::size; ++f) {
            detail::unflatten<K>(f, ix);
            double s = 0.0;
            for (int slot = 0; slot < K; ++slot) {
                const int keep = ix[slot];
                for (int k = 0; k < 4; ++k) {
                    ix[slot] = k;
                    s += a.v[i].c[detail::flatten<K>(ix)] * J(k, keep);
                }
                ix[slot] = keep;
            }
            r.c[f] += s;
        }
        out.v[i] = r;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Nijenhuis tensor N^i_{jk} of N(X,Y) = [JX,JY] - J[JX,Y] - J[X,JY] - [X,Y].

inline ReducedField<Tensor3> nijenhuis(const EndoField& J) {
    const EndoField dJ = ddt(J);
    const Vec4 c = J.c();
    ReducedField<Tensor3> out(J.dom);
    for (int n = 0; n < J.size(); ++n) {
        const Mat4& A = J.v[n];
        const Mat4& dA = dJ.v[n];
        const Eigen::RowVector4d s = c.transpose() * A;
        Tensor3 N;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                for (int k = 0; k < 4; ++k) {
                    double v = s(j) * dA(i, k) - s(k) * dA(i, j);
                    for (int m = 0; m < 4; ++m) v -= A(i, m) * (c(j) * dA(m, k) - c(k) * dA(m, j));
                    N(i, j, k) = v;
                }
        out.v[n] = N;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Riemannian calculus of a reduced metric

inline std::vector<Mat4> inverse_metric(const EndoField& g) {
    std::vector<Mat4> ginv(g.size());
    for (int i = 0; i < g.size(); ++i) {
        Eigen::LLT<Mat4> llt(g.v[i]);
        if (llt.info() != Eigen::Success)
            throw DegenerateMetric("metric is not positive definite at t = " +
                                   std::to_string(g.grid().t(i)));
        ginv[i] = llt.solve(Mat4::Identity());
    }
    return ginv;
}

// Christoffel symbols Gamma(k, i, j) = Gamma^k_{ij}.
inline ReducedField<Tensor3> levi_civita(const EndoField& g) {
    const auto ginv = inverse_metric(g);
    const EndoField dg = ddt(g);
    const Vec4 c = g.c();
    ReducedField<Tensor3> out(g.dom);
    for (int n = 0; n < g.size(); ++n) {
        Tensor3 low;  // Gamma_{l i j}
        for (int l = 0; l < 4; ++l)
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    low(l, i, j) =
                        0.5 * (c(i) * dg.v[n](l, j) + c(j) * dg.v[n](l, i) - c(l) * dg.v[n](i, j));
        Tensor3 G;
        for (int k = 0; k < 4; ++k)
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    double s = 0.0;
                    for (int l = 0; l < 4; ++l) s += ginv[n](k, l) * low(l, i, j);
                    G(k, i, j) = s;
                }
        out.v[n] = G;
    }
    return out;
}

inline EndoField ricci(const EndoField& g) {
    const auto G = levi_civita(g);
    const auto dG = ddt(G);
    const Vec4 c = g.c();
    EndoField out(g.dom, "sym2");
    for (int n = 0; n < g.size(); ++n) {
        const Tensor3& Gm = G.v[n];
        const Tensor3& dGm = dG.v[n];
        Mat4 R = Mat4::Zero();
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                double s = 0.0;
                for (int k = 0; k < 4; ++k) {
                    s += c(k) * dGm(k, i, j) - c(j) * dGm(k, i, k);
                    for (int l = 0; l < 4; ++l)
                        s += Gm(k, k, l) * Gm(l, i, j) - Gm(k, j, l) * Gm(l, i, k);
                }
                R(i, j) = s;
            }
        out.v[n] = R;
    }
    return out;
}

inline EndoField hessian(const EndoField& g, const ScalarField& f) {
    const auto G = levi_civita(g);
    const ScalarField df = ddt(f);
    const ScalarField d2f = ddt(df);
    const Vec4 c = g.c();
    EndoField out(g.dom, "sym2");
    for (int n = 0; n < g.size(); ++n) {
        Mat4 Hs = d2f.v[n] * c * c.transpose();
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                double s = 0.0;
                for (int k = 0; k < 4; ++k) s += G.v[n](k, i, j) * c(k);
                Hs(i, j) -= s * df.v[n];
            }
        out.v[n] = Hs;
    }
    return out;
}

// (H^2)_{jk} = H_{jpq} H_k^{pq}.
inline EndoField h_squared(const EndoField& g, const ReducedField<Form3>& H) {
    require_same_domain(g.dom, H.dom);
    const auto ginv = inverse_metric(g);
    EndoField out(g.dom, "sym2");
    for (int n = 0; n < g.size(); ++n) {
        const Mat4& gi = ginv[n];
        const Form3& h = H.v[n];
        Mat4 out_n = Mat4::Zero();
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) {
                double s = 0.0;
                for (int p = 0; p < 4; ++p)
                    for (int q = 0; q < 4; ++q) {
                        if (h(j, p, q) == 0.0) continue;
                        double r = 0.0;
                        for (int a = 0; a < 4; ++a)
                            for (int b = 0; b < 4; ++b) r += gi(p, a) * gi(q, b) * h(k, a, b);
                        s += h(j, p, q) * r;
                    }
                out_n(j, k) = s;
            }
        out.v[n] = out_n;
    }
    return out;
}

namespace detail {

template <int K>
AltForm<K> transform_all_slots(const Mat4& M, const AltForm<K>& a) {
    // out_{i..} = M(i, j) ... a_{j..} on every slot.
    AltForm<K> cur = a;
    for (int slot = 0; slot < K; ++slot) {
        AltForm<K> nxt;
        std::array<int, 4> ix{};
        for (int f = 0; f < AltForm<K>::size; ++f) {
            unflatten<K>(f, ix);
            const int target = ix[slot];
            double s = 0.0;
            for (int j = 0; j < 4; ++j) {
                ix[slot] = j;
                s += M(target, j) * cur.c[flatten<K>(ix)];
            }
            nxt.c[f] = s;
        }
        cur = nxt;
    }
    return cur;
}

}  // namespace detail

// d* alpha = -(1/sqrt g) g.. d_i(sqrt g alpha^{i ..}), the formal adjoint of d.
template <int K>
ReducedField<AltForm<K - 1>> codifferential(const EndoField& g, const ReducedField<AltForm<K>>& a) {
    static_assert(K >= 1);
    require_same_domain(g.dom, a.dom);
    const auto ginv = inverse_metric(g);
    ReducedField<AltForm<K>> up(a.dom);
    std::vector<double> vol(g.size());
    for (int n = 0; n < g.size(); ++n) {
        vol[n] = std::sqrt(g.v[n].determinant());
        up.v[n] = vol[n] * detail::transform_all_slots(ginv[n], a.v[n]);
    }
    const auto dup = ddt(up);
    const Vec4 c = g.c();
    ReducedField<AltForm<K - 1>> out(a.dom);
    for (int n = 0; n < g.size(); ++n) {
        AltForm<K - 1> div = interior(c, dup.v[n]);
        div *= -1.0 / vol[n];
        out.v[n] = detail::transform_all_slots(g.v[n], div);
    }
    return out;
}

// Integral over the compact quotient of a G-invariant density h(t) dx1 dy1 dx2 dy2.
inline double integrate_M(const ScalarField& h) {
    for (double x : h.v)
        if (std::isnan(x)) throw std::domain_error("integrate_M: density contains NaN");
    return h.dom->c_deck * h.grid().integrate(h.v);
}

inline ScalarField volume_density(const EndoField& g) {
    return map(g, [](const Mat4& m) { return std::sqrt(m.determinant()); });
}

}  // namespace gklab
