// grid.hpp - discretisation of the invariant variable t: nodes, d/dt, quadrature
#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace gklab {

enum class Scheme { UniformCentral4, ChebyshevMapped };

inline std::string scheme_name(Scheme s) {
    return s == Scheme::UniformCentral4 ? "uniform-central-4th" : "chebyshev-mapped";
}

inline Scheme scheme_from_name(const std::string& s) {
    if (s == "uniform-central-4th" || s == "uniform") return Scheme::UniformCentral4;
    if (s == "chebyshev-mapped" || s == "chebyshev") return Scheme::ChebyshevMapped;
    throw std::invalid_argument("unknown grid scheme '" + s + "'");
}

struct GridSpec {
    double t_max = 20.0;
    int n = 2048;
    Scheme scheme = Scheme::UniformCentral4;
    // Length scale L of the map u = tanh(t/L); 0 selects t_max/4.
    double map_scale = 0.0;

    void validate() const {
        if (!(n >= 32)) throw std::invalid_argument("grid: n must be at least 32");
        if (!(t_max > 0.0) || !std::isfinite(t_max))
            throw std::invalid_argument("grid: t_max must be positive");
        if (map_scale < 0.0) throw std::invalid_argument("grid: map_scale must be >= 0");
    }
};

class Grid {
public:
    explicit Grid(GridSpec spec) : spec_(spec), anti_(std::make_shared<AntiCache>()) {
        spec_.validate();
        if (spec_.scheme == Scheme::UniformCentral4)
            build_uniform();
        else
            build_chebyshev();
    }

    const GridSpec& spec() const { return spec_; }
    int size() const { return spec_.n; }
    const std::vector<double>& t() const { return t_; }
    double t(int i) const { return t_[i]; }
    const std::vector<double>& weights() const { return w_; }

    // Samples excluded from interior sup-norms at each end (outermost 2%).
    int margin() const { return static_cast<int>(std::ceil(0.02 * spec_.n)); }
    int interior_begin() const { return margin(); }
    int interior_end() const { return spec_.n - margin(); }

    // out[i*os] = (d/dt in)[i*is] for i in [0, n).
    void derivative(const double* in, std::ptrdiff_t is, double* out, std::ptrdiff_t os) const {
        const int n = spec_.n;
        if (spec_.scheme == Scheme::UniformCentral4) {
            const double s = 1.0 / (12.0 * h_);
            auto f = [&](int i) { return in[i * is]; };
            out[0] = s * (-25 * f(0) + 48 * f(1) - 36 * f(2) + 16 * f(3) - 3 * f(4));
            out[os] = s * (-3 * f(0) - 10 * f(1) + 18 * f(2) - 6 * f(3) + f(4));
            for (int i = 2; i < n - 2; ++i)
                out[i * os] = s * (f(i - 2) - 8 * f(i - 1) + 8 * f(i + 1) - f(i + 2));
            out[(n - 2) * os] =
                s * (3 * f(n - 1) + 10 * f(n - 2) - 18 * f(n - 3) + 6 * f(n - 4) - f(n - 5));
            out[(n - 1) * os] = s * (25 * f(n - 1) - 48 * f(n - 2) + 36 * f(n - 3) -
                                     16 * f(n - 4) + 3 * f(n - 5));
        } else {
            Eigen::VectorXd v(n);
            for (int i = 0; i < n; ++i) v(i) = in[i * is];
            Eigen::VectorXd d = dense_d_ * v;
            for (int i = 0; i < n; ++i) out[i * os] = d(i);
        }
    }

    // Differentiates m interleaved components: sample i of component k lives at
    // data[i*m + k] (a column-major m x n block).
    void derivative_block(const double* in, int m, double* out) const {
        if (spec_.scheme == Scheme::UniformCentral4) {
            for (int k = 0; k < m; ++k) derivative(in + k, m, out + k, m);
            return;
        }
        const int n = spec_.n;
        Eigen::Map<const Eigen::MatrixXd> X(in, m, n);
        Eigen::Map<Eigen::MatrixXd> Y(out, m, n);
        Y.noalias() = X * dense_d_.transpose();
    }

    std::vector<double> derivative(const std::vector<double>& f) const {
        std::vector<double> out(f.size());
        derivative(f.data(), 1, out.data(), 1);
        return out;
    }

    // The derivative operator as a sparse matrix (dense pattern on mapped grids).
    Eigen::SparseMatrix<double> derivative_matrix() const {
        const int n = spec_.n;
        if (spec_.scheme == Scheme::ChebyshevMapped) return dense_d_.sparseView();
        std::vector<Eigen::Triplet<double>> trip;
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n), col(n);
        for (int j = 0; j < n; ++j) {
            e(j) = 1.0;
            derivative(e.data(), 1, col.data(), 1);
            e(j) = 0.0;
            for (int i = 0; i < n; ++i)
                if (col(i) != 0.0) trip.emplace_back(i, j, col(i));
        }
        Eigen::SparseMatrix<double> D(n, n);
        D.setFromTriplets(trip.begin(), trip.end());
        return D;
    }

    // Column indices j with D(i, j) != 0.
    std::pair<int, int> stencil_range(int i) const {
        const int n = spec_.n;
        if (spec_.scheme == Scheme::ChebyshevMapped) return {0, n - 1};
        if (i < 2) return {0, 4};
        if (i >= n - 2) return {n - 5, n - 1};
        return {i - 2, i + 2};
    }

    double integrate(const std::vector<double>& f) const {
        double s = 0.0;
        for (int i = 0; i < spec_.n; ++i) s += w_[i] * f[i];
        return s;
    }

    // F with D F = f on rows [0, n-1) and F = 0 at the node nearest `t_anchor`;
    // the discrete inverse of the grid derivative.
    std::vector<double> antiderivative(const std::vector<double>& f, double t_anchor = 0.0) const {
        const int n = spec_.n;
        const int anchor = nearest(t_anchor);
        std::call_once(anti_->once, [this] { prepare_antiderivative(); });
        Eigen::VectorXd rhs(n);
        for (int i = 0; i < n - 1; ++i) rhs(i) = f[i];
        rhs(n - 1) = 0.0;
        Eigen::VectorXd F = anti_->lu.solve(rhs);
        std::vector<double> out(n);
        for (int i = 0; i < n; ++i) out[i] = F(i) - F(anchor);
        return out;
    }

    int nearest(double tq) const {
        int best = 0;
        for (int i = 1; i < spec_.n; ++i)
            if (std::abs(t_[i] - tq) < std::abs(t_[best] - tq)) best = i;
        return best;
    }

    // Value at an arbitrary t by local 4-point Lagrange interpolation.
    double interpolate(const std::vector<double>& f, double tq) const {
        const int n = spec_.n;
        int hi = static_cast<int>(std::lower_bound(t_.begin(), t_.end(), tq) - t_.begin());
        int lo = std::clamp(hi - 2, 0, n - 4);
        double s = 0.0;
        for (int j = lo; j < lo + 4; ++j) {
            double l = 1.0;
            for (int m = lo; m < lo + 4; ++m)
                if (m != j) l *= (tq - t_[m]) / (t_[j] - t_[m]);
            s += l * f[j];
        }
        return s;
    }

    // Interpolation weights used by `interpolate`, for building linear constraints.
    std::vector<std::pair<int, double>> interpolation_weights(double tq) const {
        const int n = spec_.n;
        int hi = static_cast<int>(std::lower_bound(t_.begin(), t_.end(), tq) - t_.begin());
        int lo = std::clamp(hi - 2, 0, n - 4);
        std::vector<std::pair<int, double>> out;
        for (int j = lo; j < lo + 4; ++j) {
            double l = 1.0;
            for (int m = lo; m < lo + 4; ++m)
                if (m != j) l *= (tq - t_[m]) / (t_[j] - t_[m]);
            out.emplace_back(j, l);
        }
        return out;
    }

    double h() const { return h_; }

private:
    void build_uniform() {
        const int n = spec_.n;
        h_ = 2.0 * spec_.t_max / (n - 1);
        t_.resize(n);
        for (int i = 0; i < n; ++i) t_[i] = -spec_.t_max + i * h_;
        // Composite Simpson; with an odd interval count the last three intervals
        // use the 3/8 rule.
        w_.assign(n, 0.0);
        const int intervals = n - 1;
        int simpson_end = intervals % 2 == 0 ? intervals : intervals - 3;
        for (int i = 0; i < simpson_end; i += 2) {
            w_[i] += h_ / 3.0;
            w_[i + 1] += 4.0 * h_ / 3.0;
            w_[i + 2] += h_ / 3.0;
        }
        if (simpson_end != intervals) {
            const int k = simpson_end;
            w_[k] += 3.0 * h_ / 8.0;
            w_[k + 1] += 9.0 * h_ / 8.0;
            w_[k + 2] += 9.0 * h_ / 8.0;
            w_[k + 3] += 3.0 * h_ / 8.0;
        }
    }

    void build_chebyshev() {
        const int n = spec_.n;
        const int N = n - 1;
        const double L = spec_.map_scale > 0.0 ? spec_.map_scale : spec_.t_max / 4.0;
        const double umax = std::tanh(spec_.t_max / L);
        const double pi = std::numbers::pi;
        std::vector<double> xi(n);
        for (int j = 0; j < n; ++j) xi[j] = -std::cos(pi * j / N);
        t_.resize(n);
        std::vector<double> dtdxi(n);
        for (int j = 0; j < n; ++j) {
            const double u = umax * xi[j];
            t_[j] = L * std::atanh(u);
            dtdxi[j] = L * umax / (1.0 - u * u);
        }
        t_.front() = -spec_.t_max;
        t_.back() = spec_.t_max;
        // Chebyshev differentiation matrix on the increasing nodes xi.
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
        auto cw = [&](int j) { return (j == 0 || j == N) ? 2.0 : 1.0; };
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) {
                    const double sgn = ((i + j) % 2 == 0) ? 1.0 : -1.0;
                    D(i, j) = (cw(i) / cw(j)) * sgn / (xi[i] - xi[j]);
                }
        for (int i = 0; i < n; ++i) D(i, i) = -D.row(i).sum();
        dense_d_.resize(n, n);
        for (int i = 0; i < n; ++i) dense_d_.row(i) = D.row(i) / dtdxi[i];
        // Clenshaw-Curtis weights on xi, mapped to t.
        w_.assign(n, 0.0);
        for (int j = 0; j < n; ++j) {
            const double theta = pi * j / N;
            double s = 1.0;
            const int kmax = N / 2;
            for (int k = 1; k <= kmax; ++k) {
                double b = (2 * k == N) ? 1.0 : 2.0;
                s -= b * std::cos(2.0 * k * theta) / (4.0 * k * k - 1.0);
            }
            double wj = 2.0 * s / N;
            if (j == 0 || j == N) wj *= 0.5;
            w_[j] = wj * dtdxi[j];
        }
        h_ = 0.0;
    }

    void prepare_antiderivative() const {
        const int n = spec_.n;
        Eigen::SparseMatrix<double> D = derivative_matrix();
        std::vector<Eigen::Triplet<double>> trip;
        for (int k = 0; k < D.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(D, k); it; ++it)
                if (it.row() < n - 1) trip.emplace_back(it.row(), it.col(), it.value());
        trip.emplace_back(n - 1, n / 2, 1.0);
        Eigen::SparseMatrix<double> A(n, n);
        A.setFromTriplets(trip.begin(), trip.end());
        A.makeCompressed();
        anti_->lu.compute(A);
        if (anti_->lu.info() != Eigen::Success)
            throw std::runtime_error("grid: antiderivative system is singular");
    }

    struct AntiCache {
        std::once_flag once;
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    };

    GridSpec spec_;
    std::vector<double> t_, w_;
    double h_ = 0.0;
    Eigen::MatrixXd dense_d_;
    std::shared_ptr<AntiCache> anti_;
};

}  // namespace gklab
