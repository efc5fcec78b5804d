#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace pdsde {

// Small dense d-vector. d is tiny (1 or 2 in practice), so std::vector is fine.
using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm2(const double* a, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += a[i] * a[i];
    return std::sqrt(s);
}

// Row-major square matrix with cached inverse and Hilbert-Schmidt norms.
class Mat {
public:
    Mat() : d_(0) {}
    Mat(int d, std::vector<double> entries) : d_(d), a_(std::move(entries)) {
        if (static_cast<int>(a_.size()) != d * d)
            throw std::invalid_argument("Mat: entry count does not match dimension");
    }

    static Mat identity(int d) {
        std::vector<double> e(static_cast<std::size_t>(d) * d, 0.0);
        for (int i = 0; i < d; ++i) e[static_cast<std::size_t>(i) * d + i] = 1.0;
        return Mat(d, std::move(e));
    }

    static Mat scaled_identity(int d, double s) {
        Mat m = identity(d);
        for (int i = 0; i < d; ++i) m.a_[static_cast<std::size_t>(i) * d + i] = s;
        return m;
    }

    int dim() const { return d_; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * d_ + j]; }
    double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * d_ + j]; }

    Vec apply(const Vec& x) const {
        Vec y(d_, 0.0);
        for (int i = 0; i < d_; ++i)
            for (int j = 0; j < d_; ++j) y[i] += (*this)(i, j) * x[j];
        return y;
    }

    void apply_inplace(const double* x, double* y) const {
        for (int i = 0; i < d_; ++i) {
            double s = 0.0;
            for (int j = 0; j < d_; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
    }

    double hs_norm() const {
        double s = 0.0;
        for (double v : a_) s += v * v;
        return std::sqrt(s);
    }

    // Gauss-Jordan with partial pivoting; throws on a singular matrix.
    Mat inverse() const {
        int n = d_;
        std::vector<double> aug(static_cast<std::size_t>(n) * 2 * n, 0.0);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) aug[static_cast<std::size_t>(i) * 2 * n + j] = (*this)(i, j);
            aug[static_cast<std::size_t>(i) * 2 * n + n + i] = 1.0;
        }
        for (int col = 0; col < n; ++col) {
            int piv = col;
            for (int r = col + 1; r < n; ++r)
                if (std::fabs(aug[static_cast<std::size_t>(r) * 2 * n + col]) >
                    std::fabs(aug[static_cast<std::size_t>(piv) * 2 * n + col]))
                    piv = r;
            double p = aug[static_cast<std::size_t>(piv) * 2 * n + col];
            if (std::fabs(p) < 1e-14) throw std::invalid_argument("Mat::inverse: singular matrix");
            if (piv != col)
                for (int j = 0; j < 2 * n; ++j)
                    std::swap(aug[static_cast<std::size_t>(piv) * 2 * n + j],
                              aug[static_cast<std::size_t>(col) * 2 * n + j]);
            for (int j = 0; j < 2 * n; ++j) aug[static_cast<std::size_t>(col) * 2 * n + j] /= p;
            for (int r = 0; r < n; ++r) {
                if (r == col) continue;
                double f = aug[static_cast<std::size_t>(r) * 2 * n + col];
                if (f == 0.0) continue;
                for (int j = 0; j < 2 * n; ++j)
                    aug[static_cast<std::size_t>(r) * 2 * n + j] -=
                        f * aug[static_cast<std::size_t>(col) * 2 * n + j];
            }
        }
        std::vector<double> inv(static_cast<std::size_t>(n) * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) inv[static_cast<std::size_t>(i) * n + j] =
                aug[static_cast<std::size_t>(i) * 2 * n + n + j];
        return Mat(n, std::move(inv));
    }

    Mat multiply(const Mat& o) const {
        Mat r(d_, std::vector<double>(static_cast<std::size_t>(d_) * d_, 0.0));
        for (int i = 0; i < d_; ++i)
            for (int k = 0; k < d_; ++k)
                for (int j = 0; j < d_; ++j) r(i, j) += (*this)(i, k) * o(k, j);
        return r;
    }

    Mat transpose() const {
        Mat r(d_, std::vector<double>(static_cast<std::size_t>(d_) * d_, 0.0));
        for (int i = 0; i < d_; ++i)
            for (int j = 0; j < d_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    const std::vector<double>& data() const { return a_; }

private:
    int d_;
    std::vector<double> a_;
};

}  // namespace pdsde
