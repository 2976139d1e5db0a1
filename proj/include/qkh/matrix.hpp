#pragma once

#include <vector>

#include "qkh/error.hpp"
#include "qkh/rational.hpp"
#include "qkh/series.hpp"

namespace qkh {

// Dense matrix over an arbitrary ring element type.
template <class T>
class Mat {
public:
    Mat() : rows_(0), cols_(0) {}
    Mat(int rows, int cols, const T& fill = T())
        : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, fill) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    T& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
    const T& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

    friend Mat operator+(const Mat& x, const Mat& y) {
        Mat r(x.rows_, x.cols_, x.a_[0]);
        for (std::size_t k = 0; k < x.a_.size(); ++k) r.a_[k] = x.a_[k] + y.a_[k];
        return r;
    }
    friend Mat operator-(const Mat& x, const Mat& y) {
        Mat r(x.rows_, x.cols_, x.a_[0]);
        for (std::size_t k = 0; k < x.a_.size(); ++k) r.a_[k] = x.a_[k] - y.a_[k];
        return r;
    }
    friend Mat operator*(const Mat& x, const Mat& y) {
        if (x.cols_ != y.rows_) throw arity_mismatch("matrix product shapes");
        Mat r(x.rows_, y.cols_);
        for (int i = 0; i < x.rows_; ++i)
            for (int j = 0; j < y.cols_; ++j) {
                T acc = x(i, 0) * y(0, j);
                for (int k = 1; k < x.cols_; ++k) acc += x(i, k) * y(k, j);
                r(i, j) = acc;
            }
        return r;
    }
    template <class S>
    Mat scaled(const S& c) const {
        Mat r(*this);
        for (auto& e : r.a_) e = e * c;
        return r;
    }
    Mat transposed() const {
        Mat r(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }
    bool operator==(const Mat& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
    }
    bool operator!=(const Mat& o) const { return !(*this == o); }

private:
    int rows_, cols_;
    std::vector<T> a_;
};

template <class T>
Mat<T> operator*(const Mat<T>& m, const Rat& c) { return m.scaled(c); }
template <class T>
Mat<T> operator*(const Rat& c, const Mat<T>& m) { return m.scaled(c); }
inline Mat<TruncSeries> operator*(const Mat<TruncSeries>& m, const TruncSeries& c) { return m.scaled(c); }
inline Mat<TruncSeries> operator*(const TruncSeries& c, const Mat<TruncSeries>& m) { return m.scaled(c); }

using RatMat = Mat<Rat>;
using SeriesMat = Mat<TruncSeries>;

inline RatMat rat_identity(int n) {
    RatMat m(n, n, Rat(0));
    for (int i = 0; i < n; ++i) m(i, i) = 1;
    return m;
}

// Exact Gauss-Jordan inverse; throws if singular.
inline RatMat rat_inverse(RatMat m) {
    int n = m.rows();
    RatMat inv = rat_identity(n);
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int i = col; i < n; ++i)
            if (m(i, col) != 0) { piv = i; break; }
        if (piv < 0) throw not_a_unit("singular rational matrix");
        if (piv != col)
            for (int j = 0; j < n; ++j) {
                std::swap(m(piv, j), m(col, j));
                std::swap(inv(piv, j), inv(col, j));
            }
        Rat d = m(col, col);
        for (int j = 0; j < n; ++j) {
            m(col, j) /= d;
            inv(col, j) /= d;
        }
        for (int i = 0; i < n; ++i) {
            if (i == col || m(i, col) == 0) continue;
            Rat f = m(i, col);
            for (int j = 0; j < n; ++j) {
                m(i, j) -= f * m(col, j);
                inv(i, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

inline SeriesMat series_mat(const RatMat& m, int nq, int nv, int capq, int capv) {
    SeriesMat r(m.rows(), m.cols(), TruncSeries(nq, nv, capq, capv));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            r(i, j) = TruncSeries::constant(m(i, j), nq, nv, capq, capv);
    return r;
}

inline SeriesMat series_identity(int n, int nq, int nv, int capq, int capv) {
    return series_mat(rat_identity(n), nq, nv, capq, capv);
}

inline RatMat constant_part(const SeriesMat& m) {
    RatMat r(m.rows(), m.cols(), Rat(0));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) r(i, j) = m(i, j).constant_term();
    return r;
}

// Inverse of a square series matrix whose constant part is invertible:
// exact inverse of the constant part, then a terminating Neumann series
// in the (Novikov + coordinate)-positive remainder.
inline SeriesMat series_mat_inverse(const SeriesMat& m) {
    int n = m.rows();
    if (n == 0) return m;
    const TruncSeries& proto = m(0, 0);
    int nq = proto.nq(), nv = proto.nv(), capq = proto.capq(), capv = proto.capv();
    RatMat m0inv = rat_inverse(constant_part(m));
    SeriesMat b = series_mat(m0inv, nq, nv, capq, capv);
    SeriesMat rem = b * m - series_identity(n, nq, nv, capq, capv); // valuation >= 1
    SeriesMat acc = series_identity(n, nq, nv, capq, capv);
    SeriesMat pw = acc;
    for (int k = 1; k <= capq + capv; ++k) {
        pw = pw * rem;
        bool zero = true;
        for (int i = 0; i < n && zero; ++i)
            for (int j = 0; j < n && zero; ++j)
                if (!pw(i, j).is_zero()) zero = false;
        if (zero) break;
        if (k % 2 == 1) acc = acc - pw;
        else acc = acc + pw;
    }
    return acc * b;
}

inline bool mat_is_zero(const SeriesMat& m) {
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            if (!m(i, j).is_zero()) return false;
    return true;
}

// Drops monomials of total degree > d in every entry.
inline SeriesMat mat_truncated_total(const SeriesMat& m, int d) {
    SeriesMat r = m;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) r(i, j) = m(i, j).truncated_total(d);
    return r;
}

} // namespace qkh
