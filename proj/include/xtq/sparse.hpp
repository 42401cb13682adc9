#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <tuple>
#include <vector>

namespace xtq {

/// Compressed sparse row matrix of nonnegative probabilities.
class SparseMatrix {
public:
    SparseMatrix() = default;

    explicit SparseMatrix(int n) : n_(n), row_ptr_(static_cast<std::size_t>(n) + 1, 0) {}

    /// Builds from (row, col, value) triplets; duplicates are summed.
    static SparseMatrix from_triplets(int n, std::vector<std::tuple<int, int, double>> triplets) {
        std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
            return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
        });
        SparseMatrix m(n);
        for (const auto& [r, c, v] : triplets) {
            assert(r >= 0 && r < n && c >= 0 && c < n);
            if (!m.cols_.empty() && m.last_row_ == r && m.cols_.back() == c) {
                m.vals_.back() += v;
                continue;
            }
            m.cols_.push_back(c);
            m.vals_.push_back(v);
            m.row_ptr_[static_cast<std::size_t>(r) + 1]++;
            m.last_row_ = r;
        }
        for (int r = 0; r < n; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
        return m;
    }

    /// Appends the next row; rows must be pushed in order 0..n-1.
    void push_row(std::span<const int> cols, std::span<const double> vals) {
        assert(cols.size() == vals.size());
        cols_.insert(cols_.end(), cols.begin(), cols.end());
        vals_.insert(vals_.end(), vals.begin(), vals.end());
        row_ptr_[++filled_rows_] = cols_.size();
    }

    int size() const noexcept { return n_; }
    std::size_t nonzeros() const noexcept { return vals_.size(); }

    std::span<const int> row_cols(int r) const {
        return {cols_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
    }
    std::span<const double> row_vals(int r) const {
        return {vals_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
    }
    std::span<double> row_vals(int r) { return {vals_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]}; }

    double at(int r, int c) const {
        auto cs = row_cols(r);
        auto it = std::lower_bound(cs.begin(), cs.end(), c);
        if (it == cs.end() || *it != c) return 0.0;
        return row_vals(r)[static_cast<std::size_t>(it - cs.begin())];
    }

    double row_sum(int r) const {
        double s = 0.0;
        for (double v : row_vals(r)) s += std::abs(v);
        return s;
    }

    /// Max absolute row sum.
    double inf_norm() const {
        double best = 0.0;
        for (int r = 0; r < n_; ++r) best = std::max(best, row_sum(r));
        return best;
    }

    /// out = A * x
    void multiply(std::span<const double> x, std::span<double> out) const {
        assert(static_cast<int>(x.size()) == n_ && static_cast<int>(out.size()) == n_);
        for (int r = 0; r < n_; ++r) {
            double acc = 0.0;
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += vals_[k] * x[cols_[k]];
            out[r] = acc;
        }
    }

    std::vector<double> multiply(std::span<const double> x) const {
        std::vector<double> out(static_cast<std::size_t>(n_));
        multiply(x, out);
        return out;
    }

    std::vector<std::vector<double>> to_dense() const {
        std::vector<std::vector<double>> d(n_, std::vector<double>(n_, 0.0));
        for (int r = 0; r < n_; ++r) {
            auto cs = row_cols(r);
            auto vs = row_vals(r);
            for (std::size_t k = 0; k < cs.size(); ++k) d[r][cs[k]] = vs[k];
        }
        return d;
    }

    friend bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
        return a.n_ == b.n_ && a.row_ptr_ == b.row_ptr_ && a.cols_ == b.cols_ && a.vals_ == b.vals_;
    }

private:
    int n_ = 0;
    int last_row_ = -1;
    int filled_rows_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<int> cols_;
    std::vector<double> vals_;
};

/// ||(A - B) x||_inf computed entrywise over the union of both patterns.
inline double weighted_difference_norm(const SparseMatrix& a, const SparseMatrix& b, std::span<const double> x) {
    std::vector<double> ax = a.multiply(x);
    std::vector<double> bx = b.multiply(x);
    double best = 0.0;
    for (std::size_t i = 0; i < ax.size(); ++i) best = std::max(best, std::abs(ax[i] - bx[i]));
    return best;
}

/// ||A - B||_inf: max over rows of sum |a_ij - b_ij|.
inline double difference_inf_norm(const SparseMatrix& a, const SparseMatrix& b) {
    assert(a.size() == b.size());
    double best = 0.0;
    for (int r = 0; r < a.size(); ++r) {
        auto ac = a.row_cols(r);
        auto av = a.row_vals(r);
        auto bc = b.row_cols(r);
        auto bv = b.row_vals(r);
        std::size_t i = 0;
        std::size_t j = 0;
        double s = 0.0;
        while (i < ac.size() || j < bc.size()) {
            if (j == bc.size() || (i < ac.size() && ac[i] < bc[j])) {
                s += std::abs(av[i++]);
            } else if (i == ac.size() || bc[j] < ac[i]) {
                s += std::abs(bv[j++]);
            } else {
                s += std::abs(av[i++] - bv[j++]);
            }
        }
        best = std::max(best, s);
    }
    return best;
}

inline double inf_norm(std::span<const double> v) {
    double best = 0.0;
    for (double x : v) best = std::max(best, std::abs(x));
    return best;
}

inline double inf_distance(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double best = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) best = std::max(best, std::abs(a[i] - b[i]));
    return best;
}

}  // namespace xtq
