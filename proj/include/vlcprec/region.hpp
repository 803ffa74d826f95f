#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "vlcprec/quantizer.hpp"
#include "vlcprec/rng.hpp"

namespace vlcprec {

/// Axis-aligned box of channel vectors consistent with one user's feedback.
class UncertaintyBox {
public:
    UncertaintyBox() = default;

    UncertaintyBox(Eigen::VectorXd lo, Eigen::VectorXd hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
        if (lo_.size() != hi_.size() || lo_.size() < 1) {
            throw std::invalid_argument("UncertaintyBox: lo/hi size mismatch or empty");
        }
        for (Eigen::Index i = 0; i < lo_.size(); ++i) {
            if (!(lo_[i] >= 0.0) || !(lo_[i] <= hi_[i]) || !std::isfinite(hi_[i])) {
                throw std::invalid_argument("UncertaintyBox: need 0 <= lo <= hi, finite");
            }
        }
    }

    const Eigen::VectorXd& lo() const { return lo_; }
    const Eigen::VectorXd& hi() const { return hi_; }
    int dim() const { return static_cast<int>(lo_.size()); }

    bool contains(const Eigen::VectorXd& h, double tol = 0.0) const {
        if (h.size() != lo_.size()) return false;
        for (Eigen::Index i = 0; i < h.size(); ++i) {
            if (h[i] < lo_[i] - tol || h[i] > hi_[i] + tol) return false;
        }
        return true;
    }

    Eigen::VectorXd midpoint() const { return 0.5 * (lo_ + hi_); }

private:
    Eigen::VectorXd lo_;
    Eigen::VectorXd hi_;
};

/// Vertices of a region, one per column (L x J).
struct VertexSet {
    Eigen::MatrixXd vertices;

    int dim() const { return static_cast<int>(vertices.rows()); }
    int count() const { return static_cast<int>(vertices.cols()); }
    Eigen::VectorXd vertex(int j) const { return vertices.col(j); }

    static VertexSet single(const Eigen::VectorXd& h) {
        VertexSet v;
        v.vertices = h;
        return v;
    }
};

/// Per-component cell bounds. With `zero_floor`, components reported in the
/// lowest cell get lo = 0 so that gains below the range (including exact
/// zeros from links outside the field of view) stay inside the box.
inline UncertaintyBox box_from_quantized(std::span<const std::int64_t> indices, const QuantizerConfig& q,
                                         bool zero_floor = false) {
    q.validate();
    if (indices.empty()) {
        throw std::invalid_argument("box_from_quantized: empty index row");
    }
    const auto n = static_cast<Eigen::Index>(indices.size());
    Eigen::VectorXd lo(n), hi(n);
    for (Eigen::Index l = 0; l < n; ++l) {
        const CellBounds b = cell_bounds_linear(indices[static_cast<std::size_t>(l)], q);
        lo[l] = (zero_floor && indices[static_cast<std::size_t>(l)] == 0) ? 0.0 : b.lo;
        hi[l] = b.hi;
    }
    return UncertaintyBox(std::move(lo), std::move(hi));
}

/// Boxes for every user of a quantized channel.
inline std::vector<UncertaintyBox> boxes_from_quantized(const QuantizedChannel& qc, const QuantizerConfig& q,
                                                        bool zero_floor = false) {
    std::vector<UncertaintyBox> out;
    out.reserve(static_cast<std::size_t>(qc.users()));
    std::vector<std::int64_t> row(static_cast<std::size_t>(qc.leds()));
    for (int k = 0; k < qc.users(); ++k) {
        for (int l = 0; l < qc.leds(); ++l) row[static_cast<std::size_t>(l)] = qc.indices(k, l);
        out.push_back(box_from_quantized(row, q, zero_floor));
    }
    return out;
}

inline constexpr int kMaxEnumerableDim = 24;

/// All 2^L corners in binary-counter order. Counter bit (L-1-l) selects lo/hi
/// of component l, so the first component varies slowest.
inline VertexSet enumerate_vertices(const UncertaintyBox& box) {
    const int n = box.dim();
    if (n > kMaxEnumerableDim) {
        throw std::invalid_argument("enumerate_vertices: dimension too large");
    }
    const std::int64_t count = std::int64_t{1} << n;
    VertexSet v;
    v.vertices.resize(n, static_cast<Eigen::Index>(count));
    for (std::int64_t j = 0; j < count; ++j) {
        for (int l = 0; l < n; ++l) {
            const bool high = ((j >> (n - 1 - l)) & 1) != 0;
            v.vertices(l, static_cast<Eigen::Index>(j)) = high ? box.hi()[l] : box.lo()[l];
        }
    }
    return v;
}

/// Drop exact duplicate vertices, keeping first occurrences in order.
inline VertexSet dedupe_vertices(const VertexSet& in) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < in.vertices.cols(); ++j) {
        bool dup = false;
        for (Eigen::Index i : keep) {
            if ((in.vertices.col(i).array() == in.vertices.col(j).array()).all()) {
                dup = true;
                break;
            }
        }
        if (!dup) keep.push_back(j);
    }
    VertexSet out;
    out.vertices.resize(in.vertices.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
        out.vertices.col(static_cast<Eigen::Index>(c)) = in.vertices.col(keep[c]);
    }
    return out;
}

/// n uniform samples from the box, one per column.
inline Eigen::MatrixXd sample_in_box(const UncertaintyBox& box, int n, Rng& rng) {
    if (n < 0) {
        throw std::invalid_argument("sample_in_box: n must be >= 0");
    }
    Eigen::MatrixXd out(box.dim(), n);
    for (int j = 0; j < n; ++j) {
        for (int l = 0; l < box.dim(); ++l) {
            out(l, j) = rng.uniform(box.lo()[l], box.hi()[l]);
        }
    }
    return out;
}

}  // namespace vlcprec
