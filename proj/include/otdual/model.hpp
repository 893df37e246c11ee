#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace otdual {

using MultiIndex = std::vector<std::size_t>;

/**
 * MarginalSpace: one finite axis S_t of the product space.
 *
 * Points carry labels, optional state coordinates (all of the same
 * dimension, needed by the martingale problems) and optional scaling
 * weights psi >= 1 (default 1).
 */
struct MarginalSpace {
    std::vector<std::string> points;
    std::vector<std::vector<double>> coords;  // empty, or one vector per point
    std::vector<double> psi;                  // empty, or one weight per point

    /// Axis with n points labelled "0".."n-1".
    static MarginalSpace sized(std::size_t n) {
        MarginalSpace m;
        m.points.reserve(n);
        for (std::size_t i = 0; i < n; ++i) m.points.push_back(std::to_string(i));
        return m;
    }

    /// One-dimensional states, labelled by position.
    static MarginalSpace with_states(std::vector<double> states) {
        MarginalSpace m = sized(states.size());
        for (double s : states) m.coords.push_back({s});
        return m;
    }

    [[nodiscard]] std::size_t size() const { return points.size(); }
    [[nodiscard]] bool has_coords() const { return !coords.empty(); }
    [[nodiscard]] std::size_t coord_dim() const { return coords.empty() ? 0 : coords.front().size(); }
    [[nodiscard]] double psi_at(std::size_t i) const { return psi.empty() ? 1.0 : psi.at(i); }

    void validate() const {
        if (points.empty()) throw std::invalid_argument("MarginalSpace: axis needs at least one point");
        if (!coords.empty()) {
            if (coords.size() != points.size()) {
                throw std::invalid_argument("MarginalSpace: coords must be given for every point");
            }
            for (const auto& c : coords) {
                if (c.size() != coords.front().size() || c.empty()) {
                    throw std::invalid_argument("MarginalSpace: coords must share one nonzero dimension");
                }
                for (double v : c) {
                    if (!std::isfinite(v)) throw std::invalid_argument("MarginalSpace: coords must be finite");
                }
            }
        }
        if (!psi.empty()) {
            if (psi.size() != points.size()) {
                throw std::invalid_argument("MarginalSpace: psi must be given for every point");
            }
            for (double w : psi) {
                if (!(w >= 1.0) || !std::isfinite(w)) {
                    throw std::invalid_argument("MarginalSpace: psi must be finite and >= 1");
                }
            }
        }
    }

    friend bool operator==(const MarginalSpace&, const MarginalSpace&) = default;
};

/// Row-major layout of a product of finite axes. Cheap to copy.
class GridShape {
public:
    GridShape() = default;

    explicit GridShape(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
        if (sizes_.empty()) throw std::invalid_argument("GridShape: empty axis list");
        strides_.assign(sizes_.size(), 1);
        size_ = 1;
        for (std::size_t t = sizes_.size(); t-- > 0;) {
            if (sizes_[t] == 0) throw std::invalid_argument("GridShape: axis with zero points");
            strides_[t] = size_;
            size_ *= sizes_[t];
        }
    }

    [[nodiscard]] std::size_t num_axes() const { return sizes_.size(); }
    /// Index of the last axis, T.
    [[nodiscard]] std::size_t last_axis() const { return sizes_.size() - 1; }
    [[nodiscard]] std::size_t axis_size(std::size_t t) const { return sizes_.at(t); }
    [[nodiscard]] const std::vector<std::size_t>& sizes() const { return sizes_; }
    [[nodiscard]] const std::vector<std::size_t>& strides() const { return strides_; }
    [[nodiscard]] std::size_t size() const { return size_; }

    [[nodiscard]] std::size_t flat(std::span<const std::size_t> idx) const {
        if (idx.size() != sizes_.size()) throw std::invalid_argument("GridShape::flat: wrong index arity");
        std::size_t f = 0;
        for (std::size_t t = 0; t < idx.size(); ++t) {
            if (idx[t] >= sizes_[t]) throw std::out_of_range("GridShape::flat: index out of range");
            f += idx[t] * strides_[t];
        }
        return f;
    }

    [[nodiscard]] MultiIndex multi(std::size_t flat) const {
        if (flat >= size_) throw std::out_of_range("GridShape::multi: flat index out of range");
        MultiIndex idx(sizes_.size());
        for (std::size_t t = 0; t < sizes_.size(); ++t) {
            idx[t] = flat / strides_[t];
            flat %= strides_[t];
        }
        return idx;
    }

    /// pi_t of the cell with the given flat index.
    [[nodiscard]] std::size_t coordinate(std::size_t flat, std::size_t t) const {
        return (flat / strides_[t]) % sizes_[t];
    }

    /// Index of the history (s_0,...,s_t) of a cell among all prefixes of length t+1.
    [[nodiscard]] std::size_t prefix(std::size_t flat, std::size_t t) const { return flat / strides_[t]; }

    /// Number of distinct prefixes (s_0,...,s_t).
    [[nodiscard]] std::size_t prefix_count(std::size_t t) const { return size_ / strides_[t]; }

    friend bool operator==(const GridShape&, const GridShape&) = default;

private:
    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

/// ProductGrid: S = S_0 x ... x S_T with a flat row-major cell index.
class ProductGrid {
public:
    ProductGrid() = default;

    explicit ProductGrid(std::vector<MarginalSpace> axes) : axes_(std::move(axes)) {
        if (axes_.empty()) throw std::invalid_argument("ProductGrid: empty axis list");
        std::vector<std::size_t> sizes;
        for (const auto& a : axes_) {
            a.validate();
            sizes.push_back(a.size());
        }
        shape_ = GridShape(std::move(sizes));
    }

    [[nodiscard]] const GridShape& shape() const { return shape_; }
    [[nodiscard]] const std::vector<MarginalSpace>& axes() const { return axes_; }
    [[nodiscard]] const MarginalSpace& axis(std::size_t t) const { return axes_.at(t); }
    [[nodiscard]] std::size_t num_axes() const { return axes_.size(); }
    [[nodiscard]] std::size_t size() const { return shape_.size(); }
    [[nodiscard]] std::size_t flat(std::span<const std::size_t> idx) const { return shape_.flat(idx); }
    [[nodiscard]] MultiIndex multi(std::size_t flat) const { return shape_.multi(flat); }

    /// psi(s) = sum_t psi_t(s_t).
    [[nodiscard]] double psi(std::size_t flat) const {
        double total = 0.0;
        for (std::size_t t = 0; t < axes_.size(); ++t) total += axes_[t].psi_at(shape_.coordinate(flat, t));
        return total;
    }

    friend bool operator==(const ProductGrid&, const ProductGrid&) = default;

private:
    std::vector<MarginalSpace> axes_;
    GridShape shape_;
};

inline ProductGrid build_product_grid(std::vector<MarginalSpace> axes) { return ProductGrid(std::move(axes)); }

/// Nonnegative finite mass on an index set (an axis or a grid).
class DiscreteMeasure {
public:
    static constexpr double kProbabilityTol = 1e-12;

    DiscreteMeasure() = default;

    explicit DiscreteMeasure(std::vector<double> mass, bool probability = false)
        : mass_(std::move(mass)), probability_(probability) {
        for (double m : mass_) {
            if (!std::isfinite(m) || m < 0.0) {
                throw std::invalid_argument("DiscreteMeasure: masses must be finite and nonnegative");
            }
        }
        if (probability_ && std::abs(total() - 1.0) > kProbabilityTol) {
            throw std::invalid_argument("DiscreteMeasure: probability measure must have total mass 1");
        }
    }

    static DiscreteMeasure probability(std::vector<double> mass) { return DiscreteMeasure(std::move(mass), true); }

    static DiscreteMeasure uniform(std::size_t n) {
        return DiscreteMeasure(std::vector<double>(n, 1.0 / static_cast<double>(n)), false);
    }

    [[nodiscard]] std::size_t size() const { return mass_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return mass_[i]; }
    [[nodiscard]] const std::vector<double>& mass() const { return mass_; }
    [[nodiscard]] bool is_probability() const { return probability_; }
    [[nodiscard]] double total() const { return std::accumulate(mass_.begin(), mass_.end(), 0.0); }

    friend bool operator==(const DiscreteMeasure&, const DiscreteMeasure&) = default;

private:
    std::vector<double> mass_;
    bool probability_ = false;
};

/// Coupling: nonnegative mass per grid cell (the discrete lambda).
class Coupling {
public:
    Coupling() = default;

    Coupling(GridShape shape, std::vector<double> mass) : shape_(std::move(shape)), mass_(std::move(mass)) {
        if (mass_.size() != shape_.size()) throw std::invalid_argument("Coupling: mass does not match grid size");
        for (double m : mass_) {
            if (!std::isfinite(m) || m < 0.0) throw std::invalid_argument("Coupling: masses must be finite and nonnegative");
        }
    }

    [[nodiscard]] const GridShape& shape() const { return shape_; }
    [[nodiscard]] const std::vector<double>& mass() const { return mass_; }
    [[nodiscard]] double operator[](std::size_t flat) const { return mass_[flat]; }
    [[nodiscard]] double at(std::span<const std::size_t> idx) const { return mass_[shape_.flat(idx)]; }
    [[nodiscard]] double total() const { return std::accumulate(mass_.begin(), mass_.end(), 0.0); }

    [[nodiscard]] Coupling scaled(double alpha) const {
        std::vector<double> m(mass_);
        for (double& v : m) v *= alpha;
        return Coupling(shape_, std::move(m));
    }

    friend bool operator==(const Coupling&, const Coupling&) = default;

private:
    GridShape shape_;
    std::vector<double> mass_;
};

/// t-th marginal of a coupling.
inline DiscreteMeasure marginal(const Coupling& lambda, std::size_t t) {
    const auto& shape = lambda.shape();
    if (t >= shape.num_axes()) throw std::out_of_range("marginal: axis index out of range");
    std::vector<double> out(shape.axis_size(t), 0.0);
    for (std::size_t f = 0; f < shape.size(); ++f) out[shape.coordinate(f, t)] += lambda[f];
    return DiscreteMeasure(std::move(out));
}

/// Product measure mu_0 x ... x mu_T laid out on the grid.
inline std::vector<double> product_mass(const GridShape& shape, std::span<const DiscreteMeasure> factors) {
    if (factors.size() != shape.num_axes()) throw std::invalid_argument("product_mass: one factor per axis required");
    std::vector<double> out(shape.size(), 1.0);
    for (std::size_t f = 0; f < shape.size(); ++f) {
        for (std::size_t t = 0; t < factors.size(); ++t) out[f] *= factors[t][shape.coordinate(f, t)];
    }
    return out;
}

/// Potentials x = (x_0,...,x_T), one real vector per axis.
struct Potentials {
    std::vector<std::vector<double>> values;

    static Potentials zeros(const GridShape& shape) {
        Potentials p;
        for (std::size_t n : shape.sizes()) p.values.emplace_back(n, 0.0);
        return p;
    }

    [[nodiscard]] std::size_t num_axes() const { return values.size(); }
    std::vector<double>& operator[](std::size_t t) { return values[t]; }
    const std::vector<double>& operator[](std::size_t t) const { return values[t]; }

    /// sum_t x_t(s_t) at a cell.
    [[nodiscard]] double sum_at(const GridShape& shape, std::size_t flat) const {
        double acc = 0.0;
        for (std::size_t t = 0; t < values.size(); ++t) acc += values[t][shape.coordinate(flat, t)];
        return acc;
    }

    void validate(const GridShape& shape) const {
        if (values.size() != shape.num_axes()) throw std::invalid_argument("Potentials: one vector per axis required");
        for (std::size_t t = 0; t < values.size(); ++t) {
            if (values[t].size() != shape.axis_size(t)) {
                throw std::invalid_argument("Potentials: x_" + std::to_string(t) + " has the wrong length");
            }
            for (double v : values[t]) {
                if (!std::isfinite(v)) throw std::invalid_argument("Potentials: entries must be finite");
            }
        }
    }

    friend bool operator==(const Potentials&, const Potentials&) = default;
};

}  // namespace otdual
