#include "plattice/lattice.hpp"

#include <algorithm>

namespace plattice {

double pairwise_sum(std::span<const double> x) {
    return pairwise_map_sum(x, [](double v) { return v; });
}

LatticeVec::LatticeVec(int half_width) : n_(half_width) {
    if (half_width < 0) throw std::invalid_argument("LatticeVec: half_width must be >= 0");
    data_.assign(2 * static_cast<std::size_t>(half_width) + 1, 0.0);
}

LatticeVec::LatticeVec(int half_width, std::vector<double> values) : n_(half_width), data_(std::move(values)) {
    if (half_width < 0) throw std::invalid_argument("LatticeVec: half_width must be >= 0");
    if (data_.size() != 2 * static_cast<std::size_t>(half_width) + 1)
        throw std::invalid_argument("LatticeVec: values must have length 2*half_width+1");
}

LatticeVec LatticeVec::unit(int half_width, std::int64_t site) {
    LatticeVec u(half_width);
    u.at(site) = 1.0;
    return u;
}

double& LatticeVec::at(std::int64_t i) {
    if (i < -n_ || i > n_) throw std::out_of_range("LatticeVec::at: index outside window");
    return data_[static_cast<std::size_t>(i + n_)];
}

bool LatticeVec::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

LatticeVec LatticeVec::embedded(int half_width) const {
    if (half_width < n_) throw std::invalid_argument("LatticeVec::embedded: window may only grow");
    LatticeVec out(half_width);
    for (std::int64_t i = -n_; i <= n_; ++i) out.at(i) = get(i);
    return out;
}

double lp_norm(const LatticeVec& u, double p) {
    if (std::isnan(p) || p < 1.0) throw std::invalid_argument("lp_norm: requires p >= 1");
    const auto x = u.data();
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : x) m = std::max(m, std::abs(v));
        return m;
    }
    if (p == 1.0) return pairwise_map_sum(x, [](double v) { return std::abs(v); });
    if (p == 2.0) return std::sqrt(pairwise_map_sum(x, [](double v) { return v * v; }));
    const double s = pairwise_map_sum(x, [p](double v) { return std::pow(std::abs(v), p); });
    return std::pow(s, 1.0 / p);
}

double norm_sq(const LatticeVec& u) {
    return pairwise_map_sum(u.data(), [](double v) { return v * v; });
}

LatticeVec op_B(const LatticeVec& u) {
    const int n = u.half_width();
    LatticeVec out(n);
    for (std::int64_t i = -n; i <= n; ++i) out.at(i) = u.get(i + 1) - u.get(i);
    return out;
}

LatticeVec op_Bstar(const LatticeVec& u) {
    const int n = u.half_width();
    LatticeVec out(n);
    for (std::int64_t i = -n; i <= n; ++i) out.at(i) = u.get(i - 1) - u.get(i);
    return out;
}

LatticeVec op_A(const LatticeVec& u, double p) {
    if (!(p >= 2.0)) throw std::invalid_argument("op_A: requires p >= 2");
    const int n = u.half_width();
    const double e = p - 2.0;
    LatticeVec out(n);
    for (std::int64_t i = -n; i <= n; ++i)
        out.at(i) = signed_pow(u.get(i) - u.get(i - 1), e) - signed_pow(u.get(i + 1) - u.get(i), e);
    return out;
}

double pairing(const LatticeVec& u, const LatticeVec& v) {
    const int n = std::min(u.half_width(), v.half_width());
    std::vector<double> prod(2 * static_cast<std::size_t>(n) + 1);
    for (std::int64_t i = -n; i <= n; ++i) prod[static_cast<std::size_t>(i + n)] = u.get(i) * v.get(i);
    return pairwise_sum(prod);
}

double tail_norm(const LatticeVec& u, int cutoff, double p) {
    const int n = u.half_width();
    if (cutoff < 0 || cutoff > n) throw std::invalid_argument("tail_norm: cutoff must lie in [0, half_width]");
    if (std::isnan(p) || p < 1.0) throw std::invalid_argument("tail_norm: requires p >= 1");
    const auto x = u.data();
    const std::size_t nleft = static_cast<std::size_t>(n - cutoff);  // indices i < -cutoff
    const auto left = x.first(nleft);
    const auto right = x.subspan(static_cast<std::size_t>(n + cutoff + 1));
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : left) m = std::max(m, std::abs(v));
        for (double v : right) m = std::max(m, std::abs(v));
        return m;
    }
    auto f = [p](double v) { return std::pow(std::abs(v), p); };
    return std::pow(pairwise_map_sum(left, f) + pairwise_map_sum(right, f), 1.0 / p);
}

double grad_pnorm_pow(const LatticeVec& u, double p) {
    const int n = u.half_width();
    std::vector<double> d(2 * static_cast<std::size_t>(n) + 2);
    for (std::int64_t i = -n - 1; i <= n; ++i)
        d[static_cast<std::size_t>(i + n + 1)] = std::pow(std::abs(u.get(i + 1) - u.get(i)), p);
    return pairwise_sum(d);
}

LatticeVec scaled(const LatticeVec& x, double a) {
    LatticeVec out = x;
    for (double& v : out.data()) v *= a;
    return out;
}

LatticeVec axpy(double a, const LatticeVec& x, const LatticeVec& y) {
    const int n = std::max(x.half_width(), y.half_width());
    LatticeVec out(n);
    for (std::int64_t i = -n; i <= n; ++i) out.at(i) = a * x.get(i) + y.get(i);
    return out;
}

LatticeVec diff(const LatticeVec& x, const LatticeVec& y) { return axpy(-1.0, y, x); }

double l2_dist(const LatticeVec& x, const LatticeVec& y) {
    const int n = std::max(x.half_width(), y.half_width());
    std::vector<double> d(2 * static_cast<std::size_t>(n) + 1);
    for (std::int64_t i = -n; i <= n; ++i) {
        const double v = x.get(i) - y.get(i);
        d[static_cast<std::size_t>(i + n)] = v * v;
    }
    return std::sqrt(pairwise_sum(d));
}

}  // namespace plattice
