// Finite-window lattice vectors and the difference operators acting on them.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace plattice {

// Cascade summation with a fixed evaluation order: deterministic across
// runs and thread counts, error grows like O(log n).
double pairwise_sum(std::span<const double> x);

template <class F>
double pairwise_map_sum(std::span<const double> x, F&& f) {
    if (x.size() <= 32) {
        double s = 0.0;
        for (double v : x) s += f(v);
        return s;
    }
    const std::size_t mid = x.size() / 2;
    return pairwise_map_sum(x.first(mid), f) + pairwise_map_sum(x.subspan(mid), f);
}

// |x|^e * x with the convention 0^0 = 1, so e == 0 is the identity map and
// the map vanishes at 0 for every e > 0. Fast paths for the small integer
// exponents the stencils actually use.
inline double signed_pow(double x, double e) {
    if (e == 0.0) return x;
    if (x == 0.0) return 0.0;
    const double ax = std::abs(x);
    if (e == 1.0) return ax * x;
    if (e == 2.0) return ax * ax * x;
    if (e == 3.0) return ax * ax * ax * x;
    if (e == 4.0) return (ax * ax) * (ax * ax) * x;
    return std::pow(ax, e) * x;
}

// A bi-infinite square-summable sequence truncated to the window
// [-half_width, half_width]; entries outside the window read as zero.
class LatticeVec {
public:
    LatticeVec() : n_(0), data_(1, 0.0) {}
    explicit LatticeVec(int half_width);
    LatticeVec(int half_width, std::vector<double> values);

    static LatticeVec unit(int half_width, std::int64_t site);

    int half_width() const { return n_; }
    std::size_t size() const { return data_.size(); }

    double get(std::int64_t i) const {
        return (i < -n_ || i > n_) ? 0.0 : data_[static_cast<std::size_t>(i + n_)];
    }
    double& at(std::int64_t i);

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    bool all_finite() const;
    LatticeVec embedded(int half_width) const;

private:
    int n_;
    std::vector<double> data_;
};

// (sum_i |u_i|^p)^(1/p), sup-norm for p = infinity. Rejects p < 1.
double lp_norm(const LatticeVec& u, double p);
double norm_sq(const LatticeVec& u);

// Forward and backward difference maps, (Bu)_i = u_{i+1} - u_i and
// (B*u)_i = u_{i-1} - u_i, with zero extension at the window edge. The
// output keeps the input window; components that would fall outside it
// only ever pair against zero entries.
LatticeVec op_B(const LatticeVec& u);
LatticeVec op_Bstar(const LatticeVec& u);

// Nonlinear diffusion stencil A u = B*(|Bu|^{p-2} (x) Bu), p >= 2. At p = 2
// this is the (negative) discrete Laplacian.
LatticeVec op_A(const LatticeVec& u, double p);

// sum_i u_i v_i over the common window; serves as both the l2 inner product
// and the dual pairing (the data are finite-dimensional).
double pairing(const LatticeVec& u, const LatticeVec& v);

// (sum_{|i| > cutoff} |u_i|^p)^(1/p) inside the window.
double tail_norm(const LatticeVec& u, int cutoff, double p);

// sum over the full grad stencil including the boundary cell, i.e.
// sum_{i=-N-1}^{N} |u_{i+1}-u_i|^p with zero extension. Equals (Au,u) when
// raised to p = p.
double grad_pnorm_pow(const LatticeVec& u, double p);

LatticeVec scaled(const LatticeVec& x, double a);
LatticeVec axpy(double a, const LatticeVec& x, const LatticeVec& y);  // a*x + y
LatticeVec diff(const LatticeVec& x, const LatticeVec& y);            // x - y
double l2_dist(const LatticeVec& x, const LatticeVec& y);

}  // namespace plattice
