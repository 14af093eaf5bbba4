#include "plattice/noise.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace plattice {

namespace {

std::int64_t snap_index(double t, double dt, const char* what) {
    const double x = t / dt;
    const auto k = static_cast<std::int64_t>(std::llround(x));
    if (std::abs(x - static_cast<double>(k)) > 1e-6 * std::max(1.0, std::abs(x)))
        throw std::invalid_argument(std::string(what) + ": time is not grid-aligned");
    return k;
}

}  // namespace

std::int64_t NoisePath::index_of(double t) const {
    const std::int64_t k = snap_index(t, dt, "NoisePath");
    if (k < k_min || k > k_max) throw std::out_of_range("NoisePath: time outside grid");
    return k;
}

static double interp(const std::vector<double>& a, std::int64_t k_min, std::int64_t k_max, double dt, double t) {
    const double x = t / dt;
    if (x < static_cast<double>(k_min) - 1e-9 || x > static_cast<double>(k_max) + 1e-9)
        throw std::out_of_range("NoisePath: time outside grid");
    const double xf = std::floor(x);
    auto k = static_cast<std::int64_t>(xf);
    if (k >= k_max) k = k_max - 1;
    if (k < k_min) k = k_min;
    const double frac = x - static_cast<double>(k);
    const auto j = static_cast<std::size_t>(k - k_min);
    return a[j] + frac * (a[j + 1] - a[j]);
}

double NoisePath::w_at(double t) const { return interp(w, k_min, k_max, dt, t); }

double NoisePath::z_at(double t) const {
    if (!has_z()) throw std::logic_error("NoisePath: z not attached");
    return interp(z, k_min, k_max, dt, t);
}

NoisePath sample_wiener(std::uint64_t seed, double t_min, double t_max, double dt, double burn_in) {
    if (!(dt > 0.0)) throw std::invalid_argument("sample_wiener: dt must be positive");
    if (!(t_min < 0.0 && 0.0 < t_max)) throw std::invalid_argument("sample_wiener: grid must contain 0 (t_min < 0 < t_max)");
    if (burn_in < 0.0) throw std::invalid_argument("sample_wiener: burn_in must be >= 0");

    NoisePath p;
    p.seed = seed;
    p.dt = dt;
    p.burn_in = burn_in;
    p.k_min = static_cast<std::int64_t>(std::floor(t_min / dt + 1e-12));
    p.k_max = static_cast<std::int64_t>(std::ceil(t_max / dt - 1e-12));
    const auto n = static_cast<std::size_t>(p.k_max - p.k_min + 1);

    std::vector<double> inc(n - 1);
    GaussianRng rng(seed);
    const double sdt = std::sqrt(dt);
    for (double& d : inc) d = sdt * rng.next();

    p.w.assign(n, 0.0);
    const auto i0 = static_cast<std::size_t>(-p.k_min);  // grid index of t = 0
    p.w[i0] = 0.0;
    for (std::size_t i = i0; i + 1 < n; ++i) p.w[i + 1] = p.w[i] + inc[i];
    for (std::size_t i = i0; i > 0; --i) p.w[i - 1] = p.w[i] - inc[i - 1];
    return p;
}

NoisePath ou_attach(NoisePath p) {
    if (p.w.empty()) throw std::invalid_argument("ou_attach: path has no samples");
    const double decay = std::exp(-p.dt);
    const double conv = std::exp(-p.dt / 2.0);

    double zv = 0.0;
    const auto n_burn = static_cast<std::int64_t>(std::llround(std::ceil(p.burn_in / p.dt - 1e-12)));
    if (n_burn > 0) {
        GaussianRng rng(splitmix64(p.seed ^ 0x6f756275726eULL));
        const double sdt = std::sqrt(p.dt);
        for (std::int64_t i = 0; i < n_burn; ++i) zv = decay * zv + conv * (sdt * rng.next());
    }

    p.z.assign(p.w.size(), 0.0);
    p.z[0] = zv;
    for (std::size_t i = 0; i + 1 < p.w.size(); ++i) p.z[i + 1] = decay * p.z[i] + conv * (p.w[i + 1] - p.w[i]);
    return p;
}

NoisePath theta_shift(const NoisePath& path, double s) {
    const std::int64_t m = snap_index(s, path.dt, "theta_shift");
    if (m < path.k_min || m > path.k_max) throw std::out_of_range("theta_shift: shift exhausts the grid");
    NoisePath out;
    out.seed = path.seed;
    out.dt = path.dt;
    out.burn_in = path.burn_in;
    out.k_min = path.k_min - m;
    out.k_max = path.k_max - m;
    const std::size_t n = path.w.size();
    const double ws = path.w_idx(m);
    out.w.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.w[i] = path.w[i] - ws;
    out.z = path.z;  // z(theta_t theta_s w) = z(theta_{t+s} w): plain index shift
    return out;
}

NoisePath refine_bisect(const NoisePath& path, std::uint64_t bridge_seed) {
    NoisePath out;
    out.seed = path.seed;
    out.dt = path.dt / 2.0;
    out.burn_in = path.burn_in;
    out.k_min = 2 * path.k_min;
    out.k_max = 2 * path.k_max;
    const std::size_t n = path.w.size();
    out.w.assign(2 * n - 1, 0.0);
    GaussianRng rng(bridge_seed);
    const double half_sd = 0.5 * std::sqrt(path.dt);
    for (std::size_t i = 0; i < n; ++i) out.w[2 * i] = path.w[i];
    for (std::size_t i = 0; i + 1 < n; ++i)
        out.w[2 * i + 1] = 0.5 * (path.w[i] + path.w[i + 1]) + half_sd * rng.next();

    if (path.has_z()) {
        const double decay = std::exp(-out.dt);
        const double conv = std::exp(-out.dt / 2.0);
        out.z.assign(out.w.size(), 0.0);
        out.z[0] = path.z[0];
        for (std::size_t i = 0; i + 1 < out.w.size(); ++i)
            out.z[i + 1] = decay * out.z[i] + conv * (out.w[i + 1] - out.w[i]);
    }
    return out;
}

namespace {

template <class T>
void put(std::ofstream& f, T v) {
    static_assert(sizeof(T) == 8);
    f.write(reinterpret_cast<const char*>(&v), 8);
}

template <class T>
T take(std::ifstream& f) {
    static_assert(sizeof(T) == 8);
    T v{};
    f.read(reinterpret_cast<char*>(&v), 8);
    if (!f) throw std::runtime_error("noise file: truncated header");
    return v;
}

}  // namespace

void save_noise(const NoisePath& path, const std::filesystem::path& file) {
    std::ofstream f(file, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("save_noise: cannot open " + file.string());
    put<std::uint64_t>(f, path.seed);
    put<double>(f, path.t_min());
    put<double>(f, path.t_max());
    put<double>(f, path.dt);
    put<double>(f, path.burn_in);
    f.write(reinterpret_cast<const char*>(path.w.data()), static_cast<std::streamsize>(path.w.size() * 8));
    if (path.has_z())
        f.write(reinterpret_cast<const char*>(path.z.data()), static_cast<std::streamsize>(path.z.size() * 8));
    if (!f) throw std::runtime_error("save_noise: write failed for " + file.string());
}

NoisePath load_noise(const std::filesystem::path& file) {
    std::ifstream f(file, std::ios::binary);
    if (!f) throw std::runtime_error("load_noise: cannot open " + file.string());
    NoisePath p;
    p.seed = take<std::uint64_t>(f);
    const double tmin = take<double>(f);
    const double tmax = take<double>(f);
    p.dt = take<double>(f);
    p.burn_in = take<double>(f);
    if (!(p.dt > 0.0)) throw std::runtime_error("load_noise: corrupt header");
    p.k_min = static_cast<std::int64_t>(std::llround(tmin / p.dt));
    p.k_max = static_cast<std::int64_t>(std::llround(tmax / p.dt));
    const auto n = static_cast<std::size_t>(p.k_max - p.k_min + 1);

    f.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::size_t>(f.tellg());
    f.seekg(40, std::ios::beg);
    const std::size_t payload = (bytes - 40) / 8;
    if (payload != n && payload != 2 * n) throw std::runtime_error("load_noise: size does not match grid");

    p.w.resize(n);
    f.read(reinterpret_cast<char*>(p.w.data()), static_cast<std::streamsize>(n * 8));
    if (payload == 2 * n) {
        p.z.resize(n);
        f.read(reinterpret_cast<char*>(p.z.data()), static_cast<std::streamsize>(n * 8));
    }
    if (!f) throw std::runtime_error("load_noise: truncated payload");
    return p;
}

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string noise_digest(const NoisePath& path) {
    std::uint64_t h = fnv1a64(&path.seed, 8);
    const double hdr[4] = {path.t_min(), path.t_max(), path.dt, path.burn_in};
    h = fnv1a64(hdr, sizeof(hdr), h);
    h = fnv1a64(path.w.data(), path.w.size() * 8, h);
    if (path.has_z()) h = fnv1a64(path.z.data(), path.z.size() * 8, h);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

std::int64_t SampleView::index_of(double t) const { return snap_index(t, dt(), "SampleView"); }

void SampleView::require_range(std::int64_t k_lo, std::int64_t k_hi) const {
    if (k_lo + shift < path->k_min || k_hi + shift > path->k_max)
        throw std::out_of_range("SampleView: requested range leaves the noise grid");
}

SampleView shifted_view(const NoisePath& path, double s) {
    const std::int64_t m = snap_index(s, path.dt, "shifted_view");
    return SampleView{&path, m};
}

}  // namespace plattice
