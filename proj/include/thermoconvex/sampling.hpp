#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "thermoconvex/errors.hpp"
#include "thermoconvex/field.hpp"

namespace thermoconvex {

/// splitmix64; fully specified, so streams are byte-identical across
/// platforms and standard libraries (std::uniform_real_distribution is
/// not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    Eigen::VectorXd uniform_box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
        Eigen::VectorXd x(lo.size());
        for (Eigen::Index i = 0; i < lo.size(); ++i) x(i) = uniform(lo(i), hi(i));
        return x;
    }

private:
    std::uint64_t state_;
};

struct SamplerSpec {
    enum class Kind { Grid, Random };

    Kind kind = Kind::Random;
    int count = 100;                 // random: number of accepted points
    std::vector<int> resolution;     // grid: cells per axis
    std::uint64_t seed = 0;

    static SamplerSpec random(int count, std::uint64_t seed) {
        SamplerSpec s;
        s.kind = Kind::Random;
        s.count = count;
        s.seed = seed;
        return s;
    }

    static SamplerSpec grid(std::vector<int> resolution) {
        SamplerSpec s;
        s.kind = Kind::Grid;
        s.resolution = std::move(resolution);
        return s;
    }

    std::string describe() const {
        std::ostringstream os;
        if (kind == Kind::Grid) {
            os << "grid(";
            for (std::size_t i = 0; i < resolution.size(); ++i) {
                if (i) os << "x";
                os << resolution[i];
            }
            os << ")";
        } else {
            os << "uniform-random(n=" << count << ", seed=" << seed << ")";
        }
        return os.str();
    }
};

/// Rejection-sample admissible points from a domain. Grid points are
/// cell centers filtered by the predicate; random sampling throws
/// SamplerExhausted once the rejection rate exceeds 99%.
inline std::vector<Eigen::VectorXd> sample_domain(const DomainSpec& domain,
                                                  const SamplerSpec& spec) {
    std::vector<Eigen::VectorXd> points;
    const Eigen::Index m = domain.dimension();

    if (spec.kind == SamplerSpec::Kind::Grid) {
        std::vector<int> res = spec.resolution;
        if (res.empty()) res.assign(static_cast<std::size_t>(m), 5);
        if (res.size() == 1) res.assign(static_cast<std::size_t>(m), res[0]);
        if (res.size() != static_cast<std::size_t>(m))
            throw ConfigError("grid resolution does not match domain dimension");
        long total = 1;
        for (int r : res) {
            if (r < 1) throw ConfigError("grid resolution must be positive");
            total *= r;
        }
        for (long idx = 0; idx < total; ++idx) {
            Eigen::VectorXd x(m);
            long rem = idx;
            for (Eigen::Index i = 0; i < m; ++i) {
                const int r = res[static_cast<std::size_t>(i)];
                const long cell = rem % r;
                rem /= r;
                const double lo = domain.lower()(i), hi = domain.upper()(i);
                x(i) = lo + (static_cast<double>(cell) + 0.5) * (hi - lo) / r;
            }
            if (domain.contains(x)) points.push_back(std::move(x));
        }
        if (points.empty())
            throw SamplerExhausted("grid sampler produced no admissible points");
        return points;
    }

    Rng rng(spec.seed);
    long draws = 0;
    while (static_cast<int>(points.size()) < spec.count) {
        ++draws;
        Eigen::VectorXd x = rng.uniform_box(domain.lower(), domain.upper());
        if (domain.contains(x)) points.push_back(std::move(x));
        if (draws >= 1000 && points.size() * 100 < static_cast<std::size_t>(draws))
            throw SamplerExhausted("rejection rate above 99% while sampling domain");
    }
    return points;
}

/// Run fn(i) for i in [0, n) over the requested number of threads and
/// collect results by index, so the merge order never depends on
/// completion time.
template <typename T>
std::vector<T> parallel_map(int n, const std::function<T(int)>& fn, int threads = 1) {
    std::vector<T> out(static_cast<std::size_t>(n));
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fn(i);
        return out;
    }
    const int workers = std::min(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (int i = w; i < n; i += workers) out[static_cast<std::size_t>(i)] = fn(i);
        });
    }
    for (auto& t : pool) t.join();
    return out;
}

} // namespace thermoconvex
