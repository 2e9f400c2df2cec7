#pragma once

#include "ionpa/common.hpp"

#include <cmath>
#include <cstdint>
#include <string>

namespace ionpa {

struct MinResult {
    double x;
    double fx;
};

// Golden-section search for a minimum bracketed by [a, b].
template <class F>
MinResult golden_section(F&& f, double a, double b, double xtol)
{
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a);
    double d = a + r * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (std::abs(b - a) > xtol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return fc < fd ? MinResult{c, fc} : MinResult{d, fd};
}

// Bracketed root: bisection interleaved with secant (Illinois) steps.
template <class F>
double bracketed_root(F&& f, double lo, double hi, double rtol, const char* what, int max_iter = 200)
{
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0)
        return lo;
    if (fhi == 0)
        return hi;
    if ((flo > 0) == (fhi > 0))
        throw SolverError(std::string(what) + ": root not bracketed");
    int side = 0;
    for (int it = 0; it < max_iter; it++) {
        double x = (lo * fhi - hi * flo) / (fhi - flo);
        if (!(x > lo && x < hi) || it % 4 == 3)
            x = 0.5 * (lo + hi);
        double fx = f(x);
        if (fx == 0 || std::abs(hi - lo) <= rtol * std::abs(x))
            return x;
        if ((fx > 0) == (fhi > 0)) {
            hi = x;
            fhi = fx;
            if (side == -1)
                flo *= 0.5;
            side = -1;
        } else {
            lo = x;
            flo = fx;
            if (side == 1)
                fhi *= 0.5;
            side = 1;
        }
    }
    throw SolverError(std::string(what) + ": root finder did not converge");
}

// Counter-based normal deviates keyed by (seed, index).
inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline double counter_uniform(std::uint64_t seed, std::uint64_t index, std::uint64_t stream)
{
    std::uint64_t h = splitmix64(splitmix64(seed ^ splitmix64(index)) + stream);
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

inline double counter_normal(std::uint64_t seed, std::uint64_t index)
{
    double u1 = counter_uniform(seed, index, 1);
    double u2 = counter_uniform(seed, index, 2);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

} // namespace ionpa
