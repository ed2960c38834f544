#include "engel/sampling.hpp"

#include <cmath>
#include <cstdlib>
#include <random>

#include <omp.h>

namespace engel {

namespace {
constexpr int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

double radical_inverse(std::size_t i, int base)
{
    double f = 1.0;
    double r = 0.0;
    while (i > 0)
    {
        f /= base;
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}
}  // namespace

HaltonSampler::HaltonSampler(int dim, std::uint64_t seed) : dim_(dim), shift_(dim)
{
    if (dim < 1 || dim > static_cast<int>(std::size(primes)))
        throw DimensionMismatch("Halton sampler supports 1..12 dimensions");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < dim; ++i)
        shift_[i] = u(rng);
}

Vec HaltonSampler::unit(std::size_t i) const
{
    Vec x(dim_);
    for (int k = 0; k < dim_; ++k)
    {
        double v = radical_inverse(i + 1, primes[k]) + shift_[k];
        x[k] = v - std::floor(v);
    }
    return x;
}

std::vector<Vec> sample_domain(Domain const& d, std::size_t n, std::uint64_t seed)
{
    HaltonSampler h(d.dim(), seed);
    std::vector<Vec> pts;
    pts.reserve(n);
    std::size_t limit = 1000 * n + 1000;
    for (std::size_t i = 0; pts.size() < n && i < limit; ++i)
    {
        Vec p = d.from_unit(h.unit(i));
        if (!d.predicate || d.predicate(p))
            pts.push_back(std::move(p));
    }
    if (pts.size() < n)
        throw DomainViolation("domain predicate rejects almost every sample");
    return pts;
}

namespace {
int g_worker_override = 0;
}

int worker_count()
{
    if (g_worker_override > 0)
        return g_worker_override;
    if (char const* env = std::getenv("ENGEL_LAB_THREADS"))
    {
        int n = std::atoi(env);
        if (n > 0)
            return n;
    }
    return omp_get_max_threads();
}

void set_worker_count(int n)
{
    g_worker_override = n > 0 ? n : 0;
}

}  // namespace engel
