#pragma once

#include "rle/cones.hpp"
#include "rle/random.hpp"

#include <vector>

namespace rle {

// Interior test points kept away from the boundary so that finite-difference
// stencils stay inside:
//   orthant  exp(U[-1, 1]) per coordinate
//   cube     U[0.1, 0.9] per coordinate
//   Lorentz  x0 ~ U[1, 3], spatial part uniform in the ball of radius 0.8 x0
inline Vec sample_interior(const Orthant& g, RandomStream& rng)
{
    Vec x(g.dim());
    for (int i = 0; i < g.dim(); ++i)
        x[i] = std::exp(2 * rng.uniform() - 1);
    return x;
}

inline Vec sample_interior(const Cube& g, RandomStream& rng)
{
    Vec x(g.dim());
    for (int i = 0; i < g.dim(); ++i)
        x[i] = 0.1 + 0.8 * rng.uniform();
    return x;
}

inline Vec sample_interior(const Lorentz& g, RandomStream& rng)
{
    const int n = g.spatial_dim();
    Vec x(g.dim());
    x[0] = 1 + 2 * rng.uniform();
    Vec dir(n);
    for (int i = 0; i < n; ++i)
        dir[i] = rng.normal();
    const double radius = 0.8 * x[0] * std::pow(rng.uniform(), 1.0 / n);
    x.tail(n) = radius * dir / dir.norm();
    return x;
}

template<class G>
std::vector<Vec> sample_interior_points(const G& g, std::size_t count, std::uint64_t seed)
{
    RandomStream rng(seed, 0);
    std::vector<Vec> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(sample_interior(g, rng));
    return out;
}

}  // namespace rle
