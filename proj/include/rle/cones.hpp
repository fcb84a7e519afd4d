#pragma once

#include "rle/geometry.hpp"

#include <numbers>
#include <string>
#include <string_view>
#include <variant>

namespace rle {

//---------------------------------------------------------------------------//
/*!
 * Positive orthant R^n_+ with F(x) = -sum log x^i and g = diag(1/(x^i)^2).
 */
class Orthant
{
  public:
    explicit Orthant(int n) : n_(n) { check_dim(n); }

    int dim() const noexcept { return n_; }
    bool is_cone() const noexcept { return true; }
    bool is_canonical() const noexcept { return true; }
    std::string_view name() const noexcept { return "orthant"; }

    bool contains(const Vec& x) const { return x.size() == n_ && (x.array() > 0).all(); }

    double barrier(const Vec& x) const { return -x.array().log().sum(); }
    Vec barrier_gradient(const Vec& x) const { return -x.cwiseInverse(); }
    Mat metric(const Vec& x) const { return x.array().square().inverse().matrix().asDiagonal(); }
    Mat inverse_metric(const Vec& x) const { return x.array().square().matrix().asDiagonal(); }
    Vec inverse_metric_divergence(const Vec& x) const { return 2 * x; }

    // S with S S^T = g^{-1}.
    Mat noise_factor(const Vec& x) const { return x.asDiagonal(); }

  private:
    int n_;
};

//---------------------------------------------------------------------------//
/*!
 * Unit cube (0,1)^n with F(x) = -sum log(sin(pi x^i)/pi).
 *
 * Points within kBoundaryGuard of a face are treated as outside: the metric
 * there is too large to be useful and integrators resample instead.
 */
class Cube
{
  public:
    static constexpr double kBoundaryGuard = 1e-8;

    explicit Cube(int n) : n_(n) { check_dim(n); }

    int dim() const noexcept { return n_; }
    bool is_cone() const noexcept { return false; }
    bool is_canonical() const noexcept { return true; }
    std::string_view name() const noexcept { return "cube"; }

    bool contains(const Vec& x) const
    {
        return x.size() == n_ && (x.array() > kBoundaryGuard).all()
               && (x.array() < 1 - kBoundaryGuard).all();
    }

    double barrier(const Vec& x) const
    {
        guard(x);
        double f = 0;
        for (Eigen::Index i = 0; i < x.size(); ++i)
            f -= std::log(std::sin(pi * x[i]) / pi);
        return f;
    }
    Vec barrier_gradient(const Vec& x) const
    {
        guard(x);
        Vec g(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i)
            g[i] = -pi / std::tan(pi * x[i]);
        return g;
    }
    Mat metric(const Vec& x) const
    {
        guard(x);
        Vec d(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i)
        {
            const double s = std::sin(pi * x[i]);
            d[i] = pi * pi / (s * s);
        }
        return d.asDiagonal();
    }
    Mat inverse_metric(const Vec& x) const
    {
        guard(x);
        Vec d(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i)
        {
            const double s = std::sin(pi * x[i]);
            d[i] = s * s / (pi * pi);
        }
        return d.asDiagonal();
    }
    // d/dx (sin^2(pi x)/pi^2) = sin(2 pi x)/pi
    Vec inverse_metric_divergence(const Vec& x) const
    {
        guard(x);
        Vec d(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i)
            d[i] = std::sin(2 * pi * x[i]) / pi;
        return d;
    }
    Mat noise_factor(const Vec& x) const
    {
        guard(x);
        Vec d(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i)
            d[i] = std::sin(pi * x[i]) / pi;
        return d.asDiagonal();
    }

  private:
    static constexpr double pi = std::numbers::pi;

    void guard(const Vec& x) const
    {
        if (!contains(x))
            throw DomainError("cube barrier evaluated at " + format_vec(x)
                              + " outside (1e-8, 1 - 1e-8)^n");
    }

    int n_;
};

//---------------------------------------------------------------------------//
/*!
 * Lorentz cone K = {x0 > |(x1..xn)|} in ambient dimension m = n + 1.
 *
 * With q = x^T A x and A = diag(1, -1, ..., -1):
 *   F      = -(m/2) log q + (m/2) log m
 *   g_ij   = -(m/q) (A_ij - 2 (Ax)_i (Ax)_j / q)
 *   g^{ij} = -(1/m) (q B^{ij} - 2 x^i x^j),  B = A^{-1}
 * and d_j g^{ij} = 2 x^i.
 */
class Lorentz
{
  public:
    explicit Lorentz(int ambient_dim) : m_(ambient_dim)
    {
        check_dim(ambient_dim);
        if (ambient_dim < 2)
            throw ValidationError("Lorentz cone needs ambient dimension >= 2");
    }

    int dim() const noexcept { return m_; }
    int spatial_dim() const noexcept { return m_ - 1; }
    bool is_cone() const noexcept { return true; }
    bool is_canonical() const noexcept { return true; }
    std::string_view name() const noexcept { return "lorentz"; }

    /// x^T A x
    static double minkowski(const Vec& x) { return x[0] * x[0] - x.tail(x.size() - 1).squaredNorm(); }
    static Vec apply_form(const Vec& x)
    {
        Vec ax = -x;
        ax[0] = x[0];
        return ax;
    }
    /// b^T B c with B = diag(1, -1, ..., -1)
    static double dual_form(const Vec& b, const Vec& c)
    {
        return b[0] * c[0] - b.tail(b.size() - 1).dot(c.tail(c.size() - 1));
    }

    bool contains(const Vec& x) const
    {
        return x.size() == m_ && x[0] > 0 && x[0] > x.tail(m_ - 1).norm();
    }

    double barrier(const Vec& x) const
    {
        const double q = checked_form(x);
        return -0.5 * m_ * std::log(q) + 0.5 * m_ * std::log(double(m_));
    }
    Vec barrier_gradient(const Vec& x) const
    {
        const double q = checked_form(x);
        return -(double(m_) / q) * apply_form(x);
    }
    Mat metric(const Vec& x) const
    {
        const double q = checked_form(x);
        const Vec ax = apply_form(x);
        Mat g = -(2.0 / q) * ax * ax.transpose();
        g.diagonal() += form_diagonal();
        return -(double(m_) / q) * g;
    }
    Mat inverse_metric(const Vec& x) const
    {
        const double q = checked_form(x);
        Mat ginv = -2.0 * x * x.transpose();
        ginv.diagonal() += q * form_diagonal();
        return -(1.0 / m_) * ginv;
    }
    Vec inverse_metric_divergence(const Vec& x) const
    {
        checked_form(x);
        return 2 * x;
    }

  private:
    Vec form_diagonal() const
    {
        Vec d = Vec::Constant(m_, -1.0);
        d[0] = 1.0;
        return d;
    }
    double checked_form(const Vec& x) const
    {
        if (!contains(x))
            throw DomainError("point " + format_vec(x) + " is outside the Lorentz cone");
        return minkowski(x);
    }

    int m_;
};

//---------------------------------------------------------------------------//
// Light-cone observables on the Lorentz cone
//---------------------------------------------------------------------------//

/// Future light-like covector b = (1, u), |u| = 1, so b^T B b = 0 and b^0 > 0.
class LightVector
{
  public:
    const Vec& coords() const noexcept { return b_; }
    int ambient_dim() const noexcept { return static_cast<int>(b_.size()); }

    friend LightVector make_light_vector(const Vec& u);

  private:
    explicit LightVector(Vec b) : b_(std::move(b)) {}
    Vec b_;
};

inline LightVector make_light_vector(const Vec& u)
{
    if (u.size() < 1 || u.size() + 1 > kMaxDim)
        throw ValidationError("spatial direction has unsupported length");
    if (std::abs(u.norm() - 1.0) >= 1e-12)
        throw ValidationError("light vector direction " + format_vec(u) + " is not a unit vector");
    Vec b(u.size() + 1);
    b[0] = 1.0;
    b.tail(u.size()) = u;
    return LightVector(b);
}

/// b_i = (1, e_i), i = 1..n.
inline std::vector<LightVector> axis_light_vectors(int spatial_dim)
{
    std::vector<LightVector> out;
    for (int i = 0; i < spatial_dim; ++i)
    {
        Vec u = Vec::Zero(spatial_dim);
        u[i] = 1.0;
        out.push_back(make_light_vector(u));
    }
    return out;
}

namespace detail {
inline std::pair<double, double> light_cone_terms(const LightVector& b, const Vec& x)
{
    if (x.size() != b.ambient_dim())
        throw ValidationError("light vector and point dimensions differ");
    const double bx = b.coords().dot(x);
    const double q = Lorentz::minkowski(x);
    if (!(bx > 0) || !(q > 0))
        throw DomainError("auxiliary function undefined at " + format_vec(x)
                          + " (needs b.x > 0 and x^T A x > 0)");
    return {bx, q};
}
}  // namespace detail

/// f_b(x) = (sqrt(m)/2) log((b.x)^2 / x^T A x), m the ambient dimension.
inline double lorentz_aux_f(const LightVector& b, const Vec& x)
{
    const auto [bx, q] = detail::light_cone_terms(b, x);
    const double m = x.size();
    return 0.5 * std::sqrt(m) * std::log(bx * bx / q);
}

inline Vec lorentz_aux_gradient(const LightVector& b, const Vec& x)
{
    const auto [bx, q] = detail::light_cone_terms(b, x);
    const double m = x.size();
    return std::sqrt(m) * (b.coords() / bx - Lorentz::apply_form(x) / q);
}

inline Mat lorentz_aux_hessian(const LightVector& b, const Vec& x)
{
    const auto [bx, q] = detail::light_cone_terms(b, x);
    const double m = x.size();
    const Vec ax = Lorentz::apply_form(x);
    Mat h = -(b.coords() * b.coords().transpose()) / (bx * bx) + (2.0 / (q * q)) * ax * ax.transpose();
    // - A / q
    h(0, 0) -= 1.0 / q;
    for (Eigen::Index i = 1; i < x.size(); ++i)
        h(i, i) += 1.0 / q;
    return std::sqrt(m) * h;
}

inline ScalarField lorentz_aux_field(const LightVector& b)
{
    return ScalarField{[b](const Vec& x) { return lorentz_aux_f(b, x); },
                       [b](const Vec& x) { return lorentz_aux_gradient(b, x); },
                       [b](const Vec& x) { return lorentz_aux_hessian(b, x); }};
}

/// Sigma^{ij} = 1 - (b_i^T B b_j) exp(-(f^i + f^j)/sqrt(m)).
inline double lorentz_sigma(const LightVector& bi, const LightVector& bj, double fi, double fj)
{
    if (!std::isfinite(fi) || !std::isfinite(fj))
        throw ValidationError("lorentz_sigma needs finite observable values");
    if (bi.ambient_dim() != bj.ambient_dim())
        throw ValidationError("light vectors have different dimensions");
    const double m = bi.ambient_dim();
    return 1.0 - Lorentz::dual_form(bi.coords(), bj.coords()) * std::exp(-(fi + fj) / std::sqrt(m));
}

/// Constant drift (n-1)/(2 sqrt(n+1)) of f_b under Brownian motion at beta = 2,
/// n the spatial dimension.
inline double lorentz_mu(int spatial_dim)
{
    if (spatial_dim < 1)
        throw ValidationError("spatial dimension must be >= 1");
    return (spatial_dim - 1) / (2.0 * std::sqrt(spatial_dim + 1.0));
}

//---------------------------------------------------------------------------//
// Runtime selection
//---------------------------------------------------------------------------//
using AnyGeometry = std::variant<Orthant, Cube, Lorentz>;

/// Geometry by CLI name; `dim` is the ambient dimension.
inline AnyGeometry make_geometry(std::string_view name, int dim)
{
    if (name == "orthant")
        return Orthant(dim);
    if (name == "cube")
        return Cube(dim);
    if (name == "lorentz")
        return Lorentz(dim);
    throw ValidationError("unknown geometry '" + std::string(name)
                          + "' (expected orthant, cube or lorentz)");
}

/// A canonical starting point: ones, the cube center, or the cone axis e_0.
template<BarrierGeometry G>
Vec default_start(const G& geometry)
{
    Vec x;
    if constexpr (std::same_as<G, Cube>)
        x = Vec::Constant(geometry.dim(), 0.5);
    else if constexpr (std::same_as<G, Lorentz>)
    {
        x = Vec::Zero(geometry.dim());
        x[0] = 1.0;
    }
    else
        x = Vec::Ones(geometry.dim());
    return x;
}

}  // namespace rle
