#pragma once

#include "rle/geometry.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace rle {

//---------------------------------------------------------------------------//
/*!
 * Loss function E for the Riemannian Langevin equation.
 *
 *   linear     E = c.x
 *   quadratic  E = 1/2 (x - m)^T Q (x - m),  Q symmetric PSD
 *   barrier    E = alpha F
 */
class EnergySpec
{
  public:
    enum class Kind { linear, quadratic, barrier };

    static EnergySpec linear(Vec c)
    {
        EnergySpec e;
        e.kind_ = Kind::linear;
        e.c_ = std::move(c);
        return e;
    }
    static EnergySpec quadratic(Vec m, Mat q)
    {
        if (q.rows() != m.size() || q.cols() != m.size())
            throw ValidationError("quadratic energy: Q must be square with the size of m");
        if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12)
            throw ValidationError("quadratic energy: Q is not symmetric");
        Eigen::SelfAdjointEigenSolver<Mat> eig(q, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() < -1e-12)
            throw ValidationError("quadratic energy: Q is not positive semidefinite");
        EnergySpec e;
        e.kind_ = Kind::quadratic;
        e.c_ = std::move(m);
        e.q_ = std::move(q);
        return e;
    }
    static EnergySpec barrier(double alpha)
    {
        if (!std::isfinite(alpha))
            throw ValidationError("barrier energy: alpha must be finite");
        EnergySpec e;
        e.kind_ = Kind::barrier;
        e.alpha_ = alpha;
        return e;
    }

    Kind kind() const noexcept { return kind_; }
    double alpha() const noexcept { return alpha_; }

    template<BarrierGeometry G>
    double value(const G& geometry, const Vec& x) const
    {
        switch (kind_)
        {
            case Kind::linear:
                return c_.dot(x);
            case Kind::quadratic: {
                const Vec d = x - c_;
                return 0.5 * d.dot(q_ * d);
            }
            case Kind::barrier:
                return alpha_ * geometry.barrier(x);
        }
        return 0;
    }

    /// Euclidean gradient dE.
    template<BarrierGeometry G>
    Vec gradient(const G& geometry, const Vec& x) const
    {
        switch (kind_)
        {
            case Kind::linear:
                return c_;
            case Kind::quadratic:
                return q_ * (x - c_);
            case Kind::barrier:
                return alpha_ * geometry.barrier_gradient(x);
        }
        return Vec::Zero(x.size());
    }

    void check_dim(int dim) const
    {
        if (kind_ != Kind::barrier && c_.size() != dim)
            throw ValidationError("energy parameters have dimension " + std::to_string(c_.size())
                                  + ", geometry has " + std::to_string(dim));
    }

  private:
    Kind kind_ = Kind::linear;
    Vec c_;  // linear coefficient, or the quadratic center m
    Mat q_;
    double alpha_ = 0;
};

namespace detail {
inline std::vector<double> parse_list(std::string_view text)
{
    std::vector<double> out;
    while (!text.empty())
    {
        const auto comma = text.find(',');
        std::string item(text.substr(0, comma));
        std::size_t used = 0;
        double v = 0;
        try
        {
            v = std::stod(item, &used);
        }
        catch (const std::exception&)
        {
            used = std::string::npos;
        }
        if (used != item.size())
            throw ValidationError("cannot parse number '" + item + "'");
        out.push_back(v);
        if (comma == std::string_view::npos)
            break;
        text.remove_prefix(comma + 1);
    }
    return out;
}

inline Vec broadcast(const std::vector<double>& values, int dim, std::string_view what)
{
    if (values.size() == 1)
        return Vec::Constant(dim, values[0]);
    if (static_cast<int>(values.size()) != dim)
        throw ValidationError(std::string(what) + " needs 1 or " + std::to_string(dim) + " values");
    Vec v(dim);
    for (int i = 0; i < dim; ++i)
        v[i] = values[i];
    return v;
}
}  // namespace detail

/*!
 * Parse the CLI energy grammar: `linear:c=...`, `quadratic:m=...,q=...`,
 * `barrier:alpha=...`, or `zero`.
 *
 * Lists are comma separated. A single value is broadcast over the dimension.
 * For `q`, one value means q*I, `dim` values a diagonal, dim^2 a full matrix
 * in row-major order.
 */
inline EnergySpec parse_energy(std::string_view text, int dim)
{
    if (text == "zero" || text.empty())
        return EnergySpec::linear(Vec::Zero(dim));
    const auto colon = text.find(':');
    if (colon == std::string_view::npos)
        throw ValidationError("energy '" + std::string(text) + "' must look like kind:key=value");
    const auto kind = text.substr(0, colon);
    auto rest = text.substr(colon + 1);

    // Split "key=v,v,key=v" into key -> list; a new key starts at "name=".
    std::vector<std::pair<std::string, std::string>> params;
    while (!rest.empty())
    {
        const auto eq = rest.find('=');
        if (eq == std::string_view::npos)
            throw ValidationError("energy parameter without '=' in '" + std::string(text) + "'");
        std::string key(rest.substr(0, eq));
        rest.remove_prefix(eq + 1);
        // value runs until the next ",name=" or the end
        std::size_t end = rest.size();
        for (std::size_t i = 0; i < rest.size(); ++i)
        {
            if (rest[i] != ',')
                continue;
            const auto next_eq = rest.find('=', i + 1);
            const auto next_comma = rest.find(',', i + 1);
            if (next_eq != std::string_view::npos && (next_comma == std::string_view::npos || next_eq < next_comma))
            {
                end = i;
                break;
            }
        }
        params.emplace_back(key, std::string(rest.substr(0, end)));
        rest.remove_prefix(end == rest.size() ? end : end + 1);
    }
    auto get = [&](const std::string& key) -> const std::string& {
        for (const auto& [k, v] : params)
            if (k == key)
                return v;
        throw ValidationError("energy '" + std::string(kind) + "' is missing parameter '" + key + "'");
    };
    auto check_keys = [&](std::initializer_list<std::string_view> allowed) {
        for (const auto& [k, v] : params)
        {
            bool ok = false;
            for (auto a : allowed)
                ok = ok || (k == a);
            if (!ok)
                throw ValidationError("unknown energy parameter '" + k + "'");
        }
    };

    if (kind == "linear")
    {
        check_keys({"c"});
        return EnergySpec::linear(detail::broadcast(detail::parse_list(get("c")), dim, "c"));
    }
    if (kind == "quadratic")
    {
        check_keys({"m", "q"});
        const Vec m = detail::broadcast(detail::parse_list(get("m")), dim, "m");
        const auto qv = detail::parse_list(get("q"));
        Mat q = Mat::Zero(dim, dim);
        if (qv.size() == 1)
            q.diagonal().setConstant(qv[0]);
        else if (static_cast<int>(qv.size()) == dim)
            for (int i = 0; i < dim; ++i)
                q(i, i) = qv[i];
        else if (static_cast<int>(qv.size()) == dim * dim)
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j)
                    q(i, j) = qv[i * dim + j];
        else
            throw ValidationError("q needs 1, dim or dim^2 values");
        return EnergySpec::quadratic(m, q);
    }
    if (kind == "barrier")
    {
        check_keys({"alpha"});
        const auto a = detail::parse_list(get("alpha"));
        if (a.size() != 1)
            throw ValidationError("alpha takes a single value");
        return EnergySpec::barrier(a[0]);
    }
    throw ValidationError("unknown energy kind '" + std::string(kind) + "'");
}

}  // namespace rle
