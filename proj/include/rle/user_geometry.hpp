#pragma once

#include "rle/geometry.hpp"

#include <functional>
#include <string>
#include <utility>

namespace rle {

//---------------------------------------------------------------------------//
/*!
 * Geometry defined by a user-supplied barrier.
 *
 * Only F and the domain test are required. Missing derivatives are taken by
 * central differences; the inverse-metric divergence always is (h = 1e-5).
 * When `canonical` is false the Laplace-Beltrami drift uses the gradient of
 * 1/2 log det g instead of dF.
 */
class UserGeometry
{
  public:
    struct Spec
    {
        std::string name = "user";
        int dim = 1;
        bool is_cone = false;
        bool canonical = false;
        std::function<bool(const Vec&)> contains;
        std::function<double(const Vec&)> barrier;
        std::function<Vec(const Vec&)> gradient;  // optional
        std::function<Mat(const Vec&)> hessian;   // optional
        double gradient_step = 1e-6;
        double hessian_step = 1e-4;
    };

    explicit UserGeometry(Spec spec) : spec_(std::move(spec))
    {
        check_dim(spec_.dim);
        if (!spec_.contains || !spec_.barrier)
            throw ValidationError("user geometry needs a domain test and a barrier");
    }

    int dim() const noexcept { return spec_.dim; }
    bool is_cone() const noexcept { return spec_.is_cone; }
    bool is_canonical() const noexcept { return spec_.canonical; }
    std::string_view name() const noexcept { return spec_.name; }

    bool contains(const Vec& x) const { return x.size() == spec_.dim && spec_.contains(x); }
    double barrier(const Vec& x) const { return spec_.barrier(x); }

    Vec barrier_gradient(const Vec& x) const
    {
        if (spec_.gradient)
            return spec_.gradient(x);
        return fd_gradient(spec_.barrier, x, spec_.gradient_step, domain());
    }
    Mat metric(const Vec& x) const
    {
        if (spec_.hessian)
            return spec_.hessian(x);
        if (spec_.gradient)
        {
            Mat j = fd_jacobian(spec_.gradient, x, spec_.hessian_step, domain());
            return 0.5 * (j + j.transpose());
        }
        return fd_hessian(spec_.barrier, x, spec_.hessian_step, domain());
    }
    Mat inverse_metric(const Vec& x) const
    {
        Eigen::LLT<Mat> llt(metric(x));
        if (llt.info() != Eigen::Success)
            throw NumericalError("user metric is not positive definite at " + format_vec(x));
        return llt.solve(Mat::Identity(spec_.dim, spec_.dim));
    }
    /// d_j g^{ij} by central differences of the inverse metric.
    Vec inverse_metric_divergence(const Vec& x) const
    {
        const auto n = x.size();
        Vec div = Vec::Zero(n);
        for (Eigen::Index j = 0; j < n; ++j)
        {
            Vec xp = x, xm = x;
            xp[j] += kFallbackStep;
            xm[j] -= kFallbackStep;
            detail::check_stencil(domain(), xp, static_cast<int>(j));
            detail::check_stencil(domain(), xm, static_cast<int>(j));
            div += (inverse_metric(xp).col(j) - inverse_metric(xm).col(j)) / (2 * kFallbackStep);
        }
        return div;
    }

  private:
    DomainPredicate domain() const
    {
        return [this](const Vec& y) { return contains(y); };
    }

    Spec spec_;
};

}  // namespace rle
