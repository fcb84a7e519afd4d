#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>

namespace rle {

/// Largest ambient dimension supported. Vectors and matrices live on the stack
/// up to this size, so the integrators never touch the heap inside a step.
inline constexpr int kMaxDim = 32;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

//---------------------------------------------------------------------------//
// Errors
//---------------------------------------------------------------------------//
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// Point outside the open domain, or an observable undefined there.
class DomainError : public Error
{
  public:
    using Error::Error;
};

// Singular or indefinite matrix, non-finite value.
class NumericalError : public Error
{
  public:
    using Error::Error;
};

// Operation called with arguments of the wrong kind (wrong geometry, bad beta).
class UsageError : public Error
{
  public:
    using Error::Error;
};

// Malformed input: unknown names, bad parameters, non-unit vectors.
class ValidationError : public Error
{
  public:
    using Error::Error;
};

// Finite-difference stencil left the domain.
class StencilError : public DomainError
{
  public:
    StencilError(int coordinate, const std::string& what)
        : DomainError(what), coordinate_(coordinate)
    {
    }
    int coordinate() const noexcept { return coordinate_; }

  private:
    int coordinate_;
};

// Euler-Maruyama step kept exiting the domain after every resample.
class StepFailure : public Error
{
  public:
    StepFailure(std::size_t replica, double time, const std::string& what)
        : Error(what), replica_(replica), time_(time)
    {
    }
    std::size_t replica() const noexcept { return replica_; }
    double time() const noexcept { return time_; }

  private:
    std::size_t replica_;
    double time_;
};

class ConvergenceError : public Error
{
  public:
    ConvergenceError(double decrement, const std::string& what)
        : Error(what), decrement_(decrement)
    {
    }
    double decrement() const noexcept { return decrement_; }

  private:
    double decrement_;
};

// A statistical test's precondition does not hold (e.g. non-normalizable target).
class PreconditionError : public Error
{
  public:
    using Error::Error;
};

//---------------------------------------------------------------------------//
// Helpers
//---------------------------------------------------------------------------//
inline bool all_finite(const Vec& v)
{
    return v.allFinite();
}

inline std::string format_vec(const Vec& v)
{
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (Eigen::Index i = 0; i < v.size(); ++i)
    {
        if (i)
            os << ", ";
        os << v[i];
    }
    os << ')';
    return os.str();
}

inline Vec make_vec(std::initializer_list<double> values)
{
    Vec v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values)
        v[i++] = x;
    return v;
}

inline void check_dim(int dim)
{
    if (dim < 1 || dim > kMaxDim)
        throw ValidationError("dimension " + std::to_string(dim) + " outside [1, "
                              + std::to_string(kMaxDim) + "]");
}

}  // namespace rle
