#include "rle/certify.hpp"
#include "rle/cones.hpp"
#include "rle/geometry.hpp"
#include "rle/sampling.hpp"
#include "rle/user_geometry.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace rle;

namespace {
constexpr double pi = std::numbers::pi;

// Independent oracle for the orthant: closed forms written out by hand.
double orthant_f(const Vec& x)
{
    double f = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        f -= std::log(x[i]);
    return f;
}
}  // namespace

//---------------------------------------------------------------------------//
// riemannian_gradient
//---------------------------------------------------------------------------//
TEST(RiemannianGradient, OrthantBarrierGradientIsMinusX)
{
    const Orthant g(2);
    const Vec x = make_vec({2, 1});
    const Vec v = riemannian_gradient(g, x, make_vec({-0.5, -1}));
    EXPECT_NEAR(v[0], -2, 1e-14);
    EXPECT_NEAR(v[1], -1, 1e-14);
}

TEST(RiemannianGradient, ZeroCovector)
{
    const Lorentz g(4);
    const Vec v = riemannian_gradient(g, make_vec({2, 0.5, 0.1, -0.3}), Vec::Zero(4));
    EXPECT_EQ(v.cwiseAbs().maxCoeff(), 0.0);
}

TEST(RiemannianGradient, OrthantUnitCovector)
{
    const Orthant g(2);
    const Vec v = riemannian_gradient(g, make_vec({2, 1}), make_vec({1, 0}));
    EXPECT_NEAR(v[0], 4, 1e-14);
    EXPECT_NEAR(v[1], 0, 1e-14);
}

TEST(RiemannianGradient, RejectsExteriorPoint)
{
    const Orthant g(2);
    EXPECT_THROW(riemannian_gradient(g, make_vec({-1, 1}), make_vec({1, 0})), DomainError);
    const Lorentz l(3);
    EXPECT_THROW(riemannian_gradient(l, make_vec({1, 1, 0}), make_vec({1, 0, 0})), DomainError);
}

TEST(RiemannianGradient, SingularMetricReportsConditionEstimate)
{
    UserGeometry::Spec spec;
    spec.dim = 2;
    spec.contains = [](const Vec&) { return true; };
    spec.barrier = [](const Vec& x) { return x[0] * x[0]; };  // degenerate in x1
    spec.hessian = [](const Vec&) {
        Mat h = Mat::Zero(2, 2);
        h(0, 0) = 2;
        return h;
    };
    const UserGeometry g(spec);
    try
    {
        riemannian_gradient(g, make_vec({0.3, 0.2}), make_vec({1, 1}));
        FAIL() << "expected NumericalError";
    }
    catch (const NumericalError& e)
    {
        EXPECT_NE(std::string(e.what()).find("eigenvalues"), std::string::npos);
    }
}

TEST(RiemannianGradient, IllConditionedMetricWarns)
{
    UserGeometry::Spec spec;
    spec.dim = 2;
    spec.contains = [](const Vec&) { return true; };
    spec.barrier = [](const Vec&) { return 0.0; };
    spec.hessian = [](const Vec&) {
        Mat h = Mat::Identity(2, 2);
        h(1, 1) = 1e-14;
        return h;
    };
    std::string seen;
    set_warning_handler([&](const std::string& msg) { seen = msg; });
    const Vec v = riemannian_gradient(UserGeometry(spec), make_vec({0, 0}), make_vec({1, 0}));
    set_warning_handler([](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; });
    EXPECT_NEAR(v[0], 1, 1e-12);
    EXPECT_NE(seen.find("condition"), std::string::npos);
}

//---------------------------------------------------------------------------//
// drift_vector
//---------------------------------------------------------------------------//
TEST(DriftVector, OrthantEqualsX)
{
    const Orthant g(2);
    const Vec b = drift_vector(g, make_vec({2, 1}));
    EXPECT_NEAR(b[0], 2, 1e-14);
    EXPECT_NEAR(b[1], 1, 1e-14);
}

TEST(DriftVector, CubeVanishesAtCenter)
{
    const Cube g(1);
    EXPECT_NEAR(drift_vector(g, make_vec({0.5}))[0], 0, 1e-15);
    // b = sin(2 pi x)/(2 pi)
    EXPECT_NEAR(drift_vector(g, make_vec({0.2}))[0], std::sin(2 * pi * 0.2) / (2 * pi), 1e-14);
}

TEST(DriftVector, LorentzAtAxisMakesBarrierHarmonic)
{
    const Lorentz g(4);
    const Vec x = make_vec({1, 0, 0, 0});
    const Vec b = drift_vector(g, x);
    EXPECT_TRUE(b.allFinite());
    EXPECT_NEAR(laplace_beltrami(g, barrier_field(g), x), 0, 1e-12);
}

TEST(DriftVector, ClosedFormDivergenceMatchesFiniteDifferences)
{
    const Lorentz g(4);
    for (const auto& x : sample_interior_points(g, 20, 3))
        for (int i = 0; i < 4; ++i)
        {
            // d_j g^{ij} is the trace of the Jacobian of row i of g^{-1}
            const Mat jac = fd_jacobian(
                [&](const Vec& y) { return Vec(g.inverse_metric(y).row(i).transpose()); }, x, 1e-5);
            EXPECT_NEAR(jac.trace(), g.inverse_metric_divergence(x)[i], 1e-6);
        }
}

TEST(DriftVector, FallbackMatchesClosedFormOnOrthant)
{
    UserGeometry::Spec spec;
    spec.name = "orthant-fd";
    spec.dim = 2;
    spec.is_cone = true;
    spec.canonical = true;
    spec.contains = [](const Vec& x) { return (x.array() > 0).all(); };
    spec.barrier = orthant_f;
    // With a supplied gradient the metric is a first-order difference, so the
    // divergence stencil on top of it stays accurate.
    spec.gradient = [](const Vec& x) { return Vec(-x.cwiseInverse()); };
    const UserGeometry user(spec);
    const Orthant closed(2);
    const Vec x = make_vec({1.5, 0.7});
    EXPECT_LT((drift_vector(user, x) - drift_vector(closed, x)).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(DriftVector, NonCanonicalFallbackUsesLogDeterminant)
{
    // F = -2 log x on (0, inf): g = 2/x^2, not canonical. sqrt(det g) = sqrt(2)/x,
    // so b = d(x^2/2)/dx + (x^2/2)(-1/x) = x - x/2 = x/2.
    UserGeometry::Spec spec;
    spec.dim = 1;
    spec.contains = [](const Vec& x) { return x[0] > 0; };
    spec.barrier = [](const Vec& x) { return -2 * std::log(x[0]); };
    const UserGeometry g(spec);
    EXPECT_NEAR(drift_vector(g, make_vec({1.3}))[0], 0.65, 1e-4);
}

TEST(DriftVector, RejectsExteriorPoint)
{
    EXPECT_THROW(drift_vector(Cube(1), make_vec({1.5})), DomainError);
}

//---------------------------------------------------------------------------//
// laplace_beltrami
//---------------------------------------------------------------------------//
TEST(LaplaceBeltrami, BarrierIsHarmonicOnCones)
{
    const Orthant o(3);
    const Lorentz l(5);
    for (const auto& x : sample_interior_points(o, 20, 1))
        EXPECT_NEAR(laplace_beltrami(o, barrier_field(o), x), 0, 1e-10);
    for (const auto& x : sample_interior_points(l, 20, 2))
        EXPECT_NEAR(laplace_beltrami(l, barrier_field(l), x), 0, 1e-10);
}

TEST(LaplaceBeltrami, LogCoordinateIsHarmonicOnOrthant)
{
    const Orthant g(2);
    ScalarField f{[](const Vec& x) { return std::log(x[0]); },
                  [](const Vec& x) { return make_vec({1 / x[0], 0}); },
                  [](const Vec& x) {
                      Mat h = Mat::Zero(2, 2);
                      h(0, 0) = -1 / (x[0] * x[0]);
                      return h;
                  }};
    EXPECT_NEAR(laplace_beltrami(g, f, make_vec({2, 1})), 0, 1e-14);
    EXPECT_NEAR(laplace_beltrami(g, f, make_vec({0.3, 7})), 0, 1e-14);
}

TEST(LaplaceBeltrami, LogLightFunctionOnLorentz)
{
    // Delta log(b.x) = (n-1)/(n+1) with n = 3 spatial dimensions.
    const Lorentz g(4);
    const Vec b = make_vec({1, 1, 0, 0});
    ScalarField f{[b](const Vec& x) { return std::log(b.dot(x)); },
                  [b](const Vec& x) { return Vec(b / b.dot(x)); },
                  [b](const Vec& x) { return Mat(-(b * b.transpose()) / std::pow(b.dot(x), 2)); }};
    for (const auto& x : sample_interior_points(g, 10, 7))
        EXPECT_NEAR(laplace_beltrami(g, f, x), 0.5, 1e-10);
}

TEST(LaplaceBeltrami, FiniteDifferenceFieldAgrees)
{
    const Cube g(2);
    const auto f = ScalarField::from_value([](const Vec& x) { return std::sin(x[0]) * x[1]; });
    const ScalarField exact{[](const Vec& x) { return std::sin(x[0]) * x[1]; },
                            [](const Vec& x) { return make_vec({std::cos(x[0]) * x[1], std::sin(x[0])}); },
                            [](const Vec& x) {
                                Mat h(2, 2);
                                h << -std::sin(x[0]) * x[1], std::cos(x[0]), std::cos(x[0]), 0;
                                return h;
                            }};
    const Vec x = make_vec({0.3, 0.6});
    EXPECT_NEAR(laplace_beltrami(g, f, x), laplace_beltrami(g, exact, x), 1e-6);
}

//---------------------------------------------------------------------------//
// monge_ampere_residual
//---------------------------------------------------------------------------//
TEST(MongeAmpere, CubeQuarterPoint)
{
    const Cube g(1);
    const Vec x = make_vec({0.25});
    EXPECT_NEAR(g.barrier(x), std::log(pi * std::sqrt(2.0)), 1e-14);
    EXPECT_NEAR(0.5 * std::log(g.metric(x)(0, 0)), 0.5 * std::log(2 * pi * pi), 1e-14);
    EXPECT_NEAR(monge_ampere_residual(g, x), 0, 1e-13);
}

TEST(MongeAmpere, LorentzAxis)
{
    const Lorentz g(4);
    const Vec x = make_vec({1, 0, 0, 0});
    EXPECT_NEAR(g.barrier(x), 4 * std::log(2.0), 1e-14);
    EXPECT_LT((g.metric(x) - 4 * Mat::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_NEAR(monge_ampere_residual(g, x), 0, 1e-13);
}

TEST(MongeAmpere, OrthantAnyPoint)
{
    const Orthant g(3);
    for (const auto& x : sample_interior_points(g, 10, 5))
        EXPECT_NEAR(monge_ampere_residual(g, x), 0, 1e-13);
}

TEST(MongeAmpere, IndefiniteHessianIsNumericalError)
{
    UserGeometry::Spec spec;
    spec.dim = 1;
    spec.contains = [](const Vec&) { return true; };
    spec.barrier = [](const Vec& x) { return -x[0] * x[0]; };
    spec.hessian = [](const Vec&) { return Mat::Constant(1, 1, -2.0); };
    EXPECT_THROW(monge_ampere_residual(UserGeometry(spec), make_vec({0.1})), NumericalError);
}

//---------------------------------------------------------------------------//
// cone_identity_check
//---------------------------------------------------------------------------//
TEST(ConeIdentity, OrthantExamples)
{
    const Orthant g(2);
    for (const Vec& x : {make_vec({2, 1}), make_vec({1, 1})})
    {
        const auto r = cone_identity_check(g, x);
        EXPECT_LT(r.gradient_plus_x.cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_NEAR(r.norm_minus_dim, 0, 1e-14);
        EXPECT_NEAR(r.laplacian, 0, 1e-14);
    }
    EXPECT_LT((g.metric(make_vec({1, 1})) - Mat::Identity(2, 2)).norm(), 1e-15);
}

TEST(ConeIdentity, LorentzAxisNormIsAmbientDimension)
{
    const Lorentz g(4);
    const Vec x = make_vec({1, 0, 0, 0});
    const Vec dF = g.barrier_gradient(x);
    EXPECT_NEAR(cometric_product(g, x, dF, dF), 4, 1e-13);
    const auto r = cone_identity_check(g, x);
    EXPECT_LT(r.gradient_plus_x.cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_NEAR(r.norm_minus_dim, 0, 1e-13);
    EXPECT_NEAR(r.laplacian, 0, 1e-13);
}

TEST(ConeIdentity, CubeIsUsageError)
{
    EXPECT_THROW(cone_identity_check(Cube(2), make_vec({0.5, 0.5})), UsageError);
}

//---------------------------------------------------------------------------//
// finite differences
//---------------------------------------------------------------------------//
TEST(FiniteDifference, Polynomial)
{
    const Vec g = fd_gradient([](const Vec& x) { return x[0] * x[0]; }, make_vec({3}), 1e-4);
    EXPECT_NEAR(g[0], 6.0, 1e-7);
}

TEST(FiniteDifference, OrthantGradient)
{
    const Vec g = fd_gradient(orthant_f, make_vec({2, 1}), 1e-5);
    EXPECT_NEAR(g[0], -0.5, 1e-8);
    EXPECT_NEAR(g[1], -1.0, 1e-8);
}

TEST(FiniteDifference, LorentzHessianMatchesMetric)
{
    const Lorentz g(4);
    const Vec x = make_vec({2, 1, 0, 0});
    const Mat fd = fd_hessian([&](const Vec& y) { return g.barrier(y); }, x, 1e-4);
    const Mat exact = g.metric(x);
    EXPECT_LT((fd - exact).cwiseAbs().maxCoeff() / exact.cwiseAbs().maxCoeff(), 1e-4);
}

TEST(FiniteDifference, StencilErrorNamesCoordinate)
{
    const Orthant g(2);
    try
    {
        fd_gradient([&](const Vec& y) { return g.barrier(y); }, make_vec({1, 1e-6}), 1e-5,
                    [&](const Vec& y) { return g.contains(y); });
        FAIL() << "expected StencilError";
    }
    catch (const StencilError& e)
    {
        EXPECT_EQ(e.coordinate(), 1);
    }
}

TEST(FiniteDifference, RejectsNonPositiveStep)
{
    EXPECT_THROW(fd_gradient([](const Vec& x) { return x[0]; }, make_vec({1}), 0.0), ValidationError);
}

//---------------------------------------------------------------------------//
// Invariants at sampled interior points
//---------------------------------------------------------------------------//
class GeometryInvariants : public ::testing::TestWithParam<std::pair<std::string, int>>
{
};

TEST_P(GeometryInvariants, CertificatePasses)
{
    const auto [name, dim] = GetParam();
    std::visit(
        [&](const auto& g) {
            const auto cert = certify_geometry(g, 100, 42);
            for (const auto& c : cert.checks)
                EXPECT_TRUE(c.pass()) << name << " " << c.name << " residual " << c.max_residual;
        },
        make_geometry(name, dim));
}

TEST_P(GeometryInvariants, RiemannianGradientOfBarrier)
{
    const auto [name, dim] = GetParam();
    std::visit(
        [&](const auto& g) {
            if (!g.is_cone())
                return;
            for (const auto& x : sample_interior_points(g, 100, 9))
                EXPECT_LT((riemannian_gradient(g, x, g.barrier_gradient(x)) + x).cwiseAbs().maxCoeff(), 1e-8);
        },
        make_geometry(name, dim));
}

TEST_P(GeometryInvariants, MetricIsSymmetricPositiveDefinite)
{
    const auto [name, dim] = GetParam();
    std::visit(
        [&](const auto& g) {
            for (const auto& x : sample_interior_points(g, 100, 10))
            {
                const Mat m = g.metric(x);
                EXPECT_LT((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-12);
                Eigen::SelfAdjointEigenSolver<Mat> eig(m);
                EXPECT_GT(eig.eigenvalues().minCoeff(), 0);
            }
        },
        make_geometry(name, dim));
}

INSTANTIATE_TEST_SUITE_P(BuiltIn, GeometryInvariants,
                         ::testing::Values(std::pair<std::string, int>{"orthant", 1},
                                           std::pair<std::string, int>{"orthant", 2},
                                           std::pair<std::string, int>{"orthant", 5},
                                           std::pair<std::string, int>{"cube", 1},
                                           std::pair<std::string, int>{"cube", 3},
                                           std::pair<std::string, int>{"lorentz", 4},
                                           std::pair<std::string, int>{"lorentz", 9}),
                         [](const auto& info) {
                             return info.param.first + std::to_string(info.param.second);
                         });

TEST(InteriorPoint, Validation)
{
    const Cube g(2);
    EXPECT_NO_THROW(InteriorPoint(g, make_vec({0.2, 0.3})));
    EXPECT_THROW(InteriorPoint(g, make_vec({0.2, 1.3})), DomainError);
    EXPECT_THROW(InteriorPoint(g, make_vec({0.2})), ValidationError);
    EXPECT_THROW(InteriorPoint(g, make_vec({NAN, 0.5})), DomainError);
}

TEST(MakeGeometry, UnknownNameIsValidationError)
{
    EXPECT_THROW(make_geometry("frustum", 3), ValidationError);
    EXPECT_THROW(make_geometry("lorentz", 1), ValidationError);
    EXPECT_THROW(make_geometry("orthant", 0), ValidationError);
}
