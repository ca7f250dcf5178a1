#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

#include "dpinn/metrics.hpp"
#include "dpinn/train.hpp"

namespace {

using dpinn::Array;
using dpinn::BoundInputs;
using dpinn::BoundKind;
using dpinn::Domain;
using dpinn::Matrix;
using dpinn::MlpParams;
namespace ex = dpinn::exact;

ex::Reference reference_xt(std::function<double(double, double)> f) {
    return ex::Reference("test", 2, [f](const Eigen::Ref<const Eigen::VectorXd>& p) { return f(p(1), p(0)); });
}

MlpParams random_network(const Domain& d, std::uint64_t seed) {
    MlpParams p = dpinn::init_params({2, 8, 8, 1}, seed);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (Eigen::Index i = 0; i < p.theta().size(); ++i) {
        p.theta()(i) += 0.3 * u(rng);
    }
    dpinn::normalize_inputs(p, d);
    return p;
}

constexpr BoundKind all_kinds[] = {BoundKind::kdv_kawahara, BoundKind::camassa_holm, BoundKind::benjamin_ono};

BoundInputs random_inputs(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 2.0);
    BoundInputs in;
    in.T = 0.5 + u(rng);
    in.e_tb = u(rng);
    in.e_sb = u(rng);
    in.e_int = u(rng);
    in.kappa = u(rng);
    for (Eigen::Index i = 0; i < in.model_sups.size(); ++i) {
        in.model_sups(i) = u(rng);
        in.exact_sups(i) = u(rng);
    }
    return in;
}

class MetricsTest : public ::testing::Test {
protected:
    Domain unit{0.0, 1.0, 1.0, {}, {}};
    Domain kdv{-5.0, 5.0, 1.0, {}, {}};
};

TEST_F(MetricsTest, TrapezoidGridIntegratesBilinearExactly) {
    const auto q = dpinn::tensor_quadrature(Domain{-1.0, 3.0, 2.0, {}, {}}, 17, 9);
    EXPECT_NEAR(q.weights.sum(), 8.0, 1e-13);
    // int_{-1}^{3} int_0^2 (1 + x)(2 + t) dt dx = 8 * 6
    const Array f = (1.0 + q.points.row(1).array()) * (2.0 + q.points.row(0).array());
    EXPECT_NEAR((q.weights * f).sum(), 48.0, 1e-12);
}

TEST_F(MetricsTest, GeneralizationErrorOfIdenticalAndShiftedFields) {
    const auto q = dpinn::tensor_quadrature(unit, 33, 33);
    const Array u = (q.points.row(1).array() * 3.0).sin();
    EXPECT_EQ(dpinn::generalization_error(u, u, q.weights).absolute, 0.0);
    EXPECT_NEAR(dpinn::generalization_error(u + 1.0, u, q.weights).absolute, 1.0, 1e-14);
    EXPECT_NEAR(dpinn::generalization_error(1.01 * u, u, q.weights).relative, 0.01, 1e-14);
}

TEST_F(MetricsTest, ParametricQuadratureAveragesOverTheBox) {
    Domain d = kdv;
    d.param_lo = {8.7, -0.4, 0.9, 0.9};
    d.param_hi = {9.3, 0.4, 1.1, 1.1};
    const auto q = dpinn::parametric_quadrature(d, 9, 5, 64);
    EXPECT_EQ(q.points.rows(), 6);
    EXPECT_EQ(q.points.cols(), 9 * 5 * 64);
    EXPECT_NEAR(q.weights.sum(), 10.0, 1e-12);
}

TEST_F(MetricsTest, SupNormOfConstants) {
    MlpParams p = dpinn::init_params({2, 4, 1}, 3);
    p.theta().setZero();
    p.bias(1)(0) = -2.5;
    const Matrix net = dpinn::derivative_sups(p, kdv, 1, 4, 32, 32);
    const Matrix ref = dpinn::derivative_sups(reference_xt([](double, double) { return -2.5; }), kdv, 1, 4, 32, 32);
    for (int m = 0; m <= 1; ++m) {
        for (int n = 0; n <= 4; ++n) {
            EXPECT_EQ(dpinn::mixed_norm(net, m, n), 2.5);
            EXPECT_NEAR(dpinn::mixed_norm(ref, m, n), 2.5, 1e-9);
        }
    }
}

TEST_F(MetricsTest, SupNormOfSine) {
    const Domain d{0.0, 2.0 * std::numbers::pi, 1.0, {}, {}};
    const Matrix s = dpinn::derivative_sups(reference_xt([](double x, double) { return std::sin(x); }), d, 0, 1);
    EXPECT_NEAR(dpinn::mixed_norm(s, 0, 1), 2.0, 1e-3);
}

TEST_F(MetricsTest, SupNormOfKdvSoliton) {
    const Matrix s = dpinn::derivative_sups(ex::make_reference("kdv_single"), kdv, 0, 0);
    EXPECT_NEAR(s(0, 0), 9.0, 1e-3);
}

TEST_F(MetricsTest, JetAndDifferenceSupsAgree) {
    const MlpParams p = random_network(kdv, 5);
    const ex::Reference wrapped("net", 2, [&](const Eigen::Ref<const Eigen::VectorXd>& x) {
        return dpinn::evaluate(p, x)(0);
    });
    const Matrix a = dpinn::derivative_sups(p, kdv, 1, 4, 96, 48);
    const Matrix b = dpinn::derivative_sups(wrapped, kdv, 1, 4, 96, 48);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        EXPECT_NEAR(a(i), b(i), 1e-5 * (1.0 + a(i))) << "entry " << i;
    }
}

TEST_F(MetricsTest, BoundsVanishWithoutResiduals) {
    std::mt19937_64 rng(1);
    BoundInputs in = random_inputs(rng);
    in.e_tb = in.e_sb = in.e_int = 0.0;
    for (BoundKind k : all_kinds) {
        EXPECT_EQ(dpinn::proof_bound(k, in).rhs, 0.0);
        EXPECT_EQ(dpinn::theorem_bound(k, in).rhs, 0.0);
        in.tails = dpinn::QuadratureTails{};
        EXPECT_EQ(dpinn::theorem_bound(k, in).rhs, 0.0);
        in.tails.reset();
    }
}

TEST_F(MetricsTest, BoundsAreMonotoneAndSublinear) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const BoundInputs a = random_inputs(rng);
        for (BoundKind k : all_kinds) {
            for (int field = 0; field < 3; ++field) {
                BoundInputs b = a;
                double* e = field == 0 ? &b.e_tb : field == 1 ? &b.e_sb : &b.e_int;
                *e += u(rng);
                EXPECT_GE(dpinn::proof_bound(k, b).rhs, dpinn::proof_bound(k, a).rhs);
                EXPECT_GE(dpinn::theorem_bound(k, b).rhs, dpinn::theorem_bound(k, a).rhs);
            }
            const double s = 1.0 + 5.0 * u(rng);
            BoundInputs b = a;
            b.e_tb *= s;
            b.e_sb *= s;
            b.e_int *= s;
            EXPECT_LE(dpinn::proof_bound(k, b).rhs, s * dpinn::proof_bound(k, a).rhs * (1.0 + 1e-14));
            EXPECT_LE(dpinn::theorem_bound(k, b).rhs, s * dpinn::theorem_bound(k, a).rhs * (1.0 + 1e-14));
        }
    }
}

TEST_F(MetricsTest, BoundConstantsOnUnitSups) {
    BoundInputs in;
    in.T = 1.0;
    in.e_tb = in.e_sb = in.e_int = 1.0;
    in.kappa = 0.5;
    in.model_sups.setOnes();
    in.exact_sups.setOnes();
    // Hand evaluation with every derivative sup equal to one:
    // ||.||_{C^0 C^0} = 1, C^0 C^1 = 2, C^0 C^2 = 3, C^0 C^3 = 4, C^0 C^4 = 5, C^1 C^1 = 4.
    const double e7 = std::exp(7.0);
    EXPECT_NEAR(dpinn::proof_bound(BoundKind::kdv_kawahara, in).rhs, std::sqrt((1 + 7 * e7) * (1 + 100 + 2 + 1)),
                1e-9);
    const double e_ch = std::exp(2.0 * 12.5);
    EXPECT_NEAR(dpinn::proof_bound(BoundKind::camassa_holm, in).rhs,
                std::sqrt((1 + 25 * e_ch) * (1 + 8 * 16 + 2 * 6.5 + 1)), 1e-9 * std::sqrt(25 * e_ch * 143));
    const double e_bo = std::exp(2.0 * 3.5);
    EXPECT_NEAR(dpinn::proof_bound(BoundKind::benjamin_ono, in).rhs, std::sqrt((1 + 7 * e_bo) * (1 + 2 * 8 + 1)),
                1e-9);
    const auto th = dpinn::theorem_bound(BoundKind::kdv_kawahara, in);
    ASSERT_EQ(th.constants.size(), 4u);
    EXPECT_NEAR(th.constants[3], 3.5, 1e-15);
    EXPECT_NEAR(th.constants[1], std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(th.constants[2], std::sqrt(100.0), 1e-13);
    EXPECT_NEAR(th.rhs, std::sqrt(1 + 7 * e7) * (2 + std::sqrt(2.0) + 10.0), 1e-9);
}

TEST_F(MetricsTest, InitialResidualIntegralOfTheZeroNetwork) {
    MlpParams p = dpinn::init_params({2, 4, 1}, 1);
    p.theta().setZero();
    dpinn::EquationSpec spec;
    spec.data = ex::make_reference("kdv_single");
    dpinn::VerifyOptions opt;
    opt.nx = 801;
    opt.nt = 33;
    const auto r = dpinn::residual_integrals(p, spec, kdv, opt);
    // int_{-5}^{5} 81 sech^4(k x) dx = (162 / k) (tanh(5k) - tanh^3(5k) / 3)
    const double k = std::sqrt(0.75);
    const double th = std::tanh(5.0 * k);
    EXPECT_NEAR(r.temporal, 162.0 / k * (th - th * th * th / 3.0), 1e-4);
    EXPECT_EQ(r.interior, 0.0);
    EXPECT_GT(r.spatial, 0.0);
}

TEST_F(MetricsTest, ZeroNetworkOnZeroDataHasZeroBound) {
    MlpParams p = dpinn::init_params({2, 4, 1}, 1);
    p.theta().setZero();
    dpinn::EquationSpec spec;
    spec.data = ex::make_reference("zero");
    dpinn::VerifyOptions opt{64, 32, 64, 8, 32, 32};
    const auto v = dpinn::verify_bound(p, spec, kdv, opt);
    EXPECT_EQ(v.error.absolute, 0.0);
    EXPECT_EQ(v.integrals.temporal + v.integrals.spatial + v.integrals.interior, 0.0);
    EXPECT_EQ(v.proof.rhs, 0.0);
    EXPECT_TRUE(v.satisfied);
}

// The proof inequality holds for any smooth u*, so an untrained network
// must satisfy it too, once the integrals are resolved.
TEST_F(MetricsTest, ProofBoundHoldsForRandomNetworks) {
    dpinn::VerifyOptions opt{256, 128, 128, 32, 128, 128};
    struct Case {
        std::string ref;
        Domain domain;
        dpinn::EquationKind kind;
        double kappa;
        dpinn::HilbertTransform::Kind hilbert;
    };
    const std::vector<Case> cases = {
        {"kdv_single", kdv, dpinn::EquationKind::kdv_kawahara, 0.0, dpinn::HilbertTransform::Kind::periodic},
        {"ch_single", {-10.0, 10.0, 1.0, {}, {}}, dpinn::EquationKind::camassa_holm, 0.36,
         dpinn::HilbertTransform::Kind::periodic},
        {"bo_periodic_single", {-15.0, 15.0, 1.0, {}, {}}, dpinn::EquationKind::benjamin_ono, 0.0,
         dpinn::HilbertTransform::Kind::periodic},
    };
    for (const auto& c : cases) {
        dpinn::EquationSpec spec;
        spec.kind = c.kind;
        spec.kappa = c.kappa;
        spec.hilbert = c.hilbert;
        spec.data = ex::make_reference(c.ref);
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            const auto v = dpinn::verify_bound(random_network(c.domain, seed), spec, c.domain, opt);
            EXPECT_TRUE(v.satisfied) << c.ref << " seed " << seed << ": " << v.error.absolute << " > " << v.proof.rhs;
            EXPECT_GT(v.error.absolute, 0.0);
        }
    }
}

TEST_F(MetricsTest, ParametricProblemHasNoBound) {
    EXPECT_FALSE(dpinn::bound_kind(dpinn::EquationKind::kdv_parametric).has_value());
    dpinn::EquationSpec spec;
    spec.kind = dpinn::EquationKind::kdv_parametric;
    EXPECT_THROW(dpinn::verify_bound(MlpParams({6, 2, 1}), spec, kdv), std::invalid_argument);
}

class UqTest : public MetricsTest {
protected:
    Domain box() const {
        Domain d = kdv;
        d.param_lo = {8.7, -0.4, 0.9, 0.9};
        d.param_hi = {9.3, 0.4, 1.1, 1.1};
        return d;
    }
    static Matrix xt_grid() { return dpinn::tensor_quadrature(Domain{-5.0, 5.0, 1.0, {}, {}}, 21, 6).points; }
    static dpinn::FieldFn exact_family() {
        const ex::Reference ref = ex::make_reference("kdv_param");
        return [ref](const Matrix& in) { return ref.evaluate(in); };
    }
};

TEST_F(UqTest, SampleMeanMatchesBoxCentre) {
    const Matrix s = dpinn::parameter_samples(box(), 1024);
    const Eigen::Vector4d mean = s.rowwise().mean();
    EXPECT_NEAR(mean(0), 9.0, 1e-2);
    EXPECT_NEAR(mean(1), 0.0, 1e-2);
    EXPECT_NEAR(mean(2), 1.0, 1e-2);
    EXPECT_NEAR(mean(3), 1.0, 1e-2);
}

TEST_F(UqTest, DegenerateBoxHasNoSpread) {
    Domain d = box();
    d.param_lo = d.param_hi = {9.1, 0.1, 1.05, 0.95};
    const Matrix xt = xt_grid();
    const auto f = dpinn::uq_statistics(exact_family(), d, xt, 16);
    EXPECT_EQ(f.std.abs().maxCoeff(), 0.0);
    Matrix in(6, xt.cols());
    in.topRows(2) = xt;
    in.bottomRows(4) = Eigen::Vector4d(9.1, 0.1, 1.05, 0.95).replicate(1, xt.cols());
    const Array single = exact_family()(in);
    EXPECT_EQ((f.mean - single).abs().maxCoeff(), 0.0);
}

TEST_F(UqTest, ExactFieldsStableUnderDoubling) {
    const Matrix xt = xt_grid();
    const int n = 256;
    const auto a = dpinn::uq_statistics(exact_family(), box(), xt, n);
    const auto b = dpinn::uq_statistics(exact_family(), box(), xt, 2 * n);
    const double tol = 2.0 / std::sqrt(n) * a.std.maxCoeff();
    EXPECT_LE((a.mean - b.mean).abs().maxCoeff(), tol);
    EXPECT_LE((a.std - b.std).abs().maxCoeff(), tol);
    EXPECT_GT(a.std.maxCoeff(), 0.0);
}

}  // namespace
