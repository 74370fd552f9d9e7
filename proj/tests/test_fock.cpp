#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "tcsim/fock.hpp"

using namespace tcsim;

namespace
{

// Independent Poisson tail: 1 - sum_{n<=cutoff} p_n with a running product.
double poisson_tail_oracle(double mean, std::size_t cutoff)
{
    long double p = std::exp(-static_cast<long double>(mean));
    long double head = p;
    for (std::size_t n = 1; n <= cutoff; ++n)
    {
        p *= mean / static_cast<long double>(n);
        head += p;
    }
    return static_cast<double>(1.0L - head);
}

}  // namespace

TEST(ModeOperators, CutoffOneLowering)
{
    const auto ops = build_mode_operators(FockSpace{1});
    ASSERT_EQ(ops.lower.entries.rows(), 2);
    EXPECT_EQ(ops.lower.entries(0, 1), complex(1.0, 0.0));
    EXPECT_EQ(ops.lower.entries(0, 0), complex(0.0));
    EXPECT_EQ(ops.lower.entries(1, 0), complex(0.0));
    EXPECT_EQ(ops.lower.entries(1, 1), complex(0.0));
}

TEST(ModeOperators, NumberDiagonal)
{
    const auto ops = build_mode_operators(FockSpace{3});
    for (int n = 0; n < 4; ++n) EXPECT_EQ(ops.number.entries(n, n).real(), n);
    EXPECT_TRUE(ops.number.hermitian);
    EXPECT_LE((ops.raise.entries - ops.lower.entries.adjoint()).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LE((ops.number.entries - ops.raise.entries * ops.lower.entries).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ModeOperators, CommutatorHoldsBelowTheEdgeOnly)
{
    const FockSpace space{10};
    const auto ops = build_mode_operators(space);
    const Eigen::MatrixXcd comm = ops.lower.entries * ops.raise.entries - ops.raise.entries * ops.lower.entries;
    const Eigen::MatrixXcd defect = comm - Eigen::MatrixXcd::Identity(11, 11);
    EXPECT_LE(defect.topLeftCorner(10, 10).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(comm(10, 10).real(), -10.0, 1e-12);
}

TEST(ModeOperators, NumberActsOnEveryLevelBelowCutoff)
{
    for (std::size_t c = 2; c <= 12; ++c)
    {
        const FockSpace space{c};
        const auto ops = build_mode_operators(space);
        for (std::size_t n = 0; n < c; ++n)
        {
            const auto v = (ops.raise * ops.lower) * fock_ket(space, n);
            const Eigen::VectorXcd want = static_cast<double>(n) * fock_ket(space, n).amplitudes;
            // sqrt(n)^2 is n only up to rounding
            EXPECT_LE((v.amplitudes - want).cwiseAbs().maxCoeff(), 4e-16 * static_cast<double>(n + 1));
        }
    }
}

TEST(CoherentState, ZeroAmplitudeIsVacuum)
{
    const auto psi = coherent_state(0.0, FockSpace{6});
    EXPECT_EQ(psi.amplitudes, vacuum(FockSpace{6}).amplitudes);
}

TEST(CoherentState, MeanPhotonNumber)
{
    const FockSpace space{20};
    const auto ops = build_mode_operators(space);
    EXPECT_NEAR(expectation(ops.number, coherent_state(1.0, space)).real(), 1.0, 1e-10);

    const FockSpace wide{30};
    const auto wide_ops = build_mode_operators(wide);
    const auto e = expectation(wide_ops.number, coherent_state(1.5, wide));
    EXPECT_NEAR(e.real(), 2.25, 1e-9);
    EXPECT_LE(std::abs(e.imag()), 1e-10);
}

TEST(CoherentState, CutoffTooSmallReportsRequiredCutoff)
{
    try
    {
        coherent_state(2.0, FockSpace{5});
        FAIL() << "expected CutoffTooSmall";
    }
    catch (const CutoffTooSmall& e)
    {
        EXPECT_EQ(e.cutoff(), 5u);
        EXPECT_GT(e.required_cutoff(), 5u);
        EXPECT_LE(poisson_tail_oracle(4.0, e.required_cutoff()), 1e-10);
        EXPECT_GT(poisson_tail_oracle(4.0, e.required_cutoff() - 1), 1e-10);
    }
}

TEST(CoherentState, NormAndTailMassProperty)
{
    for (double r : {0.1, 0.5, 1.0, 1.7, 2.5, 3.3})
    {
        for (double phase : {0.0, 0.7, -2.1})
        {
            const complex alpha = std::polar(r, phase);
            const FockSpace space{default_cutoff(alpha)};
            const auto psi = coherent_state(alpha, space);
            EXPECT_NEAR(psi.norm(), 1.0, 1e-12);
            const double raw_mass = coherent_amplitudes(alpha, space).squaredNorm();
            EXPECT_NEAR(1.0 - raw_mass, poisson_tail_mass(r * r, space.cutoff), 1e-12);
            EXPECT_NEAR(poisson_tail_mass(r * r, space.cutoff), poisson_tail_oracle(r * r, space.cutoff), 1e-12);
        }
    }
}

TEST(CoherentState, DefaultCutoffRule)
{
    EXPECT_EQ(default_cutoff(0.0), 10u);
    EXPECT_EQ(default_cutoff(0.5), 15u);
    EXPECT_EQ(default_cutoff(complex(0.0, 2.0)), 30u);
}

TEST(CoherentState, OverlapMatchesTruncatedKets)
{
    const complex a(0.8, -0.3), b(-0.2, 1.1);
    const FockSpace space{40};
    EXPECT_LE(std::abs(overlap(coherent_state(a, space), coherent_state(b, space)) - coherent_overlap(a, b)), 1e-12);
}

TEST(Tensor, IdentityProduct)
{
    const auto id = tensor(identity(FockSpace{1}), identity(FockSpace{2}));
    EXPECT_EQ(id.entries, Eigen::MatrixXcd::Identity(6, 6));
    EXPECT_EQ(id.space.factors(), (std::vector<std::size_t>{2, 3}));
    EXPECT_TRUE(id.hermitian);
}

TEST(Tensor, VacuumProduct)
{
    const auto v = tensor(vacuum(FockSpace{2}), vacuum(FockSpace{2}));
    ASSERT_EQ(v.dimension(), 9u);
    EXPECT_EQ(v.amplitudes(0), complex(1.0));
    EXPECT_EQ(v.amplitudes.squaredNorm(), 1.0);
}

TEST(Tensor, TotalNumberIsAdditive)
{
    const FockSpace s{3};
    const auto ops = build_mode_operators(s);
    const auto total = tensor(ops.number, identity(s)) + tensor(identity(s), ops.number);
    const auto ket = tensor(fock_ket(s, 1), fock_ket(s, 1));
    EXPECT_NEAR(expectation(total, ket).real(), 2.0, 1e-14);
    const auto image = total * ket;
    EXPECT_LE((image.amplitudes - 2.0 * ket.amplitudes).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Tensor, LeftFactorVariesSlowest)
{
    const FockSpace a{2}, b{3};
    const auto ket = tensor(fock_ket(a, 1), fock_ket(b, 2));
    EXPECT_EQ(ket.amplitudes(1 * 4 + 2), complex(1.0));
}

TEST(Tensor, Associativity)
{
    const auto ma = build_mode_operators(FockSpace{1});
    const auto mb = build_mode_operators(FockSpace{2});
    const auto mc = build_mode_operators(FockSpace{3});
    const OperatorMatrix x = ma.lower + ma.number, y = mb.raise, z = mc.lower * mc.raise;
    const auto left = tensor(tensor(x, y), z);
    const auto right = tensor(x, tensor(y, z));
    EXPECT_EQ(left.entries, right.entries);
    EXPECT_EQ(left.space, right.space);
}

TEST(Expectation, VacuumAndMismatch)
{
    const FockSpace s{4};
    const auto ops = build_mode_operators(s);
    EXPECT_EQ(expectation(ops.number, vacuum(s)), complex(0.0));
    EXPECT_THROW(expectation(ops.number, vacuum(FockSpace{5})), SpaceMismatch);
    EXPECT_THROW(ops.number + identity(FockSpace{5}), SpaceMismatch);
}

TEST(Expectation, HermitianFlaggedOperatorsHaveRealExpectations)
{
    const FockSpace s{25};
    const auto ops = build_mode_operators(s);
    const auto x = ops.lower + ops.raise;
    EXPECT_LE(x.hermiticity_defect(), 1e-12);
    const auto psi = coherent_state(complex(1.2, 0.4), s);
    const auto e = expectation(x, psi);
    EXPECT_LE(std::abs(e.imag()), 1e-10);
    EXPECT_NEAR(e.real(), 2.4, 1e-9);
}
