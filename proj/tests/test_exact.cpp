#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "tcsim/exact.hpp"

using namespace tcsim;

namespace
{

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

// Dense exp(-iHt) through Eigen's complex Schur-free Pade route is not available
// without unsupported modules, so the oracle here is a Taylor series with
// scaling and squaring, independent of the eigen-decomposition path.
Eigen::MatrixXcd expm_minus_i(const Eigen::MatrixXcd& h, double t)
{
    Eigen::MatrixXcd a = complex(0.0, -t) * h;
    const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    while (norm / std::pow(2.0, squarings) > 0.25) ++squarings;
    a /= std::pow(2.0, squarings);
    Eigen::MatrixXcd result = Eigen::MatrixXcd::Identity(h.rows(), h.cols());
    Eigen::MatrixXcd term = result;
    for (int k = 1; k < 30; ++k)
    {
        term = term * a / static_cast<double>(k);
        result += term;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

}  // namespace

TEST(Hamiltonian, DecoupledLimitIsDiagonal)
{
    const ModelParams p{1.3, 0.7, 0.0, 3};
    const FockSpace fock{4};
    const SpinSector sector{3};
    const auto h = build_tc_hamiltonian(p, fock, sector);
    for (std::size_t n = 0; n <= 4; ++n)
    {
        for (std::size_t k = 0; k < 4; ++k)
        {
            const auto i = static_cast<Eigen::Index>(n * 4 + k);
            EXPECT_NEAR(h.entries(i, i).real(), 1.3 * n + 0.7 * sector.m(k), 1e-15);
        }
    }
    EXPECT_EQ(max_abs(h.entries - Eigen::MatrixXcd(h.entries.diagonal().asDiagonal())), 0.0);
}

TEST(Hamiltonian, SingleAtomJaynesCummingsBlock)
{
    const ModelParams p{1.0, 1.0, 0.37, 1};
    const FockSpace fock{3};
    const SpinSector sector{1};
    const auto h = build_tc_hamiltonian(p, fock, sector);
    // |n=1, down> = 1*2+0, |n=0, up> = 0*2+1
    EXPECT_NEAR(h.entries(2, 1).real(), 0.37, 1e-15);
    EXPECT_NEAR(h.entries(1, 2).real(), 0.37, 1e-15);
    EXPECT_NEAR(h.entries(2, 2).real(), 1.0 - 0.5, 1e-15);
    EXPECT_NEAR(h.entries(1, 1).real(), 0.5, 1e-15);
    // hand-built JC coupling in the n=3 / n=2 manifold: g sqrt(3)
    EXPECT_NEAR(h.entries(3 * 2 + 0, 2 * 2 + 1).real(), 0.37 * std::sqrt(3.0), 1e-15);
}

TEST(Hamiltonian, HermitianAndCommutesWithExcitation)
{
    const ModelParams p{1.0, 1.0, 0.3, 4};
    const auto h6 = build_tc_hamiltonian(p, FockSpace{6}, SpinSector{4});
    EXPECT_LE(h6.hermiticity_defect(), 1e-14);
    EXPECT_TRUE(h6.hermitian);

    const auto h = build_tc_hamiltonian(p, FockSpace{8}, SpinSector{4});
    const auto c = excitation_operator(FockSpace{8}, SpinSector{4});
    EXPECT_LE(max_abs(commutator(h, c).entries), 1e-12);
}

TEST(Hamiltonian, AtomNumberMismatch)
{
    EXPECT_THROW(build_tc_hamiltonian({1, 1, 0.1, 3}, FockSpace{3}, SpinSector{4}), SpaceMismatch);
}

TEST(Excitation, Eigenvalues)
{
    const FockSpace fock{5};
    const SpinSector sector{3};
    const auto c = excitation_operator(fock, sector);
    EXPECT_NEAR(expectation(c, fock_ground_state(vacuum(fock), sector)).real(), 0.0, 1e-15);
    EXPECT_NEAR(expectation(c, fock_ground_state(fock_ket(fock, 1), sector)).real(), 1.0, 1e-15);
    for (Eigen::Index i = 0; i < c.entries.rows(); ++i)
    {
        const double v = c.entries(i, i).real();
        EXPECT_GE(v, 0.0);
        EXPECT_EQ(v, std::round(v));
    }
}

TEST(Evolve, ZeroTimeIsIdentity)
{
    const ModelParams p{1.0, 1.0, 0.2, 3};
    const FockSpace fock{10};
    const SpinSector sector{3};
    const auto psi0 = fock_ground_state(coherent_state(complex(0.6, 0.2), fock), sector);
    const auto psi = evolve(build_tc_hamiltonian(p, fock, sector), psi0, 0.0);
    EXPECT_LE((psi.amplitudes - psi0.amplitudes).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Evolve, DecoupledEigenstateOnlyPicksUpAPhase)
{
    const ModelParams p{1.0, 1.0, 0.0, 4};
    const FockSpace fock{5};
    const SpinSector sector{4};
    const auto psi0 = fock_ground_state(fock_ket(fock, 3), sector);
    const double t = 2.7;
    const auto psi = evolve(build_tc_hamiltonian(p, fock, sector), psi0, t);
    const complex phase = std::exp(complex(0.0, -(3.0 - 2.0) * t));
    EXPECT_LE((psi.amplitudes - phase * psi0.amplitudes).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Evolve, SingleAtomRabiOscillation)
{
    const double g = 0.25;
    const ModelParams p{1.0, 1.0, g, 1};
    const FockSpace fock{4};
    const SpinSector sector{1};
    const auto h = build_tc_hamiltonian(p, fock, sector);
    const auto psi0 = tensor(vacuum(fock), basis_ket(sector.descriptor(), 1));
    const auto number = tensor(build_mode_operators(fock).number, identity(sector.descriptor()));
    for (double t : {0.0, 0.8, 3.1, 6.0, 11.4})
    {
        const double s = std::sin(g * t);
        EXPECT_NEAR(expectation(number, evolve(h, psi0, t)).real(), s * s, 1e-12);
    }
}

TEST(Evolve, MatchesIndependentMatrixExponential)
{
    const ModelParams p{1.0, 0.9, 0.17, 3};
    const FockSpace fock{8};
    const SpinSector sector{3};
    const auto h = build_tc_hamiltonian(p, fock, sector);
    const auto psi0 = fock_ground_state(coherent_state(0.5, fock), sector);
    for (double t : {0.5, 4.0, 13.0})
    {
        const Eigen::VectorXcd ref = expm_minus_i(h.entries, t) * psi0.amplitudes;
        EXPECT_LE((evolve(h, psi0, t).amplitudes - ref).cwiseAbs().maxCoeff(), 1e-10) << t;
    }
}

TEST(Evolve, RejectsMismatchAndUnflaggedOperators)
{
    const ModelParams p{1.0, 1.0, 0.1, 2};
    const auto h = build_tc_hamiltonian(p, FockSpace{3}, SpinSector{2});
    EXPECT_THROW(evolve(h, vacuum(FockSpace{3}), 1.0), SpaceMismatch);
    auto raw = h;
    raw.hermitian = false;
    EXPECT_THROW(SpectralPropagator{raw}, Error);
}

TEST(Evolve, UnitarityConservationAndSemigroup)
{
    const ModelParams p{1.0, 1.0, 0.1, 6};
    const FockSpace fock{16};
    const SpinSector sector{6};
    const auto h = build_tc_hamiltonian(p, fock, sector);
    const auto c = excitation_operator(fock, sector);
    const SpectralPropagator prop(h, c);
    const auto psi0 = fock_ground_state(coherent_state(complex(0.9, -0.4), fock), sector);
    const double c0 = expectation(c, psi0).real();
    const double c2 = expectation(c * c, psi0).real();
    for (double t : {0.3, 5.0, 17.2, 40.0})
    {
        const auto psi = prop.evolve(psi0, t);
        EXPECT_NEAR(psi.norm(), 1.0, 1e-10);
        EXPECT_NEAR(expectation(c, psi).real(), c0, 1e-10);
        EXPECT_NEAR(expectation(c * c, psi).real() - c0 * c0 * 0.0, c2, 1e-9);
        for (double t2 : {0.7, 9.5})
        {
            const auto composed = prop.evolve(psi, t2);
            const auto direct = prop.evolve(psi0, t + t2);
            EXPECT_LE((composed.amplitudes - direct.amplitudes).cwiseAbs().maxCoeff(), 1e-9);
        }
    }
}

TEST(ObservableSeries, ConservedChargeAndIdentity)
{
    const ModelParams p{1.0, 1.0, 0.15, 4};
    const FockSpace fock{12};
    const SpinSector sector{4};
    const auto h = build_tc_hamiltonian(p, fock, sector);
    const auto c = excitation_operator(fock, sector);
    const auto psi0 = fock_ground_state(coherent_state(0.7, fock), sector);
    const auto times = linear_grid(0.0, 30.0, 41);
    const auto series = observable_series(h, psi0, {{"C", c}, {"I", identity(h.space)}}, times);
    EXPECT_EQ(series.provenance, Provenance::exact);
    ASSERT_EQ(series.values.size(), 2u);
    ASSERT_EQ(series.column("C").size(), times.size());
    for (std::size_t i = 0; i < times.size(); ++i)
    {
        EXPECT_NEAR(series.column("C")[i], series.column("C")[0], 1e-10);
        EXPECT_NEAR(series.column("I")[i], 1.0, 1e-10);
        EXPECT_LE(series.norm_drift[i], 1e-10);
    }
    EXPECT_THROW(series.column("missing"), Error);
}

TEST(ObservableSeries, NonDiagonalObservableAndImaginaryParts)
{
    const ModelParams p{1.0, 1.0, 0.2, 2};
    const FockSpace fock{12};
    const SpinSector sector{2};
    const auto h = build_tc_hamiltonian(p, fock, sector);
    const auto mode = build_mode_operators(fock);
    auto x = tensor(mode.lower + mode.raise, identity(sector.descriptor()));
    x.hermitian = true;
    const auto psi0 = fock_ground_state(coherent_state(0.8, fock), sector);
    const auto times = linear_grid(0.0, 10.0, 11);
    const auto series = observable_series(h, psi0, {{"x", x}}, times);
    EXPECT_LE(series.max_imaginary, 1e-10);
    EXPECT_NEAR(series.column("x")[0], 1.6, 1e-9);
    const auto psi5 = evolve(h, psi0, times[5]);
    EXPECT_NEAR(series.column("x")[5], expectation(x, psi5).real(), 1e-12);
}

TEST(ObservableSeries, LeadingOrderAgreementAtTenAtoms)
{
    const double alpha = 0.5;
    const ModelParams p{1.0, 1.0, 0.1, 10};
    const double gc = p.collective_coupling();
    const FockSpace fock{default_cutoff(alpha)};
    const SpinSector sector{10};
    const auto h = build_tc_hamiltonian(p, fock, sector);
    const auto number = tensor(build_mode_operators(fock).number, identity(sector.descriptor()));
    const auto times = linear_grid(0.0, 2.0 * std::numbers::pi / gc, 200);
    const auto series = observable_series(h, fock_ground_state(coherent_state(alpha, fock), sector),
                                          {{"n", number}}, times);
    double err = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
    {
        const double c = std::cos(gc * times[i]);
        err = std::max(err, std::abs(series.column("n")[i] - alpha * alpha * c * c));
    }
    EXPECT_LE(err, 0.05 * alpha * alpha);
}

TEST(ObservableSeries, RejectsBadGrids)
{
    const ModelParams p{1.0, 1.0, 0.2, 1};
    const auto h = build_tc_hamiltonian(p, FockSpace{2}, SpinSector{1});
    const auto psi = fock_ground_state(vacuum(FockSpace{2}), SpinSector{1});
    EXPECT_THROW(observable_series(h, psi, {}, {}), Error);
    EXPECT_THROW(observable_series(h, psi, {}, {0.0, 1.0, 1.0}), Error);
    EXPECT_TRUE(strictly_increasing(linear_grid(0.0, 1.0, 5)));
}

TEST(ObservableSeries, ThreadCountDoesNotChangeResults)
{
    const ModelParams p{1.0, 1.0, 0.12, 8};
    const FockSpace fock{15};
    const SpinSector sector{8};
    const auto h = build_tc_hamiltonian(p, fock, sector);
    const auto psi0 = fock_ground_state(coherent_state(0.5, fock), sector);
    const auto number = tensor(build_mode_operators(fock).number, identity(sector.descriptor()));
    const auto times = linear_grid(0.0, 20.0, 37);
    const SpectralPropagator prop(h);
    const auto one = observable_series(prop, psi0, {{"n", number}}, times, 1);
    for (std::size_t threads : {2u, 3u, 8u})
    {
        const auto many = observable_series(prop, psi0, {{"n", number}}, times, threads);
        EXPECT_EQ(one.values, many.values);
        EXPECT_EQ(one.norm_drift, many.norm_drift);
    }
}

TEST(SectorDecompose, DecoupledBlocksAreDiagonal)
{
    const ModelParams p{1.0, 1.0, 0.0, 2};
    const FockSpace fock{3};
    const SpinSector sector{2};
    const auto blocks = sector_decompose(build_tc_hamiltonian(p, fock, sector), excitation_operator(fock, sector));
    for (const auto& b : blocks)
    {
        const auto& m = b.hamiltonian;
        EXPECT_EQ(max_abs(m - Eigen::MatrixXcd(m.diagonal().asDiagonal())), 0.0);
    }
}

TEST(SectorDecompose, BlockDimensionCount)
{
    const ModelParams p{1.0, 1.0, 0.3, 2};
    const FockSpace fock{4};
    const SpinSector sector{2};
    const auto blocks = sector_decompose(build_tc_hamiltonian(p, fock, sector), excitation_operator(fock, sector));
    std::size_t total = 0;
    for (const auto& b : blocks)
    {
        total += b.indices.size();
        // count of (n, k) with n + k = C, n <= 4, k <= 2
        std::size_t expected = 0;
        for (std::size_t n = 0; n <= 4; ++n)
            for (std::size_t k = 0; k <= 2; ++k)
                if (static_cast<double>(n + k) == b.charge) ++expected;
        EXPECT_EQ(b.indices.size(), expected) << b.charge;
        if (b.charge == 1.0)
        {
            EXPECT_EQ(b.indices.size(), 2u);
        }
    }
    EXPECT_EQ(total, 15u);
}

TEST(SectorDecompose, SpectrumMatchesDirectDiagonalization)
{
    const ModelParams p{1.0, 1.0, 0.21, 4};
    const FockSpace fock{12};
    const SpinSector sector{4};
    const auto h = build_tc_hamiltonian(p, fock, sector);
    const SpectralPropagator direct(h), blocked(h, excitation_operator(fock, sector));
    EXPECT_GT(blocked.block_count(), 1u);
    EXPECT_LE((direct.spectrum() - blocked.spectrum()).cwiseAbs().maxCoeff(), 1e-9);
    const auto psi0 = fock_ground_state(coherent_state(0.9, fock), sector);
    for (double t : {1.0, 12.0, 33.3})
    {
        const auto a = direct.evolve(psi0, t), b = blocked.evolve(psi0, t);
        EXPECT_LE((a.amplitudes - b.amplitudes).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(SectorDecompose, RejectsNonCommutingCharge)
{
    const ModelParams p{1.0, 1.0, 0.3, 2};
    const FockSpace fock{3};
    const SpinSector sector{2};
    const auto h = build_tc_hamiltonian(p, fock, sector);
    const auto wrong = tensor(build_mode_operators(fock).number, identity(sector.descriptor()));
    EXPECT_THROW(sector_decompose(h, wrong), NotCommuting);
}

TEST(DeskScale, WarningsAboveEnvelope)
{
    EXPECT_FALSE(desk_scale_warning(FockSpace{128}, SpinSector{64}).has_value());
    const auto w = desk_scale_warning(FockSpace{20}, SpinSector{100});
    ASSERT_TRUE(w.has_value());
    EXPECT_NE(w->find("MiB"), std::string::npos);
    EXPECT_TRUE(desk_scale_warning(FockSpace{129}, SpinSector{4}).has_value());
}

TEST(TopFock, TruncationMonitorSeesEscape)
{
    const FockSpace fock{4};
    const SpinSector sector{1};
    const auto top = top_fock_projector(fock, sector.descriptor());
    EXPECT_NEAR(expectation(top, fock_ground_state(fock_ket(fock, 3), sector)).real(), 1.0, 0.0);
    EXPECT_NEAR(expectation(top, fock_ground_state(fock_ket(fock, 2), sector)).real(), 0.0, 0.0);
}
