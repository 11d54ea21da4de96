import math

import numpy as np
import pytest
import scipy.linalg

import oracles
from rqcdesigns import moment_op as mo
from rqcdesigns import spectra as sp
from rqcdesigns.exceptions import ConvergenceError, GuardError, ParameterError

# Dense-oracle regression constants (pinned after comparing against
# ``oracles.second_largest`` on the explicit matrices).
G_LOCAL_3_1_2 = 0.5
GAP_3_2_2 = 0.6


class TestTrivial:
    @pytest.mark.parametrize("t", [1, 2, 3])
    @pytest.mark.parametrize("d", [2, 3])
    def test_n2_local_is_projector(self, t, d):
        rep = sp.tpe_value(2, t, d)
        assert rep.value == pytest.approx(0.0, abs=1e-10)
        assert sp.hamiltonian_gap(2, t, d).value == pytest.approx(1.0, abs=1e-10)

    def test_n2_parallel(self):
        assert sp.tpe_value(2, 1, 2, "plr").value == pytest.approx(0.5, abs=1e-10)

    def test_detectability_single_block(self):
        assert sp.detectability_norm(2, 1, 2).value == pytest.approx(0.0, abs=1e-10)


class TestOracleEquivalence:
    @pytest.mark.parametrize("n,t,d", [(2, 1, 2), (3, 1, 2), (2, 2, 2), (4, 1, 2), (2, 1, 3)])
    def test_local(self, n, t, d):
        ref = oracles.second_largest(oracles.dense_local(n, t, d))
        rep = sp.tpe_value(n, t, d)
        assert abs(rep.value - ref) <= 1e-8
        H = oracles.dense_hamiltonian(n, t, d)
        assert abs(sp.hamiltonian_gap(n, t, d).value - oracles.lowest_nonzero(H)) <= 1e-8

    def test_regression_n3(self):
        assert sp.tpe_value(3, 1, 2).value == pytest.approx(G_LOCAL_3_1_2, abs=1e-8)

    @pytest.mark.slow
    def test_regression_3_2_2(self):
        H = oracles.dense_hamiltonian(3, 2, 2)
        assert oracles.lowest_nonzero(H) == pytest.approx(GAP_3_2_2, abs=1e-10)
        assert sp.hamiltonian_gap(3, 2, 2).value == pytest.approx(GAP_3_2_2, abs=1e-8)

    @pytest.mark.parametrize("n,t,d", [(2, 1, 2), (4, 1, 2), (2, 2, 2)])
    def test_parallel(self, n, t, d):
        ref = oracles.second_largest(oracles.dense_parallel(n, t, d))
        assert abs(sp.tpe_value(n, t, d, "plr").value - ref) <= 1e-8

    def test_detectability_n4_t1(self):
        odd, even = oracles.dense_odd_even(4, 1, 2)
        # ground space of the t = 1 chain is one product vector
        g = mo.block_states(1, 2)[0]
        g = np.kron(g, g)
        Pc = np.outer(g, g)
        ref = np.linalg.norm(odd @ even - Pc, 2)
        assert abs(sp.detectability_norm(4, 1, 2).value - ref) <= 1e-8

    def test_detectability_n4_t2_methods_agree(self):
        power = sp.detectability_norm(4, 2, 2, method="power")
        lanczos = sp.detectability_norm(4, 2, 2, method="lanczos")
        assert power.value == pytest.approx(lanczos.value, abs=1e-8)


class TestSolverContract:
    @pytest.mark.parametrize("method", ["power", "lanczos", "auto"])
    def test_methods_agree(self, method):
        rep = sp.second_eigenvalue(mo.local_moment(4, 2, 2), method=method)
        assert rep.value == pytest.approx(0.8552284749830787, abs=1e-8)
        assert rep.residual <= sp.DEFAULT_TOL

    @pytest.mark.parametrize("n,t,d", [(3, 2, 2), (4, 2, 2), (4, 1, 3)])
    def test_report_invariants(self, n, t, d):
        rep = sp.tpe_value(n, t, d, tol=1e-9)
        assert rep.residual <= 1e-9
        assert 0.0 <= rep.value <= 1.0
        assert rep.deflation_leak <= 1e-12
        assert rep.quantity == "g_local" and rep.params == (n, t, d)
        gap = sp.hamiltonian_gap(n, t, d)
        assert gap.value >= 0 and gap.quantity == "gap_H"
        assert gap.value == pytest.approx((n - 1) * (1 - rep.value), abs=1e-7)

    def test_deflation_rank(self):
        assert sp.tpe_value(3, 2, 2).deflation_rank == 2
        assert sp.tpe_value(2, 3, 2).deflation_rank == 6

    def test_convergence_error_carries_estimate(self):
        with pytest.raises(ConvergenceError) as info:
            sp.tpe_value(5, 1, 2, method="power", max_iter=2, tol=1e-14)
        assert info.value.estimate is not None
        assert info.value.residual > 1e-14

    def test_rejects_non_walk(self):
        with pytest.raises(ParameterError):
            sp.second_eigenvalue(mo.hamiltonian(3, 1, 2))
        with pytest.raises(ParameterError):
            sp.tpe_value(3, 1, 2, model="xx")

    def test_guard(self):
        with pytest.raises(GuardError):
            sp.second_eigenvalue(mo.local_moment(4, 2, 2), guard=1000)

    def test_seed_reproducible(self):
        a = sp.tpe_value(4, 2, 2, seed=3)
        b = sp.tpe_value(4, 2, 2, seed=3)
        assert a == b


class TestIdentities:
    @pytest.mark.parametrize("k", [2, 3])
    def test_convolution_power(self, k):
        single = sp.tpe_value(3, 2, 2).value
        powered = sp.second_eigenvalue(mo.local_moment(3, 2, 2).with_power(k)).value
        assert powered == pytest.approx(single ** k, abs=1e-6)

    def test_detectability_chain(self):
        norm = sp.detectability_norm(4, 2, 2).value
        gap = sp.hamiltonian_gap(4, 2, 2).value
        lam = sp.tpe_value(4, 2, 2, "plr").value
        assert norm <= (1 + gap / 2) ** (-1 / 3) + 1e-6
        assert lam <= 0.5 + 0.5 * norm + 1e-6

    def test_local_gap_positive_and_decreasing(self):
        gaps = [sp.hamiltonian_gap(n, 2, 2).value for n in (2, 3, 4)]
        assert all(g > 0 for g in gaps)
        assert gaps[0] >= gaps[1] >= gaps[2]


class TestRhoHaar:
    def test_trace_and_hermitian(self):
        for t in (1, 2):
            rho = sp.rho_haar(2, t)
            assert np.trace(rho) == pytest.approx(1.0, abs=1e-12)
            np.testing.assert_allclose(rho, rho.T, atol=1e-15)
            assert np.linalg.eigvalsh(rho).min() >= -1e-12

    def test_t1_depolarizing(self):
        rep = sp.rho_haar_min_eig(2, 1)
        assert rep.value == pytest.approx(0.25, abs=1e-12)

    def test_t2_symmetric_irrep(self):
        rep = sp.rho_haar_min_eig(2, 2)
        assert rep.value == pytest.approx(1 / 12, abs=1e-10)
        assert rep.value >= 2.0 ** -4
        # supports: symmetric (3^2) + antisymmetric (1^2)
        assert rep.deflation_rank == 10

    @pytest.mark.parametrize("t", [1, 2])
    def test_matches_commutant_projection(self, t):
        # The twirl is the Hilbert-Schmidt projection onto operators commuting
        # with every U^{(x) t} (x) I; find that space as a null space.
        N = 2
        dim = N ** (2 * t)
        rng = np.random.default_rng(1)
        blocks = []
        for _ in range(3):
            U = oracles.haar(N, rng)
            Ut = U
            for _ in range(t - 1):
                Ut = np.kron(Ut, U)
            W = np.kron(Ut, np.eye(N ** t))
            blocks.append(np.kron(W, W.conj()) - np.eye(dim * dim))
        basis = scipy.linalg.null_space(np.vstack(blocks), rcond=1e-9)
        # Phi_N^{(x) t} with system legs first, reference legs after
        phi = np.eye(N ** t).ravel() / math.sqrt(N ** t)
        state = np.outer(phi, phi.conj()).ravel()
        twirled = (basis @ (basis.conj().T @ state)).reshape(dim, dim)
        np.testing.assert_allclose(sp.rho_haar(N, t), twirled, atol=1e-10)

    def test_guard(self):
        with pytest.raises(GuardError):
            sp.rho_haar(4, 4)
        with pytest.raises(ParameterError):
            sp.rho_haar(1, 1)
