"""Star Hamiltonian assembly: potentials, overlaps, couplings, collapse."""

import math

import numpy as np
import pytest
from scipy.interpolate import PchipInterpolator

from openwg import slab
from openwg.errors import SystemNotSingleMode
from openwg.star import (
    Geometry,
    StarHamiltonian,
    build_hamiltonian,
    compute_overlaps,
    coupling_spectrum,
    perturbation_potential,
)


class TestGeometry:
    def test_invalid_lengths_rejected(self):
        with pytest.raises(ValueError):
            Geometry(0.23, 10.0, -0.1)
        with pytest.raises(ValueError):
            Geometry(0.0, 10.0, 0.15)
        with pytest.raises(ValueError):
            Geometry(0.23, 10.0, 0.15, core_index=0.9)

    def test_coordinate_convention(self, geom10):
        # system core [-d-w_s, -d], environment core [0, w_e]
        assert geom10.system_center == pytest.approx(-0.15 - 0.23 / 2)
        assert geom10.env_center == pytest.approx(5.0)


class TestPerturbationPotential:
    def test_gap_is_vacuum(self, geom10):
        x = np.array([-0.10, -0.05, -0.001])
        assert np.all(perturbation_potential(geom10, "system", x) == 0.0)
        assert np.all(perturbation_potential(geom10, "environment", x) == 0.0)

    def test_env_core_strength(self, geom10):
        val = perturbation_potential(geom10, "environment",
                                     np.array([5.0]))[0]
        expected = (3.5**2 - 1.0) * (2 * math.pi / 1.55) ** 2
        assert val == pytest.approx(expected, rel=1e-12)
        assert round(expected, 1) == 184.9

    def test_disjoint_supports(self, geom10):
        x = np.linspace(-3.0, 12.0, 20001)
        vs = perturbation_potential(geom10, "system", x)
        ve = perturbation_potential(geom10, "environment", x)
        assert np.all(vs * ve == 0.0)


class TestComputeOverlaps:
    def test_evanescent_decoupling(self, geom10):
        # g_env_sys integrates the system mode's tail over the system
        # core region, so every entry decays like exp(-gamma_s d)
        near = compute_overlaps(geom10)
        far = compute_overlaps(Geometry(0.23, 10.0, 3.0))
        ref = np.max(np.abs(near.g_env_sys))
        assert np.max(np.abs(far.g_env_sys)) < 1e-6 * ref

    def test_gap_scaling_follows_system_tail(self):
        g_near = compute_overlaps(Geometry(0.23, 10.0, 0.15)).g_sys_env
        g_far = compute_overlaps(Geometry(0.23, 10.0, 0.30)).g_sys_env
        mode = slab.solve_modes(slab.SlabSpec(3.5, 0.23, 1.55))[0]
        env = slab.solve_modes(slab.SlabSpec(3.5, 10.0, 1.55))
        # most phase-matched environment mode: n_j closest to the system's
        j = int(np.argmin([abs(m.n_eff - mode.n_eff) for m in env]))
        ratio = g_far[j] / g_near[j]
        assert ratio == pytest.approx(math.exp(-mode.gamma * 0.15), rel=0.2)

    def test_mirror_symmetry_identical_guides(self):
        t = compute_overlaps(Geometry(0.23, 0.23, 0.15))
        assert len(t.g_sys_env) == 1
        assert t.g_sys_env[0] == pytest.approx(t.g_env_sys[0], rel=1e-8)
        assert t.m_self_sys == pytest.approx(t.m_self_env[0], rel=1e-8)


class TestBuildHamiltonian:
    def test_identical_guides_degenerate(self):
        h = build_hamiltonian(Geometry(0.23, 0.23, 0.15))
        assert h.n_env == 1
        assert h.beta0 == pytest.approx(h.betas[0], rel=1e-6)
        # frozen derived value of the identical-guide coupling
        assert h.couplings[0] == pytest.approx(0.31359, abs=2e-4)

    def test_env_mode_count(self, h10):
        assert h10.n_env == 44
        assert len(h10.betas) == len(h10.couplings) == 44
        assert len(h10.env_mode_indices) == 44

    def test_beta0_value(self, h10, geom10):
        # n0 = beta0/k = n_eff(system) + m_11 correction ~ 2.8963
        assert h10.beta0 / geom10.k == pytest.approx(2.8963, abs=2e-3)
        assert h10.beta0 == pytest.approx(11.7405, abs=1e-2)

    def test_betas_strictly_decreasing_in_perturbative_range(self, h10):
        # the first-order m_jj correction of near-cutoff modes (slowly
        # decaying tails) exceeds the perturbative bound and can reorder
        # the last pair; the invariant holds wherever |m_jj| < 0.05 n_j
        ok = [abs(b / h10.k - n) < 0.05 * n
              for b, n in zip(h10.betas, h10.env_mode_indices)]
        kept = [b for b, good in zip(h10.betas, ok) if good]
        assert len(kept) >= h10.n_env - 3
        assert all(a > b for a, b in zip(kept, kept[1:]))

    def test_betas_inside_light_cone(self, h10, geom10):
        k, n_d = geom10.k, geom10.core_index
        # up to the small m_jj correction
        assert all(k * 0.99 < b < n_d * k * 1.01 for b in h10.betas)

    def test_couplings_nonnegative(self, h10):
        assert all(g >= 0.0 for g in h10.couplings)

    def test_m_correction_is_small(self, h10, geom10):
        n_sys = slab.solve_modes(geom10.system_slab)[0].n_eff
        m11 = h10.beta0 / geom10.k - n_sys
        assert abs(m11) < 0.05 * n_sys

    def test_matrix_hermitian_exactly(self, h10):
        m = h10.matrix()
        assert m.shape == (45, 45)
        assert np.array_equal(m, m.conj().T)

    def test_multimode_system_rejected(self):
        with pytest.raises(SystemNotSingleMode):
            build_hamiltonian(Geometry(0.5, 10.0, 0.15))

    def test_json_round_trip(self, h10):
        back = StarHamiltonian.from_json(h10.to_json())
        assert back.beta0 == h10.beta0
        assert back.betas == h10.betas
        assert back.couplings == h10.couplings


class TestCouplingSpectrum:
    def _interp(self, geometry):
        pts = coupling_spectrum(geometry)
        return PchipInterpolator(pts[:, 0], pts[:, 1])

    def test_sorted_single_point_env(self):
        pts = coupling_spectrum(Geometry(0.23, 0.23, 0.15))
        assert pts.shape == (1, 2)

    def test_collapse_across_widths(self):
        """g^2 w_e at matched n is width-invariant (within 5%)."""
        f5 = self._interp(Geometry(0.23, 5.0, 0.15))
        f10 = self._interp(Geometry(0.23, 10.0, 0.15))
        f20 = self._interp(Geometry(0.23, 20.0, 0.15))
        n = np.linspace(2.0, 3.3, 40)
        ref = f20(n)
        for f in (f5, f10):
            assert np.max(np.abs(f(n) - ref) / ref) < 0.05

    def test_wide_limit_convergence(self):
        f20 = self._interp(Geometry(0.23, 20.0, 0.15))
        f40 = self._interp(Geometry(0.23, 40.0, 0.15))
        n = np.linspace(2.0, 3.3, 40)
        assert np.max(np.abs(f40(n) - f20(n)) / f20(n)) < 0.02

    def test_vanishes_toward_core_index(self, geom10):
        pts = coupling_spectrum(geom10)
        peak = pts[:, 1].max()
        # weakly confined modes (n -> n_d) overlap less with the system
        assert pts[-1, 1] < 0.1 * peak
