import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from anomalylab import continuum, lattice, profiles
from anomalylab.errors import InvalidParameterError

from conftest import SCHWINGER

rng = np.random.default_rng(7)


def random_vectors(n, count=100):
    return rng.standard_normal((n, count)) + 1j * rng.standard_normal((n, count))


def test_build_lattice_momenta():
    cfg = lattice.build_lattice(40, 16)
    dk = 2 * np.pi / 40
    assert np.allclose(cfg.momenta, dk * np.arange(-8, 8))
    assert cfg.momenta[0] == pytest.approx(-8 * dk) and cfg.momenta[-1] == pytest.approx(7 * dk)
    assert cfg.positions()[0] == -20.0
    assert np.allclose(np.diff(cfg.positions()), 40 / 16)


@pytest.mark.parametrize("L, M", [(40, 12), (-1, 16), (0, 16), (40, 4), (40, 16.5)])
def test_build_lattice_rejects(L, M):
    with pytest.raises(InvalidParameterError):
        lattice.build_lattice(L, M)


@pytest.mark.parametrize("transformed", [False, True])
def test_projector_algebra(ref, transformed):
    cfg = lattice.build_lattice(40, 1024)
    if transformed:
        pm = lattice.transformed_projector(cfg, ref, "P_minus")
        pp = lattice.transformed_projector(cfg, ref, "P_plus")
        tol = 1e-12
    else:
        pm, pp = lattice.momentum_mask(cfg, "P_minus"), lattice.momentum_mask(cfg, "P_plus")
        tol = 1e-14
    v = random_vectors(cfg.grid_size)
    scale = np.max(np.abs(v))
    assert np.max(np.abs(pm.apply(pm.apply(v)) - pm.apply(v))) <= tol * scale
    assert np.max(np.abs(pp.apply(pp.apply(v)) - pp.apply(v))) <= tol * scale
    assert np.max(np.abs(pm.apply(pp.apply(v)))) <= tol * scale
    assert np.max(np.abs(pp.apply(pm.apply(v)))) <= tol * scale
    assert np.max(np.abs(pm.apply(v) + pp.apply(v) - v)) <= tol * scale


def test_zero_mode_in_p_plus():
    cfg = lattice.build_lattice(40, 16)
    k = cfg.fft_momenta()
    assert lattice.mask_values(cfg, "P_plus")[k == 0] == 1
    assert lattice.mask_values(cfg, "P_minus")[k == 0] == 0
    assert lattice.mask_values(cfg, "damping", 0.3)[k == 0] == 1


def test_damping_rejects_bad_eps():
    cfg = lattice.build_lattice(40, 16)
    for eps in (0.0, -1.0, None, np.nan):
        with pytest.raises(InvalidParameterError):
            lattice.momentum_mask(cfg, "damping", eps)


def test_multiplication_operators(ref, free_phase):
    cfg = lattice.build_lattice(40, 256)
    v = random_vectors(256, 5)
    assert np.allclose(lattice.mult_operator(cfg, free_phase, "V").apply(v), v, atol=0)
    VdV = lattice.mult_operator(cfg, ref, "Vdag") @ lattice.mult_operator(cfg, ref, "V")
    assert np.max(np.abs(VdV.apply(v) - v)) < 1e-14 * np.max(np.abs(v))
    A = lattice.mult_operator(cfg, ref, "A")
    x0 = np.argmin(np.abs(cfg.positions()))
    assert cfg.positions()[x0] == 0.0 and A.factors[0][1][x0] == 0
    assert np.all(A.factors[0][1].imag == 0)


def test_box_warning(ref):
    small = lattice.build_lattice(10, 64)
    assert any("does not fit" in w for w in lattice.mult_operator(small, ref, "A").warnings)
    assert lattice.profile_warnings(lattice.build_lattice(60, 64), ref) == ()


def test_identity_blocks():
    cfg = lattice.build_lattice(40, 32)
    I = lattice.identity(cfg)
    off = lattice.block_elements(cfg, I, "+", "-")
    assert off.entries.shape == (16, 16) and np.all(off.entries == 0)
    diag = lattice.block_elements(cfg, I, "-", "-")
    assert np.allclose(diag.entries, np.eye(16), atol=1e-15)


def test_field_block_matches_analytic(ref):
    # <phi_p, A phi_q> = (1/L) integral e^{-i kappa x} f'(x) dx = i kappa sqrt(pi) e^{-kappa^2/4} / L
    cfg = lattice.build_lattice(40, 128)
    blk = lattice.block_elements(cfg, lattice.mult_operator(cfg, ref, "A"), "+", "-")
    kappa = blk.row_momenta[:, None] - blk.col_momenta[None, :]
    expected = 1j * kappa * np.sqrt(np.pi) * np.exp(-kappa**2 / 4) / 40
    assert np.max(np.abs(blk.entries - expected)) < 1e-6
    assert np.max(np.abs(blk.entries)) > 1e-3


def test_block_rejects_bad_index(ref):
    cfg = lattice.build_lattice(40, 32)
    with pytest.raises(InvalidParameterError):
        lattice.block_elements(cfg, lattice.identity(cfg), "+", "0")


@pytest.mark.parametrize("kind", continuum.PRIMITIVES)
def test_trace_methods_agree(shifted, kind):
    cfg = lattice.build_lattice(40, 128)
    vals = [lattice.damped_trace(cfg, shifted, kind, 0.3, 0.2, method=m).value
            for m in ("correlation", "dense", "chain")]
    assert abs(vals[0] - vals[1]) < 1e-13 and abs(vals[0] - vals[2]) < 1e-12


def test_trace_with_free_phase(free_phase):
    cfg = lattice.build_lattice(40, 512)
    for kind in ("F1b", "F2b"):
        assert lattice.damped_trace(cfg, free_phase, kind, 0.05, 0.02).value == 0
    for kind in ("F1a", "F2a"):
        assert abs(lattice.damped_trace(cfg, free_phase, kind, 0.05, 0.02).value) < 1e-14


def test_split_vanishes_at_equal_regulators(shifted):
    cfg = lattice.build_lattice(40, 1024)
    a = lattice.damped_trace(cfg, shifted, "F1a", 0.03, 0.03).value
    b = lattice.damped_trace(cfg, shifted, "F2a", 0.03, 0.03).value
    assert abs(a - b) < 1e-12


def test_b_type_difference_near_schwinger_term(ref):
    cfg = lattice.build_lattice(40, 1024)
    d = (lattice.damped_trace(cfg, ref, "F1b", 0.05, 0.05).value
         - lattice.damped_trace(cfg, ref, "F2b", 0.05, 0.05).value)
    fourier = (continuum.eval_functional_fourier(ref, "F1b", 0.05, 0.05).value
               - continuum.eval_functional_fourier(ref, "F2b", 0.05, 0.05).value)
    assert abs(d - fourier) < 1e-3
    # O(eps) above the limit, approaching it from above
    assert SCHWINGER < d.real < SCHWINGER + 0.05


def test_f1a_real_at_equal_regulators_on_reference(ref):
    cfg = lattice.build_lattice(40, 2048)
    for eps in (0.05, 0.02, 0.01):
        v = lattice.damped_trace(cfg, ref, "F1a", eps, eps).value
        assert abs(v.imag) <= 1e-10 * abs(v.real) + 1e-14


@pytest.mark.parametrize("kind", continuum.PRIMITIVES)
def test_grid_refinement(ref, kind):
    prev = None
    for M in (512, 1024, 2048):
        v = lattice.damped_trace(lattice.build_lattice(40, M), ref, kind, 0.05, 0.05).value
        if prev is not None:
            assert abs(v - prev) <= 1e-4 * abs(v) + 1e-14
        prev = v


@pytest.mark.parametrize("eps1, eps2", [(0.05, 0.05), (0.05, 0.02), (0.02, 0.05), (0.03, 0.01)])
@pytest.mark.parametrize("kind", continuum.PRIMITIVES)
def test_equivalence_with_fourier(ref, kind, eps1, eps2):
    # box 160 keeps the O(2 pi / L) zero-mode bias small; M puts both regulators in the window
    L = 160.0
    M = 1 << int(np.ceil(np.log2(lattice.WINDOW_DAMPING * L / (np.pi * min(eps1, eps2)))))
    r = lattice.damped_trace(lattice.build_lattice(L, M), ref, kind, eps1, eps2)
    assert not any("k_max" in w for w in r.warnings)
    lat = r.value
    four = continuum.eval_functional_fourier(ref, kind, eps1, eps2).value
    assert abs(lat - four) <= max(1e-3 * abs(four), 1e-4)


def test_zero_mode_bias_scales_with_box(ref):
    devs = []
    for L, M in ((40, 2048), (80, 4096), (160, 8192)):
        lat = lattice.damped_trace(lattice.build_lattice(L, M), ref, "F1a", 0.05, 0.02).value
        devs.append(abs(lat - continuum.eval_functional_fourier(ref, "F1a", 0.05, 0.02).value))
    assert devs[0] / devs[1] == pytest.approx(2, rel=0.05)
    assert devs[1] / devs[2] == pytest.approx(2, rel=0.05)


def test_circulant_lattice_aliases(ref):
    # plain collocation: high mode differences fold onto low coefficients
    e = 0.00125
    circ = lattice.build_lattice(40, 2048, oversample=1)
    gal = lattice.build_lattice(40, 2048)
    d_circ = (lattice.damped_trace(circ, ref, "F1b", e, e).value - lattice.damped_trace(circ, ref, "F2b", e, e).value)
    d_gal = (lattice.damped_trace(gal, ref, "F1b", e, e).value - lattice.damped_trace(gal, ref, "F2b", e, e).value)
    assert abs(d_gal - SCHWINGER) < 2e-3
    assert abs(d_circ - SCHWINGER) > 0.05


def test_window_warnings(ref):
    cfg = lattice.build_lattice(40, 256)
    r = lattice.damped_trace(cfg, ref, "F1b", 0.01, 0.5)
    assert any("eps*k_max" in w for w in r.warnings)
    assert any("width/10" in w for w in r.warnings)


def test_unregularized_delta_vanishes(ref):
    assert abs(lattice.unregularized_delta(lattice.build_lattice(40, 64), ref)) < 1e-12


@given(st.floats(0.2, 1.5), st.floats(-1.0, 1.0), st.sampled_from([32, 64, 128]))
def test_transformed_projector_algebra_random_phase(amp, center, M):
    pair = profiles.build_profile([(1.0, 0.0, 1.0)], [(amp, center, 1.0)])
    cfg = lattice.build_lattice(40, M)
    pm = lattice.transformed_projector(cfg, pair, "P_minus")
    pp = lattice.transformed_projector(cfg, pair, "P_plus")
    v = random_vectors(M, 4)
    assert np.max(np.abs(pm.apply(pm.apply(v)) - pm.apply(v))) < 1e-12 * np.max(np.abs(v))
    assert np.max(np.abs(pm.apply(v) + pp.apply(v) - v)) < 1e-12 * np.max(np.abs(v))


@given(st.floats(0.01, 0.5), st.floats(0.01, 0.5))
def test_kind_swap_symmetry(e1, e2):
    # F2a(e1, e2) is F1a with the regulators exchanged
    pair = profiles.build_profile([(1.0, 0.0, 1.0)], [(1.0, 0.5, 1.0)])
    cfg = lattice.build_lattice(40, 256)
    a = lattice.damped_trace(cfg, pair, "F2a", e1, e2).value
    b = lattice.damped_trace(cfg, pair, "F1a", e2, e1).value
    assert abs(a - b) < 1e-14
