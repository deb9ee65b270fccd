"""Unit tests for the parameter chain and the three model tiers.

The reference operating point (cat amplitude 2, squeeze 1.1, coupling 0.1
with Delta_a = 100, g = 1e-3) has hand-checked derived values; those are
frozen here as literals. Builder tests verify the assembled operators
against independently constructed matrices.
"""

import cmath
import math

import numpy as np
import pytest

from sqcat import dynamics, fock, model
from sqcat.errors import PhysicsError, TruncationError


@pytest.fixture(scope="module")
def reference():
    p = model.params_for_target(2.0, 1.1, 0.1)
    return p, model.derive_params(p)


# ---------------------------------------------------------------------------
# parameter chain


def test_reference_chain_values(reference):
    p, d = reference
    assert abs(p.Omega_1 - 48.787156501572575) < 1e-9
    assert abs(p.Delta_b - 43.783715784033625) < 1e-9
    assert abs(p.Delta_c - 11.0 * p.Delta_b) < 1e-12
    assert abs(d.r - 1.1) < 1e-12
    assert abs(d.omega_sa - 21.891857892016823) < 1e-9
    assert abs(d.g_s - 0.004567908328898226) < 1e-15
    assert abs(d.g_p - 0.004457105170535892) < 1e-15
    assert abs(d.eta_s - 44.87217428076828) < 1e-8
    assert abs(d.eta_s.imag) < 1e-12
    assert abs(d.G - 0.1) < 1e-12
    assert abs(d.Gamma_a - 0.04) < 1e-12
    assert abs(d.J_eff - (-0.08)) < 1e-12
    assert abs(d.alpha - 2.0) < 1e-12
    assert abs(p.Omega_2 - 0.4) < 1e-12


def test_roundtrip_targets_recovered():
    for alpha_t, r_t, g_t in ((2.0, 1.1, 0.1), (1.5, 0.5, 0.05), (3.0, 0.2, 0.2)):
        d = model.derive_params(model.params_for_target(alpha_t, r_t, g_t))
        assert abs(d.alpha - alpha_t) < 1e-10
        assert abs(d.r - r_t) < 1e-10
        assert abs(d.G - g_t) < 1e-10


def test_squeeze_diverges_at_critical_drive():
    with pytest.raises(PhysicsError):
        model.SystemParams(Delta_a=10.0, Delta_b=1.0, Delta_c=2.0, g=1e-3, Omega_1=5.0)


def test_matched_reservoir_nulls_frame_noise():
    for r in (0.3, 1.1, 2.0):
        n_eff, m_eff = model.effective_reservoir(r, r, math.pi)
        assert abs(n_eff) < 1e-12
        assert abs(m_eff) < 1e-12
        n_env, m_env = model.matched_reservoir(r)
        assert abs(n_env - math.sinh(r) ** 2) < 1e-14
        assert abs(m_env + math.sinh(r) * math.cosh(r)) < 1e-14


def test_mismatched_reservoir_heats_the_frame():
    n_eff, m_eff = model.effective_reservoir(1.1, 0.7, math.pi)
    assert n_eff > 0.01
    # plain vacuum environment: the frame sees sinh^2 r thermal photons
    # with the maximal (boundary) pair correlation sinh r cosh r
    n_eff0, m_eff0 = model.effective_reservoir(1.1, 0.0, math.pi)
    assert abs(n_eff0 - math.sinh(1.1) ** 2) < 1e-12
    assert abs(m_eff0 - math.sinh(1.1) * math.cosh(1.1)) < 1e-12
    assert abs(abs(m_eff0) ** 2 - n_eff0 * (n_eff0 + 1.0)) < 1e-10


def test_effective_reservoir_stays_physical():
    for r, r_env, phi in ((0.5, 0.0, 0.0), (1.1, 0.7, 2.0), (0.2, 1.5, math.pi)):
        n_eff, m_eff = model.effective_reservoir(r, r_env, phi)
        assert abs(m_eff) ** 2 <= n_eff * (n_eff + 1.0) + 1e-10


def test_preset_names():
    assert set(model.PRESET_NAMES) == {"reference", "scaled_detuning"}
    assert model.preset_base("reference")["Delta_a"] == 100.0
    assert model.preset_base("scaled_detuning")["Delta_a"] == 20.0
    with pytest.raises(ValueError):
        model.preset_base("huge")


def test_params_for_target_rejects_unknown_base_keys():
    with pytest.raises(ValueError):
        model.params_for_target(2.0, 1.1, 0.1, base={"Delta_q": 1.0})


# ---------------------------------------------------------------------------
# rotating-wave validity


def test_rwa_reference_point_passes(reference):
    _, d = reference
    rep = model.rwa_validity(d)
    assert rep.passed
    assert abs(rep.min_ratio - 53.40207485440055) < 1e-6
    assert set(rep.as_dict()) == set(rep.ratios) | {"min_ratio", "threshold", "passed"}


def test_rwa_scaled_preset_is_tight_but_passing():
    p = model.params_for_target(2.0, 1.1, 0.1, base=model.preset_base("scaled_detuning"))
    rep = model.rwa_validity(model.derive_params(p))
    assert rep.passed
    assert 10.0 < rep.min_ratio < 11.0


def test_rwa_zero_coupling_reports_inf():
    p = model.params_for_target(0.0, 1.1, 0.0, base={"g": 0.0})
    rep = model.rwa_validity(model.derive_params(p))
    assert all(math.isinf(v) for v in rep.ratios.values())


def test_rwa_fails_for_strong_coupling(reference):
    _, d = reference
    rep = model.rwa_validity(d, n_a=10000.0)
    assert not rep.passed
    assert rep.min_ratio < 10.0


# ---------------------------------------------------------------------------
# tier builders


def test_reduced_model_hamiltonian_and_channels(reference):
    _, d = reference
    mdl = model.build_reduced_model(d, dim_a=24)
    sp = mdl.space
    a = fock.ladder(sp, "annihilation").to_dense()
    a2 = a @ a
    expect = 1j * d.J_eff.real * (a2 - a2.conj().T)
    assert np.max(np.abs(mdl.hamiltonian(0.0).to_dense() - expect)) < 1e-14
    assert len(mdl.dissipators) == 1  # kappa_a = 0 at the reference point
    dis = mdl.dissipators[0]
    assert abs(dis.rate - d.Gamma_a) < 1e-15
    assert np.max(np.abs(dis.operator.to_dense() - a2)) == 0.0


def test_reduced_model_adds_single_photon_channel(reference):
    _, d = reference
    mdl = model.build_reduced_model(d, kappa_a=1e-3, dim_a=24)
    kinds = sorted(dis.kind for dis in mdl.dissipators)
    assert kinds == ["squeezed", "standard"]
    squeezed = [dis for dis in mdl.dissipators if dis.kind == "squeezed"][0]
    assert abs(squeezed.rate - 1e-3) < 1e-18
    # matched reservoir: effective statistics vanish
    assert abs(squeezed.n_env) < 1e-12
    assert abs(squeezed.m_env) < 1e-12


def test_reduced_model_requires_real_drive(reference):
    p, d = reference
    from dataclasses import replace

    with pytest.raises(PhysicsError):
        model.build_reduced_model(replace(d, phi_2=0.3), dim_a=24)


def test_mode_a_truncation_guard(reference):
    _, d = reference
    with pytest.raises(TruncationError):
        model.build_reduced_model(d, dim_a=12)


def test_mode_b_truncation_guard():
    p = model.params_for_target(2.0, 1.1, 0.1)
    d = model.derive_params(p)
    with pytest.raises(TruncationError):
        model.build_approx_model(d, dims=(20, 2))


def test_approx_model_static_hamiltonian(reference):
    _, d = reference
    mdl = model.build_approx_model(d, dims=(18, 4))
    comp = mdl.space
    spaces = comp.modes
    a = fock.embed(fock.ladder(spaces[0], "annihilation"), comp, 0).to_dense()
    b = fock.embed(fock.ladder(spaces[1], "annihilation"), comp, 1).to_dense()
    a2 = a @ a
    drive = d.Omega_2 * cmath.exp(1j * d.phi_2)
    expect = d.G * (a2 @ b.conj().T + a2.conj().T @ b)
    expect = expect + drive * b.conj().T + np.conj(drive) * b
    assert np.max(np.abs(mdl.hamiltonian(0.0).to_dense() - expect)) < 1e-12
    assert len(mdl.terms) == 1 and mdl.terms[0].envelope is None
    assert [dis.rate for dis in mdl.dissipators] == [d.kappa_b]


def test_exact_model_envelope_frequencies():
    p = model.params_for_target(2.0, 1.1, 0.1, base=model.preset_base("scaled_detuning"))
    d = model.derive_params(p)
    mdl = model.build_exact_model(p, d, dims=(18, 3, 2))
    freqs = sorted(
        term.envelope.omega for term in mdl.terms if term.envelope is not None
    )
    db, dc = p.Delta_b, p.Delta_c
    expect = sorted(
        [-w for w in (2 * db, dc, 2 * db - dc, db, db - dc)]
        + [w for w in (2 * db, dc, 2 * db - dc, db, db - dc)]
    )
    assert np.allclose(freqs, expect, rtol=0.0, atol=1e-9)
    # every oscillating term carries its Hermitian partner
    assert len(mdl.terms) == 11
    assert sum(1 for t in mdl.terms if t.envelope is None) == 1


def test_exact_static_part_extends_approx_model():
    p = model.params_for_target(2.0, 1.1, 0.1, base=model.preset_base("scaled_detuning"))
    d = model.derive_params(p)
    dims = (18, 3, 2)
    exact = model.build_exact_model(p, d, dims=dims)
    approx = model.build_approx_model(d, dims=dims[:2])
    static = [t for t in exact.terms if t.envelope is None][0].operator.to_dense()
    ha = approx.hamiltonian(0.0).to_dense()
    lifted = np.kron(ha, np.eye(dims[2]))
    assert np.max(np.abs(static - lifted)) < 1e-12


def test_exact_model_enforces_resonance():
    p = model.params_for_target(2.0, 1.1, 0.1, base=model.preset_base("scaled_detuning"))
    d = model.derive_params(p)
    from dataclasses import replace

    off = replace(p, Delta_b=p.Delta_b * 1.01)
    with pytest.raises(PhysicsError):
        model.build_exact_model(off, model.derive_params(off), dims=(18, 3, 2))
    detuned = replace(p, drive_detuning_b=p.Delta_b * 0.99)
    with pytest.raises(PhysicsError):
        model.build_exact_model(detuned, model.derive_params(detuned), dims=(18, 3, 2))


def test_exact_model_time_dependent_hamiltonian_is_hermitian():
    p = model.params_for_target(2.0, 1.1, 0.1, base=model.preset_base("scaled_detuning"))
    d = model.derive_params(p)
    mdl = model.build_exact_model(p, d, dims=(18, 3, 2))
    for t in (0.0, 0.123, 1.7):
        h = mdl.hamiltonian(t).to_dense()
        assert np.max(np.abs(h - h.conj().T)) < 1e-12


def test_reduced_model_conserves_parity(reference):
    _, d = reference
    mdl = model.build_reduced_model(d, dim_a=20)
    par = fock.parity_op(mdl.space)
    traj = dynamics.evolve(
        mdl,
        fock.vacuum(mdl.space).density(),
        t_final=50.0,
        observers=(dynamics.Observer("parity", par),),
    )
    vals = traj.observables["parity"].real
    assert np.max(np.abs(vals - 1.0)) < 1e-6


# ---------------------------------------------------------------------------
# lab frame and loss closed form


def test_to_lab_frame_squeezes_the_vacuum():
    sp = fock.ModeSpace(12)
    r = 0.8
    out = model.to_lab_frame(fock.vacuum(sp), r)
    a = fock.ladder(out.space, "annihilation")
    q = (a + a.adjoint()) * (1.0 / math.sqrt(2.0))
    p = (a - a.adjoint()) * (1.0 / (1j * math.sqrt(2.0)))
    assert abs(fock.variance(q, out) - math.exp(-2.0 * r) / 2.0) < 1e-10
    assert abs(fock.variance(p, out) - math.exp(2.0 * r) / 2.0) < 1e-10


def test_to_lab_frame_density_matrix_input():
    sp = fock.ModeSpace(12)
    out = model.to_lab_frame(fock.vacuum(sp).density(), 0.5)
    assert isinstance(out, fock.DensityMatrix)
    target = fock.squeezed_vacuum(out.space, 0.5).density()
    assert fock.fidelity(out, target) > 1.0 - 1e-10


def test_to_lab_frame_escalates_then_fails():
    sp = fock.ModeSpace(10)
    state = fock.fock_state(sp, 9)
    with pytest.raises(TruncationError):
        model.to_lab_frame(state, 1.5, dim=12)


def test_decayed_cat_matches_pure_state_at_t_zero():
    dim = fock.required_dim(2.0, 1.1)
    rho = model.decayed_cat_density(2.0, 1.1, 1e-3, 0.0, dim)
    psi = fock.squeezed_cat(fock.ModeSpace(dim), 2.0, 1.1, "even")
    assert fock.fidelity(rho, psi.density()) > 1.0 - 1e-10


def test_decayed_cat_trace_is_exactly_one():
    # headroom above required_dim so truncation cannot mask the invariant
    dim = 2 * fock.required_dim(2.0, 0.0)
    for t in (0.0, 10.0, 100.0, 1e4):
        rho = model.decayed_cat_density(2.0, 0.0, 1e-3, t, dim)
        assert abs(np.trace(rho.matrix).real - 1.0) < 1e-12


def test_decayed_cat_long_time_limit_is_squeezed_vacuum():
    alpha, r, kappa = 2.0, 1.1, 1e-3
    tau = model.lifetime(alpha, kappa)
    dim = fock.required_dim(alpha, r)
    rho = model.decayed_cat_density(alpha, r, kappa, 50.0 * tau, dim)
    target = fock.squeezed_vacuum(fock.ModeSpace(dim), r).density()
    assert fock.fidelity(rho, target) > 0.99


def test_decayed_cat_dimension_guard():
    with pytest.raises(TruncationError):
        model.decayed_cat_density(2.0, 1.1, 1e-3, 0.0, 40)


def test_lifetime_values():
    assert abs(model.lifetime(2.0, 1e-3) - 125.0) < 1e-12
    assert math.isinf(model.lifetime(0.0, 1e-3))
    assert math.isinf(model.lifetime(2.0, 0.0))
