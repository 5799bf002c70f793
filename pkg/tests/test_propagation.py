"""Propagation tests: advection scheme accuracy, the block engine, medium
preparation and the coupled-run invariants (vacuum identity, suppression
exactness, grid convergence, weak-probe linearity)."""

import numpy as np
import pytest

from wlcsim.atoms import AtomState, FieldAmplitudes, LevelScheme
from wlcsim.errors import CflViolation, NoConvergence
from wlcsim.propagation import (
    FIELD_NAMES,
    Grid,
    MediumSpec,
    ProbeWaveform,
    _Engine,
    lax_wendroff_step,
    prepare_medium,
    propagate,
    propagate_batch,
    source_terms,
)

CONTROLS = FieldAmplitudes(omega31=16.0, omega42=15.5)


def vacuum_medium(length=0.3):
    return MediumSpec(length=length, density=6.6e15, etas=(0.0, 0.0, 0.0, 0.0))


class TestGrid:
    def test_nz_floor(self):
        med = vacuum_medium()
        with pytest.raises(ValueError):
            Grid.for_medium(med, nz=8, duration=1.0)

    def test_cfl_violation(self):
        med = vacuum_medium()
        with pytest.raises(CflViolation):
            Grid.for_medium(med, nz=32, duration=1.0, courant=1.5)

    def test_transit(self):
        med = vacuum_medium()
        grid = Grid.for_medium(med, nz=64, duration=1.0)
        assert grid.transit == pytest.approx(0.3 / 299792458.0 * med.gamma_ref)
        assert grid.courant == pytest.approx(1.0)


class TestLaxWendroff:
    def test_constant_envelope_unchanged(self):
        med = vacuum_medium()
        for courant in (1.0, 0.5):
            grid = Grid.for_medium(med, nz=64, duration=1.0, courant=courant)
            u = np.full(65, 2.3 + 1.1j)
            out = lax_wendroff_step(u, np.zeros(65, complex), grid, boundary=2.3 + 1.1j)
            assert np.allclose(out, u, atol=1e-15)

    def test_unit_courant_exact_shift(self):
        med = vacuum_medium()
        grid = Grid.for_medium(med, nz=64, duration=1.0)
        rng = np.random.default_rng(0)
        u = rng.normal(size=65) + 1j * rng.normal(size=65)
        out = lax_wendroff_step(u, np.zeros(65, complex), grid, boundary=9.0)
        assert np.array_equal(out[1:], u[:-1])
        assert out[0] == 9.0

    def test_gaussian_advection_half_courant(self):
        nz = 512
        med = vacuum_medium(length=1.0)
        grid = Grid.for_medium(med, nz=nz, duration=10.0, courant=0.5)
        z = np.arange(nz + 1) * grid.dz
        sigma = 20 * grid.dz  # tails clear both boundaries over the whole run
        center = 0.25
        u = np.exp(-((z - center) ** 2) / (2 * sigma**2)).astype(complex)
        src = np.zeros(nz + 1, complex)
        nsteps = 2 * nz
        for _ in range(nsteps):
            u = lax_wendroff_step(u, src, grid, boundary=0.0)
        shift = nsteps * grid.courant * grid.dz
        exact = np.exp(-((z - center - shift) ** 2) / (2 * sigma**2))
        assert np.abs(u - exact).max() < 1e-3

    def test_cfl_error(self):
        med = vacuum_medium()
        grid = Grid.for_medium(med, nz=32, duration=1.0)
        object.__setattr__(grid, "dt", grid.dt * 2)  # force C = 2 past validation
        with pytest.raises(CflViolation):
            lax_wendroff_step(np.zeros(33, complex), np.zeros(33, complex), grid)


class TestSourceTerms:
    def test_diagonal_state_silent(self):
        med = MediumSpec(length=0.3, density=6.6e15)
        out = source_terms(AtomState.ground(0.5, 0.5), med)
        assert all(v == 0 for v in out.values())

    def test_stated_arithmetic(self):
        med = MediumSpec(length=0.3, density=6.6e15, etas=(479.0, 479.0, 479.0, 479.0))
        rho = np.zeros((4, 4), dtype=complex)
        rho[3, 0] = 1j * 0.01
        rho[0, 3] = -1j * 0.01
        out = source_terms(AtomState(rho), med)
        assert out["omega41"] == pytest.approx(-4.79 + 0j)

    def test_default_coupling_scale(self):
        # 3 N lambda^2 gamma_jk / (8 pi) at the stated density, full-gamma branch
        med = MediumSpec(length=0.3, density=6.6e15,
                         scheme=LevelScheme(gamma41=1.0))
        assert med.eta("41") == pytest.approx(479.3, rel=1e-3)


class TestBlockEngine:
    def test_matches_stepwise_lax_wendroff(self):
        rng = np.random.default_rng(5)
        med = MediumSpec(length=0.3, density=6.6e15, etas=(1.0, 2.0, 3.0, 4.0))
        grid = Grid.for_medium(med, nz=32, duration=1.0)
        controls = FieldAmplitudes(omega31=1.0, omega42=0.5)
        probe = ProbeWaveform.gaussian(amplitude=0.2, bandwidth=50.0, center=0.01)
        F0 = rng.normal(size=(4, 1, 33)) + 1j * rng.normal(size=(4, 1, 33))
        rho0 = np.zeros((1, 33, 4, 4), complex)
        rho0[..., 0, 0] = 1.0
        for j, k in ((2, 0), (3, 1), (3, 0), (2, 1)):
            rho0[..., j, k] = rng.normal(size=(1, 33)) * 0.01

        eng = _Engine(med, grid, controls, [probe], suppress_4wm=False)
        eng.set_state(F0, rho0)
        eng.substeps = 7
        eng.advance(7)

        ref = _Engine(med, grid, controls, [probe], suppress_4wm=False)
        ref.set_state(F0, rho0)
        ref._update_atoms(7 * grid.dt)
        u = ref.fields.copy()
        s = ref.sources.copy()
        for n in range(7):
            new = lax_wendroff_step(u, s, grid, boundary=0.0)
            new[..., 0] = ref.boundary_values((n + 1) * grid.dt)
            u = new
        assert np.abs(eng.fields - u).max() < 1e-13

    def test_partial_block_spans(self):
        med = MediumSpec(length=0.3, density=6.6e15, etas=(1.0, 1.0, 1.0, 1.0))
        grid = Grid.for_medium(med, nz=32, duration=1.0)
        probe = ProbeWaveform.cw(amplitude=0.1, ramp=0.0)
        rho0 = np.zeros((1, 33, 4, 4), complex)
        rho0[..., 0, 0] = 1.0
        a = _Engine(med, grid, FieldAmplitudes(), [probe], False)
        a.set_state(np.zeros((4, 1, 33), complex), rho0)
        a.substeps = 5
        a.advance(13)
        b = _Engine(med, grid, FieldAmplitudes(), [probe], False)
        b.set_state(np.zeros((4, 1, 33), complex), rho0)
        b.substeps = 5
        for n in (5, 5, 3):
            b.advance(n)
        assert np.abs(a.fields - b.fields).max() < 1e-12


class TestVacuumIdentity:
    def test_exit_is_delayed_entry(self):
        med = vacuum_medium()
        grid = Grid.for_medium(med, nz=64, duration=1.2)
        prep = prepare_medium(med, FieldAmplitudes(), grid)
        probe = ProbeWaveform.gaussian(amplitude=0.1, bandwidth=10.0, center=0.4)
        rec = propagate(prep, probe, record_every=1)
        ent, ext = rec.entry["omega41"], rec.exit["omega41"]
        assert np.abs(ext[64:] - ent[:-64]).max() < 1e-12
        assert rec.vacuum_exit_time == pytest.approx(0.4 + grid.transit)


class TestPrepareMedium:
    def test_zero_controls_trivial(self):
        med = MediumSpec(length=0.3, density=6.6e15)
        grid = Grid.for_medium(med, nz=32, duration=50.0)
        prep = prepare_medium(med, FieldAmplitudes(), grid,
                              initial_populations=(0.3, 0.7))
        assert np.allclose(prep.rho[:, 0, 0], 0.3)
        assert np.allclose(prep.rho[:, 1, 1], 0.7)
        assert np.all(prep.control31 == 0)

    def test_warm_matches_cold(self):
        med = MediumSpec(length=0.3, density=6.6e15)
        grid = Grid.for_medium(med, nz=64, duration=200.0)
        warm = prepare_medium(med, CONTROLS, grid, warm_start=True)
        cold = prepare_medium(med, CONTROLS, grid, warm_start=False)
        assert np.abs(warm.control31 - cold.control31).max() < 1e-5 * 16.0
        assert np.abs(warm.rho - cold.rho).max() < 1e-5

    def test_monotone_attenuation(self):
        med = MediumSpec(length=0.3, density=6.6e15, coupling_scale=3.5)
        grid = Grid.for_medium(med, nz=64, duration=200.0)
        prep = prepare_medium(med, CONTROLS, grid)
        assert np.all(np.diff(np.abs(prep.control31)) < 0)
        assert np.all(np.diff(np.abs(prep.control42)) < 0)
        assert prep.transmission["omega31"] < 1.0

    def test_single_control_pumps_into_2(self):
        # only the 3-1 control drives; decay via |3> empties |1> into |2>
        med = MediumSpec(length=0.3, density=6.6e15)
        grid = Grid.for_medium(med, nz=32, duration=100.0)
        prep = prepare_medium(med, FieldAmplitudes(omega31=16.0), grid)
        assert prep.rho[-1, 1, 1].real > 0.999

    def test_rejects_probe_drive(self):
        med = MediumSpec(length=0.3, density=6.6e15)
        grid = Grid.for_medium(med, nz=32, duration=50.0)
        with pytest.raises(ValueError):
            prepare_medium(med, FieldAmplitudes(omega31=16.0, omega41=0.1), grid)

    def test_no_convergence_without_budget(self):
        med = MediumSpec(length=0.3, density=6.6e15)
        grid = Grid.for_medium(med, nz=32, duration=5.0)
        with pytest.raises(NoConvergence):
            prepare_medium(med, CONTROLS, grid, warm_start=False)


class TestCoupledRuns:
    def test_no_spontaneous_fields(self):
        med = MediumSpec(length=0.3, density=6.6e15)
        grid = Grid.for_medium(med, nz=32, duration=60.0)
        prep = prepare_medium(med, CONTROLS, grid)
        rec = propagate(prep, ProbeWaveform(kind="off", amplitude=0.0),
                        warm_start=False, snapshot_times=[30.0])
        for name in ("omega41", "omega32"):
            assert np.abs(rec.exit[name]).max() < 1e-12
            assert np.abs(rec.snapshots[0].fields[name]).max() < 1e-12

    def test_suppression_is_exact(self):
        med = MediumSpec(length=0.3, density=6.6e15, coupling_scale=3.5)
        grid = Grid.for_medium(med, nz=32, duration=120.0)
        prep = prepare_medium(med, CONTROLS, grid)
        rec = propagate(prep, ProbeWaveform.cw(amplitude=0.1), suppress_4wm=True,
                        snapshot_times=[40.0])
        assert np.abs(rec.exit["omega32"]).max() == 0.0
        assert np.abs(rec.snapshots[0].fields["omega32"]).max() == 0.0
        assert np.abs(rec.final_fields["omega32"]).max() == 0.0

    def test_entry_generated_field_zero(self):
        med = MediumSpec(length=0.3, density=6.6e15, coupling_scale=3.5)
        grid = Grid.for_medium(med, nz=32, duration=120.0)
        prep = prepare_medium(med, CONTROLS, grid)
        rec = propagate(prep, ProbeWaveform.cw(amplitude=0.1))
        assert np.abs(rec.entry["omega32"]).max() == 0.0

    def test_warm_matches_cold_cw(self):
        med = MediumSpec(length=0.3, density=6.6e15)
        grid = Grid.for_medium(med, nz=48, duration=300.0)
        prep = prepare_medium(med, CONTROLS, grid)
        probe = ProbeWaveform.cw(amplitude=0.1, detuning=0.3)
        warm = propagate(prep, probe, warm_start=True)
        cold = propagate(prep, probe, warm_start=False)
        a = warm.exit_amplitude["omega41"]
        b = cold.exit_amplitude["omega41"]
        assert abs(a - b) / abs(a) < 1e-4
        assert warm.steady and cold.steady

    def test_batch_matches_single(self):
        med = MediumSpec(length=0.3, density=6.6e15)
        grid = Grid.for_medium(med, nz=32, duration=120.0)
        prep = prepare_medium(med, CONTROLS, grid)
        probes = [ProbeWaveform.cw(amplitude=0.1, detuning=d) for d in (-0.4, 0.7)]
        batch = propagate_batch(prep, probes)
        for probe, rec in zip(probes, batch):
            solo = propagate(prep, probe)
            assert rec.exit_amplitude["omega41"] == pytest.approx(
                solo.exit_amplitude["omega41"], rel=1e-9)

    def test_grid_convergence(self):
        amps = {}
        for nz in (64, 128):
            med = MediumSpec(length=0.3, density=6.6e15, coupling_scale=3.5)
            grid = Grid.for_medium(med, nz=nz, duration=200.0)
            prep = prepare_medium(med, CONTROLS, grid)
            rec = propagate(prep, ProbeWaveform.cw(amplitude=0.1, detuning=0.2))
            amps[nz] = rec.exit_amplitude["omega41"]
        assert abs(amps[128] - amps[64]) / abs(amps[128]) < 0.005

    def test_weak_probe_linearity(self):
        med = MediumSpec(length=0.3, density=6.6e15, coupling_scale=3.5)
        grid = Grid.for_medium(med, nz=48, duration=200.0)
        prep = prepare_medium(med, CONTROLS, grid)
        ratios = {}
        for amp in (0.1, 0.05):
            rec = propagate(prep, ProbeWaveform.cw(amplitude=amp, detuning=0.2))
            ratios[amp] = rec.exit_amplitude["omega41"] / rec.entry_amplitude["omega41"]
        assert abs(ratios[0.1] - ratios[0.05]) / abs(ratios[0.1]) < 0.01

    def test_mixed_kind_batch_rejected(self):
        med = MediumSpec(length=0.3, density=6.6e15)
        grid = Grid.for_medium(med, nz=32, duration=60.0)
        prep = prepare_medium(med, FieldAmplitudes(), grid)
        with pytest.raises(ValueError):
            propagate_batch(prep, [ProbeWaveform.cw(amplitude=0.1),
                                   ProbeWaveform.gaussian(amplitude=0.1, bandwidth=1.0)])
