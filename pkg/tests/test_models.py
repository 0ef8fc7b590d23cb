import numpy as np
import pytest

from dscstab import (
    Excitation,
    Signal,
    TimeGrid,
    check_causality,
    check_passivity,
    composed_step_operator,
    iterate,
    probe_family,
    run_dsc,
)
from dscstab.iteration import ExistenceError
from dscstab.models import (
    MODEL_NAMES,
    S_SHUNT,
    ConfigError,
    DiffusionNode,
    RotorNode,
    SaturatingScatterer,
    ShuntNodeMesh,
    bundled_config,
    clip,
    load_model,
    model,
    operator_zoo,
    shunt_scatter,
)
from dscstab.models.energy import energy_in_flight, energy_window
from dscstab.models.mesh import EAST, NORTH, SOUTH, WEST


def connect_oracle(out, rho):
    """Per-edge loop version of the mesh connection."""
    _, ny, nx = out.shape
    inc = np.zeros_like(out)
    for y in range(ny):
        for x in range(nx):
            inc[WEST, y, x] = out[EAST, y, x - 1] if x > 0 else rho * out[WEST, y, x]
            inc[EAST, y, x] = out[WEST, y, x + 1] if x < nx - 1 else rho * out[EAST, y, x]
            inc[SOUTH, y, x] = out[NORTH, y - 1, x] if y > 0 else rho * out[SOUTH, y, x]
            inc[NORTH, y, x] = out[SOUTH, y + 1, x] if y < ny - 1 else rho * out[NORTH, y, x]
    return inc


class TestShuntScatter:
    def test_orthogonal(self):
        np.testing.assert_allclose(S_SHUNT.T @ S_SHUNT, np.eye(4), atol=0, rtol=0)

    def test_unit_pulse(self):
        np.testing.assert_array_equal(shunt_scatter([1, 0, 0, 0]), [-0.5, 0.5, 0.5, 0.5])

    def test_fixed_point(self):
        np.testing.assert_array_equal(shunt_scatter([1, 1, 1, 1]), [1, 1, 1, 1])

    def test_energy(self, rng):
        for z in rng.normal(size=(200, 4)):
            assert np.sum(shunt_scatter(z) ** 2) == pytest.approx(np.sum(z**2), rel=1e-14)

    def test_arity(self):
        with pytest.raises(ValueError):
            shunt_scatter([1.0, 2.0, 3.0])


class TestMesh:
    def test_rho_guard(self):
        with pytest.raises(ValueError):
            ShuntNodeMesh(4, 4, rho=1.05)
        assert ShuntNodeMesh(4, 4, rho=1.05, allow_active=True).rho == 1.05
        with pytest.raises(ValueError):
            ShuntNodeMesh(0, 4)

    def test_layout(self):
        m = ShuntNodeMesh(3, 2)
        assert m.dim == 24 and m.shape == (4, 2, 3)
        assert m.index(EAST, 2, 1) == 1 * 6 + 1 * 3 + 2
        assert m.boundary_mask().sum() == 2 * (3 + 2)

    @pytest.mark.parametrize("w,h,rho", [(1, 1, 1.0), (3, 2, 0.5), (5, 4, -0.7), (16, 16, 1.0)])
    def test_maps_match_oracles(self, rng, w, h, rho):
        mesh = ShuntNodeMesh(w, h, rho)
        m = load_model({**bundled_config("shunt4"), "width": w, "height": h, "rho": rho})
        grid = TimeGrid(1.0)
        for _ in range(5):
            z = rng.normal(size=mesh.dim)
            sig = Signal(grid, mesh.space, {0: z, 1: z})
            conn = m.maps.connection.at(sig, 0)
            np.testing.assert_array_equal(conn, connect_oracle(z.reshape(mesh.shape), rho).ravel())
            refl = m.maps.reflection.at(sig, 1)
            ref = np.einsum("pq,qyx->pyx", S_SHUNT, z.reshape(mesh.shape)).ravel()
            np.testing.assert_allclose(refl, ref, rtol=1e-14, atol=1e-15)

    def test_lossless_connection_is_orthogonal_involution(self, rng):
        m = model("shunt4")
        grid = TimeGrid(1.0)
        z = rng.normal(size=m.space.dim)
        once = m.maps.connection.at(Signal(grid, m.space, {0: z}), 0)
        twice = m.maps.connection.at(Signal(grid, m.space, {0: once}), 0)
        np.testing.assert_array_equal(twice, z)
        assert np.sum(once**2) == pytest.approx(np.sum(z**2), rel=1e-15)

    def test_single_node_conserves_energy(self):
        grid = TimeGrid(1.0)
        m = model("shunt4", width=1, height=1)
        e = m.excitation(grid)
        steps = 100
        tr = run_dsc(m.maps, e, 2 * steps)
        E = energy_in_flight(tr.h1, steps, energy_window(composed_step_operator(m.maps)))
        after = E[energy_window(composed_step_operator(m.maps)) :]
        np.testing.assert_allclose(after, 1.0, rtol=1e-14, atol=0)

    def test_lossy_mesh_energy_decreases(self):
        grid = TimeGrid(1.0)
        m = model("shunt16_lossy")
        steps = 200
        tr = run_dsc(m.maps, m.excitation(grid), 2 * steps)
        E = energy_in_flight(tr.h1, steps, energy_window(composed_step_operator(m.maps)))
        start = int(np.argmax(E > 0))
        assert E[start] == 1.0
        d = np.diff(E[start:])
        assert np.all(d <= 0)
        first = start + int(np.argmax(d < 0))
        assert first > start
        assert np.all(E[first + 2 :] - E[first:-2] < 0)
        assert E[-1] < 0.75

    def test_active_boundary_fails_passivity_at_boundary(self, rng):
        grid = TimeGrid(1.0)
        m = model("shunt4", rho=1.05, allow_active=True)
        assert not m.passive
        rep = check_passivity(m.maps.connection, m.alpha, probe_family(grid, m.space, rng, 10))
        assert not rep.passed
        (k,) = rep.witness.probe.support
        hot = np.flatnonzero(rep.witness.probe(k))
        assert m.mesh.boundary_mask()[hot].all()
        assert rep.witness.lhs == pytest.approx(1.05**2)


class TestDiffusion:
    def test_validation(self):
        with pytest.raises(ValueError):
            DiffusionNode(np.array([[0.5, -0.1], [0.5, 0.5]]))
        with pytest.raises(ValueError):
            DiffusionNode(np.array([[0.7, 0.5], [0.5, 0.5]]))
        with pytest.raises(ValueError):
            DiffusionNode(np.ones((2, 3)) * 0.1)

    def test_l1_preserved(self):
        grid = TimeGrid(1.0)
        m = model("diffusion2")
        steps = 100
        tr = run_dsc(m.maps, m.excitation(grid), 2 * steps)
        for n in range(2, steps + 1):
            mass = np.sum(tr.h1(2 * n)) + np.sum(tr.h1(2 * n - 2))
            assert mass == pytest.approx(1.0, rel=1e-14)

    def test_nonnegativity(self):
        grid = TimeGrid(1.0)
        m = model("diffusion2")
        for seed in range(20):
            e = m.excitation(grid, "random", N=5, seed=seed)
            assert all(np.all(v >= 0) for _, v in e.signal.items())
            tr = run_dsc(m.maps, e, 80)
            assert all(np.all(v >= 0) for _, v in tr.h1.items())
            assert all(np.all(v >= 0) for _, v in tr.h2.items())


class TestSaturating:
    def test_validation(self):
        with pytest.raises(ValueError):
            SaturatingScatterer(1.1 * np.eye(2))
        with pytest.raises(ValueError):
            SaturatingScatterer(np.eye(2), s=0.0)

    def test_clip(self, rng):
        x = rng.normal(scale=3, size=100)
        y = clip(x, 1.0)
        assert np.all(np.abs(y) <= np.abs(x)) and np.all(np.abs(y) <= 1.0)
        np.testing.assert_array_equal(y, np.sign(x) * np.minimum(np.abs(x), 1.0))

    def test_enters_saturation_then_decays(self):
        grid = TimeGrid(1.0)
        m = model("saturating")
        tr = run_dsc(m.maps, m.excitation(grid), 200)
        np.testing.assert_array_equal(tr.h2(1), [1.0, 0.0])
        norms = [np.linalg.norm(tr.h1(k)) for k in range(4, 201, 4)]
        assert norms[0] == 1.0 and norms[1] == pytest.approx(0.9, rel=1e-15)
        assert all(b < a for a, b in zip(norms, norms[1:]))

    def test_guard_never_fires(self, rng):
        grid = TimeGrid(1.0)
        m = model("saturating")
        G = composed_step_operator(m.maps)
        inside = lambda s: all(np.max(np.abs(v)) <= 100.0 for _, v in s.items())
        for seed in range(10):
            e = m.excitation(grid, "random", N=6, seed=seed, amplitude=99.0)
            p = iterate(G, e, 30, domain=inside)
            assert p.steps_run == 30
        big = Excitation.from_values(grid, m.space, [[100.0, -100.0]])
        iterate(G, big, 10, domain=inside)
        huge = Excitation.from_values(grid, m.space, [[1000.0, 0.0]])
        with pytest.raises(ExistenceError):
            iterate(G, huge, 10, domain=inside)


class TestRotor:
    def test_validation(self):
        with pytest.raises(ValueError):
            RotorNode(0.1, (0.6, 0.6))
        with pytest.raises(ValueError):
            RotorNode(0.1, ())


@pytest.mark.parametrize("name", MODEL_NAMES)
def test_model_maps_causal_and_passive(grid, name):
    m = model(name)
    assert m.passive
    nonneg = m.kind == "diffusion"
    assert check_causality(m.maps.connection, grid, 100).passed
    assert check_causality(m.maps.reflection, grid, 100).passed
    for op, start in ((m.maps.connection, 0), (m.maps.reflection, 1)):
        probes = probe_family(grid, m.space, np.random.default_rng(1), 100, start=start, nonnegative=nonneg,
                              max_impulses=32)
        rep = check_passivity(op, m.alpha, probes)
        assert rep.passed and rep.trials >= 100


class TestConfigs:
    def test_unknown_model(self):
        with pytest.raises(ConfigError) as info:
            model("nope")
        assert info.value.field == "model"

    def test_missing_key(self):
        with pytest.raises(ConfigError) as info:
            load_model({"kind": "diffusion"})
        assert info.value.field == "D"

    def test_unknown_kind(self):
        with pytest.raises(ConfigError) as info:
            load_model({"kind": "maxwell3d"})
        assert info.value.field == "kind"

    def test_bad_alpha(self):
        cfg = {**bundled_config("rotor"), "alpha": {"kind": "cubic"}}
        with pytest.raises(ConfigError) as info:
            load_model(cfg)
        assert info.value.field == "alpha.kind"

    def test_active_rho_field(self):
        with pytest.raises(ConfigError) as info:
            model("shunt4", rho=1.2)
        assert info.value.field == "rho"

    def test_random_needs_seed(self, grid):
        with pytest.raises(ConfigError):
            model("rotor").excitation(grid, "random", N=3)

    def test_bundled_matrices(self):
        for name in MODEL_NAMES:
            cfg = bundled_config(name)
            assert cfg["name"] == name
            assert load_model(cfg).name == name


def test_operator_zoo_labels(space):
    zoo = operator_zoo(space)
    assert sum(z.passive for z in zoo.values()) >= 6
    assert {"delay", "scaled_delay_0.5", "scaled_delay_0.9", "scaled_delay_1.0"} <= zoo.keys()
    assert not zoo["scaled_delay_1.1"].passive and not zoo["lookahead"].passive
