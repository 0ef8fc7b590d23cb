import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dscstab import (
    Excitation,
    ExistenceError,
    InconsistencyError,
    StateSpace,
    TimeGrid,
    bound_value,
    delay,
    identity,
    iterate,
    mu_sum,
    scale,
    verify_stability,
    zero_operator,
)
from dscstab import functionals as fn
from dscstab.models import operator_zoo

V = np.array([3.0, 4.0])


def impulse_exc(grid, space, v=V, N=1):
    return Excitation.from_values(grid, space, [v], N)


def values(process, n):
    return [process.g(2 * j) for j in range(n + 1)]


class TestIterate:
    def test_zero_operator(self, grid, space, rng):
        e = Excitation.random(grid, space, 5, rng)
        p = iterate(zero_operator(space), e, 30)
        assert p.g.is_zero()

    def test_pure_delay_unroll(self, grid, space):
        p = iterate(delay(space), impulse_exc(grid, space), 12)
        got = values(p, 12)
        # hand unroll of g(t+tau) = (e+g)(t-tau): 0, 0, v, 0, v, 0, ...
        expect = [np.zeros(2), np.zeros(2)] + [V if j % 2 == 0 else np.zeros(2) for j in range(2, 13)]
        for a, b in zip(got, expect):
            assert np.array_equal(a, b)

    def test_half_delay_geometric(self, space):
        grid = TimeGrid(0.2)
        p = iterate(scale(delay(space), 0.5), impulse_exc(grid, space), 40)
        for j in range(41):
            expect = 0.5 ** (j // 2) * V if j % 2 == 0 and j > 0 else np.zeros(2)
            np.testing.assert_allclose(p.g(2 * j), expect, rtol=1e-15, atol=0)
        assert p.g.sup_norm() == pytest.approx(0.5 * np.linalg.norm(V), rel=1e-15)

    def test_g_vanishes_for_nonpositive_t(self, grid, space, rng):
        for entry in operator_zoo(space).values():
            if not entry.passive:
                continue
            p = iterate(entry.op, Excitation.random(grid, space, 4, rng), 20)
            assert all(k > 0 for k in p.g.support), entry.name

    def test_recursion_holds_exactly(self, grid, space, rng):
        F = operator_zoo(space)["composed_delay_conv"].op
        e = Excitation.random(grid, space, 6, rng)
        p = iterate(F, e, 30)
        x = p.driven
        for n in range(30):
            assert np.array_equal(p.g(2 * n + 2), F.apply(x.truncate(2 * n), 2 * n))

    def test_deterministic(self, grid, space):
        e = Excitation.random(grid, space, 8, np.random.default_rng(11))
        F = operator_zoo(space)["conv_rot"].op
        a = iterate(F, e, 50)
        b = iterate(F, e, 50)
        assert a.g == b.g
        assert a.g.to_csv() == b.g.to_csv()

    @given(st.integers(0, 2**32 - 1), st.integers(1, 30), st.integers(1, 30))
    def test_monotone_horizon(self, seed, n1, extra):
        grid, space = TimeGrid(1.0), StateSpace(2)
        rng = np.random.default_rng(seed)
        F = operator_zoo(space)["conv3"].op
        e = Excitation.random(grid, space, int(rng.integers(1, 6)), rng)
        short = iterate(F, e, n1)
        long = iterate(F, e, n1 + extra)
        assert long.g.truncate(2 * n1) == short.g

    def test_argument_validation(self, grid, space):
        e = impulse_exc(grid, space)
        with pytest.raises(ValueError):
            iterate(delay(space), e, 0)
        with pytest.raises(ValueError):
            iterate(delay(space), e, 11, max_steps=10)
        with pytest.raises(ValueError):
            iterate(delay(StateSpace(3)), e, 5)


class TestExistenceGuard:
    def test_fires_on_growing_partial_sum(self, grid, space):
        e = Excitation.from_values(grid, space, [[1.0, 0.0]] * 3)
        inside = lambda s: all(np.max(np.abs(v)) <= 2.5 for _, v in s.items())
        with pytest.raises(ExistenceError) as info:
            iterate(scale(identity(space), 2.0), e, 10, domain=inside)
        assert info.value.n == 1
        # s_1(tau) = e(tau) + 2 e(0) = 3
        assert info.value.partial(2)[0] == 3.0

    def test_excitation_outside_domain(self, grid, space):
        inside = lambda s: all(np.max(np.abs(v)) <= 1.0 for _, v in s.items())
        with pytest.raises(ExistenceError) as info:
            iterate(delay(space), impulse_exc(grid, space), 5, domain=inside)
        assert info.value.n == 0

    def test_not_used_without_domain(self, grid, space):
        e = Excitation.from_values(grid, space, [[1.0, 0.0]] * 3)
        p = iterate(scale(identity(space), 2.0), e, 10)
        assert p.steps_run == 10


class TestBound:
    def test_norm_bound_at_most_excitation_mass(self, space):
        grid = TimeGrid(0.5)
        alpha = fn.norm(space)
        for seed in range(10):
            e = Excitation.random(grid, space, 6, np.random.default_rng(seed))
            p = iterate(delay(space), e, 40)
            direct = mu_sum(e.signal, space.norm, (0, 12)) / grid.tau
            # the triangle inequality makes the general bound at most the simplified one
            assert bound_value(p, alpha) <= direct * (1 + 1e-12)

    def test_norm_bound_impulse_equality(self, space):
        grid = TimeGrid(0.5)
        p = iterate(delay(space), impulse_exc(grid, space), 10)
        assert bound_value(p, fn.norm(space)) == pytest.approx(5.0, rel=1e-15)

    @pytest.mark.parametrize("make", [lambda s: fn.norm(s), lambda s: fn.norm_power(s, 2),
                                      lambda s: fn.norm_power(s, 3), lambda s: fn.linear_sum(s)])
    def test_single_impulse_bound(self, space, make):
        grid = TimeGrid(0.25)
        alpha = make(space)
        p = iterate(scale(delay(space), 0.9), impulse_exc(grid, space), 10)
        a, b, c = alpha.constants
        expect = a + ((b / grid.tau) * mu_sum(p.e.signal, alpha, (0, 2))) ** c
        assert bound_value(p, alpha) == pytest.approx(expect, rel=1e-15)

    def test_zero_excitation_gives_a(self, grid, space):
        e = Excitation.from_values(grid, space, [], 3)
        alpha = fn.norm(space).with_constants(0.3, 1.0, 1.0)
        p = iterate(delay(space), e, 10)
        assert bound_value(p, alpha) == 0.3
        assert verify_stability(p, alpha).passed

    def test_inconsistency_detected(self, grid, space):
        e = Excitation.from_values(grid, space, [V, -3 * V])
        p = iterate(scale(identity(space), 3.0), e, 4)
        with pytest.raises(InconsistencyError):
            bound_value(p, fn.norm_power(space, 2))

    def test_process_too_short(self, grid, space):
        e = Excitation.from_values(grid, space, [V] * 6)
        p = iterate(delay(space), e, 2)
        with pytest.raises(ValueError):
            bound_value(p, fn.norm(space))


class TestVerify:
    def test_tight_delay(self, grid, space):
        p = iterate(delay(space), impulse_exc(grid, space), 50)
        rep = verify_stability(p, fn.norm(space))
        assert rep.passed
        assert rep.sup_norm == rep.bound == 5.0
        assert rep.min_margin == 0.0

    def test_half_delay_margin(self, grid, space):
        p = iterate(scale(delay(space), 0.5), impulse_exc(grid, space), 50)
        rep = verify_stability(p, fn.norm(space))
        assert rep.passed and rep.min_margin == pytest.approx(2.5)

    def test_growing_delay_fails(self, grid, space):
        p = iterate(scale(delay(space), 1.1), impulse_exc(grid, space), 50)
        rep = verify_stability(p, fn.norm(space))
        assert not rep.passed
        # g(2k tau) = 1.1^k v first exceeds ||v|| at k = 1
        assert rep.first_violation == 4
        assert rep.sup_norm == pytest.approx(1.1 ** 25 * 5.0, rel=1e-12)

    def test_outputs(self, grid, space):
        p = iterate(scale(delay(space), 0.5), impulse_exc(grid, space), 4)
        rep = verify_stability(p, fn.norm_power(space, 2))
        lines = rep.to_csv().splitlines()
        assert lines[0] == "t,norm_g,bound,margin"
        assert lines[3] == "2.0,2.5,5.0,2.5"
        assert len(lines) == 6
        doc = json.loads(rep.to_json())
        assert doc["verdict"] == "pass" and doc["N"] == 1 and doc["tau"] == 1.0
        assert doc["constants"] == {"a": 0.0, "b": 1.0, "c": 0.5}
        assert doc["sup_norm"] == 2.5 and doc["first_violation_t"] is None

    @given(st.integers(0, 2**32 - 1), st.sampled_from(["norm", "norm2", "normp:3"]))
    def test_master_property_sample(self, seed, alpha_spec):
        rng = np.random.default_rng(seed)
        grid, space = TimeGrid(float(rng.uniform(0.1, 2.0))), StateSpace(2)
        zoo = [z for z in operator_zoo(space, grid.tau).values() if z.passive]
        entry = zoo[int(rng.integers(len(zoo)))]
        e = Excitation.random(grid, space, int(rng.integers(1, 9)), rng, scale=float(10 ** rng.uniform(-3, 3)))
        p = iterate(entry.op, e, 40)
        assert verify_stability(p, fn.from_spec(alpha_spec, space)).passed, entry.name
