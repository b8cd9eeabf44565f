import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from floquet_bilayer.assembler import CoefficientTable
from floquet_bilayer.field import (DomainError, eval_dz, eval_left, eval_right, from_table,
                                   left_field, right_field, solve)
from floquet_bilayer.sampling import draw_free, draw_params


@pytest.fixture
def sol(P0):
    return solve(P0, [1, 0])


@pytest.fixture
def zero(P0):
    return from_table(P0, CoefficientTable.zeros(P0))


def test_interface_value_reference(sol):
    assert abs(eval_left(sol, 0.0, 0.0).down - 2.0) <= 1e-10
    assert abs(eval_right(sol, 0.0, 0.0).down - 2.0) <= 1e-10


def test_zero_table(zero):
    assert eval_left(zero, -0.4, 1.3) == (0, 0)
    assert eval_right(zero, 0.4, 1.3) == (0, 0)
    assert eval_dz(zero, 0.0, 0.2, "right") == (0, 0)


def test_wall_vanishes(sol):
    t = np.linspace(0, 20, 41)
    up, down = right_field(sol, np.full_like(t, sol.params.b), t)
    assert max(np.max(np.abs(up)), np.max(np.abs(down))) <= 1e-10


def test_quasi_periodicity(sol):
    P = sol.params
    T = 4 * math.pi / P.omega
    shift = np.exp(-1j * P.Omega * T)
    for z in (-0.8, -0.1):
        a, b = eval_left(sol, z, 0.3), eval_left(sol, z, 0.3 + T)
        assert abs(b.up - shift * a.up) <= 1e-12 and abs(b.down - shift * a.down) <= 1e-12
    a, b = eval_right(sol, 0.6, 0.3), eval_right(sol, 0.6, 0.3 + T)
    assert abs(b.down - shift * a.down) <= 1e-12


def test_derivative_against_central_difference(sol):
    z, t = -0.3, 0.7
    exact = np.array(eval_dz(sol, z, t, "left"))
    errs = []
    for h in (1e-2, 5e-3, 2.5e-3):
        fd = (np.array(eval_left(sol, z + h, t)) - np.array(eval_left(sol, z - h, t))) / (2 * h)
        errs.append(np.max(np.abs(fd - exact)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.9)


def test_derivative_continuity(sol):
    for t in (0.0, 0.9, 3.3):
        a, b = eval_dz(sol, 0.0, t, "left"), eval_dz(sol, 0.0, t, "right")
        assert abs(a.up - b.up) <= 1e-10 and abs(a.down - b.down) <= 1e-10


def test_domain_errors(sol):
    with pytest.raises(DomainError):
        eval_left(sol, 0.1, 0.0)
    with pytest.raises(DomainError):
        eval_right(sol, -0.1, 0.0)
    with pytest.raises(DomainError):
        eval_right(sol, sol.params.b + 1e-6, 0.0)
    with pytest.raises(ValueError):
        eval_dz(sol, 0.0, 0.0, "middle")


def test_broadcasting(sol):
    z = np.linspace(-1, 0, 5)[:, None]
    t = np.linspace(0, 2, 3)[None, :]
    up, down = left_field(sol, z, t)
    assert up.shape == (5, 3)
    assert up[2, 1] == pytest.approx(eval_left(sol, z[2, 0], t[0, 1]).up, abs=1e-15)


def test_from_table_rejects_unknown_index(P0):
    table = CoefficientTable.zeros(P0)
    table.c[4] = np.zeros(4, complex)   # q-tilde_4 is evanescent at P0
    with pytest.raises(ValueError):
        from_table(P0, table)


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1))
def test_superposition_of_fields(seed):
    rng = np.random.default_rng(seed)
    params = draw_params(rng)
    f1, f2 = np.array(draw_free(rng, params.n_len)), np.array(draw_free(rng, params.n_len))
    s1, s2, s12 = solve(params, f1), solve(params, f2), solve(params, f1 + f2)
    z, t = -0.37, 1.1
    lhs = np.array(eval_left(s12, z, t))
    rhs = np.array(eval_left(s1, z, t)) + np.array(eval_left(s2, z, t))
    assert np.max(np.abs(lhs - rhs)) <= 1e-11 * max(1.0, s12.scale())


def test_parity_sum_still_matches():
    # two same-parity solutions with the same index sets add to another solution
    from floquet_bilayer.verify import matching_report
    rng = np.random.default_rng(9)
    params = draw_params(rng, n_len=2)
    s = solve(params, draw_free(rng, 2)).coeffs + solve(params, draw_free(rng, 2)).coeffs
    rep = matching_report(from_table(params, s))
    assert rep.passed
