"""Analytic CRF gradients vs. central finite differences."""

import numpy as np

from hiericrf.chain import build_schedule
from hiericrf.emission import EmissionMatrix
from hiericrf.icrf import STRICT, CrfParams, init_transitions, nll_and_grads
from hiericrf.taxonomy import load_taxonomy

import oracles

EPS = 1e-5
TOL = 1e-4


def _nll_fn(y):
    def fn(Z, T, start):
        params = CrfParams(transitions=T, start=start)
        return nll_and_grads(EmissionMatrix(logits=Z), y, params)[0]

    return fn


def rel_err(a, b):
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-3)
    return float(np.max(np.abs(a - b) / denom)) if a.size else 0.0


def test_grads_match_finite_differences():
    rng = np.random.default_rng(7)
    for _ in range(20):
        Z, T, start = oracles.random_instance(rng, m_max=5, l_max=4)
        l, m = Z.shape
        y = rng.integers(0, m, size=l).tolist()
        params = CrfParams(transitions=T.copy(), start=start.copy())
        nll, gz, gT, gs = nll_and_grads(EmissionMatrix(logits=Z), y, params)
        assert nll >= 0.0
        fz, fT, fs = oracles.finite_difference_grads(_nll_fn(y), [Z.copy(), T.copy(), start.copy()], EPS)
        assert rel_err(gz, fz) < TOL
        assert rel_err(gT, fT) < TOL
        assert rel_err(gs, fs) < TOL


def test_grads_match_enumerated_nll():
    # the value being differentiated agrees with the enumeration oracle
    rng = np.random.default_rng(8)
    for _ in range(10):
        Z, T, start = oracles.random_instance(rng, m_max=5, l_max=4)
        l, m = Z.shape
        y = rng.integers(0, m, size=l).tolist()
        params = CrfParams(transitions=T, start=start)
        nll, *_ = nll_and_grads(EmissionMatrix(logits=Z), y, params)
        assert abs(nll - oracles.brute_nll(Z, T, start, y)) <= 1e-8 * max(1.0, abs(nll))


def test_strict_mode_grads_zero_on_frozen_entries(depth3_tax):
    sched = build_schedule(3, 2)
    params = init_transitions(depth3_tax, sched, mode=STRICT)
    rng = np.random.default_rng(9)
    Z = rng.uniform(-2, 2, size=(sched.l, depth3_tax.m))
    gold_path = depth3_tax.leaf_paths[0]
    y = [gold_path[v - 1] for v in sched.levels]
    nll, gz, gT, gs = nll_and_grads(EmissionMatrix(logits=Z, schedule=sched), y, params)
    assert np.all(gT[params.frozen_mask] == 0.0)
    assert np.all(gs[params.frozen_start] == 0.0)
    assert np.isfinite(nll)


def test_strict_mode_unfrozen_grads_match_fd(depth3_tax):
    sched = build_schedule(3, 1)
    base = init_transitions(depth3_tax, sched, mode=STRICT)
    rng = np.random.default_rng(10)
    Z = rng.uniform(-1, 1, size=(sched.l, depth3_tax.m))
    gold_path = depth3_tax.leaf_paths[1]
    y = [gold_path[v - 1] for v in sched.levels]

    def fn(Zarr, Tarr, sarr):
        p = base.clone()
        p.transitions = Tarr
        p.start = sarr
        return nll_and_grads(EmissionMatrix(logits=Zarr, schedule=sched), y, p)[0]

    nll, gz, gT, gs = nll_and_grads(EmissionMatrix(logits=Z, schedule=sched), y, base)
    fz, fT, fs = oracles.finite_difference_grads(
        fn, [Z.copy(), base.transitions.copy(), base.start.copy()], EPS
    )
    free = ~base.frozen_mask
    assert rel_err(gT[free], fT[free]) < TOL
    assert rel_err(gs[~base.frozen_start], fs[~base.frozen_start]) < TOL
    assert rel_err(gz, fz) < TOL
