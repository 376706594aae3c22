"""One PASS/FAIL line per acceptance criterion.

Each criterion runs its experiment with the shipped default config and
requires every sub-criterion of the report to be a strict pass (an
inconclusive fit counts as a failure here).
"""
from functools import lru_cache

import pytest

from ftlab.harness import default_config, run_experiment
from ftlab.harness.report import PASS


@lru_cache(maxsize=None)
def _run(name):
    return run_experiment(default_config(name), jobs=1)


def _verdict(capsys, number, title, rep, keys=None, runtime=None, extra=True):
    crit = rep.criteria if keys is None else {k: rep.criteria[k] for k in keys}
    bad = sorted(k for k, c in crit.items() if c["status"] != PASS)
    slow = runtime is not None and rep.runtime >= runtime
    ok = not bad and not slow and extra
    note = f"runtime {rep.runtime:.1f}s"
    if runtime is not None:
        note += f" (limit {runtime:g}s)"
    if bad:
        note += "; failing: " + ", ".join(bad)
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {title} [{note}]")
    assert not bad, {k: crit[k] for k in bad}
    assert not slow, f"runtime {rep.runtime:.1f}s >= {runtime}s"
    assert extra


def test_criterion_01_hypotheses(capsys):
    rep = _run("hypotheses")
    keys = ["gnl_positive", "cross_negative", "cross_center_value", "cross_band"]
    _verdict(capsys, 1, "hypothesis checker on the quadratic flux", rep, keys, runtime=5.0)


@pytest.mark.slow
def test_criterion_02_riemann_oracle(capsys):
    rep = _run("riemann_oracle")
    cfg = rep.config
    extra = (rep.measured["n_problems"] >= 100 and cfg["params"].get("amplitude", 0.02) <= 0.02
             and cfg["nu"] == 1e-3 and cfg["T"] == 1.0)
    _verdict(capsys, 2, "front tracking matches the self-similar fan", rep, runtime=30.0, extra=extra)


@pytest.mark.slow
def test_criterion_03_interactions(capsys):
    rep = _run("interaction_suite")
    extra = rep.measured["pair_runs_with_interaction"] >= 200
    _verdict(capsys, 3, "interaction potential decrease", rep, runtime=120.0, extra=extra)


@pytest.mark.slow
def test_criterion_04_weight(capsys):
    rep = _run("weight_suite")
    _verdict(capsys, 4, "weight brackets, decay and global bound", rep)


@pytest.mark.slow
def test_criterion_05_shock_contraction(capsys):
    rep = _run("shock_contraction")
    extra = rep.measured["runs"] == 50 and rep.measured["max_perturbation_l2"] <= 0.01
    _verdict(capsys, 5, "shock a-contraction", rep, extra=extra)


@pytest.mark.slow
def test_criterion_06_rarefaction_contraction(capsys):
    rep = _run("rarefaction_contraction")
    extra = rep.measured["runs"] == 20 and len(rep.measured["scans"]) == 6
    _verdict(capsys, 6, "rarefaction contraction", rep, extra=extra)


@pytest.mark.slow
def test_criterion_07_weak_bv(capsys):
    rep = _run("weak_bv_stability")
    _verdict(capsys, 7, "weak-BV stability exponents", rep, runtime=600.0)


@pytest.mark.slow
def test_criterion_08_decay_rate(capsys):
    rep = _run("decay_rate")
    _verdict(capsys, 8, "decay rate for rough data", rep)


@pytest.mark.slow
def test_criterion_09_mollification(capsys):
    rep = _run("mollification_rates")
    _verdict(capsys, 9, "mollification rates", rep)


@pytest.mark.slow
def test_criterion_10_commutator(capsys):
    rep = _run("commutator_decay")
    _verdict(capsys, 10, "commutator decay", rep)


def test_criterion_11_shock_asymptotics(capsys):
    rep = _run("hypotheses")
    keys = sorted(k for k in rep.criteria if k.startswith("expansion_"))
    extra = len(keys) == 8
    _verdict(capsys, 11, "shock-curve expansion residual slopes", rep, keys, extra=extra)
