"""Acceptance gate: one PASS/FAIL line per criterion, printed in the terminal summary."""
import itertools
import math
import time

import numpy as np
import pytest

from wielandt.core import (
    HermitianMatrix,
    OrthonormalFrame,
    diag,
    eigvalsh,
    random_hermitian,
    random_unitary,
    subspace_distance,
)
from wielandt.equality import (
    certify,
    check_equality,
    condition1_search,
    condition2_check,
    condition3_check,
    condition3_maximum,
    equivalence_report,
    maximal_t1,
)
from wielandt.errors import EqualityNotDetected
from wielandt.inequalities import EQUALITY, lidskii_check, majorizes, wielandt_scan
from wielandt.instances import equality_block
from wielandt.pencil import integrate_phi_prime, phi_value, trace_pencil
from wielandt.perturbation import first_order_rates, rate_consistency_check

from conftest import ACCEPTANCE_LINES

pytestmark = pytest.mark.acceptance

MASTER_SEED = 20_240_617


def _rngs(tag: int, count: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence([MASTER_SEED, tag]).spawn(count)]


def _report(number: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def _random_index_set(n, rng, k=None):
    k = int(rng.integers(1, n)) if k is None else k
    return sorted(int(i) for i in rng.choice(np.arange(1, n + 1), size=k, replace=False))


# instance families, built once per session and shared between criteria

@pytest.fixture(scope="module")
def pairs_100():
    out = []
    for rng in _rngs(2, 100):
        n = int(rng.integers(2, 9))
        out.append((random_hermitian(n, rng), random_hermitian(n, rng)))
    return out


@pytest.fixture(scope="module")
def pairs_50():
    out = []
    for rng in _rngs(4, 50):
        n = int(rng.integers(1, 7))
        out.append((random_hermitian(n, rng), random_hermitian(n, rng)))
    return out


@pytest.fixture(scope="module")
def pairs_25():
    out = []
    for rng in _rngs(6, 25):
        n = int(rng.integers(2, 8))
        A, B = random_hermitian(n, rng), random_hermitian(n, rng)
        sets = [_random_index_set(n, rng) for _ in range(5)]
        out.append((A, B, sets))
    return out


@pytest.fixture(scope="module")
def planted_100():
    out = []
    for rng in _rngs(7, 100):
        n = int(rng.integers(3, 9))
        k = int(rng.integers(1, min(3, n - 1) + 1))
        out.append(equality_block(n, k, rng))
    return out


@pytest.fixture(scope="module")
def generic_100():
    out = []
    for rng in _rngs(17, 100):
        while True:
            n = int(rng.integers(2, 9))
            A, B = random_hermitian(n, rng), random_hermitian(n, rng)
            if min(r.slack for _, r in wielandt_scan(A, B)) > 1e-4:
                break
        out.append((A, B, _random_index_set(n, rng)))
    return out


def _mixed_instance(kind: str, rng):
    n = int(rng.integers(2, 7))
    if kind == "planted":
        n = max(n, 3)
        inst = equality_block(n, int(rng.integers(1, min(3, n - 1) + 1)), rng)
        return inst.A, inst.B, list(inst.indices.indices)
    if kind == "random":
        return random_hermitian(n, rng), random_hermitian(n, rng), _random_index_set(n, rng)
    if kind == "diagonal-conjugated":
        a2 = float(rng.uniform(-1, 1))
        a1 = a2 + float(rng.uniform(0.5, 2))
        b3, b2 = sorted(rng.uniform(-1, 1, 2))
        b1 = b2 + float(rng.uniform(0.1, 2))
        Q = random_unitary(3, rng)
        return diag(a1, a2, a2).conjugate_by(Q), diag(b3, b1, b2).conjugate_by(Q), [3]
    if kind == "scalar-b":
        c = float(rng.uniform(-2, 2))
        return random_hermitian(n, rng), HermitianMatrix(c * np.eye(n)), _random_index_set(n, rng)
    if kind == "self":
        A = random_hermitian(n, rng)
        return A, A, _random_index_set(n, rng)
    # commuting diagonals with small integer entries, so eigenvalues repeat
    Q = random_unitary(n, rng)
    a = rng.integers(0, 3, n).astype(float)
    b = rng.integers(-2, 3, n).astype(float)
    return diag(*a).conjugate_by(Q), diag(*b).conjugate_by(Q), _random_index_set(n, rng)


MIXED_KINDS = ("planted", "random", "diagonal-conjugated", "scalar-b", "self", "commuting")


@pytest.fixture(scope="module")
def mixed_200():
    return [(kind,) + _mixed_instance(kind, rng)
            for i, rng in enumerate(_rngs(8, 200))
            for kind in [MIXED_KINDS[i % len(MIXED_KINDS)]]]


# criteria

def test_criterion_01_worked_example():
    start = time.perf_counter()
    A, B, S = diag(3, 1, 1), diag(0, 2, 1), [3]
    c3 = condition3_check(A, B, S)
    p2 = condition2_check(A, B, S, 0.5)
    U = condition1_search(A, B, S)
    t1 = maximal_t1(A, B, S)
    elapsed = time.perf_counter() - start
    expected_t1 = (3 - 1) / (2 - 0)
    e2 = OrthonormalFrame(np.eye(3)[:, [1]])
    ok = (c3 is not None and c3.p == (2,) and p2 == (2,) and U is not None
          and subspace_distance(U, e2) <= 1e-10 and abs(t1 - expected_t1) <= 1e-6 and elapsed < 1.0)
    _report(1, ok, f"p1={None if c3 is None else c3.p}, U=span(e2): {U is not None and subspace_distance(U, e2) <= 1e-10}, "
                   f"maximal_t1={t1:.9f} (want 1 +- 1e-6), {elapsed:.3f}s (< 1 s)")
    assert ok


def test_criterion_02_wielandt_scan(pairs_100):
    start = time.perf_counter()
    worst = min(r.slack for A, B in pairs_100 for _, r in wielandt_scan(A, B))
    elapsed = time.perf_counter() - start
    ok = worst >= -1e-8 and elapsed < 30
    _report(2, ok, f"100 pairs, min slack {worst:.3e} (>= -1e-8), {elapsed:.2f}s (< 30 s)")
    assert ok


def test_criterion_03_lidskii(pairs_100):
    worst = min(lidskii_check(A, B, 1e-8).min_margin for A, B in pairs_100)
    holds = all(lidskii_check(A, B, 1e-8).holds for A, B in pairs_100)
    ok = holds and worst >= -1e-8
    _report(3, ok, f"100 pairs, min prefix margin {worst:.3e} (>= -1e-8)")
    assert ok


def test_criterion_04_rates_vs_differences(pairs_50):
    worst = max(rate_consistency_check(A, B, h=1e-5) for A, B in pairs_50)
    ok = worst <= 1e-3
    _report(4, ok, f"50 pairs, max deviation {worst:.3e} (<= 1e-3)")
    assert ok


def test_criterion_05_rate_majorization(pairs_50):
    worst_margin, worst_total, ok = math.inf, 0.0, True
    for A, B in pairs_50:
        nu = first_order_rates(A, B).nu
        res = majorizes(np.sort(nu)[::-1], eigvalsh(B), 1e-8)
        worst_margin = min(worst_margin, float(np.min(res.margins)))
        worst_total = max(worst_total, abs(float(nu.sum()) - float(eigvalsh(B).sum())))
        ok = ok and res.holds
    ok = ok and worst_margin >= -1e-8 and worst_total <= 1e-10
    _report(5, ok, f"50 pairs, min margin {worst_margin:.3e} (>= -1e-8), max total gap {worst_total:.3e} (<= 1e-10)")
    assert ok


def test_criterion_06_fundamental_theorem(pairs_25):
    worst = 0.0
    for A, B, sets in pairs_25:
        for S in sets:
            integral = integrate_phi_prime(A, B, S, 0.0, 1.0)
            worst = max(worst, abs(integral - (phi_value(A, B, S, 1.0) - phi_value(A, B, S, 0.0))))
    ok = worst <= 1e-6
    _report(6, ok, f"25 pairs x 5 index sets, max |integral - (phi(1) - phi(0))| {worst:.3e} (<= 1e-6)")
    assert ok


def test_criterion_07_certificate_round_trip(planted_100, generic_100):
    start = time.perf_counter()
    worst_slack, worst_residual, certified = 0.0, 0.0, 0
    for inst in planted_100:
        rep = check_equality(inst.A, inst.B, inst.indices)
        worst_slack = max(worst_slack, abs(rep.slack))
        if rep.verdict != EQUALITY:
            continue
        try:
            cert = certify(inst.A, inst.B, inst.indices)
        except Exception:
            continue
        certified += 1
        worst_residual = max(worst_residual, cert.max_residual, *cert.A_invariance,
                             *cert.B_invariance, *cert.top_k_B_match)
    refused = 0
    for A, B, S in generic_100:
        try:
            certify(A, B, S)
        except EqualityNotDetected:
            refused += 1
    elapsed = time.perf_counter() - start
    ok = (worst_slack <= 1e-8 and certified == 100 and worst_residual <= 1e-7
          and refused == 100 and elapsed < 120)
    _report(7, ok, f"planted: max |slack| {worst_slack:.3e} (<= 1e-8), certified {certified}/100, "
                   f"max residual {worst_residual:.3e} (<= 1e-7); generic refused {refused}/100; "
                   f"{elapsed:.1f}s (< 120 s)")
    assert ok


def test_criterion_08_condition_equivalence(mixed_200):
    disagreements, present = [], 0
    for kind, A, B, S in mixed_200:
        rep = equivalence_report(A, B, S)
        if not rep.consistent:
            disagreements.append((kind, rep.present))
        present += all(rep.present)
    ok = not disagreements
    _report(8, ok, f"200 mixed instances ({present} with all conditions present), "
                   f"{len(disagreements)} disagreements (want 0)")
    assert ok, disagreements[:5]


def _exhaustive_condition3(A, B, S):
    """Max rate sum over every increasing p whose A-eigenvalues equal those at S."""
    nu = first_order_rates(A, B).nu
    la = eigvalsh(A)
    scale = 1 + np.abs(la).max()
    best = -math.inf
    for p in itertools.combinations(range(A.n), len(S)):
        if all(abs(la[q] - la[i - 1]) <= 1e-8 * scale for q, i in zip(p, S)):
            best = max(best, float(nu[list(p)].sum()))
    return best


def test_criterion_09_greedy_vs_brute_force():
    worst = 0.0
    for rng in _rngs(9, 100):
        n = int(rng.integers(2, 5))
        spec = np.sort(rng.integers(0, 3, n).astype(float))[::-1]
        A = random_hermitian(n, rng, spec=spec)
        B = random_hermitian(n, rng)
        S = _random_index_set(n, rng)
        greedy = condition3_maximum(A, B, S).achieved
        worst = max(worst, abs(greedy - _exhaustive_condition3(A, B, S)))
    ok = worst <= 1e-10
    _report(9, ok, f"100 instances n <= 4, max |greedy - exhaustive| {worst:.3e} (<= 1e-10)")
    assert ok


def test_criterion_10_crossing_bound(pairs_100, pairs_50, pairs_25, planted_100, generic_100, mixed_200):
    matrices = ([p for p in pairs_100] + [p for p in pairs_50] + [(A, B) for A, B, _ in pairs_25]
                + [(i.A, i.B) for i in planted_100] + [(A, B) for A, B, _ in generic_100]
                + [(A, B) for _, A, B, _ in mixed_200])
    worst_ratio, over = 0.0, 0
    for A, B in matrices:
        tr = trace_pencil(A, B, 0.0, 1.0)
        if A.n > 1:
            worst_ratio = max(worst_ratio, len(tr.crossings) / tr.crossing_bound)
        over += not tr.within_crossing_bound
    ok = over == 0
    _report(10, ok, f"{len(matrices)} traced pencils, {over} over n(n-1), "
                    f"max count/bound {worst_ratio:.3f}")
    assert ok
