"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` (or ``python
tests/test_acceptance.py``); the summary block at the end of the pytest
report lists every criterion with its runtime.
"""

import functools
import sys
import time
from fractions import Fraction as Fr

import pytest

from conftest import process_suite
from oracles import minkowski_cf, necklace_formula
from statdigits.baseq import Cycle, base_q_fraction_order, base_q_fractions, enumerate_cycles
from statdigits.cdf import (
    FromProcess,
    cantor,
    cycle_atomic,
    de_rham_takacs,
    envelope,
    heaviside,
    minkowski,
    mixture,
    process_from_cdf,
    uniform,
)
from statdigits.charfn import limit_scan, periodicity_defect, rajchman_probe
from statdigits.decompose import decompose, detect_atoms, reconstruct_check
from statdigits.process import IID, CycleProcess, MarkovChain, Mixture, is_stationary
from statdigits.statcheck import (
    GridFunction,
    example7_data,
    example7_jumps,
    example7_partial_integral,
    example7_transfer_defect,
    self_similarity_scan,
    sin_turns,
    transfer_convergence_report,
    verify_stationarity,
)

pytestmark = pytest.mark.acceptance

RESULTS: list = []


def criterion(number: int, title: str, budget: float):
    """Time the test body, enforce its runtime budget and record the outcome."""

    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            start = time.perf_counter()
            ok = False
            try:
                fn(*args, **kwargs)
                elapsed = time.perf_counter() - start
                assert elapsed < budget, f"took {elapsed:.2f}s, budget {budget}s"
                ok = True
            finally:
                elapsed = time.perf_counter() - start
                line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title} ({elapsed:.2f}s < {budget:g}s)"
                RESULTS.append((number, line))
                print(line)

        return run

    return wrap


# -------------------------------------------------------------------------

SMALL_CYCLES = {
    (2, 1): [(0,), (1,)],
    (2, 2): [(1, 2)],
    (2, 3): [(1, 2, 4), (3, 5, 6)],
    (3, 1): [(0,), (1,), (2,)],
    (3, 2): [(1, 3), (2, 6), (5, 7)],
    (3, 3): [(1, 3, 9), (2, 6, 18), (4, 12, 10), (5, 15, 19),
             (7, 21, 11), (8, 24, 20), (14, 16, 22), (17, 25, 23)],
}
# numerators over q^n - 1, except order 1 where the members are 0, 1/2, 1 and 0, 1
ORDER_ONE = {2: [Fr(0), Fr(1)], 3: [Fr(0), Fr(1, 2), Fr(1)]}


@criterion(1, "small-cycle table reproduced exactly", 1.0)
def test_c01_small_cycles():
    for (q, n), rows in SMALL_CYCLES.items():
        if n == 1:
            expected = {frozenset([v]) for v in ORDER_ONE[q]}
        else:
            expected = {frozenset(Fr(a, q**n - 1) for a in r) for r in rows}
        assert {c.member_set() for c in enumerate_cycles(q, n)} == expected, (q, n)


@criterion(2, "cycle counts equal the necklace formula, q<=5, n<=8", 5.0)
def test_c02_necklaces():
    for q in range(2, 6):
        for n in range(1, 9):
            assert len(enumerate_cycles(q, n)) == necklace_formula(q, n), (q, n)


@criterion(3, "process stationarity agrees with the CDF functional equation", 30.0)
def test_c03_equivalence():
    suite = process_suite()
    assert len(suite) >= 8
    for name, p in suite.items():
        proc_says = is_stationary(p, 5).stationary
        rep = verify_stationarity(FromProcess(p), p.base, 5)
        assert proc_says == (rep.worst_residual == 0), name
    assert not is_stationary(suite["nonstationary"], 5).stationary


@criterion(4, "uniform and all cycle CDFs of order <= 4 have zero residual", 30.0)
def test_c04_cycles_stationary():
    for q in (2, 3):
        assert verify_stationarity(uniform(), q, 6).worst_residual == 0
        for n in range(1, 5):
            for c in enumerate_cycles(q, n):
                assert verify_stationarity(cycle_atomic(c), q, 6).worst_residual == 0, c


def _oracle_residual(x, q):
    F = minkowski_cf
    return F(x) - F(Fr(0)) - sum(F((x + j) / q) - F(Fr(j, q)) for j in range(q))


@criterion(5, "Minkowski fails: witness 1/4, residual -9/128 (q=2); fails for q=3", 5.0)
def test_c05_minkowski():
    assert _oracle_residual(Fr(1, 4), 2) == Fr(-9, 128)
    rep = verify_stationarity(minkowski(), 2, 4)
    assert not rep.passed
    assert rep.worst_point == Fr(1, 4) and rep.worst_residual == Fr(-9, 128)
    rep3 = verify_stationarity(minkowski(), 3, 4)
    assert not rep3.passed
    assert rep3.worst_residual == _oracle_residual(rep3.worst_point, 3) != 0


@criterion(6, "Cantor CDF is stationary for q=3; marginals (1/2, 0, 1/2) recovered", 5.0)
def test_c06_cantor():
    rep = verify_stationarity(cantor(), 3, 6)
    assert rep.passed and rep.worst_residual == 0
    fd = process_from_cdf(cantor(), 1, 3)
    assert [fd[(d,)] for d in range(3)] == [Fr(1, 2), 0, Fr(1, 2)]


@criterion(7, "self-similarity holds for IID digits and fails for dependent digits", 10.0)
def test_c07_selfsim():
    rep = self_similarity_scan(de_rham_takacs(Fr(1, 3)), (Fr(2, 3), Fr(1, 3)), 6)
    assert rep.worst_residual == 0
    chain = MarkovChain(2, ((Fr(7, 10), Fr(3, 10)), (Fr(2, 5), Fr(3, 5))))
    bad = self_similarity_scan(FromProcess(chain), chain.marginal(), 6)
    assert bad.worst_residual != 0 and bad.worst_point is not None


@criterion(8, "periodicity defect exactly 0 for stationary CDFs, nonzero for Minkowski", 10.0)
def test_c08_periodicity():
    targets = [(FromProcess(p), p.base) for p in process_suite().values() if p.stationary]
    targets += [(uniform(), 2), (uniform(), 3), (cantor(), 3), (heaviside(0), 2),
                (cycle_atomic(Cycle(2, (0, 0, 1))), 2), (cycle_atomic(Cycle(3, (0, 1, 2))), 3)]
    for F, q in targets:
        assert periodicity_defect(F, q, 10).defect == 0.0, F
    rep = periodicity_defect(minkowski(), 2, 10)
    assert rep.defect > 0 and rep.certified_nonzero


@criterion(9, "probe: 0 for uniform, -1/2 for (1/3, 2/3), constant nonzero for Cantor", 60.0)
def test_c09_rajchman():
    assert all(v.value == 0 for v in rajchman_probe(uniform(), 2, k=1, M=6))
    assert all(v.value == -0.5 for v in rajchman_probe(cycle_atomic(Cycle(2, (0, 1))), 2, k=1, M=6))
    vals = rajchman_probe(FromProcess(IID(3, (Fr(1, 2), 0, Fr(1, 2)))), 3, k=1, M=6, depth=30)
    first = vals[0].value
    for v in vals:
        assert v.error_bound <= 1e-3
        assert abs(v.value - first) <= 2 * v.error_bound
        assert abs(v.value) > v.error_bound + 0.1


@criterion(10, "limit scan finds c = 0.7 and the two-part reconstruction", 5.0)
def test_c10_limit():
    F = mixture((Fr(3, 10), Fr(7, 10)), (uniform(), heaviside(0)))
    scan = limit_scan(F, t_max=1e4, tol=1e-3)
    assert scan.found and abs(scan.limit - 0.7) <= 1e-3
    rec = scan.reconstruction()
    for k in range(100):
        x = Fr(k, 99)
        assert abs(float(rec(x)) - float(F.eval(x))) <= 1e-9


@criterion(11, "transfer operator: d_i = 2^-i d_0 for x, sine drops below 1e-3 monotonically", 10.0)
def test_c11_transfer():
    ds = transfer_convergence_report(GridFunction.sample(lambda x: x, 2, 14, exact=True), 12)
    assert ds == [ds[0] / 2**i for i in range(13)] and ds[0] == Fr(1, 4)
    ss = transfer_convergence_report(GridFunction.sample(sin_turns, 2, 14, exact=True), 12)
    assert all(b <= a for a, b in zip(ss, ss[1:]))
    assert min(i for i, d in enumerate(ss) if d < 1e-3) <= 12


@criterion(12, "non-integrable fixed point: jumps, functional equation, divergence", 5.0)
def test_c12_example():
    rows = example7_data(4, 32)
    assert rows[-1][0] == 1 - Fr(1, 16)
    starts = sorted({x for x, _, n in rows if n > 0 and x == 1 - Fr(1, 2**n)})
    jumps = [b for b, left, right in example7_jumps(4) if left != right]
    assert jumps == starts == [Fr(1, 2), Fr(3, 4), Fr(7, 8)]
    assert example7_transfer_defect(4, 10) == 0
    ints = [example7_partial_integral(m) for m in (4, 8, 12, 16)]
    assert all(b >= a + 0.25 for a, b in zip(ints, ints[1:]))


@criterion(13, "decomposition recovers (0.4, 0.6, 0) and the Cantor process is singular", 60.0)
def test_c13_decompose():
    half = Fr(1, 2)
    p = Mixture((Fr(2, 5), Fr(3, 5)), (IID(2, (half, half)), CycleProcess(Cycle(2, (0, 1)))))
    d = decompose(p)
    for got, want in zip(d.theta, (0.4, 0.6, 0.0)):
        assert abs(float(got) - want) <= 1e-3
    assert [a.cycle.member_set() for a in d.atoms] == [{Fr(1, 3), Fr(2, 3)}]
    assert abs(float(d.atoms[0].jump) - 0.3) <= 1e-3
    assert reconstruct_check(p, d).passed
    c = IID(3, (half, 0, half))
    dc = decompose(c)
    assert dc.atoms == [] and dc.theta[2] >= 0.999


@criterion(14, "atoms never sit on base-q fractions; envelopes there shrink below 1e-4", 30.0)
def test_c14_atoms_and_envelopes():
    for name, p in process_suite().items():
        if not p.stationary:
            continue
        for a in detect_atoms(p):
            assert all(base_q_fraction_order(s, p.base) is None for s in a.cycle.members), name
        for x in base_q_fractions(p.base, 4):
            assert envelope(p, x, 24).width < 1e-4, (name, x)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
