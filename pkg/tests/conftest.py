import numpy as np
import pytest

from outliermbc import gmm, sequencer
from outliermbc.sequencer import BacktrackConfig, choose_backtrack, choose_minimum

# every EM fit in the suite raises on a log-likelihood drop beyond the slack
gmm.STRICT_MONOTONE = True

TRACE_AUDIT = {"traces": 0, "violations": []}
# (name, passed, detail) per acceptance criterion, printed in the summary
ACCEPTANCE = []


def _audit_trace(trace):
    if not trace.valid_mask.any():
        return
    TRACE_AUDIT["traces"] += 1
    o_min = choose_minimum(trace)
    o_bt = choose_backtrack(trace)
    o_a0 = choose_backtrack(trace, BacktrackConfig(alpha=0.0, beta=0.10))
    o_b0 = choose_backtrack(trace, BacktrackConfig(alpha=0.05, beta=0.0))
    if not (o_bt <= o_min and o_a0 == o_min and o_b0 == o_min):
        TRACE_AUDIT["violations"].append((trace.M, o_min, o_bt, o_a0, o_b0))
        raise AssertionError(f"backtrack dominance broken: min={o_min} bt={o_bt} alpha0={o_a0} beta0={o_b0}")


sequencer.TRACE_HOOKS.append(_audit_trace)


def pytest_collection_modifyitems(config, items):
    # the acceptance gate summarises audits gathered by the rest of the suite
    items.sort(key=lambda it: it.nodeid.startswith("tests/test_acceptance.py"))


def pytest_terminal_summary(terminalreporter):
    a = gmm.audit
    terminalreporter.write_line(
        f"EM audit: {a['fits']} fits, {a['violations']} monotonicity violations, worst drop {a['worst_drop']:.3e}"
    )
    terminalreporter.write_line(
        f"trace audit: {TRACE_AUDIT['traces']} traces, {len(TRACE_AUDIT['violations'])} backtrack violations"
    )
    for name, passed, detail in ACCEPTANCE:
        status = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
        terminalreporter.write_line(f"ACCEPTANCE {status} {name}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def blobs(rng, sizes=(60, 60, 60), sep=10.0, p=2):
    """Well-separated spherical clusters with labels 1..G."""
    centres = sep * np.eye(max(len(sizes), p))[: len(sizes), :p]
    X = np.vstack([rng.standard_normal((s, p)) + centres[g] for g, s in enumerate(sizes)])
    y = np.concatenate([np.full(s, g + 1) for g, s in enumerate(sizes)])
    return X, y
