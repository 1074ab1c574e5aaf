"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line.

Criteria are run at their stated tolerances. The terminal summary lists
every outcome; a failing criterion fails its test.
"""

import json
import os

import numpy as np
import pytest

from conftest import ACCEPTANCE, TRACE_AUDIT
from outliermbc import gmm, simgen
from outliermbc.cli import RunConfig, cmd_fit, run_fit
from outliermbc.dataio import read_csv, write_labeled_csv
from outliermbc.dissim import step_dissim
from outliermbc.gross import knn_distance
from outliermbc.init import hier_init
from outliermbc.metrics import adjusted_rand_index
from outliermbc.numcore import BetaRef, beta_cdf, chisq_quantile

from test_gross import knn_oracle
from test_metrics import PARTS, pair_count_ari

BANKNOTE_ENV = "OUTLIERMBC_BANKNOTE_CSV"


def report(name, passed, detail):
    ACCEPTANCE.append((name, passed, detail))
    status = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
    print(f"ACCEPTANCE {status} {name}: {detail}")
    return passed


def test_beta_law_sanity():
    details, ok = [], True
    for p, n in ((2, 1000), (6, 2000)):
        vals = []
        for seed in range(1, 21):
            X = simgen.single_gaussian(n, p, seed).data
            vals.append(step_dissim(X, gmm.fit(X, hier_init(X, 1))).aggregated)
        hits = int(np.sum(np.array(vals) < 0.03))
        ok &= hits >= 18
        details.append(f"p={p} n={n}: {hits}/20 below 0.03 (max {max(vals):.2e})")
    assert report("beta-law sanity", ok, "; ".join(details))


def test_clean_data_null():
    chosen = []
    for seed in range(1, 21):
        X = simgen.sample_mixture(simgen.tclust_scenario(2, "equal", 1, seed)).data
        rep, _, _, _ = run_fit(X, None, RunConfig(G=3, M=20))
        chosen.append(rep["solutions"]["minimum"]["chosen_o"])
    hits = sum(o <= 2 for o in chosen)
    assert report("clean-data null", hits >= 18, f"minimum rule o<=2 on {hits}/20 seeds (need 18); o={chosen}")


def test_illustrative_band():
    good, rows = 0, []
    for seed in range(1, 11):
        ld = simgen.illustrative_dataset("small", seed)
        rep, _, _, _ = run_fit(ld.data, ld.labels, RunConfig(G=3, M=30))
        m = rep["metrics"]
        ok = all(10 - m[r]["fn"] >= 9 and m[r]["fp"] <= 2 for r in ("minimum", "backtrack"))
        good += ok
        rows.append(f"s{seed}:{10 - m['minimum']['fn']}/{m['minimum']['fp']},{10 - m['backtrack']['fn']}/{m['backtrack']['fp']}")
    assert report("illustrative band", good >= 8,
                  f"{good}/10 seeds with >=9 found and <=2 FP under both rules (need 8); tp/fp min,bt: {' '.join(rows)}")


@pytest.fixture(scope="module")
def desk_runs():
    out = {"minimum": [], "backtrack": []}
    for prop in ("equal", "unequal"):
        for model in range(1, 6):
            for seed in (1, 2):
                ld = simgen.generate(simgen.tclust_scenario(2, prop, model, seed))
                rep, _, _, _ = run_fit(ld.data, ld.labels, RunConfig(G=3, M=150))
                for rule in out:
                    out[rule].append(rep["metrics"][rule])
    return out


def test_tclust_desk_scale(desk_runs):
    mean = {r: {k: float(np.mean([m[k] for m in v])) for k in ("ari", "outlier_f1", "fp", "fn", "n_outliers")}
            for r, v in desk_runs.items()}
    mn, bt = mean["minimum"], mean["backtrack"]
    ok = mn["ari"] >= 0.90 and mn["outlier_f1"] >= 0.85 and bt["fp"] <= mn["fp"]
    detail = (f"minimum ARI {mn['ari']:.3f} F1 {mn['outlier_f1']:.3f} FP {mn['fp']:.2f} FN {mn['fn']:.2f}; "
              f"backtrack ARI {bt['ari']:.3f} F1 {bt['outlier_f1']:.3f} FP {bt['fp']:.2f} FN {bt['fn']:.2f}")
    assert report("TCLUST desk scale", ok, detail)


def test_backtrack_dominance():
    # the suite-wide hook has checked every trace produced so far (including the runs above)
    n, bad = TRACE_AUDIT["traces"], TRACE_AUDIT["violations"]
    ok = n > 0 and not bad
    assert report("backtrack dominance", ok, f"{n} traces audited, {len(bad)} violations (alpha=0 and beta=0 equality included)")


def test_oracle_equivalences():
    y = np.linspace(0.0, 1.0, 1000)
    beta_err = max(float(np.max(np.abs(beta_cdf(y, BetaRef(1.0, b)) - (1.0 - (1.0 - y) ** b)))) for b in (0.5, 2.0, 148.5, 997.5))
    q = chisq_quantile(0.99, 2)
    X = np.random.default_rng(100).uniform(0, 1, (100, 2))
    knn_ok = bool(np.array_equal(knn_distance(X, 5), knn_oracle(X, 5)))
    ari_ok = all(adjusted_rand_index(a, b) == pair_count_ari(a, b) for a in PARTS for b in PARTS)
    ok = beta_err <= 1e-10 and abs(q - 9.21034) <= 1e-6 and knn_ok and ari_ok
    detail = (f"beta a=1 max err {beta_err:.1e}; chisq(0.99,2)={q:.8f}; knn exact={knn_ok}; "
              f"ARI exact on {len(PARTS)}x{len(PARTS)} partition pairs={ari_ok}")
    assert report("oracle equivalences", ok, detail)


def test_em_monotonicity():
    a = gmm.audit
    ok = gmm.STRICT_MONOTONE and a["fits"] > 0 and a["violations"] == 0
    assert report("EM monotonicity", ok,
                  f"{a['fits']} fits audited, {a['violations']} drops beyond {gmm.MONOTONE_SLACK:g} (worst {a['worst_drop']:.1e})")


def test_swiss_banknote():
    path = os.environ.get(BANKNOTE_ENV)
    if not path:
        report("Swiss banknote", None, f"set {BANKNOTE_ENV} to a CSV with label 1=genuine, 2=counterfeit")
        pytest.skip("banknote data not supplied")
    data, labels, _ = read_csv(path)
    assert labels is not None, "banknote CSV needs a label column"
    rep, assign, _, _ = run_fit(data, None, RunConfig(G=2, M=50))
    details, ok = [], True
    for rule in ("minimum", "backtrack"):
        a = assign[rule]
        out = a == 0
        genuine, counterfeit = int(np.sum(out & (labels == 1))), int(np.sum(out & (labels == 2)))
        mixing = sum(len(set(labels[a == g])) > 1 for g in (1, 2))
        ok &= out.sum() == 20 and genuine == 5 and counterfeit == 15 and mixing == 0
        details.append(f"{rule}: {int(out.sum())} outliers ({genuine} genuine / {counterfeit} counterfeit), {mixing} mixed clusters")
    assert report("Swiss banknote", ok, "; ".join(details))


def test_determinism(tmp_path):
    ld = simgen.generate(simgen.tclust_scenario(2, "unequal", 4, 7))
    write_labeled_csv(tmp_path / "d.csv", ld.data, ld.labels)
    cfg = RunConfig(G=3, M=120, user_o=40)
    cmd_fit(tmp_path / "d.csv", cfg, tmp_path / "a")
    cmd_fit(tmp_path / "d.csv", cfg, tmp_path / "b")
    same = (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()
    timings_apart = "seconds" in json.loads((tmp_path / "a" / "timings.json").read_text())
    assert report("determinism", same and timings_apart, f"report.json byte-identical across two runs: {same}")
