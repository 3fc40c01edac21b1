"""Acceptance criteria over the full 2520-run grid.

Each test records one ``[PASS]``/``[FAIL]`` line that is echoed in the pytest
terminal summary. The grid runs twice in one session: once inline and once
through the command line with 8 workers.
"""

from collections import defaultdict

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from delaystream.classifiers import GaussianNB
from delaystream.classifiers.mlp import init_params, loss_and_grad
from delaystream.cli import main
from delaystream.detectors import DDM, Decision
from delaystream.experiment import preset_plan, run_experiment
from delaystream.frameworks import DelayPolicy, make_state, run
from delaystream.metrics import balanced_accuracy
from delaystream.streams import StreamConfig, drift_points, generate_stream
from test_classifiers import numeric_grad
from test_detectors import ddm_reference
from test_evaluation import bac_brute_force

N = 500


def report(number, title, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}")
    assert ok, detail


@pytest.fixture(scope="session")
def grid(tmp_path_factory):
    out = tmp_path_factory.mktemp("grid_jobs1")
    art = run_experiment(preset_plan(), out, jobs=1)
    by_key = {r.config.key(): r for r in art.runs}
    assert len(by_key) == 2520
    return art, by_key


def runs_where(by_key, **match):
    names = ("framework", "detector", "classifier", "n_drifts", "delta", "seed")
    return [r for k, r in by_key.items() if all(dict(zip(names, k))[f] == v for f, v in match.items())]


def test_criterion_1_protocol_arithmetic(grid):
    _, by_key = grid
    bad = []
    for r in by_key.values():
        fw, det, _, k, d, _ = r.config.key()
        s = r.summary
        if fw in ("CR", "TR_S") and s.label_request_fraction != 1.0:
            bad.append((r.config.key(), "request", s.label_request_fraction))
        if fw == "CR" and d == 60 and s.trained_fraction != 441 / N:
            bad.append((r.config.key(), "trained", s.trained_fraction))
        if det == "ORACLE" and k == 5 and d == 1:
            want = {"TR_U": (6 / N, 6 / N), "TR_P": (5 / N, 6 / N)}.get(fw)
            if want and (s.label_request_fraction, s.trained_fraction) != want:
                bad.append((r.config.key(), "oracle", s.label_request_fraction, s.trained_fraction))
    report(1, "protocol arithmetic", not bad,
           f"{len(bad)} violations; CR/TR-S request=1.000, TR-U 0.012/0.012, TR-P 0.010/0.012, CR d=60 441/500"
           + (f"; first: {bad[0]}" if bad else ""))


def test_criterion_2_oracle_exactness(grid):
    _, by_key = grid
    streams = set()
    bad = []
    for r in runs_where(by_key, framework="TR_U", detector="ORACLE"):
        _, _, _, k, _, seed = r.config.key()
        streams.add((k, seed))
        detected = np.flatnonzero(r.flags[:, 2]).tolist()
        if detected != drift_points(StreamConfig(n_drifts=k)):
            bad.append(r.config.key())
    ok = not bad and len(streams) == 30
    report(2, "oracle exactness under TR-U", ok, f"{len(streams)} streams, {len(bad)} mismatching runs")


def test_criterion_3_recovery_shape(grid):
    _, by_key = grid
    delta, worst_drop, worst_gap, fails = 10, np.inf, 0.0, []
    for fw in ("TR_S", "TR_U", "TR_P"):
        runs = runs_where(by_key, framework=fw, detector="ORACLE", classifier="MLP", n_drifts=5, delta=delta)
        assert len(runs) == 10
        trace = np.mean([r.bac for r in runs], axis=0)
        for d in drift_points(StreamConfig(n_drifts=5)):
            pre = trace[d - 20:d].mean()
            during = trace[d:d + delta].mean()
            after = trace[d + delta + 5:d + delta + 26].mean()
            drop, gap = pre - during, abs(after - pre)
            worst_drop, worst_gap = min(worst_drop, drop), max(worst_gap, gap)
            if drop < 0.05 or gap > 0.05:
                fails.append((fw, d, round(drop, 4), round(gap, 4)))
    report(3, "recovery shape (MLP + Oracle, 5 drifts, delta 10)", not fails,
           f"smallest drop {worst_drop:.3f} (need >= 0.05), largest |after - pre| {worst_gap:.3f} (need <= 0.05)"
           + (f"; failing {fails}" if fails else ""))


def test_criterion_4_delta_degradation(grid):
    _, by_key = grid
    fails, margins = [], []
    for fw in ("TR_S", "TR_U", "TR_P"):
        for clf in ("GNB", "MLP", "HT"):
            for k in (10, 15):
                def mean_bac(d):
                    rows = runs_where(by_key, framework=fw, detector="ORACLE", classifier=clf, n_drifts=k, delta=d)
                    assert len(rows) == 10
                    return np.mean([r.summary.mean_bac for r in rows])
                gap = mean_bac(1) - mean_bac(60)
                margins.append(gap)
                if gap < 0.05:
                    fails.append((fw, clf, k, round(gap, 4)))
    report(4, "delta degradation (Oracle, 10/15 drifts, delta 1 vs 60)", not fails,
           f"{len(margins)} cells, smallest drop {min(margins):.3f} (need >= 0.05)")


def test_criterion_5_real_detector_costs(grid):
    _, by_key = grid
    requests = defaultdict(list)
    for r in by_key.values():
        fw, det, clf, k, d, _ = r.config.key()
        requests[(fw, det, clf, k, d)].append(int(r.flags[:, 0].sum()))
    mean = {key: np.mean(v) for key, v in requests.items()}
    ocdd_fail = [key for key in mean if key[:2] == ("TR_U", "OCDD")
                 and mean[key] < mean[("TR_U", "ORACLE") + key[2:]]]
    md3_cells = [key for key in mean if key[:2] == ("TR_P", "MD3")
                 and mean[key] <= mean[("TR_P", "ORACLE") + key[2:]]]
    n_ocdd = sum(1 for key in mean if key[:2] == ("TR_U", "OCDD"))
    ok = not ocdd_fail and len(md3_cells) >= 1
    report(5, "real-detector cost ordering", ok,
           f"OCDD >= Oracle in {n_ocdd - len(ocdd_fail)}/{n_ocdd} TR-U cells; "
           f"MD3 <= Oracle in {len(md3_cells)}/{n_ocdd} TR-P cells (need >= 1)")


def test_criterion_6_oracle_equivalence_suites():
    rng = np.random.default_rng(0)
    # GNB incremental vs batch
    A, B = rng.normal(size=(250, 20)), rng.normal(1, 2, size=(250, 20))
    yA, yB = rng.integers(0, 2, 250), rng.integers(0, 2, 250)
    inc = GaussianNB().fit_incremental(A, yA).fit_incremental(B, yB)
    X, y = np.vstack([A, B]), np.concatenate([yA, yB])
    gnb_err = max(max(np.abs(inc.theta_[c] - X[y == c].mean(0)).max(), np.abs(inc.raw_var_[c] - X[y == c].var(0)).max())
                  for c in (0, 1))
    # MLP gradient
    params = init_params(rng, 6, 8)
    Xp, yp = rng.normal(size=(5, 6)), np.array([0, 1, 0, 1, 1.0])
    _, analytic = loss_and_grad(params, Xp, yp, 1e-2)
    numeric = numeric_grad(params, Xp, yp, 1e-2)
    mlp_err = max((np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-8)).max()
                  for a, n in zip(analytic, numeric))
    # BAC vs confusion matrix
    bac_err = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 60))
        t, p = rng.integers(0, 2, n).tolist(), rng.integers(0, 2, n).tolist()
        bac_err = max(bac_err, abs(balanced_accuracy(t, p) - bac_brute_force(t, p)))
    # DDM seeded Bernoulli shift
    brng = np.random.default_rng(7)
    bits = np.concatenate([brng.random(5000) < 0.1, brng.random(5000) < 0.5]).astype(int)
    det = DDM()
    fired = [k for k, b in enumerate(bits) if det.update(b) is Decision.DRIFT]
    first = fired[0] if fired else None
    ddm_ok = first is not None and 5000 <= first < 6000 and ddm_reference(bits).index("D") == first
    ok = gnb_err <= 1e-9 and mlp_err < 1e-4 and bac_err <= 1e-12 and ddm_ok
    report(6, "oracle-equivalence unit suites", ok,
           f"GNB {gnb_err:.1e} (<=1e-9), MLP grad rel {mlp_err:.1e} (<1e-4), BAC {bac_err:.1e} (<=1e-12), "
           f"DDM first drift at step {first} (change at 5000)")


def test_criterion_7_determinism(grid, tmp_path):
    art, _ = grid
    out = tmp_path / "grid_jobs8"
    assert main(["run", "--preset", "paper", "--jobs", "8", "--out", str(out), "--quiet"]) == 0
    a = art.summary.read_bytes()
    b = (out / "summary.csv").read_bytes()
    rows = a.count(b"\n") - 1
    same_results = art.results.read_bytes() == (out / "results.csv").read_bytes()
    ok = a == b and rows == 2520 and same_results
    report(7, "determinism (two runs, jobs 1 vs 8)", ok,
           f"summary.csv {'identical' if a == b else 'DIFFERS'} ({rows} rows), "
           f"results.csv {'identical' if same_results else 'DIFFERS'}")


def test_criterion_8_label_causality():
    bad, checked = [], 0
    pairs = [("CR", None), ("TR_S", "DDM"), ("TR_S", "ORACLE"), ("TR_U", "OCDD"), ("TR_U", "ORACLE"),
             ("TR_P", "MD3"), ("TR_P", "ORACLE")]
    for k in (5, 10, 15):
        stream = generate_stream(StreamConfig(n_drifts=k, seed=k))
        for fw, det in pairs:
            for clf in ("GNB", "HT", "MLP"):
                for delta in (1, 10, 20, 60):
                    state = make_state(fw, stream, clf, det, DelayPolicy(delta=delta), seed=0)
                    run(fw, stream, state=state)
                    for j, now, purpose in state.labels.accesses:
                        checked += 1
                        if purpose == "bootstrap":
                            ok = j == 0 and now == 0
                        else:
                            ok = now >= j + delta
                        if not ok:
                            bad.append((fw, det, clf, delta, j, now, purpose))
    report(8, "label causality audit", not bad,
           f"{checked} label reads across 7 pairings x 3 learners x 4 delays x 3 streams, {len(bad)} early reads "
           "(chunk-0 bootstrap labels are the protocol's free exception)")
