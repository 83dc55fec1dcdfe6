"""Acceptance suite: one test per release criterion, each printing a PASS/FAIL
line (run pytest -s to see them).  Tolerances are fixed here, not tuned."""

import json
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from polyrank import (
    OptimizerConfig,
    apply_orthogonal,
    bombieri_inner,
    bombieri_norm,
    concentrate,
    evaluate,
    frame_budget,
    greedy_approximate,
    hard_family,
    operator_norm,
    pow_linear,
    project_subspace,
    quadratic_matrix,
    quadratic_poly,
    reconstruct,
    step_bound,
    subspace_norm,
    verify_chain,
)
from polyrank.frames import random_frame, random_orthogonal
from polyrank.generators import bombieri_gaussian, sparse_gaussian
from polyrank.serialize import poly_dumps


def _report(num: int, name: str, ok: bool, extra: str = ""):
    verdict = "PASS" if ok else "FAIL"
    suffix = f" ({extra})" if extra else ""
    print(f"acceptance {num} {name}: {verdict}{suffix}")


def test_criterion_1_greedy_step_bound():
    t0 = time.time()
    cfg = OptimizerConfig(restarts=4, max_iters=100, tol=1e-8, seed=101)
    rng = np.random.default_rng(10)
    per_d = {2: 6, 3: 3, 4: 2}
    instances = 0
    count_violations = 0
    residual_violations = 0
    for d in (2, 3, 4):
        for n in range(4, 11):
            for eps in (0.3, 0.5, 0.8):
                bound = step_bound(eps)
                for rep in range(per_d[d]):
                    if rep % 2 == 0:
                        p = bombieri_gaussian(n, d, rng)
                    else:
                        p = sparse_gaussian(n, d, 3 * n, rng)
                    if p.is_zero:
                        continue
                    a = greedy_approximate(p, eps, cfg)
                    instances += 1
                    if len(a.terms) > bound:
                        count_violations += 1
                    if a.residual_opnorm_est[-1] > eps * a.input_norm * (1 + 1e-9):
                        residual_violations += 1
    elapsed = time.time() - t0
    ok = instances >= 200 and count_violations == 0 and residual_violations == 0
    _report(1, "greedy step bound", ok,
            f"{instances} instances, {elapsed:.1f}s")
    assert instances >= 200
    assert count_violations == 0
    assert residual_violations == 0


def test_criterion_2_degree2_oracle_equivalence():
    cfg = OptimizerConfig(restarts=16, seed=202)
    rng = np.random.default_rng(20)
    # pre-validate the top-k eigenvalue oracle by brute-force frame search
    for n in (3, 4):
        A = rng.standard_normal((n, n))
        A = (A + A.T) / 2
        p = quadratic_poly(A)
        lams = np.sort(np.linalg.eigvalsh(A) ** 2)[::-1]
        for k in range(1, n):
            oracle = math.sqrt(lams[:k].sum())
            best = max(
                bombieri_norm(project_subspace(p, random_frame(n, k, rng)))
                for _ in range(500)
            )
            assert best <= oracle + 1e-9

    worst_op = worst_frob = worst_sub = 0.0
    for i in range(100):
        n = 2 + i % 7  # n in 2..8
        A = rng.standard_normal((n, n))
        A = (A + A.T) / 2
        p = quadratic_poly(A)
        lams = np.linalg.eigvalsh(A)
        op_true = float(np.max(np.abs(lams)))
        op_est = operator_norm(p, cfg).value
        worst_op = max(worst_op, abs(op_est - op_true) / op_true)
        worst_frob = max(worst_frob, abs(bombieri_norm(p) - np.linalg.norm(A)))
        k = 1 + i % n
        sub_true = math.sqrt(np.sort(lams ** 2)[::-1][:k].sum())
        sub_est = subspace_norm(p, k, cfg).value
        worst_sub = max(worst_sub, abs(sub_est - sub_true) / sub_true)
    ok = worst_op <= 1e-6 and worst_frob <= 1e-10 and worst_sub <= 1e-5
    _report(2, "degree-2 oracle equivalence", ok,
            f"op {worst_op:.2e}, frob {worst_frob:.2e}, sub {worst_sub:.2e}")
    assert worst_op <= 1e-6
    assert worst_frob <= 1e-10
    assert worst_sub <= 1e-5


def test_criterion_3_reproducing_identity():
    rng = np.random.default_rng(30)
    worst = 0.0
    checked = 0
    for _ in range(500):
        d = int(rng.integers(1, 7))
        n = int(rng.integers(2, 9))
        p = sparse_gaussian(n, d, 2 * n, rng)
        if p.is_zero:
            continue
        u = rng.standard_normal(n)
        u /= np.linalg.norm(u)
        lhs = bombieri_inner(p, pow_linear(u, d))
        rhs = evaluate(p, u)
        scale = max(abs(rhs), 1e-30)
        worst = max(worst, abs(lhs - rhs) / scale)
        checked += 1
    ok = checked >= 490 and worst <= 1e-9
    _report(3, "reproducing identity", ok, f"{checked} pairs, worst {worst:.2e}")
    assert checked >= 490
    assert worst <= 1e-9


def test_criterion_4_orthogonal_invariance():
    cfg = OptimizerConfig(restarts=48, seed=404)
    rng = np.random.default_rng(40)
    worst_norm = worst_op = 0.0
    cases = [(4, 2), (5, 2), (4, 3), (5, 3), (6, 3)]
    for n, d in cases:
        p = bombieri_gaussian(n, d, rng)
        base_norm = bombieri_norm(p)
        base_op = operator_norm(p, cfg).value
        for _ in range(10):
            Q = random_orthogonal(n, rng)
            q = apply_orthogonal(p, Q)
            worst_norm = max(worst_norm, abs(bombieri_norm(q) - base_norm) / base_norm)
            op = operator_norm(q, cfg).value
            worst_op = max(worst_op, abs(op - base_op) / base_op)
    ok = worst_norm <= 1e-8 and worst_op <= 1e-5
    _report(4, "orthogonal invariance", ok,
            f"norm {worst_norm:.2e}, opnorm {worst_op:.2e} over 50 rotations")
    assert worst_norm <= 1e-8
    assert worst_op <= 1e-5


def test_criterion_5_hard_family_floor():
    n = 16
    cfg = OptimizerConfig(restarts=6, seed=505)
    p = hard_family(n)
    # matrix-rank oracle: k power terms have matrix rank <= k <= 2k, and the
    # best rank-r Frobenius approximation of the identity misses sqrt(n - r)
    a = greedy_approximate(p, 0.2, cfg)
    assert len(a.terms) >= 8
    worst_margin = math.inf
    for k in range(1, 8):
        q = reconstruct(
            type(a)(terms=a.terms[:k], residual_bombieri=a.residual_bombieri[:k + 1],
                    residual_opnorm_est=a.residual_opnorm_est[:k + 1], eps=a.eps,
                    input_norm=a.input_norm, n=n, d=2),
            n, 2,
        )
        rank_q = int(np.sum(np.abs(np.linalg.eigvalsh(quadratic_matrix(q))) > 1e-8))
        assert rank_q <= 2 * k
        rel_err = a.residual_bombieri[k] / a.input_norm
        floor = math.sqrt((n - 2 * k) / n)
        worst_margin = min(worst_margin, rel_err - floor)
        assert rel_err >= floor - 1e-6
    # while the sphere-max criterion is satisfied with no terms at all
    zero_terms = greedy_approximate(p, 0.3, cfg)
    assert len(zero_terms.terms) == 0
    ok = worst_margin >= -1e-6
    _report(5, "hard family floor", ok, f"min margin {worst_margin:.3e}")


def test_criterion_6_chain_soundness():
    t0 = time.time()
    cfg = OptimizerConfig(restarts=6, max_iters=150, tol=1e-9, seed=606)
    rng = np.random.default_rng(60)
    runs = 0
    link_failures = 0
    dim_failures = 0
    for d in (2, 3):
        for n in (4, 5, 6, 7, 8):
            for _ in range(10):
                p = bombieri_gaussian(n, d, rng)
                rep = concentrate(p, 0.9, cfg, eps_inner=0.45)
                chk = verify_chain(p, rep, cfg)
                runs += 1
                if not (all(l.passed for l in chk.links) and all(chk.checks.values())):
                    link_failures += 1
                k, dim_v, _ = rep.chain.dims
                if dim_v > frame_budget(k, d):
                    dim_failures += 1
    elapsed = time.time() - t0
    ok = runs == 100 and link_failures == 0 and dim_failures == 0
    _report(6, "chain soundness", ok, f"{runs} runs, {elapsed:.1f}s")
    assert runs == 100
    assert link_failures == 0
    assert dim_failures == 0


def test_criterion_7_planted_concentration_recovery():
    cfg = OptimizerConfig(restarts=12, seed=707)
    rng = np.random.default_rng(70)
    for k_true in (1, 2, 3):
        for _ in range(4):
            n = 6
            big = np.linspace(3.5, 2.5, k_true)
            small = rng.uniform(-0.02, 0.02, size=n - k_true)
            Q = random_orthogonal(n, rng)
            A = Q @ np.diag(np.concatenate([big, small])) @ Q.T
            p = quadratic_poly(A)
            rep = concentrate(p, 0.9, cfg, eps_inner=0.1)
            assert rep.k <= k_true
            trailing = np.sort(np.abs(np.linalg.eigvalsh(A)))[::-1][rep.k:]
            bound = float(trailing[0] ** 2) if len(trailing) else 0.0
            assert rep.defect <= bound + 1e-6
    _report(7, "planted concentration recovery", True)


def _run_matrix(env, tmp_path):
    poly_path = tmp_path / "p.json"
    report_path = tmp_path / f"rep-{env.get('OMP_NUM_THREADS')}.json"
    base = [sys.executable, "-m", "polyrank.cli"]
    fixed = ["--seed", "5", "--restarts", "6", "--format", "json"]
    outputs = []
    commands = [
        ["gen", "--n", "5", "--d", "2", "--model", "bombieri-gaussian"],
        ["norm", str(poly_path)],
        ["opnorm", str(poly_path)],
        ["subnorm", str(poly_path), "--k", "2"],
        ["approx", str(poly_path), "--eps", "0.5"],
        ["concentrate", str(poly_path), "--eps", "0.8", "--eps-inner", "0.45",
         "--out", str(report_path)],
        ["chain-check", str(poly_path), "--report", str(report_path)],
        ["bench", "--eps-list", "0.5", "--d-list", "2", "--n-list", "4",
         "--samples", "2"],
        ["ratio-probe", "--d", "2", "--k", "2", "--n", "4", "--samples", "3"],
    ]
    for cmd in commands:
        proc = subprocess.run(base + cmd + fixed, capture_output=True, env=env)
        assert proc.returncode == 0, (cmd, proc.stderr.decode())
        outputs.append(proc.stdout)
        if cmd[0] == "gen":
            poly_path.write_bytes(proc.stdout)
        if cmd[0] == "concentrate":
            outputs.append(report_path.read_bytes())
    return b"\x00".join(outputs)


def test_criterion_8_cli_determinism(tmp_path):
    env1 = dict(os.environ)
    env2 = dict(os.environ)
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        env1[var] = "1"
        env2[var] = str(max(os.cpu_count() or 2, 2))
    out1 = _run_matrix(env1, tmp_path)
    out2 = _run_matrix(env2, tmp_path)
    ok = out1 == out2
    _report(8, "CLI determinism across thread counts", ok,
            f"{len(out1)} bytes compared")
    assert ok
