"""Acceptance criteria, one check per criterion.

Under pytest each criterion is one test, and a PASS/FAIL line per criterion
is printed in the terminal summary. Run directly, the file prints the lines:

    python3 tests/test_acceptance.py

A criterion fails when any of its parts fails; the line names the part.
"""

from __future__ import annotations

import json
import math
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from magicdesign import commutant, densesim, moments, stabsim, statmech
from magicdesign.densesim import ArchitectureSpec, GlobalClifford
from magicdesign.runner import ExperimentConfig, canonical_bytes, gluing_spec, run

CRITERIA: dict = {}
RESULTS: dict = {}


def criterion(num: int, title: str):
    def wrap(fn):
        CRITERIA[num] = (title, fn)
        return fn

    return wrap


def _report(experiment: str, seed: int | None = None, **params):
    cfg = ExperimentConfig.build(experiment, {}, params, seed=seed)
    return run(cfg)


# --- 1 ---------------------------------------------------------------------------------


@criterion(1, "catalog counts and brute-force oracle")
def c01():
    t0 = time.perf_counter()
    counts = {k: len(commutant.enumerate_sigma(k)) for k in (2, 3, 4, 5)}
    elapsed = time.perf_counter() - t0
    counts[6] = len(commutant.enumerate_sigma(6))
    product = {k: math.prod(2**i + 1 for i in range(k - 1)) for k in counts}
    ok = counts == product == {2: 2, 3: 6, 4: 30, 5: 270, 6: 4590}
    for k in (2, 3, 4):
        brute = {t.key() for t in commutant.enumerate_sigma_bruteforce(k).elements}
        ok &= brute == {t.key() for t in commutant.enumerate_sigma(k).elements}
    ok &= elapsed <= 300
    return ok, f"counts {counts}, brute force equal for k<=4, k<=5 in {elapsed:.2f}s"


# --- 2 ---------------------------------------------------------------------------------


@criterion(2, "exact Weingarten inverse and asymptotic scaling")
def c02():
    pairs = [(k, n) for k in range(1, 6) for n in range(max(k - 1, 1), 9)]
    exact_ok = all(commutant.clifford_weingarten(k, n).check_identity() for k, n in pairs)
    scaling = {}
    scale_ok = True
    for k in (2, 3, 4):
        q = []
        for n in range(max(k - 1, 1), 9):
            w = commutant.clifford_weingarten(k, n).as_float()
            off = w - np.diag(np.diag(w))
            q.append(float(np.max(np.abs(off))) * 2.0 ** (n * k + n))
        scaling[k] = (round(min(q), 4), round(max(q), 4))
        scale_ok &= max(q) <= 2 and all(b <= a * (1 + 1e-12) for a, b in zip(q, q[1:]))
    return exact_ok and scale_ok, f"{len(pairs)} exact inverses; |Wg_off| 2^(nk+n) range per k {scaling}"


# --- 3 ---------------------------------------------------------------------------------


@criterion(3, "single-qubit Haar twirl bound on non-permutation elements")
def c03():
    out = {}
    ok = True
    for k in (4, 5):
        cat = commutant.enumerate_sigma(k)
        diag = commutant.haar_twirl_table(k).diagonal()
        perms = set(cat.perm_indices)
        worst = max(Fraction(int(diag[i].p), int(diag[i].q)) for i in range(len(cat)) if i not in perms) / 2**k
        out[k] = str(worst)
        ok &= worst <= Fraction(7, 8)
    return ok, f"max ratio {out} (bound 7/8)"


# --- 4 ---------------------------------------------------------------------------------


@criterion(4, "Schatten and diamond norm closed forms")
def c04():
    cat = commutant.enumerate_sigma(4)
    err = 0.0
    for t in cat.elements:
        s = np.linalg.svd(commutant.r_dense(t, 1).astype(float), compute_uv=False)
        err = max(err, abs(s.sum() - 2 ** (4 - t.defect_dim)), abs(s.max() - 2**t.defect_dim))
    mismatches = sum(
        commutant.diamond_norm_witness(a, b) != commutant.diamond_norm_formula(a, b)
        for a in cat.elements
        for b in cat.elements
    )
    return err <= 1e-10 and mismatches == 0, f"max norm error {err:.1e}; diamond mismatches {mismatches}/900"


# --- 5 ---------------------------------------------------------------------------------


@criterion(5, "moment identities and Monte Carlo stabilizer moment")
def c05():
    d12 = float(np.max(np.abs(moments.clifford_moment(1, 2) - moments.haar_moment(1, 2))))
    zero_ok = True
    for N, k in ((2, 3), (2, 4)):
        rho = moments.clifford_moment(N, k)
        # entries are sums of 0/1 over Sigma divided by Z, so rounding is exact here
        zero_ok &= Fraction(rho[0, 0].real).limit_denominator(10**9) == Fraction(commutant.sigma_count(k), moments.clifford_Z(N, k))
    est = moments.mc_moment(ArchitectureSpec(2, [GlobalClifford()]), 3, 100_000, np.random.default_rng(5))
    dist = float(np.linalg.norm(est.matrix - moments.clifford_moment(2, 3)))
    ok = d12 <= 1e-12 and zero_ok and dist <= 3 * est.sigma
    return ok, f"|rho_C - rho_H| {d12:.1e} at (1,2); <0|rho|0> exact: {zero_ok}; MC 2-norm {dist:.2e} vs 3 sigma {3 * est.sigma:.2e}"


# --- 6 ---------------------------------------------------------------------------------


@criterion(6, "transfer-matrix frame potentials")
def c06():
    single = all(
        statmech.frame_potential_transfer_exact(statmech.ChainSpec(k, max(k - 1, 1), 1))
        == Fraction(commutant.sigma_count(k), moments.clifford_Z(2 * max(k - 1, 1), k))
        for k in (2, 3, 4)
    )
    chain = statmech.ChainSpec(3, 2, 2)
    t0 = time.perf_counter()
    exact = float(statmech.frame_potential_transfer(chain))
    est = moments.frame_potential_mc(chain.architecture(), 3, 1_000_000, np.random.default_rng(6))
    elapsed = time.perf_counter() - t0
    z = (est.mean - exact) / est.stderr
    ok = single and abs(z) <= 3 and elapsed <= 600
    return ok, f"L=1 exact: {single}; (3,2,2) transfer {exact:.4e}, MC {est.mean:.4e} (z = {z:+.2f}) in {elapsed:.0f}s"


# --- 7 ---------------------------------------------------------------------------------


@criterion(7, "additive-error trends over xi and N_M")
def c07():
    scan = _report("stab-design-scan", seed=7, n=6, k=3, xi="1,2,3", samples=100_000)
    a_ok = scan.checks["excess_non_increasing_3sigma"]
    ex = [f"{p['excess']:.2e}" for p in scan.summary["points"]]
    mag = _report("magic-scan", seed=7, n=8, k=3, xi=2, n_magic="0,2,4,8", samples=50_000)
    b_mono = mag.checks["excess_non_increasing_3sigma"]
    b_drop = mag.checks["last_below_first_5sigma"]
    pts = mag.summary["points"]
    exact = sorted({f"{p['exact_excess']:.3e}" for p in pts})
    # supplement: the same scan at k=4 from the transfer matrix
    haar4 = float(statmech.haar_frame_potential(12, 4))
    k4 = []
    for nm in (0, 4, 8, 12):
        sites = tuple(s for s in ((0, min(nm, 6)), (1, max(0, nm - 6))) if s[1])
        k4.append(float(statmech.frame_potential_transfer(statmech.ChainSpec(4, 3, 2, magic=sites))) / haar4 - 1)
    parts = [
        f"(a) xi scan excess {ex}: {'ok' if a_ok else 'FAIL'}",
        f"(b) N_M scan monotone: {'ok' if b_mono else 'FAIL'}, 5 sigma drop at N_M=8: {'ok' if b_drop else 'FAIL'}"
        f" (exact k=3 excess over N_M: {exact}; k=4 relative excess at N=12: {[round(v, 4) for v in k4]})",
    ]
    return a_ok and b_mono and b_drop, "; ".join(parts)


# --- 8 ---------------------------------------------------------------------------------


@criterion(8, "relative-error checks")
def c08():
    eps_c = moments.relative_error_state(moments.clifford_moment(2, 4), 2, 4)
    a_ok = eps_c >= 0.1
    rep = _report("relative-check", n=2, k=2, xi=1, ell=2, mode="state")
    b_ok = rep.checks["architecture_below_clifford"]
    sup = _report("relative-check", n=3, k=4, xi=1, ell=2, mode="state").summary
    parts = [
        f"(a) eps_C(N=2,k=4) = {eps_c:.3f}: {'ok' if a_ok else 'FAIL'}",
        f"(b) n=2,k=2 eps {rep.summary['eps_architecture']:.1e} vs Clifford {rep.summary['eps_clifford']:.1e}:"
        f" {'ok' if b_ok else 'FAIL'} (n=3,k=4: {sup['eps_architecture']:.3f} vs {sup['eps_clifford']:.3f})",
    ]
    return a_ok and b_ok, "; ".join(parts)


# --- 9 ---------------------------------------------------------------------------------


@criterion(9, "no-go numerics")
def c09():
    rng = np.random.default_rng(9)
    u = densesim.haar_unitary_batch(8, 10_000, rng)
    vals = np.array([moments.sre_pauli_moment(v) for v in u[:, :, 0]])
    se = vals.std(ddof=1) / math.sqrt(len(vals))
    haar_ok = abs(vals.mean() - 4 / 11) <= 3 * se
    stab_err = 0.0
    for i in range(200):
        n = 1 + i % 6
        t = stabsim.apply_clifford(stabsim.StabilizerTableau.zero_state(n), stabsim.random_clifford(n, rng), range(n))
        stab_err = max(stab_err, abs(moments.sre_pauli_moment(stabsim.tableau_to_dense(t)) - 1))
    prod = moments.nogo_lower_bound([(0.0, 1)] * 24)
    rep = _report("nogo", seed=9, n=8, family="shallow", samples=100, depth=1, region=2)
    inter_ok = rep.checks["intermediate_inequality_all"] and rep.summary["states"] == 100
    ok = haar_ok and stab_err < 1e-12 and abs(prod - 0.375) < 1e-15 and inter_ok
    return ok, (
        f"Haar mean {vals.mean():.4f} +- {se:.4f} vs 4/11; stabilizer max |m-1| {stab_err:.1e};"
        f" product bound {prod}; intermediate inequality {rep.summary['intermediate_holds']}/100"
    )


# --- 10 --------------------------------------------------------------------------------


@criterion(10, "collision probabilities")
def c10():
    pc = moments.collision_exact_clifford(2, 2)
    est = moments.collision_probability(ArchitectureSpec(2, [GlobalClifford()]), 0, 2, 100_000, np.random.default_rng(10))
    rep = _report("collision", seed=10, n=6, k=3, xi="1,2,3", samples=200_000)
    trend = rep.checks["deviation_non_increasing_3sigma"]
    devs = [round(p["deviation"], 3) for p in rep.summary["points"]]
    ok = pc == Fraction(1, 10) and est.within(0.1) and trend
    return ok, f"p_C = {pc}; MC {est.mean:.4f} +- {est.stderr:.4f}; relative deviation over xi {devs}"


# --- 11 --------------------------------------------------------------------------------


@criterion(11, "gluing experiment")
def c11():
    rep = _report("gluing", seed=11, k=3, na=1, nd=1, nb="2,3", nc="2,3", samples=50_000)
    trend = rep.checks["mc_non_increasing_in_nb_3sigma"] and rep.checks["mc_non_increasing_in_nc_3sigma"]
    pts = {(p["nb"], p["nc"]): round(p["mc"], 3) for p in rep.summary["points"]}
    # exact-design inputs under a global Clifford: N_A = N_D = 0
    est = moments.frame_potential_mc(gluing_spec(0, 2, 2, 0), 3, 50_000, np.random.default_rng(11))
    fh = float(statmech.haar_frame_potential(4, 3))
    zero_ok = est.within(fh)
    return trend and zero_ok, f"MC additive error over (N_B, N_C) {pts}; global-Clifford case F - F_H = {est.mean - fh:+.1e} +- {est.stderr:.1e}"


# --- 12 --------------------------------------------------------------------------------


@criterion(12, "reproducible reports")
def c12(tmp: Path | None = None):
    import tempfile

    tmp = Path(tempfile.mkdtemp()) if tmp is None else tmp
    cfg = tmp / "run.cfg"
    cfg.write_text("n = 6\nk = 3\nxi = 1, 2, 3\nsamples = 20000\n")
    outs = []
    for i in (1, 2):
        out = tmp / f"report{i}.json"
        cmd = [sys.executable, "-m", "magicdesign", "--seed", "12", "--config", str(cfg), "--out", str(out),
               "--cache-dir", str(tmp / "cache"), "collision"]
        subprocess.run(cmd, check=True, capture_output=True)
        outs.append(json.loads(out.read_text()))
    same = canonical_bytes(outs[0]) == canonical_bytes(outs[1])
    return same, f"two runs of the same config and seed {'are' if same else 'are NOT'} byte-identical outside timings"


# --- harness ---------------------------------------------------------------------------


def evaluate(num: int):
    if num not in RESULTS:
        title, fn = CRITERIA[num]
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failure of the criterion, reported as such
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        RESULTS[num] = (bool(ok), title, detail)
    return RESULTS[num]


def line(num: int) -> str:
    ok, title, detail = RESULTS[num]
    return f"criterion {num:2d} {'PASS' if ok else 'FAIL'}: {title}: {detail}"


@pytest.mark.parametrize("num", sorted(CRITERIA))
def test_criterion(num):
    ok, _, detail = evaluate(num)
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for num in sorted(CRITERIA):
        evaluate(num)
        print(line(num), flush=True)
        failed += not RESULTS[num][0]
    sys.exit(1 if failed else 0)
