"""Experiment orchestration: configuration, seeded streams, grid runs and reports.

Every experiment validates its parameters against the resource caps before
any compute, runs its grid points on independent random streams, and returns
an ``ExperimentReport``. Reports serialize to JSON with sorted keys; the
``timings`` block is the only part that changes between identical runs.

Seeds. The stream for grid point ``w`` of experiment ``e`` under master seed
``s`` is a Philox generator keyed by the first 16 bytes of
sha256("s/e/w"), so results do not depend on the thread count or on the
order in which points finish.
"""

from __future__ import annotations

import base64
import configparser
import csv
import hashlib
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import __version__, commutant, densesim, moments, statmech
from .errors import ConfigError, InvariantViolation, ResourceCapError, UnsupportedParameter

SCHEMA_VERSION = 1
DEFAULT_CACHE_DIR = ".magicdesign-cache"

MOMENT_CAP_DIM = densesim.MOMENT_CAP_DIM
STATE_CAP_QUBITS = densesim.STATE_CAP_QUBITS
CATALOG_CAP_K = commutant.MAX_K
UNSAFE_FACTOR = 16
EPS_MARGIN = 1e-9  # strict comparisons of eigensolver outputs need a margin above rounding

EXPERIMENTS = (
    "catalog",
    "stab-design-scan",
    "magic-scan",
    "relative-check",
    "nogo",
    "collision",
    "gluing",
    "statmech-delta",
)
STOCHASTIC = frozenset({"stab-design-scan", "magic-scan", "nogo", "collision", "gluing"})


# --- parameters --------------------------------------------------------------------


def _intlist(v) -> list[int]:
    if isinstance(v, (list, tuple)):
        return [int(x) for x in v]
    if isinstance(v, int):
        return [v]
    return [int(x) for x in str(v).replace(" ", "").split(",") if x]


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {v!r}")


# name -> (parser, default); a default of None means required
PARAMS: dict[str, dict[str, tuple[Callable, object]]] = {
    "catalog": {"k": (int, None), "bruteforce_check": (_bool, False)},
    "stab-design-scan": {
        "n": (int, 6),
        "k": (int, 3),
        "xi": (_intlist, [1, 2, 3]),
        "samples": (int, 20_000),
        "boundary": (str, "open"),
    },
    "magic-scan": {
        "n": (int, 8),
        "k": (int, 3),
        "xi": (int, 2),
        "n_magic": (_intlist, [0, 2, 4, 8]),
        "placement": (str, "final"),
        "samples": (int, 20_000),
        "boundary": (str, "open"),
    },
    "relative-check": {
        "n": (int, 2),
        "k": (int, 2),
        "xi": (int, 1),
        "ell": (int, 2),
        "mode": (str, "state"),
        "boundary": (str, "open"),
    },
    "nogo": {
        "n": (int, 6),
        "k": (int, 4),
        "family": (str, "product"),
        "samples": (int, 100),
        "depth": (int, 1),
        "region": (int, 2),
        "state_path": (str, ""),
    },
    "collision": {
        "n": (int, 6),
        "k": (int, 3),
        "xi": (_intlist, [1, 2, 3]),
        "samples": (int, 100_000),
        "x": (int, 0),
        "boundary": (str, "open"),
    },
    "gluing": {
        "k": (int, 3),
        "na": (int, 1),
        "nd": (int, 1),
        "nb": (_intlist, [2, 3]),
        "nc": (_intlist, [2, 3]),
        "samples": (int, 20_000),
    },
    "statmech-delta": {
        "k": (int, 3),
        "xi": (int, 2),
        "L": (int, 2),
        "boundary": (str, "open"),
    },
}


def load_config_file(path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    parser = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",), inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[config]\n" + Path(path).read_text())
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return dict(parser["config"])


@dataclass
class ExperimentConfig:
    experiment: str
    params: dict
    seed: Optional[int] = None
    out: Optional[str] = None
    csv: Optional[str] = None
    cache_dir: str = DEFAULT_CACHE_DIR
    threads: int = 1
    dump_moments: bool = False
    dump_states: bool = False
    unsafe_caps: bool = False

    @classmethod
    def build(cls, experiment: str, file_values: Optional[dict] = None, overrides: Optional[dict] = None, **opts):
        """Merge config-file values with overrides (overrides win) and coerce types."""
        if experiment not in PARAMS:
            raise ConfigError(f"unknown experiment {experiment!r}")
        schema = PARAMS[experiment]
        merged: dict = {}
        for source in (file_values or {}, overrides or {}):
            for key, val in source.items():
                if val is None:
                    continue
                key = key.replace("-", "_")
                if key == "seed":
                    # a seed in the file applies only when none was given on the command line
                    if opts.get("seed") is None:
                        try:
                            opts["seed"] = int(val)
                        except ValueError as exc:
                            raise ConfigError(f"bad seed {val!r}") from exc
                    continue
                if key not in schema:
                    raise ConfigError(f"unknown parameter {key!r} for {experiment}")
                merged[key] = val
        params = {}
        for key, (parse, default) in schema.items():
            if key in merged:
                try:
                    params[key] = parse(merged[key])
                except (TypeError, ValueError) as exc:
                    raise ConfigError(f"bad value for {key}: {merged[key]!r}") from exc
            elif default is None:
                raise ConfigError(f"missing required parameter {key!r}")
            else:
                params[key] = default
        cfg = cls(experiment, params, **opts)
        if cfg.seed is not None and not 0 <= cfg.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if cfg.threads < 1:
            raise ConfigError("threads must be >= 1")
        return cfg

    def echo(self) -> dict:
        return {"experiment": self.experiment, "params": self.params, "seed": self.seed, "unsafe_caps": self.unsafe_caps}


# --- seeds and caps -----------------------------------------------------------------


def stream_key(master: int, experiment: str, worker: int) -> int:
    digest = hashlib.sha256(f"{master}/{experiment}/{worker}".encode()).digest()
    return int.from_bytes(digest[:16], "little")


def stream(master: int, experiment: str, worker: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=stream_key(master, experiment, worker)))


@dataclass(frozen=True)
class Caps:
    moment_dim: int = MOMENT_CAP_DIM
    state_qubits: int = STATE_CAP_QUBITS
    max_k: int = CATALOG_CAP_K

    @classmethod
    def for_config(cls, cfg: ExperimentConfig) -> "Caps":
        if cfg.unsafe_caps:
            return cls(MOMENT_CAP_DIM * UNSAFE_FACTOR, STATE_CAP_QUBITS + 4, CATALOG_CAP_K)
        return cls()

    def moment(self, n: int, k: int, what: str) -> None:
        if (1 << (n * k)) > self.moment_dim:
            raise ResourceCapError(f"{what}: dense moment dimension 2^{n * k} exceeds cap {self.moment_dim}")

    def state(self, n: int, what: str) -> None:
        if n > self.state_qubits:
            raise ResourceCapError(f"{what}: {n} qubits exceed the state-vector cap {self.state_qubits}")

    def k(self, k: int) -> None:
        if not 1 <= k <= self.max_k:
            raise ResourceCapError(f"k = {k} is outside the catalog range 1..{self.max_k}")


def _positive(**kw) -> None:
    for name, v in kw.items():
        vals = v if isinstance(v, list) else [v]
        if not vals or any(x < 1 for x in vals):
            raise ConfigError(f"{name} must be >= 1")


def validate(cfg: ExperimentConfig) -> Caps:
    """Check every parameter against module preconditions and caps; no compute."""
    caps = Caps.for_config(cfg)
    p = cfg.params
    e = cfg.experiment
    if e in STOCHASTIC and cfg.seed is None:
        raise ConfigError(f"{e} is stochastic and needs --seed")
    if "k" in p:
        caps.k(p["k"])
    if "boundary" in p and p["boundary"] not in ("open", "periodic"):
        raise ConfigError(f"unknown boundary {p['boundary']!r}")
    if "samples" in p and p["samples"] < 2:
        raise ConfigError("samples must be >= 2")
    if e == "catalog":
        if p["bruteforce_check"] and p["k"] > commutant.BRUTEFORCE_MAX_K:
            raise ResourceCapError(f"brute-force check is limited to k <= {commutant.BRUTEFORCE_MAX_K}")
    elif e in ("stab-design-scan", "collision"):
        _positive(n=p["n"], xi=p["xi"])
        if e == "stab-design-scan":
            caps.state(p["n"], e)
        else:
            if not 0 <= p["x"] < (1 << p["n"]):
                raise ConfigError("bitstring x out of range")
        for xi in p["xi"]:
            if p["boundary"] == "periodic" and p["n"] % (2 * xi):
                raise ConfigError(f"periodic chains need n divisible by 2 xi (xi = {xi})")
    elif e == "magic-scan":
        _positive(n=p["n"], xi=p["xi"])
        caps.state(p["n"], e)
        if p["placement"] not in ("final", "initial"):
            raise ConfigError("placement must be final or initial")
        if any(not 0 <= m <= p["n"] for m in p["n_magic"]):
            raise ConfigError("need 0 <= N_M <= n")
        if p["boundary"] == "periodic" and p["n"] % (2 * p["xi"]):
            raise ConfigError("periodic chains need n divisible by 2 xi")
    elif e == "relative-check":
        _positive(n=p["n"], xi=p["xi"], ell=p["ell"])
        if p["mode"] == "state":
            caps.moment(p["n"], p["k"], e)
        elif p["mode"] == "unitary-choi":
            caps.moment(2 * p["n"], p["k"], e)
        else:
            raise ConfigError("mode must be state or unitary-choi")
    elif e == "nogo":
        _positive(n=p["n"], depth=p["depth"], region=p["region"])
        if p["k"] != 4:
            raise UnsupportedParameter("the no-go bound is stated for k = 4")
        if p["n"] > moments.SRE_CAP_QUBITS:
            raise ResourceCapError(f"Pauli enumeration is capped at {moments.SRE_CAP_QUBITS} qubits")
        if p["family"] not in ("product", "shallow", "user"):
            raise ConfigError("family must be product, shallow or user")
        if p["family"] == "user" and not p["state_path"]:
            raise ConfigError("the user family needs state_path")
    elif e == "gluing":
        if p["na"] < 0 or p["nd"] < 0:
            raise ConfigError("na and nd must be >= 0")
        _positive(nb=p["nb"], nc=p["nc"])
        n_max = p["na"] + p["nd"] + max(p["nb"]) + max(p["nc"])
        caps.state(n_max, e)
    elif e == "statmech-delta":
        _positive(xi=p["xi"], L=p["L"])
        statmech.ChainSpec(p["k"], p["xi"], p["L"], p["boundary"])
    return caps


# --- reports ---------------------------------------------------------------------------


Entry = moments.DesignReportEntry


def encode_array(a: np.ndarray) -> dict:
    a = np.ascontiguousarray(a, dtype="<c16")
    return {"dtype": "complex128-le", "shape": list(a.shape), "base64": base64.b64encode(a.tobytes()).decode()}


def decode_array(d: dict) -> np.ndarray:
    raw = base64.b64decode(d["base64"])
    return np.frombuffer(raw, dtype="<c16").reshape(d["shape"])


@dataclass
class ExperimentReport:
    config: dict
    entries: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    catalog_checksum: Optional[str] = None
    arrays: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    version: str = __version__

    def to_dict(self, timings: bool = True) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "tool_version": self.version,
            "config": moments._jsonable(self.config),
            "catalog_checksum": self.catalog_checksum,
            "entries": [e.to_dict() for e in self.entries],
            "summary": moments._jsonable(self.summary),
            "checks": {k: bool(v) for k, v in self.checks.items()},
        }
        if self.arrays:
            out["arrays"] = self.arrays
        if timings:
            out["timings"] = {k: round(v, 6) for k, v in self.timings.items()}
        return out

    def to_json(self, timings: bool = True) -> str:
        return json.dumps(self.to_dict(timings), sort_keys=True, indent=2, allow_nan=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["quantity", "provenance", "exact", "estimate", "stderr", "samples", "params"])
        for e in self.entries:
            exact = float(e.exact) if isinstance(e.exact, (Fraction, int, float)) else ""
            w.writerow([e.quantity, e.provenance, exact, e.estimate if e.estimate is not None else "",
                        e.stderr if e.stderr is not None else "", e.samples or "",
                        json.dumps(moments._jsonable(e.params), sort_keys=True)])
        return buf.getvalue()


def canonical_bytes(report: dict) -> bytes:
    """Report JSON without the timings block, for reproducibility comparisons."""
    body = {k: v for k, v in report.items() if k != "timings"}
    return json.dumps(body, sort_keys=True, indent=2).encode()


# --- helpers ---------------------------------------------------------------------------------


def _map(cfg: ExperimentConfig, fn: Callable, items: list) -> list:
    """fn(index, item) over the grid, in grid order."""
    if cfg.threads == 1 or len(items) <= 1:
        return [fn(i, x) for i, x in enumerate(items)]
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        return list(pool.map(lambda ix: fn(*ix), list(enumerate(items))))


def _rng(cfg: ExperimentConfig, worker: int) -> np.random.Generator:
    return stream(cfg.seed, cfg.experiment, worker)


def _non_increasing(values: list[float], errors: list[float], nsigma: float = 3.0) -> bool:
    return all(b <= a + nsigma * math.hypot(ea, eb) for a, b, ea, eb in zip(values, values[1:], errors, errors[1:]))


def _additive(excess: float, stderr: float, n: int, k: int) -> tuple[float, float]:
    """sqrt(2^{nk} excess) with a delta-method error; negative excess clips to 0."""
    scale = math.ldexp(1.0, n * k)
    if excess <= 0:
        return 0.0, math.sqrt(scale * stderr)
    val = math.sqrt(scale * excess)
    return val, scale * stderr / (2 * val)


def _chain_for(n: int, k: int, xi: int, boundary: str, magic_count: int = 0, placement: str = "final"):
    """The ChainSpec describing the densesim two-layer circuit, or None if it has none."""
    if n % (2 * xi):
        return None
    L = n // (2 * xi)
    sites = []
    left = magic_count
    for a in range(L):
        c = min(left, 2 * xi)
        if c:
            sites.append((a, c))
        left -= c
    return statmech.ChainSpec(k, xi, L, boundary, tuple(sites), placement, strict=False)


def _checksum(cfg: ExperimentConfig, k: int) -> str:
    cat = commutant.enumerate_sigma(k)
    digest = cat.checksum()
    cached = Path(cfg.cache_dir) / f"sigma-k{k}.cat"
    if cached.exists():
        if hashlib.sha256(cached.read_bytes()).hexdigest() != digest:
            raise InvariantViolation(f"cached catalog {cached} does not match the enumeration")
    return digest


# --- experiments -----------------------------------------------------------------------------


def run_catalog(cfg: ExperimentConfig, caps: Caps, rep: ExperimentReport) -> None:
    k = cfg.params["k"]
    cat = commutant.enumerate_sigma(k)
    path = commutant.save_catalog(cat, cfg.cache_dir)
    loaded = commutant.load_catalog(path)
    hist = np.bincount(cat.defect_dims, minlength=1).tolist()
    rep.summary.update(
        count=len(cat),
        expected=commutant.sigma_count(k),
        permutations=len(cat.perm_indices),
        rotations=cat.n_rotations,
        defect_dim_histogram={str(d): c for d, c in enumerate(hist)},
        cache_file=path.name,
    )
    rep.entries.append(Entry("sigma_count", "closed-form", commutant.sigma_count(k), params={"k": k}))
    rep.checks["count_matches_product_formula"] = len(cat) == commutant.sigma_count(k)
    rep.checks["cache_round_trip"] = commutant.catalog_bytes(loaded) == commutant.catalog_bytes(cat)
    if cfg.params["bruteforce_check"]:
        brute = commutant.enumerate_sigma_bruteforce(k)
        rep.checks["bruteforce_equal"] = {t.basis for t in brute.elements} == {t.basis for t in cat.elements}
    rep.catalog_checksum = cat.checksum()


def run_stab_design_scan(cfg: ExperimentConfig, caps: Caps, rep: ExperimentReport) -> None:
    p = cfg.params
    n, k = p["n"], p["k"]
    fc = moments.frame_potential_exact("clifford", n, k)
    rep.entries.append(Entry("F_clifford", "closed-form", fc, params={"n": n, "k": k}))

    def point(i, xi):
        spec = densesim.ArchitectureSpec(n, [densesim.TwoLayerClifford(xi, p["boundary"])])
        est = moments.frame_potential_mc(spec, k, p["samples"], _rng(cfg, i))
        rows = [Entry.from_mc("F", est, n=n, k=k, xi=xi, seed=cfg.seed)]
        # rho_C is the global Clifford twirl of rho_E, so ||rho_E - rho_C||_2^2 = F_E - F_C
        excess = est.mean - float(fc)
        add, add_err = _additive(excess, est.stderr, n, k)
        rows.append(Entry("F_excess_over_clifford", "monte-carlo", None, excess, est.stderr, est.samples, {"xi": xi}))
        rows.append(Entry("additive_error_bound_vs_clifford", "monte-carlo", None, add, add_err, est.samples, {"xi": xi}))
        out = {"xi": xi, "excess": excess, "stderr": est.stderr, "signed": None, "absolute": None}
        if (1 << (n * k)) <= caps.moment_dim:
            rho = densesim.exact_twirl_moment(spec, k, caps.moment_dim)
            td = moments.trace_distance(rho, moments.clifford_moment(n, k, caps.moment_dim))
            rows.append(Entry("trace_distance_vs_clifford", "dense", td, params={"xi": xi}))
        chain = _chain_for(n, k, xi, p["boundary"])
        if chain is not None:
            rows.append(Entry("F", "transfer-matrix", float(statmech.frame_potential_transfer(chain)), params={"xi": xi}))
            if xi >= k - 1:
                try:
                    out["signed"] = statmech.uniformity_deviation(chain, "signed_exact")
                    rows.append(Entry("uniformity_delta_signed", "transfer-matrix", out["signed"], params={"xi": xi}))
                except ResourceCapError:
                    pass
                out["absolute"] = statmech.uniformity_deviation(chain, "absolute_bound")
                rows.append(Entry("uniformity_delta_absolute", "transfer-matrix", out["absolute"], params={"xi": xi}))
        return rows, out

    results = _map(cfg, point, p["xi"])
    for rows, _ in results:
        rep.entries += rows
    outs = [o for _, o in results]
    rep.summary["points"] = outs
    rep.checks["excess_non_increasing_3sigma"] = _non_increasing([o["excess"] for o in outs], [o["stderr"] for o in outs])
    rep.checks["signed_le_absolute"] = all(
        o["signed"] is None or o["absolute"] is None or o["signed"] <= o["absolute"] + 1e-9 for o in outs
    )
    rep.catalog_checksum = _checksum(cfg, k)


def run_magic_scan(cfg: ExperimentConfig, caps: Caps, rep: ExperimentReport) -> None:
    p = cfg.params
    n, k, xi = p["n"], p["k"], p["xi"]
    haar_ref = math.factorial(k) * math.ldexp(1.0, -n * k)

    def point(i, nm):
        spec = densesim.magic_architecture(n, xi, nm, p["placement"], p["boundary"])
        est = moments.frame_potential_mc(spec, k, p["samples"], _rng(cfg, i))
        prm = {"n": n, "k": k, "xi": xi, "n_magic": nm, "placement": p["placement"], "seed": cfg.seed}
        rows = [Entry.from_mc("F", est, **prm)]
        rows.append(Entry("F_excess_over_haar", "monte-carlo", None, est.mean - haar_ref, est.stderr, est.samples, prm))
        out = {"n_magic": nm, "excess": est.mean - haar_ref, "stderr": est.stderr, "exact_excess": None}
        chain = _chain_for(n, k, xi, p["boundary"], nm, p["placement"])
        if chain is not None:
            f = float(statmech.frame_potential_transfer(chain))
            out["exact_excess"] = f - haar_ref
            rows.append(Entry("F", "transfer-matrix", f, params=prm))
        return rows, out

    results = _map(cfg, point, p["n_magic"])
    for rows, _ in results:
        rep.entries += rows
    outs = [o for _, o in results]
    base = outs[0]["exact_excess"] if outs[0]["exact_excess"] is not None else outs[0]["excess"]
    for o in outs:
        o["envelope"] = base * (7 / 8) ** (o["n_magic"] / 4)
    rep.summary["haar_reference"] = haar_ref
    rep.summary["points"] = outs
    ex, er = [o["excess"] for o in outs], [o["stderr"] for o in outs]
    rep.checks["excess_non_increasing_3sigma"] = _non_increasing(ex, er)
    rep.checks["last_below_first_5sigma"] = ex[-1] < ex[0] - 5 * math.hypot(er[0], er[-1])
    rep.catalog_checksum = _checksum(cfg, k)


def run_relative_check(cfg: ExperimentConfig, caps: Caps, rep: ExperimentReport) -> None:
    p = cfg.params
    n, k, xi, ell = p["n"], p["k"], p["xi"], p["ell"]
    prm = {"n": n, "k": k, "xi": xi, "ell": ell, "mode": p["mode"]}
    arch = densesim.relative_architecture(n, xi, ell, p["boundary"])
    base = densesim.ArchitectureSpec(n, [densesim.TwoLayerClifford(xi, p["boundary"])])
    if p["mode"] == "state":
        rho_a = densesim.exact_twirl_moment(arch, k, caps.moment_dim)
        rho_b = densesim.exact_twirl_moment(base, k, caps.moment_dim)
        moments.check_moment(rho_a, n, k)
        eps_a = moments.relative_error_state(rho_a, n, k)
        eps_b = moments.relative_error_state(rho_b, n, k)
        eps_g = moments.relative_error_state(moments.clifford_moment(n, k, caps.moment_dim), n, k)
        rep.entries += [
            Entry("relative_error_architecture", "dense", eps_a, params=prm),
            Entry("relative_error_clifford_two_layer", "dense", eps_b, params=prm),
            Entry("relative_error_clifford_global", "dense", eps_g, params=prm),
        ]
        if k == 4:
            bound = moments.nogo_lower_bound([(0.0, 1)] * n)
            rep.entries.append(Entry("nogo_lower_bound_product_input", "closed-form", bound, params=prm))
        rep.summary.update(eps_architecture=eps_a, eps_clifford=eps_b, eps_clifford_global=eps_g)
        rep.checks["architecture_below_clifford"] = eps_a < eps_b - EPS_MARGIN
        if cfg.dump_moments:
            rep.arrays["moment_architecture"] = encode_array(rho_a)
    else:
        uarch = densesim.ArchitectureSpec(n, arch.layers, role="unitary")
        haar = densesim.ArchitectureSpec(n, [densesim.HaarClusterLayer((tuple(range(n)),))], role="unitary")
        rho_a = moments.choi_state_moment(uarch, k)
        rho_h = moments.choi_state_moment(haar, k)
        eps_a = moments.relative_error_state(rho_a, 2 * n, k)
        eps_h = moments.relative_error_state(rho_h, 2 * n, k)
        env = moments.choi_envelope(0.0, n, k)
        rep.entries += [
            Entry("choi_relative_error_architecture", "dense", eps_a, params=prm),
            Entry("choi_relative_error_haar", "dense", eps_h, params=prm),
            Entry("choi_envelope_exact_design", "closed-form", env, params=prm),
        ]
        rep.summary.update(eps_choi_architecture=eps_a, eps_choi_haar=eps_h, envelope=env)
        rep.checks["haar_choi_within_envelope"] = eps_h <= env
        if cfg.dump_moments:
            rep.arrays["choi_moment_architecture"] = encode_array(rho_a)
    rep.catalog_checksum = _checksum(cfg, k)


def _regions(n: int, size: int) -> list[tuple[int, ...]]:
    return [tuple(range(s, min(s + size, n))) for s in range(0, n, size)]


def run_nogo(cfg: ExperimentConfig, caps: Caps, rep: ExperimentReport) -> None:
    p = cfg.params
    n, fam = p["n"], p["family"]
    rng = _rng(cfg, 0)
    if fam == "product":
        u = densesim.haar_unitary_batch(2, p["samples"] * n, rng)[:, :, 0].reshape(p["samples"], n, 2)
        states = []
        for row in u:
            v = row[0]
            for q in range(1, n):
                v = np.kron(row[q], v)
            states.append(v)
        regions = _regions(n, 1)
    elif fam == "shallow":
        states = [moments.shallow_circuit_state(n, rng, p["depth"]) for _ in range(p["samples"])]
        regions = _regions(n, p["region"])
    else:
        psi = np.load(p["state_path"]).astype(complex).ravel()
        if psi.shape != (1 << n,) or abs(np.linalg.norm(psi) - 1) > 1e-9:
            raise ConfigError("user state has the wrong size or norm")
        states = [psi]
        regions = _regions(n, p["region"])
    vals, bounds, inter_ok = [], [], []
    for psi in states:
        ent = [(moments.renyi2_entropy(psi, r, n), len(r)) for r in regions]
        m4 = moments.sre_pauli_moment(psi)
        vals.append(m4)
        bounds.append(moments.nogo_lower_bound(ent))
        inter_ok.append(m4 >= moments.intermediate_bound(ent, n) - 1e-12)
    vals = np.array(vals)
    stderr = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
    prm = {"n": n, "family": fam, "seed": cfg.seed}
    rep.entries += [
        Entry("pauli_moment_mean", "monte-carlo", None, float(vals.mean()), stderr, len(vals), prm),
        Entry("pauli_moment_haar", "closed-form", moments.haar_pauli_moment(n), params=prm),
        Entry("nogo_lower_bound_mean", "closed-form", float(np.mean(bounds)), params=prm),
    ]
    rep.summary.update(states=len(states), intermediate_holds=int(sum(inter_ok)), min_bound=float(min(bounds)))
    rep.checks["intermediate_inequality_all"] = all(inter_ok)
    if cfg.dump_states:
        rep.arrays["states"] = encode_array(np.array(states))


def run_collision(cfg: ExperimentConfig, caps: Caps, rep: ExperimentReport) -> None:
    p = cfg.params
    n, k = p["n"], p["k"]
    pc = moments.collision_exact_clifford(n, k)
    rep.entries.append(Entry("collision_clifford", "closed-form", pc, params={"n": n, "k": k}))

    def point(i, xi):
        spec = densesim.ArchitectureSpec(n, [densesim.TwoLayerClifford(xi, p["boundary"])])
        est = moments.collision_probability(spec, p["x"], k, p["samples"], _rng(cfg, i))
        prm = {"n": n, "k": k, "xi": xi, "x": p["x"], "seed": cfg.seed}
        dev = abs(est.mean - float(pc)) / float(pc)
        rows = [
            Entry.from_mc("collision", est, **prm),
            Entry("collision_relative_deviation", "monte-carlo", None, dev, est.stderr / float(pc), est.samples, prm),
        ]
        chain = _chain_for(n, k, xi, p["boundary"])
        if chain is not None:
            rows.append(Entry("collision", "transfer-matrix", float(statmech.collision_transfer(chain)), params=prm))
        return rows, {"xi": xi, "deviation": dev, "stderr": est.stderr / float(pc)}

    results = _map(cfg, point, p["xi"])
    for rows, _ in results:
        rep.entries += rows
    outs = [o for _, o in results]
    rep.summary["points"] = outs
    rep.checks["deviation_non_increasing_3sigma"] = _non_increasing([o["deviation"] for o in outs], [o["stderr"] for o in outs])
    rep.catalog_checksum = _checksum(cfg, k)


def gluing_spec(na: int, nb: int, nc: int, nd: int) -> densesim.ArchitectureSpec:
    """Haar state on AB, stabilizer state on CD, then a Clifford on BC."""
    n = na + nb + nc + nd
    layers = [densesim.HaarClusterLayer((tuple(range(na + nb)),))]
    if nc + nd:
        layers.append(densesim.CliffordBlocks((tuple(range(na + nb, n)),)))
    layers.append(densesim.CliffordBlocks((tuple(range(na, na + nb + nc)),)))
    return densesim.ArchitectureSpec(n, layers)


def run_gluing(cfg: ExperimentConfig, caps: Caps, rep: ExperimentReport) -> None:
    p = cfg.params
    k, na, nd = p["k"], p["na"], p["nd"]
    grid = [(nb, nc) for nb in p["nb"] for nc in p["nc"]]

    def point(i, bc):
        nb, nc = bc
        n = na + nb + nc + nd
        fh = statmech.haar_frame_potential(n, k)
        exact = statmech.gluing_frame_potential(k, na, nb, nc, nd)
        est = moments.frame_potential_mc(gluing_spec(na, nb, nc, nd), k, p["samples"], _rng(cfg, i))
        add_exact = moments.additive_error_bound(max(exact, float(fh)), fh, n, k)
        add_mc, add_err = _additive(est.mean - float(fh), est.stderr, n, k)
        prm = {"k": k, "na": na, "nb": nb, "nc": nc, "nd": nd, "seed": cfg.seed}
        rows = [
            Entry("F", "closed-form", exact, params=prm),
            Entry.from_mc("F", est, **prm),
            Entry("additive_error_bound", "closed-form", add_exact, params=prm),
            Entry("additive_error_bound", "monte-carlo", None, add_mc, add_err, est.samples, prm),
        ]
        return rows, {"nb": nb, "nc": nc, "exact": add_exact, "mc": add_mc, "stderr": add_err}

    results = _map(cfg, point, grid)
    for rows, _ in results:
        rep.entries += rows
    outs = [o for _, o in results]
    rep.summary["points"] = outs
    by = {(o["nb"], o["nc"]): o for o in outs}
    ok_b = ok_c = True
    for nc in p["nc"]:
        seq = [by[(nb, nc)] for nb in p["nb"]]
        ok_b &= _non_increasing([o["mc"] for o in seq], [o["stderr"] for o in seq])
    for nb in p["nb"]:
        seq = [by[(nb, nc)] for nc in p["nc"]]
        ok_c &= _non_increasing([o["mc"] for o in seq], [o["stderr"] for o in seq])
    rep.checks["mc_non_increasing_in_nb_3sigma"] = ok_b
    rep.checks["mc_non_increasing_in_nc_3sigma"] = ok_c
    rep.checks["exact_bound_non_increasing"] = all(
        by[(a, c)]["exact"] >= by[(b, c)]["exact"] for c in p["nc"] for a, b in zip(p["nb"], p["nb"][1:])
    ) and all(by[(b, a)]["exact"] >= by[(b, c)]["exact"] for b in p["nb"] for a, c in zip(p["nc"], p["nc"][1:]))
    rep.catalog_checksum = _checksum(cfg, k)


def run_statmech_delta(cfg: ExperimentConfig, caps: Caps, rep: ExperimentReport) -> None:
    p = cfg.params
    chain = statmech.ChainSpec(p["k"], p["xi"], p["L"], p["boundary"])
    prm = dict(p)
    f = statmech.frame_potential_transfer(chain)
    fc = moments.frame_potential_exact("clifford", chain.N, chain.k)
    absolute = statmech.uniformity_deviation(chain, "absolute_bound")
    rep.entries += [
        Entry("F", "transfer-matrix", float(f), params=prm),
        Entry("F_clifford", "closed-form", fc, params=prm),
        Entry("uniformity_delta_absolute", "transfer-matrix", absolute, params=prm),
    ]
    try:
        signed = statmech.uniformity_deviation(chain, "signed_exact")
        rep.entries.append(Entry("uniformity_delta_signed", "transfer-matrix", signed, params=prm))
    except ResourceCapError as exc:
        signed = None
        rep.summary["signed_skipped"] = str(exc)
    rep.summary["log2_F"] = float(f.log)
    rep.summary["domain_walls"] = [
        {"distance": r.distance, "pairs": r.pairs, "log2_weight": r.log2_weight}
        for r in statmech.domain_wall_spectrum(chain.k, chain.xi)
    ]
    rep.summary["ordering_threshold_xi"] = statmech.ordering_threshold(chain.k, chain.N)
    rep.checks["signed_le_absolute"] = signed is None or signed <= absolute + 1e-9
    rep.checks["F_at_least_clifford"] = float(f) >= float(fc) * (1 - 1e-12)
    rep.catalog_checksum = _checksum(cfg, chain.k)


RUNNERS = {
    "catalog": run_catalog,
    "stab-design-scan": run_stab_design_scan,
    "magic-scan": run_magic_scan,
    "relative-check": run_relative_check,
    "nogo": run_nogo,
    "collision": run_collision,
    "gluing": run_gluing,
    "statmech-delta": run_statmech_delta,
}


def run(cfg: ExperimentConfig) -> ExperimentReport:
    t0 = time.perf_counter()
    caps = validate(cfg)
    t1 = time.perf_counter()
    rep = ExperimentReport(cfg.echo())
    RUNNERS[cfg.experiment](cfg, caps, rep)
    t2 = time.perf_counter()
    rep.timings = {"validate_s": t1 - t0, "compute_s": t2 - t1}
    return rep


def write_report(rep: ExperimentReport, cfg: ExperimentConfig) -> str:
    text = rep.to_json()
    if cfg.out:
        Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
        Path(cfg.out).write_text(text)
    if cfg.csv:
        Path(cfg.csv).parent.mkdir(parents=True, exist_ok=True)
        Path(cfg.csv).write_text(rep.to_csv())
    return text


__all__ = [
    "SCHEMA_VERSION",
    "EXPERIMENTS",
    "PARAMS",
    "ExperimentConfig",
    "ExperimentReport",
    "Caps",
    "load_config_file",
    "stream",
    "stream_key",
    "validate",
    "run",
    "write_report",
    "canonical_bytes",
    "encode_array",
    "decode_array",
    "gluing_spec",
]
