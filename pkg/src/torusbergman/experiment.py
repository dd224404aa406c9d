"""Declarative experiment driver: config parsing, suite execution, reports.

Config files are plain key = value lines (``#`` comments allowed).  Keys:

    factor        = tau_re tau_im degree          (one line per factor)
    k_ladder      = 4 6 8 10
    grid_n        = 48
    theta_eps     = 1e-12
    gram_tol      = 1e-9
    slope_margin  = 0.3
    seed          = 12345
    experiments   = dims density offdiag far ratio embed pullback derivs
    workers       = 1
    embed_grid_n  = 9                              (optional scan override)
    budget_<exp>  = 30.0                           (optional wall budget, s)
    probe_<name>  = a1 b1 a2 b2 ; a1 b1 a2 b2      (named point lists)

Outputs: one CSV per experiment plus summary.json mapping every enabled
acceptance criterion to {criterion_id, description, measured, threshold,
pass}.  Reruns with the same config and seed produce byte-identical CSV
bodies; random probes come from numpy's seeded PCG64 generator and their
coordinates are echoed into the CSVs.
"""

from __future__ import annotations

import json
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import basis as basis_mod
from . import embedding as emb
from . import kernel as ker
from .geometry import ProductModel, TorusFactor
from .util import fit_slope, fmt17

__all__ = ["ExperimentConfig", "ConfigError", "RunReport", "parse_config", "run",
           "emit_report", "fit_slope", "EXPERIMENTS"]

EXPERIMENTS = ("dims", "density", "offdiag", "far", "ratio", "embed", "pullback", "derivs")
_FIT_BASED = {"offdiag", "far", "embed", "pullback", "derivs"}
_KNOWN_KEYS = {"factor", "k_ladder", "grid_n", "theta_eps", "gram_tol", "slope_margin",
               "seed", "experiments", "workers", "embed_grid_n"}
_CRITERIA_DESC = {
    "A1": "dimension law: k^n * prod|d_j| sections with full-rank Gram",
    "A2": "harmonicity: discrete Kodaira-Laplacian residual <= 1e-6 at grid 64",
    "A3": "leading coefficient: trace identity, disc-model oracle, density vs b0*k^n",
    "A4": "off-diagonal Gaussian decay matches 2 Im Psi within 10%, quadratic in separation",
    "A5": "far-field decay: gamma > 0 and k^N-damped decrease on top half ladder",
    "A6": "ratio profile in [0,1], coincidence value 1, interior Gaussian match 15%",
    "A7": "embedding: normalized density >= 0.5, positive FS separation, rank dPhi = 2n",
    "A8": "almost-isometry: E(k) decreasing, ddbar rate >= 0.8, method cross-checks",
    "A9": "asymptotic holomorphicity: special vs generic derivative growth split",
    "A10": "infrastructure: deterministic outputs, validated config, smoke budget",
}


class ConfigError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(f"line {ln}: [{fieldn}] {msg}" for ln, fieldn, msg in self.violations))


@dataclass(frozen=True)
class ExperimentConfig:
    factors: tuple[TorusFactor, ...]
    k_ladder: tuple[int, ...]
    grid_n: int
    theta_eps: float = 1e-12
    gram_tol: float = 1e-9
    slope_margin: float = 0.3
    seed: int = 20260810
    experiments: tuple[str, ...] = EXPERIMENTS
    workers: int = 1
    embed_grid_n: int | None = None
    budgets: dict = field(default_factory=dict)
    probes: dict = field(default_factory=dict)

    @property
    def model(self) -> ProductModel:
        return ProductModel.from_factors(self.factors)

    @property
    def resolution_floor(self) -> int:
        max_d = max(abs(f.degree) for f in self.factors)
        return 4 * max(self.k_ladder) * max_d


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate; raises ConfigError carrying all violations."""
    violations = []
    factors = []
    probes = {}
    budgets = {}
    scalars = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            violations.append((ln, "-", f"expected key = value, got {line!r}"))
            continue
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key == "factor":
            parts = val.split()
            if len(parts) != 3:
                violations.append((ln, "factor", "expected: tau_re tau_im degree"))
                continue
            try:
                tre, tim = float(parts[0]), float(parts[1])
                deg = int(parts[2])
            except ValueError:
                violations.append((ln, "factor", f"non-numeric factor spec {val!r}"))
                continue
            if tim <= 0:
                violations.append((ln, "factor", f"Im(tau) must be positive, got {tim}"))
                continue
            if deg == 0:
                violations.append((ln, "factor", "degree must be nonzero"))
                continue
            factors.append(TorusFactor(tau=complex(tre, tim), degree=deg))
        elif key.startswith("probe_"):
            name = key[len("probe_"):]
            try:
                pts = [tuple(float(x) for x in chunk.split()) for chunk in val.split(";") if chunk.strip()]
            except ValueError:
                violations.append((ln, key, f"non-numeric probe {val!r}"))
                continue
            probes[name] = pts
        elif key.startswith("budget_"):
            name = key[len("budget_"):]
            if name not in EXPERIMENTS and name != "all":
                violations.append((ln, key, f"unknown experiment {name!r} in budget"))
                continue
            try:
                budgets[name] = float(val)
            except ValueError:
                violations.append((ln, key, f"non-numeric budget {val!r}"))
        elif key in _KNOWN_KEYS:
            scalars[(ln, key)] = val
        else:
            violations.append((ln, key, "unknown key"))

    kw = {}
    for (ln, key), val in scalars.items():
        try:
            if key == "k_ladder":
                kw[key] = tuple(int(x) for x in val.split())
            elif key == "experiments":
                names = tuple(val.split())
                bad = [n for n in names if n not in EXPERIMENTS]
                if bad:
                    violations.append((ln, key, f"unknown experiments {bad}"))
                    continue
                kw[key] = names
            elif key in ("grid_n", "seed", "workers", "embed_grid_n"):
                kw[key] = int(val)
            elif key in ("theta_eps", "gram_tol", "slope_margin"):
                kw[key] = float(val)
        except ValueError:
            violations.append((ln, key, f"could not parse value {val!r}"))

    if not factors:
        violations.append((0, "factor", "at least one factor is required"))
    ladder = kw.get("k_ladder", ())
    if not ladder:
        violations.append((0, "k_ladder", "k_ladder is required"))
    else:
        if any(k <= 0 for k in ladder):
            violations.append((0, "k_ladder", f"entries must be positive: {ladder}"))
        if any(b <= a for a, b in zip(ladder, ladder[1:])):
            violations.append((0, "k_ladder", f"non-monotone ladder {ladder}"))
        enabled = kw.get("experiments", EXPERIMENTS)
        if len(ladder) < 4 and _FIT_BASED & set(enabled):
            violations.append((0, "k_ladder", f"length {len(ladder)} < 4 required by fit-based experiments"))
    if "grid_n" not in kw:
        violations.append((0, "grid_n", "grid_n is required"))
    elif factors and ladder:
        floor = 4 * max(ladder) * max(abs(f.degree) for f in factors)
        if kw["grid_n"] < floor:
            violations.append((0, "grid_n", f"grid_n {kw['grid_n']} below resolution floor {floor}"))
    if kw.get("theta_eps", 1e-12) <= 0:
        violations.append((0, "theta_eps", "must be positive"))
    if kw.get("workers", 1) < 1:
        violations.append((0, "workers", "must be >= 1"))
    if violations:
        raise ConfigError(violations)
    try:
        ordered = tuple(sorted(factors, key=lambda f: f.degree >= 0))
        return ExperimentConfig(factors=ordered, probes=probes, budgets=budgets, **kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError([(0, "-", str(exc))])


@dataclass
class RunReport:
    criteria: list[dict]
    tables: dict[str, tuple[list[str], list[list]]]   # exp -> (header, rows)
    wall: dict[str, float]
    warnings: list[str]
    environment: dict

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.criteria)


def _rng_for(cfg: ExperimentConfig, name: str) -> np.random.Generator:
    return np.random.default_rng(cfg.seed + 1000 * EXPERIMENTS.index(name))


def _bases(cfg: ExperimentConfig, model, ks=None):
    return [basis_mod.build_basis(model, k, eps=cfg.theta_eps) for k in (ks or cfg.k_ladder)]


def _default_pair(model, rng, sep=0.1):
    base = model.reduce(rng.random(2 * model.n))
    x = base.copy()
    x[0] = (x[0] + sep) % 1.0
    return x, base


# -- individual experiments --------------------------------------------------


def _exp_dims(cfg, model, rng):
    rows = []
    ok = True
    min_eig = np.inf
    for k in cfg.k_ladder:
        kb = basis_mod.kunneth_basis(model, k)
        G = basis_mod.gram(model, kb, eps=cfg.theta_eps)
        w = np.linalg.eigvalsh(0.5 * (G.entries + G.entries.conj().T))
        expected = k ** model.n
        for f in model.factors:
            expected *= abs(f.degree)
        b = basis_mod.orthonormalize(kb, eps=cfg.theta_eps)
        rows.append([k, kb.count, expected, w.min(), b.chol_condition])
        ok = ok and (kb.count == expected) and (w.min() > 1e-12)
        min_eig = min(min_eig, w.min())
    crit = [{"criterion_id": "A1", "description": _CRITERIA_DESC["A1"],
             "measured": float(min_eig), "threshold": 1e-12, "pass": bool(ok)}]
    # harmonicity certification: the 4th-order stencil at the pinned grid 64
    # resolves level-1 members below 1e-6, so the criterion binds on unit-level
    # configs; higher levels are certified in the test suite at finer grids.
    if max(abs(f.degree) for f in model.factors) == 1:
        kb = basis_mod.kunneth_basis(model, 1)
        worst = 0.0
        for idx in kb.indices:
            worst = max(worst, basis_mod.harmonicity_residual(model, 1, idx, grid_n=64))
        control = basis_mod.factor_harmonicity_residual(
            model.factors[0], 1, 0, grid_n=64,
            perturb=lambda A, B: 0.01 * np.cos(2 * np.pi * A) * np.cos(2 * np.pi * B))["laplacian"]
        crit.append({"criterion_id": "A2", "description": _CRITERIA_DESC["A2"],
                     "measured": float(worst), "threshold": 1e-6,
                     "pass": bool(worst <= 1e-6 and control >= 1e-3)})
    header = ["k", "sections", "expected", "gram_min_eig", "chol_cond"]
    return rows, header, crit


def _exp_density(cfg, model, rng):
    b0 = ker.leading_coefficient(model)
    probes = cfg.probes.get("density")
    if probes:
        pts = np.array(probes, dtype=float)
    else:
        pts = rng.random((5, 2 * model.n))
    rows = []
    worst_rel = 0.0
    worst_trace = 0.0
    for bas in _bases(cfg, model):
        k = bas.k
        dens = ker.density(bas, pts)
        b0kn = b0 * k ** model.n
        rel = np.abs(dens / b0kn - 1.0)
        tr = ker.trace_density(bas)
        tr_rel = abs(tr / bas.dim - 1.0)
        worst_trace = max(worst_trace, tr_rel)
        if k >= 16 or k == max(cfg.k_ladder):
            worst_rel = max(worst_rel, float(rel.max()))
        for p, d, r in zip(pts, dens, rel):
            rows.append(list(p) + [k, d, b0kn, r])
    disc_rel = 0.0
    for f in model.factors:
        lam = abs(f.weight_scale)
        got = ker.disc_model_density(lam, 8)
        disc_rel = max(disc_rel, abs(got / (8 * lam / np.pi) - 1.0))
    ok = worst_trace <= 1e-8 and disc_rel <= 0.01 and worst_rel <= 0.02
    crit = [{"criterion_id": "A3", "description": _CRITERIA_DESC["A3"],
             "measured": float(max(worst_trace, disc_rel, worst_rel)), "threshold": 0.02,
             "pass": bool(ok)}]
    header = [f"z{i}" for i in range(2 * model.n)] + ["k", "density", "b0k_n", "relerr"]
    return rows, header, crit, {"density": pts.tolist()}


def _exp_offdiag(cfg, model, rng):
    probes = cfg.probes.get("offdiag")
    if probes and len(probes) >= 2:
        x = np.array(probes[0], dtype=float)
        y = np.array(probes[1], dtype=float)
    else:
        x, y = _default_pair(model, rng, sep=0.1)
    bases = _bases(cfg, model)
    fit = ker.offdiagonal_fit(bases, x, y)
    x2 = y + 2.0 * model.centered(x - y)
    fit2 = ker.offdiagonal_fit(bases, x2, y)
    quad_ratio = fit2.c_fit / fit.c_fit
    rows = [[b.k, float(np.linalg.norm(model.chart_dz(x, y))), lr, -b.k * fit.c_model]
            for b, lr in zip(bases, fit.log_ratio)]
    ok = fit.rel_dev <= 0.10 and abs(quad_ratio / 4.0 - 1.0) <= 0.15
    crit = [{"criterion_id": "A4", "description": _CRITERIA_DESC["A4"],
             "measured": float(fit.rel_dev), "threshold": 0.10, "pass": bool(ok)}]
    return rows, ["k", "dist", "log_ratio", "model"], crit, {"offdiag": [x.tolist(), y.tolist()]}


def _exp_far(cfg, model, rng):
    probes = cfg.probes.get("far")
    if probes and len(probes) >= 2:
        x = np.array(probes[0], dtype=float)
        y = np.array(probes[1], dtype=float)
    else:
        y = model.reduce(rng.random(2 * model.n))
        x = model.reduce(y + 0.5)
    bases = _bases(cfg, model)
    rep = ker.far_separation_check(bases, x, y)
    rows = [[int(k), float(np.linalg.norm(model.chart_dz(x, y))), v]
            for k, v in zip(rep.ks, rep.abs_p)]
    crit = [{"criterion_id": "A5", "description": _CRITERIA_DESC["A5"],
             "measured": float(rep.gamma), "threshold": 0.0, "pass": bool(rep.passed)}]
    return rows, ["k", "dist", "abs_p"], crit, {"far": [x.tolist(), y.tolist()]}


def _exp_ratio(cfg, model, rng):
    probes = cfg.probes.get("ratio") or cfg.probes.get("offdiag")
    if probes and len(probes) >= 2:
        x = np.array(probes[0], dtype=float)
        y = np.array(probes[1], dtype=float)
    else:
        x, y = _default_pair(model, rng, sep=0.1)
    k20 = 20 if 20 in cfg.k_ladder else max(cfg.k_ladder)
    bas = basis_mod.build_basis(model, k20, eps=cfg.theta_eps)
    ts = np.linspace(0.0, 1.0, 65)
    fk = ker.ratio_profile(bas, x, y, ts)
    em = ker.expansion_model(model, (model.reduce(x) + model.reduce(y)) / 2.0)
    dz = model.chart_dz(x, y)
    model_mid = float(np.exp(-2.0 * k20 * em.im_psi(0.5 * dz)))
    mid_rel = abs(fk[32] / model_mid - 1.0)
    in_range = bool(np.all(fk >= -1e-12) and np.all(fk <= 1.0 + 1e-12))
    coin = abs(fk[0] - 1.0)
    ok = in_range and coin <= 1e-12 and mid_rel <= 0.15
    rows = [[t, v] for t, v in zip(ts, fk)]
    crit = [{"criterion_id": "A6", "description": _CRITERIA_DESC["A6"],
             "measured": float(mid_rel), "threshold": 0.15, "pass": bool(ok)}]
    return rows, ["t", "f_k"], crit, {"ratio": [x.tolist(), y.tolist()]}


def _exp_embed(cfg, model, rng):
    rows = []
    ok = True
    worst_ratio = np.inf
    scan_n = cfg.embed_grid_n or (64 if model.n == 1 else 10)
    for k in (cfg.k_ladder[0], cfg.k_ladder[-1]):
        bas = basis_mod.build_basis(model, k, eps=cfg.theta_eps)
        wd = emb.well_defined_check(bas, grid_n=max(32, scan_n))
        scan = emb.injectivity_scan(bas, grid_n=scan_n, rng=rng)
        rank_ok = True
        if bas.dim > 2 * model.n:
            for _ in range(50):
                p = rng.random(2 * model.n)
                if emb.differential(bas, p).rank != 2 * model.n:
                    rank_ok = False
                    break
        rows.append([k, wd.min_ratio, scan.min_fs_distance, scan.near_diagonal_alpha, int(rank_ok)])
        worst_ratio = min(worst_ratio, wd.min_ratio)
        ok = ok and wd.passed and scan.passed and rank_ok
    crit = [{"criterion_id": "A7", "description": _CRITERIA_DESC["A7"],
             "measured": float(worst_ratio), "threshold": 0.5, "pass": bool(ok)}]
    return rows, ["k", "min_ratio", "min_fs", "alpha", "rank_ok"], crit


def _exp_pullback(cfg, model, rng):
    from .geometry import omega as omega_form

    grid_n = cfg.embed_grid_n or (9 if model.n == 1 else 5)
    rep = emb.convergence_report(
        model, cfg.k_ladder, grid_n=grid_n, keep_fields=True,
        basis_builder=lambda k: basis_mod.build_basis(model, k, eps=cfg.theta_eps))
    w0 = omega_form(model)
    n2 = 2 * model.n
    comp_idx = [(a, b) for a in range(n2) for b in range(a + 1, n2)]
    rows = []
    for m in rep.errors:
        for k in rep.ks:
            field = rep.fields[(m, int(k))]
            for z, F in zip(rep.grid, field):
                err = float(np.max(np.abs(F - w0)))
                rows.append(list(z) + [int(k), m] + [F[a, b] for a, b in comp_idx] + [err])
    beta = -rep.slopes["ddbar_log"].slope
    e_j = rep.errors["jacobian"]
    half = len(e_j) // 2
    jac_monotone = bool(np.all(np.diff(e_j[half:]) < 0))
    # holomorphic cross-check on the positive mirror of this model
    mirror = ProductModel.from_factors([TorusFactor(f.tau, abs(f.degree)) for f in model.factors])
    bpos = basis_mod.build_basis(mirror, 3, eps=cfg.theta_eps)
    zs = rng.random((5, 2 * mirror.n))
    gap = float(np.max(np.abs(emb.pullback_jacobian_many(bpos, zs)
                              - emb.pullback_ddbar_many(bpos, zs))))
    ok = beta >= 0.8 and jac_monotone and gap <= 1e-8
    crit = [{"criterion_id": "A8", "description": _CRITERIA_DESC["A8"],
             "measured": float(beta), "threshold": 0.8, "pass": bool(ok)}]
    header = ([f"z{i}" for i in range(n2)] + ["k", "method"]
              + [f"f{a}{b}" for a, b in comp_idx] + ["err"])
    return rows, header, crit


def _exp_derivs(cfg, model, rng):
    probes = cfg.probes.get("derivs")
    p = np.array(probes[0], dtype=float) if probes else rng.random(2 * model.n)
    bases = _bases(cfg, model)
    rep = emb.derivative_sums(bases, p)
    n = model.n
    rows = []
    special_ok = True
    generic_ok = True
    worst_gap = np.inf
    for d, fam in rep.families.items():
        sl = rep.slopes[d]
        zero = d in rep.exact_zero
        slope_val = float("nan") if zero else sl.slope
        for k, s in zip(rep.ks, rep.sums[d]):
            rows.append([d[0], fam, int(k), s, slope_val])
        if fam == "special":
            if not zero:
                special_ok = special_ok and sl.slope <= n + cfg.slope_margin
        else:
            generic_ok = generic_ok and (sl is not None and sl.slope >= n + 0.7)
    for ds, fs in rep.families.items():
        if fs != "special":
            continue
        for dg, fg in rep.families.items():
            if fg != "generic":
                continue
            s_slope = -np.inf if ds in rep.exact_zero else rep.slopes[ds].slope
            g_slope = rep.slopes[dg].slope if rep.slopes[dg] else -np.inf
            worst_gap = min(worst_gap, g_slope - s_slope)
    gap_ok = worst_gap >= 0.4
    ok = special_ok and generic_ok and gap_ok and rep.extremal_dev <= 1e-9
    crit = [{"criterion_id": "A9", "description": _CRITERIA_DESC["A9"],
             "measured": float(rep.extremal_dev), "threshold": 1e-9, "pass": bool(ok)}]
    return rows, ["t", "family", "k", "sum", "slope"], crit, {"derivs": [p.tolist()]}


_EXP_FN = {"dims": _exp_dims, "density": _exp_density, "offdiag": _exp_offdiag,
           "far": _exp_far, "ratio": _exp_ratio, "embed": _exp_embed,
           "pullback": _exp_pullback, "derivs": _exp_derivs}
_EXP_CRITERION = {"dims": "A1", "density": "A3", "offdiag": "A4", "far": "A5",
                  "ratio": "A6", "embed": "A7", "pullback": "A8", "derivs": "A9"}


def run(cfg: ExperimentConfig, experiments: tuple[str, ...] | None = None) -> RunReport:
    """Execute the enabled experiments; failures are recorded, not raised.

    Experiments run concurrently up to cfg.workers; results are merged in
    canonical name order so the report is deterministic.
    """
    model = cfg.model
    names = list(experiments if experiments is not None else cfg.experiments)
    tables = {}
    wall = {}
    warnings = []
    criteria = []
    results = {}

    def _one(name):
        t0 = time.perf_counter()
        probes = {}
        try:
            out = _EXP_FN[name](cfg, model, _rng_for(cfg, name))
            rows, header, crit = out[:3]
            if len(out) > 3:
                probes = out[3]
            err = None
        except Exception as exc:   # noqa: BLE001 - isolate sibling experiments
            rows, header, crit, err = [], [], [{
                "criterion_id": _EXP_CRITERION[name],
                "description": f"{name} failed",
                "measured": float("nan"), "threshold": float("nan"), "pass": False}], str(exc)
        return name, rows, header, crit, err, probes, time.perf_counter() - t0

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            for res in pool.map(_one, names):
                results[res[0]] = res
    else:
        for name in names:
            results[name] = _one(name)

    probes_used = {}
    for name in names:
        _, rows, header, crit, err, probes, secs = results[name]
        tables[name] = (header, rows)
        wall[name] = secs
        criteria.extend(crit)
        probes_used.update(probes)
        if err:
            warnings.append(f"experiment {name} failed: {err}")
        budget = cfg.budgets.get(name)
        if budget is not None and secs > budget:
            warnings.append(f"experiment {name} exceeded budget: {secs:.1f}s > {budget:.1f}s")

    env = {
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "platform": platform.platform(),
        "seed": cfg.seed,
        "grid_n": cfg.grid_n,
        "theta_eps": cfg.theta_eps,
        "gram_tol": cfg.gram_tol,
        "slope_margin": cfg.slope_margin,
        "k_ladder": list(cfg.k_ladder),
        "factors": [[f.tau.real, f.tau.imag, f.degree] for f in cfg.factors],
        "probes": probes_used,
        "wall_seconds": {k: round(v, 3) for k, v in wall.items()},
    }
    return RunReport(criteria=criteria, tables=tables, wall=wall,
                     warnings=warnings, environment=env)


_CSV_NAME = {"dims": "dims.csv", "density": "density.csv", "offdiag": "offdiag.csv",
             "far": "far.csv", "ratio": "ratio_profile.csv", "embed": "embed_scan.csv",
             "pullback": "pullback.csv", "derivs": "derivatives.csv"}


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return fmt17(v)
    if isinstance(v, (complex, np.complexfloating)):
        return fmt17(v.real) + "," + fmt17(v.imag)
    return str(v)


def emit_report(report: RunReport, out_dir) -> list[str]:
    """Write per-experiment CSVs and summary.json; returns written paths."""
    from pathlib import Path

    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written = []
    for name, (header, rows) in report.tables.items():
        path = out / _CSV_NAME[name]
        try:
            with open(path, "w", newline="\n") as fh:
                fh.write(",".join(header) + "\n")
                for row in rows:
                    fh.write(",".join(_cell(v) for v in row) + "\n")
        except OSError as exc:
            raise OSError(f"writing {path} failed: {exc}") from exc
        written.append(str(path))
    summary = {"criteria": report.criteria, "warnings": report.warnings,
               "environment": report.environment, "pass": report.passed}
    path = out / "summary.json"
    try:
        with open(path, "w", newline="\n") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True, default=float)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"writing {path} failed: {exc}") from exc
    written.append(str(path))
    return written
