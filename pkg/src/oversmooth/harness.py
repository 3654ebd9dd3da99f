"""Experiment harness: noise sweeps, rate studies, verification suites, reports.

A rate study sweeps the noise level over a decreasing list, picks alpha by the
configured a priori rule, runs the certified Tikhonov solver for each level
(warm-starting each solve from the previous, larger level), and summarizes the
sup-norm reconstruction errors: a fitted log-log slope for the Hoelder regime,
a boundedness statistic error * log(1/delta) for the low-order regime, and a
monotone-decrease check when no smoothness is constructed.  Reports freeze to
CSV and JSON; identical configuration and seeds give byte-identical output
(the JSON timestamp is injectable for that purpose).
"""

from __future__ import annotations

import dataclasses
import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .exp_volterra import NoiseSpec, add_noise, make_problem, make_truth, nonlinearity_check
from .fitting import NOISE_FLOOR, SlopeFit, fit_slope
from .grids import GridFunction
from .lavrentiev import RegularizerFamily, decay_check, gap_table
from .scale import QuadratureConfig, ScaleOperator, riemann_liouville
from .tikhonov import (
    ParamChoice,
    TikhonovProblem,
    UncertifiedResultError,
    choose_alpha,
    coupling_exponent,
    minimize,
)

__all__ = [
    "ExperimentConfig",
    "RateRow",
    "RateReport",
    "run_rate_study",
    "fit_slope",
    "CheckResult",
    "run_suite",
    "SUITE_NAMES",
    "parse_config_file",
]


def _default_deltas() -> tuple[float, ...]:
    return tuple(np.geomspace(1e-1, 10**-4.5, 8))


@dataclass(frozen=True)
class ExperimentConfig:
    """Configuration of one rate study (and grid/seed defaults for the suites)."""

    grid_n: int = 256
    regime: str = "hoelder"
    p: float = 1.0
    r: float = 1.0
    a: float = 1.0
    m: int = 2
    c_alpha: float = 1.0
    delta_list: tuple[float, ...] = field(default_factory=_default_deltas)
    seed: int = 0
    n_seeds: int = 5
    noise_kind: str = "random_sign"
    warm_chaining: bool = False
    tail_tol: float = 1e-6
    quad_step: float = 0.05
    slope_tolerance: float = 0.12
    bounded_ratio_limit: float = 5.0
    n_random_starts: int = 1
    max_iter: int = 300

    def __post_init__(self) -> None:
        if self.n_seeds < 1:
            raise ValueError("n_seeds must be at least 1")
        if self.grid_n < 64:
            raise ValueError("grid_n must be at least 64")
        if self.regime not in ("none", "hoelder", "low_order"):
            raise ValueError(f"unknown regime: {self.regime!r}")
        if self.m < 1 + self.a:
            raise ValueError("need saturation m >= 1 + a")
        deltas = tuple(float(d) for d in self.delta_list)
        if any(d <= 0.0 for d in deltas):
            raise ValueError("noise levels must be positive")
        if any(d2 >= d1 for d1, d2 in zip(deltas, deltas[1:])):
            raise ValueError("noise levels must be strictly decreasing")
        object.__setattr__(self, "delta_list", deltas)

    def quadrature(self) -> QuadratureConfig:
        return QuadratureConfig(step=self.quad_step, tail_tol=self.tail_tol)

    def param_choice(self) -> ParamChoice:
        if self.regime == "hoelder":
            return ParamChoice("hoelder", p=self.p, C=self.c_alpha)
        return ParamChoice(self.regime, C=self.c_alpha)

    def expected_slope(self) -> float | None:
        if self.regime == "hoelder":
            return self.p / (self.p + self.a)
        return None


@dataclass(frozen=True)
class RateRow:
    delta: float
    alpha: float
    beta: float
    error_sup: float
    residual: float
    penalty: float
    certified: bool


@dataclass(frozen=True)
class RateReport:
    config: ExperimentConfig
    rows: tuple[RateRow, ...]
    fitted_slope: float | None
    expected_slope: float | None
    slope_tolerance: float
    statistic: float | None
    passed: bool
    timestamp: str
    version: str

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("delta,alpha,beta,error_sup,residual,penalty,certified\n")
        for row in self.rows:
            buf.write(
                f"{row.delta:.17g},{row.alpha:.17g},{row.beta:.17g},"
                f"{row.error_sup:.17g},{row.residual:.17g},{row.penalty:.17g},"
                f"{int(row.certified)}\n"
            )
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "config": dataclasses.asdict(self.config),
            "rows": [dataclasses.asdict(r) for r in self.rows],
            "fitted_slope": self.fitted_slope,
            "expected_slope": self.expected_slope,
            "slope_tolerance": self.slope_tolerance,
            "statistic": self.statistic,
            "passed": self.passed,
            "timestamp": self.timestamp,
            "version": self.version,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def write(self, out_dir: str | Path, stem: str = "rate_study") -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{stem}.csv"
        json_path = out / f"{stem}.json"
        csv_path.write_text(self.to_csv())
        json_path.write_text(self.to_json())
        return csv_path, json_path


def run_rate_study(cfg: ExperimentConfig, timestamp: str | None = None) -> RateReport:
    """Run the configured noise sweep and summarize the reconstruction errors.

    Each noise level is solved for n_seeds independent noise draws and the
    reported row is the worst draw by reconstruction error: the rate theory
    bounds the error uniformly over all data within the noise level, so the
    worst sampled draw is the statistic whose decay the theory constrains.  A
    level counts as certified when every draw certifies.  Uncertified levels
    are flagged and excluded from the fit; more than half uncertified aborts
    the study.
    """
    quad = cfg.quadrature()
    op = ScaleOperator(cfg.grid_n)
    fam = RegularizerFamily(op, m=cfg.m)
    truth_kwargs = {"p": cfg.p} if cfg.regime == "hoelder" else {}
    regime_truth = {"hoelder": "hoelder", "low_order": "low_order", "none": "generic_continuous"}
    u_true = make_truth(regime_truth[cfg.regime], op, cfg=quad, **truth_kwargs)
    problem = make_problem(op, u_true)
    u_bar_witness = GridFunction.zeros(cfg.grid_n)
    pc = cfg.param_choice()
    kap = coupling_exponent(cfg.r, cfg.a)

    rows: list[RateRow] = []
    warm = [None] * cfg.n_seeds
    for i, delta in enumerate(cfg.delta_list):
        alpha = choose_alpha(pc, delta, cfg.r, cfg.a)
        draws = []
        certs = []
        for j in range(cfg.n_seeds):
            seed = cfg.seed + 1000 * i + j
            f_delta = add_noise(problem.f_true, NoiseSpec(delta, cfg.noise_kind, seed))
            prob = TikhonovProblem(
                forward_problem=problem,
                f_delta=f_delta,
                delta=delta,
                u_bar_witness=u_bar_witness,
                alpha=alpha,
                r=cfg.r,
                a=cfg.a,
            )
            try:
                res = minimize(
                    prob,
                    fam,
                    u_true,
                    seed=seed,
                    warm_start=warm[j] if cfg.warm_chaining else None,
                    n_random_starts=cfg.n_random_starts,
                    max_iter=cfg.max_iter,
                    cfg=quad,
                )
            except UncertifiedResultError as exc:
                res = exc.result
            if res.certified:
                warm[j] = res.v_min
            draws.append(((res.u_min - u_true).sup_norm(), res.residual, res.penalty))
            certs.append(res.certified)
        err, residual, penalty = max(draws, key=lambda t: t[0])
        rows.append(
            RateRow(
                delta=delta,
                alpha=alpha,
                beta=alpha**kap,
                error_sup=err,
                residual=residual,
                penalty=penalty,
                certified=all(certs),
            )
        )

    certified = [r for r in rows if r.certified]
    if len(certified) < len(rows) / 2.0:
        raise RuntimeError(f"rate study failed: only {len(certified)} of {len(rows)} solves certified")

    fit_points = [(r.delta, r.error_sup) for r in certified if r.error_sup > NOISE_FLOOR]
    fitted = fit_slope(fit_points).slope if len(fit_points) >= 3 else None

    expected = cfg.expected_slope()
    statistic = None
    if cfg.regime == "hoelder":
        passed = fitted is not None and abs(fitted - expected) <= cfg.slope_tolerance
    elif cfg.regime == "low_order":
        scaled = [r.error_sup * math.log(1.0 / r.delta) for r in certified]
        statistic = max(scaled) / min(scaled)
        passed = all(r.certified for r in rows) and statistic <= cfg.bounded_ratio_limit
    else:
        errs = [r.error_sup for r in rows]
        passed = all(r.certified for r in rows) and all(
            b < a for a, b in zip(errs[1:], errs[2:])
        ) and errs[-1] < errs[0]
        statistic = max(errs) / min(errs)

    ts = timestamp if timestamp is not None else datetime.now(timezone.utc).isoformat()
    return RateReport(
        config=cfg,
        rows=tuple(rows),
        fitted_slope=fitted,
        expected_slope=expected,
        slope_tolerance=cfg.slope_tolerance,
        statistic=statistic,
        passed=passed,
        timestamp=ts,
        version=__version__,
    )


# -- verification suites --------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    lines: tuple[str, ...]
    artifacts: dict[str, str]


def _suite_fracpow(cfg: ExperimentConfig) -> CheckResult:
    op = ScaleOperator(cfg.grid_n)
    quad = cfg.quadrature()
    x = np.linspace(0.0, 1.0, cfg.grid_n)
    probes = {
        "ones": GridFunction.ones(cfg.grid_n),
        "x": GridFunction(x),
        "sin_pi_x": GridFunction(np.sin(np.pi * x)),
    }
    tol = 1e-3
    lines = []
    buf = io.StringIO()
    buf.write("p,u,sup_err,tol,pass\n")
    ok = True
    for p in (0.25, 0.5, 0.75):
        for name, u in probes.items():
            err = (op.power(p, u, quad) - riemann_liouville(p, u)).sup_norm()
            good = err <= tol
            ok = ok and good
            lines.append(f"p={p} u={name}: sup_err={err:.3e} {'PASS' if good else 'FAIL'}")
            buf.write(f"{p},{name},{err:.17g},{tol},{int(good)}\n")
    return CheckResult("fracpow-check", ok, tuple(lines), {"fracpow_check.csv": buf.getvalue()})


def _suite_decay(cfg: ExperimentConfig) -> CheckResult:
    op = ScaleOperator(cfg.grid_n)
    quad = cfg.quadrature()
    fam = RegularizerFamily(op, m=cfg.m)
    betas = list(np.geomspace(1e-1, 1e-4, 7))
    bound = (op.kappa_star + 1.0) ** cfg.m
    lines = []
    artifacts = {}
    ok = True
    for p in (0.0, 1.0, float(cfg.m)):
        rep = decay_check(fam, p, betas, seed=cfg.seed, cfg=quad)
        good = rep.max_ratio <= bound
        ok = ok and good
        lines.append(f"p={p}: max ||S G^p||/beta^p = {rep.max_ratio:.3f} <= {bound} {'PASS' if good else 'FAIL'}")
        artifacts[f"decay_p{p:g}.csv"] = rep.to_csv()
    rep = decay_check(fam, 0.5, betas, seed=cfg.seed, cfg=quad)
    good = 0.45 <= rep.fitted_slope <= 0.55
    ok = ok and good
    lines.append(f"p=0.5: fitted slope = {rep.fitted_slope:.4f} in [0.45, 0.55] {'PASS' if good else 'FAIL'}")
    artifacts["decay_p0.5.csv"] = rep.to_csv()
    return CheckResult("decay-check", ok, tuple(lines), artifacts)


def _suite_aux_rates(cfg: ExperimentConfig) -> CheckResult:
    op = ScaleOperator(cfg.grid_n)
    quad = cfg.quadrature()
    fam = RegularizerFamily(op, m=cfg.m)
    zero = GridFunction.zeros(cfg.grid_n)
    lines = []
    artifacts = {}
    ok = True

    u_h = make_truth("hoelder", op, p=0.5, cfg=quad)
    betas = list(np.geomspace(1e-1, 1e-4, 7))
    table = gap_table(fam, betas, u_h, zero, a=cfg.a, cfg=quad)
    artifacts["gaps_hoelder.csv"] = table.to_csv()
    for name, vals in (("g1", table.g1), ("g2", table.g2), ("g3", table.g3)):
        slope = fit_slope(list(zip(table.betas, vals))).slope
        good = abs(slope - 0.5) <= 0.07
        ok = ok and good
        lines.append(f"hoelder p=0.5 {name}: slope={slope:.4f} (0.5 +- 0.07) {'PASS' if good else 'FAIL'}")

    u_log = make_truth("low_order", op, cfg=quad)
    betas_log = list(np.geomspace(1e-1, 1e-6, 11))
    table = gap_table(fam, betas_log, u_log, zero, a=cfg.a, cfg=quad)
    artifacts["gaps_low_order.csv"] = table.to_csv()
    for name, vals in (("g1", table.g1), ("g2", table.g2), ("g3", table.g3)):
        scaled = [g * math.log(1.0 / b) for b, g in zip(table.betas, vals)]
        ratio = max(scaled) / min(scaled)
        good = ratio <= cfg.bounded_ratio_limit
        ok = ok and good
        lines.append(
            f"low-order {name}: max/min of g*log(1/beta) = {ratio:.2f} "
            f"<= {cfg.bounded_ratio_limit} {'PASS' if good else 'FAIL'}"
        )
    # Diagnostic: the same statistic restricted to the zone the grid resolves
    # (beta at or above the mesh width); below it every grid vector is
    # maximally smooth and the gaps decay faster than 1/log.
    resolved = [
        (b, g1, g2, g3)
        for b, g1, g2, g3 in zip(table.betas, table.g1, table.g2, table.g3)
        if b >= 1.0 / (cfg.grid_n - 1)
    ]
    if len(resolved) >= 2:
        for idx, name in ((1, "g1"), (2, "g2"), (3, "g3")):
            scaled = [row[idx] * math.log(1.0 / row[0]) for row in resolved]
            lines.append(
                f"low-order {name} (resolved zone beta >= h): "
                f"max/min = {max(scaled) / min(scaled):.2f} [diagnostic]"
            )
    return CheckResult("aux-rates", ok, tuple(lines), artifacts)


def _suite_nonlinearity(cfg: ExperimentConfig) -> CheckResult:
    op = ScaleOperator(cfg.grid_n)
    quad = cfg.quadrature()
    problem = make_problem(op, make_truth("hoelder", op, p=1.0, cfg=quad))
    rep = nonlinearity_check(problem, rho=0.5, n_samples=1000, seed=cfg.seed)
    lines = (
        f"pointwise preparatory inequality failures: {rep.n_prep_fail}",
        f"inequality (a) failures: {rep.n_a_fail}",
        f"inequality (b) failures: {rep.n_b_fail}",
        f"worst margin: {rep.worst_margin:.3e}",
    )
    return CheckResult(
        "nonlinearity-check", rep.all_pass, lines, {"nonlinearity_check.csv": rep.to_csv()}
    )


def _suite_rate_study(cfg: ExperimentConfig) -> CheckResult:
    report = run_rate_study(cfg)
    lines = [
        f"regime={cfg.regime} p={cfg.p if cfg.regime == 'hoelder' else '-'} "
        f"fitted_slope={report.fitted_slope} expected={report.expected_slope} "
        f"statistic={report.statistic}",
        f"certified rows: {sum(r.certified for r in report.rows)}/{len(report.rows)}",
        f"{'PASS' if report.passed else 'FAIL'}",
    ]
    return CheckResult(
        "rate-study",
        report.passed,
        tuple(lines),
        {"rate_study.csv": report.to_csv(), "rate_study.json": report.to_json()},
    )


SUITE_NAMES: dict[str, Callable[[ExperimentConfig], CheckResult]] = {
    "fracpow-check": _suite_fracpow,
    "decay-check": _suite_decay,
    "aux-rates": _suite_aux_rates,
    "nonlinearity-check": _suite_nonlinearity,
    "rate-study": _suite_rate_study,
}


def run_suite(names: Sequence[str], cfg: ExperimentConfig | None = None) -> list[CheckResult]:
    """Run the named verification suites (all of them when names is empty)."""
    cfg = cfg if cfg is not None else ExperimentConfig()
    picked = list(names) if names else list(SUITE_NAMES)
    unknown = [n for n in picked if n not in SUITE_NAMES]
    if unknown:
        raise ValueError(f"unknown suite name(s): {', '.join(unknown)}")
    return [SUITE_NAMES[n](cfg) for n in picked]


# -- config files -----------------------------------------------------------------


def parse_config_file(path: str | Path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Read a key = value text file mirroring ExperimentConfig fields."""
    base = base if base is not None else ExperimentConfig()
    fields = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
    overrides: dict[str, object] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in fields:
            raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
        if key == "delta_list":
            overrides[key] = tuple(float(tok) for tok in value.split(",") if tok.strip())
        elif key in ("grid_n", "m", "seed", "n_seeds", "n_random_starts", "max_iter"):
            overrides[key] = int(value)
        elif key == "warm_chaining":
            overrides[key] = value.strip().lower() in ("1", "true", "yes", "on")
        elif key in ("regime", "noise_kind"):
            overrides[key] = value
        else:
            overrides[key] = float(value)
    return dataclasses.replace(base, **overrides)
