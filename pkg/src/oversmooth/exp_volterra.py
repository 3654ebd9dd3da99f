"""Exponential-of-running-integral forward map and its test-problem toolkit.

The nonlinear forward operator is F(u) = exp(G u) pointwise, with Frechet
derivative F'(u) h = F(u) * G h.  Around a fixed truth the derivative is
two-sided comparable to G with constants c1 = exp(-||G u_true||) and
c2 = 1/c1, and the pointwise identity F(u) - F(u_true) =
F(u_true) (exp(theta) - 1), theta = G(u - u_true), yields the two sup-norm
nonlinearity inequalities that the rate theory requires; they are checked
empirically here by seeded sampling.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grids import GridFunction
from .scale import DEFAULT_QUADRATURE, QuadratureConfig, ScaleOperator, log_smooth_element

__all__ = [
    "ExpVolterraProblem",
    "make_problem",
    "NoiseSpec",
    "noise_vector",
    "add_noise",
    "make_truth",
    "NonlinearityReport",
    "nonlinearity_check",
]


@dataclass(frozen=True)
class ExpVolterraProblem:
    """A fixed-truth instance of the exponential Volterra problem.

    c1 and c2 are the two-sided derivative comparison constants at the truth;
    c1 * c2 = 1 exactly since both come from ||G u_true||.  The degree of
    ill-posedness of this model is a = 1.
    """

    op: ScaleOperator
    u_true: GridFunction
    f_true: GridFunction
    c1: float
    c2: float
    a: float = 1.0

    def forward(self, u: GridFunction) -> GridFunction:
        """F(u) = exp(G u); raises OverflowError if the exponential overflows."""
        self.op._check_size(u)
        with np.errstate(over="ignore"):
            vals = np.exp(self.op._apply_values(u.values))
        if not np.all(np.isfinite(vals)):
            raise OverflowError("forward map overflowed for an extreme input")
        return GridFunction(vals)

    def derivative(self, u: GridFunction, h: GridFunction) -> GridFunction:
        """Frechet derivative action F'(u) h = F(u) * G h."""
        return GridFunction(self.forward(u).values * self.op._apply_values(h.values))


def make_problem(op: ScaleOperator, u_true: GridFunction) -> ExpVolterraProblem:
    g = op.apply(u_true)
    bound = g.sup_norm()
    with np.errstate(over="ignore"):
        f_vals = np.exp(g.values)
    if not np.all(np.isfinite(f_vals)):
        raise OverflowError("truth is too large for the exponential forward map")
    return ExpVolterraProblem(
        op=op,
        u_true=u_true,
        f_true=GridFunction(f_vals),
        c1=math.exp(-bound),
        c2=math.exp(bound),
    )


# -- ground truths -------------------------------------------------------------


def make_truth(
    regime: str,
    op: ScaleOperator,
    p: float | None = None,
    witness: GridFunction | None = None,
    lam: float = 2.0,
    cfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> GridFunction:
    """Construct a ground truth of prescribed smoothness.

    regime "hoelder": G^p applied to the witness (default witness 1, so the
    truth is x^p/Gamma(p+1) up to discretization); for p < 1 this lies outside
    the strong-norm space, the genuine oversmoothing scenario.
    regime "low_order": logarithmic-class element built from the witness.
    regime "generic_continuous": 1/log(e/x), continuous, vanishing at 0, with
    no constructed smoothness order; maximum value 1 at x = 1.
    """
    if regime == "hoelder":
        if p is None or not 0.0 < p <= 1.0:
            raise ValueError("hoelder regime needs an order p in (0, 1]")
        w = witness if witness is not None else GridFunction.ones(op.n)
        return op.power(p, w, cfg)
    if regime == "low_order":
        w = witness if witness is not None else GridFunction.ones(op.n)
        return log_smooth_element(op, w, lam, cfg)
    if regime == "generic_continuous":
        x = np.linspace(0.0, 1.0, op.n)
        vals = np.zeros(op.n)
        vals[1:] = 1.0 / (1.0 - np.log(x[1:]))
        return GridFunction(vals)
    raise ValueError(f"unknown truth regime: {regime!r}")


# -- noise ----------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseSpec:
    """Seeded noise of exact sup-norm level delta."""

    delta: float
    kind: str = "random_sign"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.delta < 0.0:
            raise ValueError("noise level must be nonnegative")
        if self.kind not in ("random_sign", "smooth_bump"):
            raise ValueError(f"unknown noise kind: {self.kind!r}")


def noise_vector(n: int, spec: NoiseSpec) -> GridFunction:
    """The seeded perturbation, normalized so its sup norm equals delta exactly.

    random_sign puts independent +-1 values at every node (the sup-norm stress
    pattern); smooth_bump is a Gaussian bump with seeded center, modelling
    correlated noise.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "random_sign":
        z = rng.choice([-1.0, 1.0], size=n)
    else:
        x = np.linspace(0.0, 1.0, n)
        center = rng.uniform(0.2, 0.8)
        z = np.exp(-((x - center) ** 2) / (2 * 0.1**2))
    return GridFunction(spec.delta * (z / np.max(np.abs(z))))


def add_noise(f_true: GridFunction, spec: NoiseSpec) -> GridFunction:
    """Return data perturbed at sup-norm level exactly spec.delta.

    delta = 0 returns the data unchanged.  The perturbation itself carries the
    exact level; the sum inherits one rounding of order eps * ||f_true|| per
    node on top.
    """
    if spec.delta == 0.0:
        return f_true
    return f_true + noise_vector(f_true.n, spec)


# -- nonlinearity conditions ----------------------------------------------------


@dataclass(frozen=True)
class NonlinearityReport:
    """Sample-by-sample verification of the sup-norm nonlinearity conditions."""

    rho: float
    eps: float
    rows: tuple[tuple[int, float, float, bool, bool, bool, float], ...]
    n_prep_fail: int
    n_a_fail: int
    n_b_fail: int
    worst_margin: float

    @property
    def all_pass(self) -> bool:
        return self.n_prep_fail == 0 and self.n_a_fail == 0 and self.n_b_fail == 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("sample,theta_norm,delta_norm,ineq_prep,ineq_a,ineq_b,margin\n")
        for i, tn, dn, pp, aa, bb, mg in self.rows:
            buf.write(f"{i},{tn:.17g},{dn:.17g},{int(pp)},{int(aa)},{int(bb)},{mg:.17g}\n")
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv())


def nonlinearity_check(
    prob: ExpVolterraProblem,
    rho: float = 0.5,
    eps: float | None = None,
    n_samples: int = 1000,
    seed: int = 0,
) -> NonlinearityReport:
    """Sample u near the truth and verify the three nonlinearity estimates.

    Each sample is u = u_true + G(perturbation), scaled so that
    theta = G(u - u_true) has a prescribed sup norm at most rho.  Checked per
    sample, with Delta = F(u) - F(u_true):

      (prep)  |Delta - F(u_true) theta| <= |theta| |Delta| at every node;
      (a)     (1 - rho)/c2 ||Delta|| <= ||theta||  whenever ||theta|| <= rho;
      (b)     eps ||theta|| <= ||Delta||           whenever ||Delta|| <= c1 - eps.

    Failures are recorded, not raised; margins are the worst slack over the
    applicable inequalities.
    """
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    if eps is None:
        eps = prob.c1 / 2.0
    if not 0.0 < eps < prob.c1:
        raise ValueError("eps must lie in (0, c1)")

    op = prob.op
    rng = np.random.default_rng(seed)
    f_truth = prob.forward(prob.u_true).values
    rows = []
    n_prep = n_a = n_b = 0
    worst = np.inf
    for i in range(n_samples):
        pert = rng.uniform(-1.0, 1.0, op.n)
        step = op._apply_values(pert)
        theta_raw = op._apply_values(step)
        nrm = np.max(np.abs(theta_raw))
        target = rng.uniform(0.0, rho)
        scale = 0.0 if nrm == 0.0 else target / nrm
        u = GridFunction(prob.u_true.values + scale * step)
        theta = scale * theta_raw
        delta = prob.forward(u).values - f_truth

        theta_norm = float(np.max(np.abs(theta)))
        delta_norm = float(np.max(np.abs(delta)))
        prep_margin = float(np.min(np.abs(theta) * np.abs(delta) - np.abs(delta - f_truth * theta)))
        ok_prep = prep_margin >= -1e-12
        margins = [prep_margin]
        ok_a = True
        if theta_norm <= rho:
            a_margin = theta_norm - (1.0 - rho) / prob.c2 * delta_norm
            ok_a = a_margin >= -1e-12
            margins.append(a_margin)
        ok_b = True
        if delta_norm <= prob.c1 - eps:
            b_margin = delta_norm - eps * theta_norm
            ok_b = b_margin >= -1e-12
            margins.append(b_margin)
        margin = float(min(margins))
        worst = min(worst, margin)
        n_prep += not ok_prep
        n_a += not ok_a
        n_b += not ok_b
        rows.append((i, theta_norm, delta_norm, ok_prep, ok_a, ok_b, margin))

    return NonlinearityReport(
        rho=rho,
        eps=eps,
        rows=tuple(rows),
        n_prep_fail=n_prep,
        n_a_fail=n_a,
        n_b_fail=n_b,
        worst_margin=float(worst),
    )
