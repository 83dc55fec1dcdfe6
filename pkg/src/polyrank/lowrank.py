"""Greedy rank-one deflation of homogeneous forms in the Bombieri geometry.

Each step subtracts the best single power lam * (u.x)^d of the residual.  The
reproducing identity makes every step Bombieri-orthogonal to what remains, so
the squared norm drops by exactly lam^2 and the loop provably stops within
floor(1/eps^2) steps with the estimated sphere max of the residual at or
below eps times the input norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .poly import HomPoly, bombieri_norm, evaluate, pow_linear, zero_poly
from .sphere import OptimizerConfig, Rank1Term, operator_norm


def step_bound(eps: float) -> int:
    """floor(1/eps^2): the guaranteed cap on the number of greedy terms."""
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must be in (0, 1], got {eps}")
    return int(math.floor(1.0 / (eps * eps)))


@dataclass(frozen=True, eq=False)
class LowRankApprox:
    """Greedy approximant with per-step diagnostics.

    residual_bombieri[i] and residual_opnorm_est[i] describe the residual
    after i terms; len(terms) is a Waring-rank upper bound for the approximant.
    """

    terms: tuple
    residual_bombieri: tuple
    residual_opnorm_est: tuple
    eps: float
    input_norm: float
    n: int
    d: int

    def rank_upper_bound(self) -> int:
        return len(self.terms)


def greedy_approximate(p: HomPoly, eps: float,
                       cfg: OptimizerConfig | None = None) -> LowRankApprox:
    """Deflate p until the residual's estimated sphere max is <= eps * ||p||.

    A step is only taken when the estimate exceeds the threshold, so every
    stored term satisfies lam^2 > eps^2 ||p||^2 and at most floor(1/eps^2)
    terms are ever produced.  Non-convergence of the inner maximizer is not an
    error; the step simply uses the best point found.
    """
    if p.is_zero:
        raise ValueError("cannot approximate the zero polynomial")
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must be in (0, 1], got {eps}")
    cfg = cfg or OptimizerConfig()
    input_norm = bombieri_norm(p)
    threshold = eps * input_norm
    cap = step_bound(eps)
    res = p
    terms: list[Rank1Term] = []
    res_norms = [input_norm]
    res_ests = []
    while True:
        if res.is_zero:
            res_ests.append(0.0)
            break
        top = operator_norm(res, cfg)
        res_ests.append(top.value)
        if top.value <= threshold or len(terms) >= cap:
            break
        lam = evaluate(res, top.argmax)
        terms.append(Rank1Term(lam=lam, u=top.argmax))
        res = res - lam * pow_linear(top.argmax, p.d)
        res_norms.append(bombieri_norm(res))
    return LowRankApprox(
        terms=tuple(terms),
        residual_bombieri=tuple(res_norms),
        residual_opnorm_est=tuple(res_ests),
        eps=eps,
        input_norm=input_norm,
        n=p.n,
        d=p.d,
    )


def reconstruct(approx: LowRankApprox, n: int, d: int) -> HomPoly:
    """Sum of the approximant's terms as a canonical polynomial."""
    out = zero_poly(n, d)
    for t in approx.terms:
        if len(t.u) != n:
            raise ValueError(f"term direction has length {len(t.u)}, expected {n}")
        out = out + t.lam * pow_linear(t.u, d)
    return out


def hard_family(n: int) -> HomPoly:
    """The sum-of-squares family: Bombieri-norm low-rank approximation of it
    cannot be dimension-free, while its sphere max is just 1."""
    if n < 1:
        raise ValueError("need at least one variable")
    terms = {}
    for i in range(n):
        alpha = [0] * n
        alpha[i] = 2
        terms[tuple(alpha)] = 1.0
    return HomPoly(n, 2, terms)
