"""Sparse homogeneous polynomials and their Bombieri (symmetric-tensor) geometry.

A degree-d form in n real variables is stored as a map from exponent tuples
(length n, entries summing to d) to nonzero float coefficients.  The Bombieri
inner product weights monomial alpha by 1/multinomial(d, alpha); it equals the
Frobenius inner product of the corresponding symmetric d-tensors, so it is
invariant under orthogonal changes of variables and satisfies the reproducing
identity <p, (u.x)^d> = p(u) for unit-weight powers of linear forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement
from types import MappingProxyType

import numpy as np

from .frames import Frame, is_orthonormal_columns

MAX_DEGREE = 20

# Substitutions expand exactly and then drop coefficients below this fraction
# of the input's largest coefficient; without pruning, float dust defeats the
# canonical "no stored zeros" form.
PRUNE_REL = 1e-14

# Largest dense symmetric-tensor size (n**d) the dense substitution path may
# allocate; beyond this the term-by-term path is used.
_DENSE_LIMIT = 4_000_000


@lru_cache(maxsize=1 << 16)
def _multinomial_cached(d: int, alpha: tuple) -> int:
    out = 1
    rem = d
    for a in alpha:
        out *= math.comb(rem, a)
        rem -= a
    return out


def multinomial(d: int, alpha) -> int:
    """Exact integer multinomial coefficient d!/(alpha_1! ... alpha_k!).

    The entries of alpha must be non-negative and sum to d; degrees above
    20 are rejected rather than silently computed.
    """
    if not 0 <= d <= MAX_DEGREE:
        raise ValueError(f"degree {d} outside supported range 0..{MAX_DEGREE}")
    alpha = tuple(int(a) for a in alpha)
    if any(a < 0 for a in alpha):
        raise ValueError(f"negative entry in exponent {alpha}")
    if sum(alpha) != d:
        raise ValueError(f"exponent weight {sum(alpha)} does not match degree {d}")
    return _multinomial_cached(d, alpha)


def iter_exponents(n: int, d: int):
    """All exponent tuples of length n and weight d, in a fixed deterministic order."""
    for combo in combinations_with_replacement(range(n), d):
        alpha = [0] * n
        for i in combo:
            alpha[i] += 1
        yield tuple(alpha)


def num_exponents(n: int, d: int) -> int:
    """Number of degree-d monomials in n variables."""
    return math.comb(n + d - 1, d)


@dataclass(frozen=True)
class HomPoly:
    """Canonical sparse d-homogeneous polynomial in n variables.

    The term map never stores zero coefficients, every exponent has length n
    and weight d, and equality is equality of the canonical maps.  Values are
    immutable after construction.
    """

    n: int
    d: int
    terms: dict

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one variable")
        if not 1 <= self.d <= MAX_DEGREE:
            raise ValueError(f"degree must be in 1..{MAX_DEGREE}, got {self.d}")
        clean = {}
        for alpha, c in self.terms.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != self.n:
                raise ValueError(f"exponent {alpha} has length {len(alpha)}, expected {self.n}")
            if any(a < 0 for a in alpha):
                raise ValueError(f"negative entry in exponent {alpha}")
            if sum(alpha) != self.d:
                raise ValueError(f"exponent {alpha} has weight {sum(alpha)}, expected degree {self.d}")
            c = float(c)
            if c != 0.0:
                clean[alpha] = c
        object.__setattr__(self, "terms", MappingProxyType(clean))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def _check_compatible(self, other: "HomPoly"):
        if (self.n, self.d) != (other.n, other.d):
            raise ValueError(
                f"incompatible polynomials: ({self.n} vars, degree {self.d}) vs "
                f"({other.n} vars, degree {other.d})"
            )

    def __add__(self, other: "HomPoly") -> "HomPoly":
        self._check_compatible(other)
        out = dict(self.terms)
        for alpha, c in other.terms.items():
            out[alpha] = out.get(alpha, 0.0) + c
        return HomPoly(self.n, self.d, out)

    def __sub__(self, other: "HomPoly") -> "HomPoly":
        self._check_compatible(other)
        out = dict(self.terms)
        for alpha, c in other.terms.items():
            out[alpha] = out.get(alpha, 0.0) - c
        return HomPoly(self.n, self.d, out)

    def __neg__(self) -> "HomPoly":
        return HomPoly(self.n, self.d, {a: -c for a, c in self.terms.items()})

    def __mul__(self, scalar) -> "HomPoly":
        s = float(scalar)
        return HomPoly(self.n, self.d, {a: s * c for a, c in self.terms.items()})

    __rmul__ = __mul__

    def __repr__(self):
        return f"HomPoly(n={self.n}, d={self.d}, {len(self.terms)} terms)"


def zero_poly(n: int, d: int) -> HomPoly:
    return HomPoly(n, d, {})


def evaluate(p: HomPoly, x) -> float:
    """Value of p at the point x (length-n real vector)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (p.n,):
        raise ValueError(f"point has shape {x.shape}, expected ({p.n},)")
    total = 0.0
    for alpha, c in p.terms.items():
        m = c
        for i, a in enumerate(alpha):
            if a:
                m *= x[i] ** a
        total += m
    return float(total)


def gradient(p: HomPoly, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (p.n,):
        raise ValueError(f"point has shape {x.shape}, expected ({p.n},)")
    g = np.zeros(p.n)
    for alpha, c in p.terms.items():
        for i, a in enumerate(alpha):
            if not a:
                continue
            m = c * a
            for j, b in enumerate(alpha):
                e = b - 1 if j == i else b
                if e:
                    m *= x[j] ** e
            g[i] += m
    return g


def hessian(p: HomPoly, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    h = np.zeros((p.n, p.n))
    for alpha, c in p.terms.items():
        support = [i for i, a in enumerate(alpha) if a]
        for i in support:
            for j in support:
                ai = alpha[i]
                fac = ai * (alpha[j] - 1) if i == j else ai * alpha[j]
                if fac == 0:
                    continue
                m = c * fac
                for t, b in enumerate(alpha):
                    e = b - (t == i) - (t == j)
                    if e:
                        m *= x[t] ** e
                h[i, j] += m
    return h


def bombieri_inner(p: HomPoly, q: HomPoly) -> float:
    """Bombieri inner product: sum over alpha of p_a q_a / multinomial(d, alpha)."""
    p._check_compatible(q)
    small, big = (p.terms, q.terms) if len(p.terms) <= len(q.terms) else (q.terms, p.terms)
    total = 0.0
    for alpha, c in small.items():
        other = big.get(alpha)
        if other is not None:
            total += c * other / _multinomial_cached(p.d, alpha)
    return total


def bombieri_norm(p: HomPoly) -> float:
    return math.sqrt(max(bombieri_inner(p, p), 0.0))


def max_coeff_norm(p: HomPoly) -> float:
    """Largest absolute coefficient; 0 for the zero polynomial."""
    if not p.terms:
        return 0.0
    return max(abs(c) for c in p.terms.values())


def pow_linear(u, d: int) -> HomPoly:
    """Expand (u . x)^d with exact multinomial coefficients."""
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size < 1:
        raise ValueError("direction must be a nonempty vector")
    if not np.any(u):
        raise ValueError("cannot raise the zero linear form to a power")
    n = u.size
    support = [i for i in range(n) if u[i] != 0.0]
    terms = {}
    for combo in combinations_with_replacement(support, d):
        alpha = [0] * n
        for i in combo:
            alpha[i] += 1
        coeff = float(_multinomial_cached(d, tuple(alpha)))
        for i in support:
            if alpha[i]:
                coeff *= u[i] ** alpha[i]
        terms[tuple(alpha)] = coeff
    return HomPoly(n, d, terms)


def restrict_zero(p: HomPoly, keep) -> HomPoly:
    """Set every variable outside `keep` (0-based indices) to zero."""
    keep = set(keep)
    if any(i < 0 or i >= p.n for i in keep):
        raise ValueError("keep indices out of range")
    terms = {
        alpha: c
        for alpha, c in p.terms.items()
        if all(a == 0 or i in keep for i, a in enumerate(alpha))
    }
    return HomPoly(p.n, p.d, terms)


def _ascending_indices(alpha) -> tuple:
    out = []
    for i, a in enumerate(alpha):
        out.extend([i] * a)
    return tuple(out)


def dense_tensor(p: HomPoly) -> np.ndarray:
    """The symmetric d-tensor T with p(x) = sum T[i1..id] x_i1 ... x_id.

    Its Frobenius norm equals the Bombieri norm of p.
    """
    size = p.n ** p.d
    if size > _DENSE_LIMIT:
        raise ValueError(f"dense tensor would need {size} entries (limit {_DENSE_LIMIT})")
    shape = (p.n,) * p.d
    T = np.zeros(shape)
    if not p.terms:
        return T
    pows = p.n ** np.arange(p.d - 1, -1, -1, dtype=np.int64)
    keys = []
    vals = []
    for alpha, c in sorted(p.terms.items()):
        idx = np.array(_ascending_indices(alpha), dtype=np.int64)
        keys.append(int(idx @ pows))
        vals.append(c / _multinomial_cached(p.d, alpha))
    keys = np.array(keys, dtype=np.int64)
    vals = np.array(vals)
    order = np.argsort(keys)
    keys, vals = keys[order], vals[order]
    flat = T.reshape(-1)
    chunk = 1 << 20
    for start in range(0, size, chunk):
        cells = np.arange(start, min(start + chunk, size), dtype=np.int64)
        idx = np.stack(np.unravel_index(cells, shape), axis=1)
        idx.sort(axis=1)
        cell_keys = idx @ pows
        pos = np.searchsorted(keys, cell_keys)
        pos = np.minimum(pos, len(keys) - 1)
        hit = keys[pos] == cell_keys
        flat[cells[hit]] = vals[pos[hit]]
    return T


def poly_from_dense(T: np.ndarray, prune_tol: float = 0.0) -> HomPoly:
    """Sparse canonical form of a symmetric dense tensor."""
    n = T.shape[0]
    d = T.ndim
    terms = {}
    for combo in combinations_with_replacement(range(n), d):
        alpha = [0] * n
        for i in combo:
            alpha[i] += 1
        alpha = tuple(alpha)
        c = float(T[combo]) * _multinomial_cached(d, alpha)
        if abs(c) > prune_tol:
            terms[alpha] = c
    return HomPoly(n, d, terms)


def _mul_terms(a: dict, b: dict) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            key = tuple(x + y for x, y in zip(ea, eb))
            out[key] = out.get(key, 0.0) + ca * cb
    return out


def _substitute_linear(p: HomPoly, M: np.ndarray, prune_tol: float) -> HomPoly:
    """Expand p(M @ y) and prune coefficients at or below prune_tol."""
    n = p.n
    if not p.terms:
        return zero_poly(n, p.d)
    if n ** p.d <= _DENSE_LIMIT:
        T = dense_tensor(p)
        for _ in range(p.d):
            T = np.tensordot(T, M, axes=([0], [0]))
        return poly_from_dense(T, prune_tol)
    # term-by-term fallback for instances too large to densify
    acc: dict = {}
    pow_cache: dict = {}
    for alpha, c in sorted(p.terms.items()):
        factors = []
        dead = False
        for i, a in enumerate(alpha):
            if not a:
                continue
            key = (i, a)
            if key not in pow_cache:
                row = M[i]
                pow_cache[key] = pow_linear(row, a).terms if np.any(row) else {}
            if not pow_cache[key]:
                dead = True
                break
            factors.append(pow_cache[key])
        if dead:
            continue
        prod = {(0,) * n: 1.0} if not factors else factors[0]
        for f in factors[1:]:
            prod = _mul_terms(prod, f)
        for expo, val in prod.items():
            acc[expo] = acc.get(expo, 0.0) + c * val
    terms = {e: v for e, v in acc.items() if abs(v) > prune_tol}
    return HomPoly(n, p.d, terms)


def apply_orthogonal(p: HomPoly, Q) -> HomPoly:
    """Change of variables x <- Q y for an orthogonal Q: returns p composed with Q.

    The Bombieri norm is preserved; coefficients below 1e-14 times the largest
    input coefficient are pruned after the expansion.
    """
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (p.n, p.n):
        raise ValueError(f"matrix shape {Q.shape} does not match n={p.n}")
    if not is_orthonormal_columns(Q):
        raise ValueError("matrix is not orthogonal within 1e-10")
    return _substitute_linear(p, Q, PRUNE_REL * max_coeff_norm(p))


def project_subspace(p: HomPoly, frame: Frame) -> HomPoly:
    """Compose p with the orthogonal projection onto the frame's subspace.

    The result is expressed again in n variables, so projecting twice is the
    same as projecting once, and the Bombieri norm never increases.
    """
    if frame.n != p.n:
        raise ValueError(f"frame ambient dimension {frame.n} does not match n={p.n}")
    return _substitute_linear(p, frame.projection(), PRUNE_REL * max_coeff_norm(p))


def quadratic_matrix(p: HomPoly) -> np.ndarray:
    """Symmetric matrix A with p(x) = x^T A x (degree-2 forms only)."""
    if p.d != 2:
        raise ValueError("quadratic_matrix needs a degree-2 form")
    A = np.zeros((p.n, p.n))
    for alpha, c in p.terms.items():
        support = [i for i, a in enumerate(alpha) if a]
        if len(support) == 1:
            i = support[0]
            A[i, i] = c
        else:
            i, j = support
            A[i, j] = A[j, i] = c / 2.0
    return A


def quadratic_poly(A: np.ndarray) -> HomPoly:
    """Degree-2 form x^T A x for a symmetric matrix A."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or np.max(np.abs(A - A.T)) > 1e-12 * (1.0 + np.max(np.abs(A))):
        raise ValueError("matrix must be square and symmetric")
    terms = {}
    for i in range(n):
        for j in range(i, n):
            alpha = [0] * n
            alpha[i] += 1
            alpha[j] += 1
            c = A[i, i] if i == j else 2.0 * A[i, j]
            if c != 0.0:
                terms[tuple(alpha)] = float(c)
    return HomPoly(n, 2, terms)
