"""Spectral queries on Hermitian lattice operators.

Two query styles:

* eigs_lowest  -- k smallest eigenvalues; dense LAPACK below the size
  crossover, thick-restart Lanczos with full reorthogonalization above it,
* eigs_window  -- every eigenvalue in an interval; dense filtering below the
  crossover, inertia-guided spectrum slicing with shift-invert Lanczos above.

Window completeness is certified by eigenvalue counts obtained from the
inertia of shifted operators (symmetric-pivot sparse factorization).  When no
symmetric factorization succeeds, results are returned with
certified=False rather than silently trusted.

Every reported pair carries an explicitly computed residual
|| H v - lambda v || / || v ||, accumulated with compensated summation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import splu

DENSE_CUTOFF = 6000
_SLICE_MAX = 110          # eigenvalues per shift-invert slice
_BREAKDOWN = 1e-13


@dataclass
class SolverInfo:
    method: str                 # "dense" or "lanczos"
    iterations: int
    tolerance: float
    converged: bool
    message: str = ""


@dataclass
class SpectrumResult:
    """Eigenvalues in ascending order with residual certificates."""

    eigenvalues: np.ndarray
    residuals: np.ndarray
    info: SolverInfo
    eigenvectors: np.ndarray = None
    meta: dict = field(default_factory=dict)
    certified: bool = True
    window: tuple = None

    @property
    def k(self):
        return len(self.eigenvalues)


class NonConvergence(RuntimeError):
    """Iteration budget exhausted; carries whatever converged so far."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class WindowOverflow(RuntimeError):
    """More eigenvalues in the window than the caller's cap."""

    def __init__(self, message, count):
        super().__init__(message)
        self.count = count


# ── Residuals ──────────────────────────────────────────────────────────────


def residual(op, value, vector):
    """|| H v - value v || / || v ||, with compensated summation."""
    v = np.asarray(vector, dtype=complex)
    r = op.mat @ v - value * v
    num = math.fsum((r * r.conj()).real)
    den = math.fsum((v * v.conj()).real)
    if den == 0.0:
        raise ValueError("residual of the zero vector is undefined")
    return math.sqrt(num / den)


def _residuals(op, values, vectors):
    return np.array([residual(op, w, vectors[:, i]) for i, w in enumerate(values)])


# ── Inertia counts ─────────────────────────────────────────────────────────


def _operator_scale(mat):
    return float(np.max(np.abs(mat.diagonal()))) or 1.0


def inertia_count(op, s, _scale=None, direction=1.0):
    """Number of eigenvalues of op strictly below s, or None if uncertifiable.

    Computed from the sign pattern of the pivots of a symmetric-pivot sparse
    factorization of H - s I.  If the factorization cannot be trusted (shift
    too close to an eigenvalue), the shift is nudged a few times before
    giving up.  direction controls which way the nudge moves: counting for
    the lower edge of a closed window must nudge down, so that an eigenvalue
    sitting exactly on the edge stays inside the window, while an upper edge
    must nudge up for the same reason.
    """
    mat = op.mat.tocsc()
    n = mat.shape[0]
    scale = _scale if _scale is not None else _operator_scale(mat)
    eye = sp.identity(n, dtype=complex, format="csc")
    nudge = 1e-12 * scale * (1.0 if direction >= 0 else -1.0)
    t = float(s)
    for _ in range(5):
        try:
            lu = splu((mat - t * eye).tocsc(), permc_spec="MMD_AT_PLUS_A",
                      diag_pivot_thresh=0.0, options=dict(SymmetricMode=True))
        except RuntimeError:
            t = t + nudge
            nudge *= 100.0
            continue
        du = lu.U.diagonal()
        dmax = float(np.max(np.abs(du)))
        symmetric = np.array_equal(lu.perm_r, lu.perm_c)
        clean = dmax > 0 and float(np.max(np.abs(du.imag))) <= 1e-7 * dmax
        robust = dmax > 0 and float(np.min(np.abs(du))) > 1e-13 * dmax
        if symmetric and clean and robust:
            return int(np.sum(du.real < 0.0))
        t = t + nudge
        nudge *= 100.0
    return None


# ── Dense paths ────────────────────────────────────────────────────────────


def _dense_lowest(op, k, tol, return_vectors):
    w, v = sla.eigh(op.dense(), subset_by_index=(0, k - 1))
    res = _residuals(op, w, v)
    info = SolverInfo("dense", 0, tol, True)
    return SpectrumResult(w, res, info, v if return_vectors else None,
                          dict(op.meta))


def _dense_window(op, a, b, tol, cap, return_vectors):
    w, v = sla.eigh(op.dense())
    mask = (w >= a) & (w <= b)
    count = int(mask.sum())
    if count > cap:
        raise WindowOverflow(
            f"window [{a}, {b}] holds {count} eigenvalues, cap is {cap}", count)
    vals = w[mask]
    vecs = v[:, mask]
    res = _residuals(op, vals, vecs)
    info = SolverInfo("dense", 0, tol, True, "complete by dense enumeration")
    return SpectrumResult(vals, res, info, vecs if return_vectors else None,
                          dict(op.meta), certified=True, window=(a, b))


# ── Lanczos with full reorthogonalization ──────────────────────────────────


class _Krylov:
    """Orthonormal basis plus the exact projected matrix, grown column-wise.

    Full reorthogonalization (two classical Gram-Schmidt passes against the
    entire basis) keeps the projection exact, which is what stops ghost
    copies inside near-degenerate Landau clusters.
    """

    def __init__(self, n, m_max, rng):
        self.n = n
        self.m_max = m_max
        self.rng = rng
        self.Q = np.empty((n, m_max + 2), dtype=complex, order="F")
        self.P = np.zeros((m_max + 2, m_max + 2), dtype=complex)
        self.m = 0

    @property
    def me(self):
        """Columns whose operator image has been projected (the last basis
        column is always a continuation vector without one)."""
        return max(0, self.m - 1)

    def _random_unit(self):
        v = self.rng.standard_normal(self.n) + 1j * self.rng.standard_normal(self.n)
        return v / np.linalg.norm(v)

    def seed_vector(self, v=None):
        v = self._random_unit() if v is None else v / np.linalg.norm(v)
        if self.m > 0:
            for _ in range(2):
                v = v - self.Q[:, :self.m] @ (self.Q[:, :self.m].conj().T @ v)
            nv = np.linalg.norm(v)
            if nv < _BREAKDOWN:
                return False
            v = v / nv
        self.Q[:, self.m] = v
        self.m += 1
        return True

    def extend(self, apply_op):
        """One Lanczos step from the last basis vector; returns beta."""
        m = self.m
        w = apply_op(self.Q[:, m - 1])
        c_total = np.zeros(m, dtype=complex)
        for _ in range(2):
            c = self.Q[:, :m].conj().T @ w
            w = w - self.Q[:, :m] @ c
            c_total += c
        self.P[:m, m - 1] = c_total
        self.P[m - 1, :m] = np.conj(c_total)
        beta = np.linalg.norm(w)
        if beta < _BREAKDOWN * max(1.0, float(np.abs(c_total[-1]))):
            # invariant subspace hit: restart direction from fresh noise
            ok = self.seed_vector()
            self.P[m, m - 1] = 0.0
            self.P[m - 1, m] = 0.0
            return 0.0 if ok else None
        self.P[m, m - 1] = beta
        self.P[m - 1, m] = beta
        self.Q[:, m] = w / beta
        self.m += 1
        return beta

    def ritz(self):
        me = self.me
        theta, y = np.linalg.eigh(self.P[:me, :me])
        return theta, y

    def ritz_vectors(self, y):
        return self.Q[:, :y.shape[0]] @ y

    def restart(self, y_keep, theta_keep, tail=None):
        """Collapse the basis onto chosen Ritz vectors plus a continuation."""
        nk = y_keep.shape[1]
        V = self.Q[:, :y_keep.shape[0]] @ y_keep
        self.Q[:, :nk] = V
        self.P[:] = 0.0
        self.P[:nk, :nk] = np.diag(theta_keep)
        self.m = nk
        if tail is not None:
            return self.seed_vector(tail)
        return True


def _lanczos_smallest(op, k, tol, seed, max_basis, max_restarts, return_vectors):
    n = op.n
    mat = op.mat
    rng = np.random.default_rng(seed)
    scale = _operator_scale(mat)
    m_max = int(min(n, max(max_basis, k + 16)))
    kry = _Krylov(n, m_max, rng)
    kry.seed_vector()
    apply_op = lambda x: mat @ x
    matvecs = 0
    best = None
    last_vals = None
    stall = 0
    for cycle in range(max_restarts):
        while kry.me < m_max:
            if kry.extend(apply_op) is None:
                break
            matvecs += 1
        theta, y = kry.ritz()
        kk = min(k, len(theta))
        vecs = kry.ritz_vectors(y[:, :kk])
        vals = theta[:kk]
        res = _residuals(op, vals, vecs)
        best = (vals, res, vecs)
        keep = min(max(k + 8, int(1.4 * k)), max(1, kry.me - 8))
        keep = max(keep, kk)
        if kk == k and np.all(res <= tol):
            # residuals certify each pair individually; an inertia census just
            # above the last value certifies that no copy of a degenerate
            # level was silently skipped (a single Krylov sequence sees only
            # one direction per exact multiplet)
            delta = max(10.0 * tol, 1e-9 * scale)
            census = inertia_count(op, float(vals[-1]) + delta, _scale=scale)
            note = ""
            done = True
            certified = True
            if census is None:
                certified = False
                note = ", count uncertified (factorization infeasible)"
            elif census < k:
                certified = False
                note = f", count uncertified (census {census} below k)"
            elif census > k:
                done = False
                if last_vals is not None and len(last_vals) == k \
                        and np.allclose(vals, last_vals, atol=delta):
                    stall += 1
                else:
                    stall = 0
                last_vals = vals.copy()
                if stall >= 2:
                    # stable answer, census still higher: the next level sits
                    # within delta of the last kept one, which no amount of
                    # iteration can disambiguate
                    done = True
                    certified = False
                    note = f", census {census} ambiguous at the set edge"
            if done:
                info = SolverInfo("lanczos", matvecs, tol, True,
                                  f"{cycle + 1} cycles, basis {m_max}{note}")
                return SpectrumResult(vals, res, info,
                                      vecs if return_vectors else None,
                                      dict(op.meta), certified=certified)
            # a copy is hiding inside a multiplet: collapse onto the kept
            # Ritz vectors and continue from fresh noise, which has weight
            # in the unexplored part of the eigenspace
            kry.restart(y[:, :keep], theta[:keep], tail=None)
            if not kry.seed_vector():
                break
            continue
        tail = kry.Q[:, kry.m - 1].copy()
        kry.restart(y[:, :keep], theta[:keep], tail=tail)
    vals, res, vecs = best
    if len(vals) == k and np.all(res <= tol):
        info = SolverInfo("lanczos", matvecs, tol, True,
                          "basis exhausted; census ambiguous at the set edge")
        return SpectrumResult(vals, res, info, vecs if return_vectors else None,
                              dict(op.meta), certified=False)
    info = SolverInfo("lanczos", matvecs, tol, False,
                      f"stopped after {max_restarts} restart cycles")
    partial = SpectrumResult(vals, res, info, vecs if return_vectors else None,
                             dict(op.meta), certified=False)
    raise NonConvergence(
        f"lowest-{k} Lanczos did not reach tol={tol} in {max_restarts} cycles "
        f"(worst residual {res.max():.2e})", partial)


def eigs_lowest(op, k, tol=1e-8, seed=0, method="auto", return_vectors=True,
                max_basis=420, max_restarts=40, dense_cutoff=DENSE_CUTOFF):
    """k smallest eigenvalues with residual certificates.

    method "auto" picks dense LAPACK for n <= dense_cutoff and restarted
    Lanczos (full reorthogonalization, seeded random start) above.  On
    non-convergence raises NonConvergence carrying the partial result.
    """
    if k < 1 or k > op.n:
        raise ValueError(f"k must be in 1..{op.n}, got {k}")
    if method not in ("auto", "dense", "lanczos"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        method = "dense" if op.n <= dense_cutoff else "lanczos"
    if method == "dense":
        return _dense_lowest(op, k, tol, return_vectors)
    return _lanczos_smallest(op, k, tol, seed, max_basis, max_restarts, return_vectors)


# ── Shift-invert window slices ─────────────────────────────────────────────


def _make_inner_solver(mat, sigma, mode, tol):
    """Solver for (H - sigma I) x = b: sparse LU, or MINRES on the real form."""
    n = mat.shape[0]
    shifted = (mat - sigma * sp.identity(n, dtype=complex, format="csc")).tocsc()
    if mode == "direct":
        lu = splu(shifted, permc_spec="MMD_AT_PLUS_A",
                  options=dict(SymmetricMode=True))
        return lu.solve
    if mode != "minres":
        raise ValueError(f"unknown inner solver {mode!r}")
    from scipy.sparse.linalg import LinearOperator, minres

    # complex Hermitian system recast as real symmetric of twice the size
    def mv(z):
        x = z[:n] + 1j * z[n:]
        y = shifted @ x
        return np.concatenate([y.real, y.imag])

    big = LinearOperator((2 * n, 2 * n), matvec=mv, dtype=float)

    def solve(b):
        zb = np.concatenate([b.real, b.imag])
        # the outer residual floor scales with the conditioning of the
        # shifted system, so the inner solves get a wide safety margin
        z, _ = minres(big, zb, rtol=max(tol * 1e-2, 1e-13))
        return z[:n] + 1j * z[n:]

    return solve


def _slice_eigs(op, p, q, m_expect, tol, rng, inner, max_restarts=80,
                exact=True):
    """All m_expect eigenvalues in [p, q) by shift-invert Lanczos.

    Returns (values, residuals, vectors, matvecs) or raises NonConvergence.
    Near-degenerate clusters inside the slice are magnified by the spectral
    map 1/(lambda - sigma), so locking plus restarts recovers every copy.
    Membership in the half-open slice [p, q) is decided with a small guard
    band: a converged value carries rounding noise, so an eigenvalue sitting
    numerically on a slice boundary must not be lost (or double-counted) by
    a hard cut; when more candidates converge than the census allows, the
    ones farthest outside the slice are dropped first.  With exact=False the
    first batch of >= m_expect converged pairs is returned untrimmed
    (best-effort mode for uncertified sweeps).
    """
    n = op.n
    sigma = p + 0.5137 * (q - p)        # off-center: dodge symmetric clusters
    solve = _make_inner_solver(op.mat.tocsc(), sigma, inner, tol / 10.0)
    pad = max(100.0 * tol, 1e-12 * max(abs(p), abs(q), 1.0))
    m_max = int(min(n, max(2 * m_expect + 30, 60)))
    kry = _Krylov(n, m_max, rng)
    kry.seed_vector()
    matvecs = 0
    for cycle in range(max_restarts):
        while kry.me < m_max:
            if kry.extend(solve) is None:
                break
            matvecs += 1
        theta, y = kry.ritz()
        lam = np.where(np.abs(theta) > 1e-300, sigma + 1.0 / theta, np.inf)
        # guard band around [p, q): the census decides how many belong here,
        # rounding in the Ritz values must not
        cand = (lam >= p - pad) & (lam < q + pad)
        if np.any(cand):
            idx = np.nonzero(cand)[0]
            vecs = kry.ritz_vectors(y[:, idx])
            vals = lam[idx]
            res = _residuals(op, vals, vecs)
            good = np.nonzero(res <= tol)[0]
            if len(good) >= m_expect:
                if exact and len(good) > m_expect:
                    depth = np.minimum(vals[good] - p, q - vals[good])
                    order = np.lexsort((res[good], -depth))
                    good = good[order[:m_expect]]
                order = np.argsort(vals[good])
                sel = good[order]
                return vals[sel], res[sel], vecs[:, sel], matvecs
        # restart on the most relevant Ritz vectors: largest |theta| maps
        # closest to sigma, so the slice interior is kept preferentially
        order = np.argsort(-np.abs(theta))
        keep = min(max(m_expect + 10, int(1.3 * m_expect)), max(1, kry.me - 8))
        sel = order[:keep]
        tail = kry.Q[:, kry.m - 1].copy()
        kry.restart(y[:, sel], theta[sel], tail=tail)
    raise NonConvergence(
        f"slice [{p}, {q}] (sigma={sigma:.6g}): expected {m_expect} eigenvalues, "
        f"not all converged in {max_restarts} cycles", None)


def _window_sliced(op, a, b, tol, cap, seed, return_vectors, inner):
    """Certified window query: inertia bisection plus per-slice shift-invert."""
    rng = np.random.default_rng(seed)
    scale = _operator_scale(op.mat)
    b_plus = np.nextafter(b, np.inf)
    na = inertia_count(op, a, _scale=scale, direction=-1.0)
    nb = inertia_count(op, b_plus, _scale=scale, direction=1.0)
    if na is None or nb is None:
        # no certificate available: single uncertified sweep at the middle
        try:
            vals, res, vecs, mv = _slice_eigs(op, a, b_plus, 1, tol, rng, inner,
                                              exact=False)
        except NonConvergence:
            vals = np.empty(0)
            res = np.empty(0)
            vecs = np.empty((op.n, 0), complex)
            mv = 0
        info = SolverInfo("lanczos", mv, tol, True,
                          "inertia factorization infeasible; counts uncertified")
        return SpectrumResult(vals, res, info, vecs if return_vectors else None,
                              dict(op.meta), certified=False, window=(a, b))
    m_w = nb - na
    if m_w > cap:
        raise WindowOverflow(
            f"window [{a}, {b}] holds {m_w} eigenvalues, cap is {cap}", m_w)
    total_mv = 0
    pieces = []
    stack = [(a, b_plus, na, nb)]
    while stack:
        p, q, np_, nq = stack.pop()
        m = nq - np_
        if m == 0:
            continue
        if m <= _SLICE_MAX:
            vals, res, vecs, mv = _slice_eigs(op, p, q, m, tol, rng, inner)
            total_mv += mv
            pieces.append((vals[:], res, vecs))
            continue
        mid = 0.5 * (p + q)
        nm = inertia_count(op, mid, _scale=scale)
        if nm is None:
            # fall back to a generic interior point
            mid = p + 0.61803 * (q - p)
            nm = inertia_count(op, mid, _scale=scale)
        if nm is None:
            raise NonConvergence(
                f"cannot certify sub-window [{p}, {q}]: inertia infeasible", None)
        stack.append((p, mid, np_, nm))
        stack.append((mid, q, nm, nq))
    if pieces:
        vals = np.concatenate([x[0] for x in pieces])
        res = np.concatenate([x[1] for x in pieces])
        vecs = np.concatenate([x[2] for x in pieces], axis=1)
    else:
        vals = np.empty(0)
        res = np.empty(0)
        vecs = np.empty((op.n, 0), complex)
    order = np.argsort(vals, kind="stable")
    vals, res, vecs = vals[order], res[order], vecs[:, order]
    # keep exactly the certified census inside [a, b]
    info = SolverInfo("lanczos", total_mv, tol, True,
                      f"shift-invert slices ({inner} inner solves), "
                      f"inertia-certified count {m_w}")
    return SpectrumResult(vals, res, info, vecs if return_vectors else None,
                          dict(op.meta), certified=True, window=(a, b))


def eigs_window(op, a, b, tol=1e-8, cap=2000, seed=0, method="auto",
                return_vectors=False, inner="direct", dense_cutoff=DENSE_CUTOFF):
    """Every eigenvalue in [a, b], with certified completeness when possible.

    Below the size crossover the window is filtered from a dense solve; above
    it, inertia counts of H - aI and H - bI fix the census and shift-invert
    Lanczos slices recover the pairs.  Raises WindowOverflow when the census
    exceeds cap.  result.certified reports whether the census was proven.
    """
    if not b >= a:
        raise ValueError(f"empty window: [{a}, {b}]")
    if cap < 1:
        raise ValueError(f"cap must be positive, got {cap}")
    if method not in ("auto", "dense", "sliced"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        method = "dense" if op.n <= dense_cutoff else "sliced"
    if method == "dense":
        return _dense_window(op, a, b, tol, cap, return_vectors)
    return _window_sliced(op, a, b, tol, cap, seed, return_vectors, inner)
