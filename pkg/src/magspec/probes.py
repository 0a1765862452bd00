"""Obstacle-insertion probes.

Splitting the truncated grid into omega and obstacle blocks changes the
operator only through the crossing edges and the Robin faces, so the
difference of shifted inverses

    V = (H_split + c)^-1  -  (H_full + c)^-1

concentrates on boundary modes: its singular values collapse quickly, the
finite-size surrogate of resolvent-difference compactness.  The same
difference obeys a summation-by-parts identity pairing the Robin flux defect
of one solve with the jump of the other across the boundary faces; the
identity closes exactly in the continuum and to O(h) on the lattice.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .eigensolve import eigs_lowest


# ── Shift policy ───────────────────────────────────────────────────────────


def hermitian_shift(*ops, margin=1.0):
    """Common positive shift c with every op + cI strictly positive.

    c = max(0, -min lambda_min) + margin, computed once from the supplied
    operators and meant to be reused verbatim across a refinement pair so
    resolvent quantities stay comparable.
    """
    if len(ops) == 0:
        raise ValueError("need at least one operator")
    lows = [float(eigs_lowest(op, 1, return_vectors=False).eigenvalues[0])
            for op in ops]
    return max(0.0, -min(lows)) + float(margin)


# ── Test fields ────────────────────────────────────────────────────────────


def smooth_random_field(grid, seed, n_bumps=6):
    """Seeded sum of complex Gaussian bumps sampled on the grid nodes.

    The bumps are functions of position, not of node index, so refining the
    grid samples the same underlying function; that is what makes
    refinement comparisons of the boundary identity meaningful.
    """
    rng = np.random.default_rng(seed)
    pos = grid.positions
    R = grid.spec.truncation_radius
    out = np.zeros(grid.n_nodes, dtype=complex)
    for _ in range(n_bumps):
        ctr = rng.uniform(-0.7 * R, 0.7 * R, size=grid.dimension)
        wid = rng.uniform(0.2 * R, 0.5 * R)
        amp = rng.standard_normal() + 1j * rng.standard_normal()
        d2 = np.sum((pos - ctr) ** 2, axis=1)
        out += amp * np.exp(-d2 / (2.0 * wid * wid))
    return out


# ── Resolvent difference ───────────────────────────────────────────────────


def resolvent_difference_svd(op_full, op_split, shift=None, k=10, n_max=4000):
    """Leading singular values of the shifted-inverse difference.

    Dense inverses, so the probe is limited to n <= n_max.  Returns
    (singular values, shift used).  Supply shift to reuse one (H1) shift
    across a refinement pair.
    """
    if op_full.n != op_split.n:
        raise ValueError("operators act on different node sets")
    if op_full.n > n_max:
        raise ValueError(
            f"n={op_full.n} too large for the dense resolvent probe "
            f"(limit {n_max})")
    if k < 1:
        raise ValueError("k must be positive")
    c = hermitian_shift(op_full, op_split) if shift is None else float(shift)
    n = op_full.n
    eye = np.eye(n)
    inv_split = np.linalg.inv(op_split.dense() + c * eye)
    inv_full = np.linalg.inv(op_full.dense() + c * eye)
    sv = sla.svdvals(inv_split - inv_full)
    return sv[:k], c


# ── Boundary identity ──────────────────────────────────────────────────────


@dataclass
class BoundaryIdentity:
    lhs: complex
    rhs: complex
    gap: float
    shift: float

    def as_dict(self):
        return {
            "lhs": [self.lhs.real, self.lhs.imag],
            "rhs": [self.rhs.real, self.rhs.imag],
            "gap": self.gap,
            "shift": self.shift,
        }


def _boundary_pairing(grid, phases, gamma, u, v):
    """sum over inner faces of (D_nu u + gamma u) * conj(jump of v).

    D_nu is the phase-covariant difference along the outward normal (omega
    into obstacle); the jump compares v on the omega node with the
    phase-transported v from the obstacle node, which keeps the pairing
    gauge-covariant.
    """
    faces = grid.inner_faces
    h = grid.h
    acc = 0.0 + 0.0j
    for axis in range(grid.dimension):
        sel = faces.axis == axis
        if not np.any(sel):
            continue
        i = faces.node[sel]
        j = faces.neighbor[sel]
        sgn = faces.sign[sel]
        th = phases.theta[axis][faces.edge_pos[sel]] * sgn
        ph = np.exp(-1j * th)
        du = (u[j] * ph - u[i]) / h
        jump = v[i] - ph * v[j]
        acc += np.sum((du + gamma * u[i]) * np.conj(jump))
    return acc * h ** (grid.dimension - 1)


def boundary_identity_check(op_full, op_split, grid, phases, gamma,
                            f=None, g=None, shift=None, seed=0):
    """Check <Vg, f> against its boundary-face surrogate.

    u solves (H_full + c) u = f and v the split system on g; the weighted
    inner product of Vg with f must match minus the boundary pairing of u
    and v up to a discretization gap that shrinks linearly in h.
    """
    if op_full.n != grid.n_nodes or op_split.n != grid.n_nodes:
        raise ValueError("operators do not match the grid")
    if f is None:
        f = smooth_random_field(grid, seed)
    if g is None:
        g = smooth_random_field(grid, seed + 1)
    c = hermitian_shift(op_full, op_split) if shift is None else float(shift)
    n = grid.n_nodes
    eye = np.eye(n)
    full_mat = op_full.dense() + c * eye
    split_mat = op_split.dense() + c * eye
    u = np.linalg.solve(full_mat, f)
    v = np.linalg.solve(split_mat, g)
    w = np.linalg.solve(full_mat, g)
    hd = grid.h ** grid.dimension
    lhs = hd * np.vdot(v - w, f)
    rhs = -_boundary_pairing(grid, phases, gamma, u, v)
    gap = abs(lhs - rhs) / max(abs(lhs), np.finfo(float).tiny)
    return BoundaryIdentity(complex(lhs), complex(rhs), float(gap), c)
