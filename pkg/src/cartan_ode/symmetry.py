"""Dimension of the symmetry algebra from the rank of the invariant tower.

The structure function (a, d) and its iterated derivatives along the
constant vector fields u1*, u2*, u3* are invariant functions on the
8-dimensional bundle.  Near a regular point the symmetry algebra has
dimension 8 - r, where r is the rank of the map given by all of them.

For each tower component w we need its derivative along all eight frame
directions.  Along the vertical fields e_j* it is algebraic, -(e_j . w);
along u_i* it is the next tower level.  The action on a new level follows
from [e*, X*] = [e, X]*:

    e.(u_i* g) = sum_c A_{g,c} u_i* w_c - sum_{b in u} ad(e)_{b,i} u_b* g
                 + sum_{b in g} ad(e)_{b,i} (e_b . g)

and on the section, u_i* w = X_i w + sum_m w^(m)(X_i) (e_m . w).
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps
import sympy as sp

from .cartan import Section, a_scalar, connection_forms, d_scalar
from .lie import AD_ACTION, AD_NUM

DEFAULT_ORDER = 3
MAX_ORDER = 5
RANK_TOL = 1e-7
ZERO_ROW = 1e-9


@dataclass
class DimensionEstimate:
    dimension: int
    exact: bool  # False: rank did not stabilize, dimension is an upper bound
    ranks: dict = field(default_factory=dict)
    order: int = DEFAULT_ORDER

    def __str__(self):
        return str(self.dimension) if self.exact else f"<= {self.dimension}"


class Tower:
    """Stacked tower values at one point, built level by level with jets."""

    def __init__(self, f, point, max_level):
        order = 4 + max_level
        self.S = Section.jets(f, point, order)
        conn = connection_forms(self.S)
        comps = conn.components()
        # w^(m)(X_k) as jets (or exact zeros)
        self.omega = [[comps[m].on_frame(k) for k in range(3)] for m in range(5)]
        space = self.S.f.space
        base = space.stack([a_scalar(self.S), d_scalar(self.S)])
        self.levels = [base.c]  # coefficient arrays (n_k, M)
        self.orders = [base.order]
        self.action = [sps.csr_matrix(np.array(A.tolist(), dtype=float)) for A in AD_ACTION]
        self.space = space
        # magnitude reference for deciding that a row vanishes
        self.scale = 1.0 + float(np.abs(self.S.f.c).max())
        self.max_level = max_level
        # derivatives of the full stack along u_i* (filled level by level):
        # deriv_index[i] maps stacked component -> stacked index of u_i* of it
        self.deriv_index = [[], [], []]
        for _ in range(max_level):
            self._grow()

    @property
    def size(self):
        return sum(c.shape[0] for c in self.levels)

    def _jet(self, c, order):
        from .jets import Jet

        return Jet(self.space, c, order)

    def _grow(self):
        k = len(self.levels) - 1
        n_prev = self.size
        start = n_prev - self.levels[-1].shape[0]
        order = self.orders[-1]
        stacked = np.concatenate(self.levels, axis=0)
        W = self._jet(stacked, order)
        acted = [self._jet(np.asarray(A @ stacked), order) for A in self.action]
        top = slice(start, n_prev)
        new_cols = []
        for i in range(3):
            g = self._jet(stacked[top], self.orders[-1])
            val = self.S.frame(g, i)
            for m in range(5):
                coef = self.omega[m][i]
                if not hasattr(coef, "c"):
                    if coef == 0:
                        continue
                    val = val + float(coef) * self._jet(acted[m].c[top], order)
                else:
                    val = val + coef * self._jet(acted[m].c[top], order)
            new_cols.append(val)
        n_top = n_prev - start
        new_order = min(v.order for v in new_cols)
        new = np.concatenate([v.c for v in new_cols], axis=0)  # block i = u_i* of top level
        n_new = new.shape[0]
        N = n_prev + n_new

        def idx_new(i, r):  # stacked index of u_i* (top component r)
            return n_prev + i * n_top + r

        # u_i* of components below the top level are already in the stack
        for i in range(3):
            self.deriv_index[i].extend(idx_new(i, r) for r in range(n_top))

        def deriv_of(i, c):
            return self.deriv_index[i][c]

        new_action = []
        for j, A in enumerate(self.action):
            A = A.tocsr()
            rows, cols, vals = [], [], []
            # old block unchanged
            Acoo = A.tocoo()
            rows.extend(Acoo.row)
            cols.extend(Acoo.col)
            vals.extend(Acoo.data)
            e_index = 3 + j
            ad = AD_NUM[e_index]
            for i in range(3):
                for r in range(n_top):
                    g_idx = start + r
                    row = idx_new(i, r)
                    # sum_c A_{g,c} u_i* w_c
                    lo, hi = A.indptr[g_idx], A.indptr[g_idx + 1]
                    for c, a_gc in zip(A.indices[lo:hi], A.data[lo:hi]):
                        rows.append(row)
                        cols.append(deriv_of(i, c))
                        vals.append(a_gc)
                    for b in range(8):
                        coef = ad[b, i]
                        if coef == 0:
                            continue
                        if b < 3:
                            rows.append(row)
                            cols.append(idx_new(b, r))
                            vals.append(-coef)
                        else:
                            Ab = self.action[b - 3].tocsr()
                            lo2, hi2 = Ab.indptr[g_idx], Ab.indptr[g_idx + 1]
                            for c, a_gc in zip(Ab.indices[lo2:hi2], Ab.data[lo2:hi2]):
                                rows.append(row)
                                cols.append(c)
                                vals.append(coef * a_gc)
            new_action.append(sps.csr_matrix((vals, (rows, cols)), shape=(N, N)))
        self.action = new_action
        self.levels.append(new)
        self.orders.append(new_order)

    def values(self):
        return np.concatenate([c[:, 0] for c in self.levels])

    def jacobian(self, level):
        """Rows: tower components up to `level`; columns: the 8 frame
        derivatives (u1*, u2*, u3*, e1*, ..., e5*)."""
        n = sum(c.shape[0] for c in self.levels[: level + 1])
        vals = self.values()
        J = np.zeros((n, 8))
        for i in range(3):
            J[:, i] = vals[np.array(self.deriv_index[i][:n])]
        for j in range(5):
            J[:, 3 + j] = -(self.action[j] @ vals)[:n]
        return J


def numeric_rank(J, tol=RANK_TOL, scale=1.0):
    """Rank after dropping rows that vanish up to roundoff (relative to the
    largest row and to `scale`) and normalizing the rest."""
    norms = np.linalg.norm(J, axis=1)
    keep = norms > ZERO_ROW * max(norms.max(initial=0.0), scale)
    if not keep.any():
        return 0
    Jn = J[keep] / norms[keep, None]
    s = np.linalg.svd(Jn, compute_uv=False)
    return int((s > tol * s[0]).sum())


def symmetry_dimension_at(f, point, order=DEFAULT_ORDER, tol=RANK_TOL, max_order=MAX_ORDER):
    """8 - rank, raising the tower order until two consecutive ranks agree."""
    f = sp.sympify(f)
    tower = Tower(f, point, max_order + 1)
    ranks = {}
    N = order
    while True:
        for m in (N, N + 1):
            if m not in ranks:
                ranks[m] = numeric_rank(tower.jacobian(m), tol, tower.scale)
        if ranks[N] == ranks[N + 1]:
            return DimensionEstimate(8 - ranks[N], True, ranks, N)
        if N + 1 >= max_order:
            top = max(ranks)
            return DimensionEstimate(8 - ranks[top], False, ranks, top)
        N += 1


def symmetry_dimension_estimate(f, points, order=DEFAULT_ORDER, tol=RANK_TOL, max_order=MAX_ORDER):
    """Median of the pointwise estimates (robust to accidental degeneracy)."""
    ests = [symmetry_dimension_at(f, p, order, tol, max_order) for p in points]
    dims = sorted(e.dimension for e in ests)
    med = dims[len(dims) // 2]
    exact = all(e.exact for e in ests if e.dimension == med)
    chosen = next(e for e in ests if e.dimension == med)
    return DimensionEstimate(med, exact, chosen.ranks, chosen.order), ests
