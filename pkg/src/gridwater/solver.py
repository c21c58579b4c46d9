"""Self-contained LP / mixed-integer LP kernel used by all market layers.

The LP solver is a bounded-variable primal simplex on a dense tableau.
Pricing is Dantzig (largest reduced cost) with an automatic switch to
Bland's rule after a run of degenerate pivots, which guarantees
termination and makes degenerate ties reproducible across platforms.
The MILP solver is a best-first branch and bound over LP relaxations,
branching on the most fractional binary (ties to the lowest index).

An :class:`LPSession` keeps the tableau of the previous solve alive so
that sequences of structurally identical programs (same constraint
matrix, new bounds / rhs / costs) restart from the old basis instead of
from scratch.  Simulation loops rely on this; ``solve_lp`` and
``solve_milp`` remain pure one-shot entry points.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

INF = math.inf

FEAS_TOL = 1e-7        # bound violation below this is "feasible"
DUAL_TOL = 1e-9        # reduced cost below this is "zero"
PIVOT_TOL = 1e-10      # pivots smaller than this are numerical breakdown
INT_TOL = 1e-6         # integrality tolerance on binaries
ROW_TOL = 1e-6         # row feasibility tolerance (absolute, row-scaled)

_BLAND_TRIGGER = 60    # consecutive degenerate pivots before Bland mode
_REFRESH_EVERY = 512   # pivots between basic-value refreshes

# variable status codes
_AT_LO, _AT_HI, _FREE, _BASIC = 0, 1, 2, 3


class SolverError(Exception):
    """Base class for solver failures."""


class SolverNumericalError(SolverError):
    """Numerical breakdown (tiny pivots / unrecoverable drift)."""


class ProgramError(SolverError):
    """Malformed program (bad bounds, unknown variable reference)."""


@dataclass
class LinearProgram:
    """min c.x  subject to sparse rows (sense, rhs) and lo <= x <= hi."""

    names: list[str]
    lo: np.ndarray
    hi: np.ndarray
    c: np.ndarray
    row_names: list[str]
    row_idx: list[np.ndarray]     # per row: column indices
    row_val: list[np.ndarray]     # per row: coefficients
    sense: list[str]              # per row: '<=', '=' or '>='
    rhs: np.ndarray

    @property
    def n_vars(self) -> int:
        return len(self.names)

    @property
    def n_rows(self) -> int:
        return len(self.row_names)

    def validate(self) -> None:
        if len(self.lo) and np.any(self.lo > self.hi):
            j = int(np.argmax(self.lo > self.hi))
            raise ProgramError(f"variable {self.names[j]!r} has lower bound above upper bound")
        n = self.n_vars
        for rn, idx in zip(self.row_names, self.row_idx):
            if len(idx) and (idx.min() < 0 or idx.max() >= n):
                raise ProgramError(f"row {rn!r} references an undeclared variable")


@dataclass
class MixedIntegerProgram:
    """A LinearProgram plus a set of binary-flagged variables."""

    lp: LinearProgram
    binary: np.ndarray            # bool mask over lp variables

    def validate(self) -> None:
        self.lp.validate()
        b = self.binary
        if np.any(b & ((self.lp.lo < -INT_TOL) | (self.lp.hi > 1 + INT_TOL))):
            raise ProgramError("binary variables must have bounds within [0, 1]")


@dataclass
class _Basis:
    basic: np.ndarray             # row -> column index
    vstat: np.ndarray             # column -> status code


@dataclass
class SolveResult:
    status: str                   # optimal | infeasible | unbounded | node_limit
    objective: float
    x: np.ndarray
    names: list[str]
    gap: float | None = None      # MIP only
    pivots: int = 0
    nodes: int = 0
    basis: _Basis | None = field(default=None, repr=False)

    @property
    def values(self) -> dict[str, float]:
        """Variable assignment as a name -> value mapping."""
        return {n: float(v) for n, v in zip(self.names, self.x)}

    def __getitem__(self, name: str) -> float:
        return float(self.x[self.names.index(name)])


class ProgramBuilder:
    """Incrementally assemble a LinearProgram / MixedIntegerProgram."""

    def __init__(self) -> None:
        self._names: list[str] = []
        self._lo: list[float] = []
        self._hi: list[float] = []
        self._c: list[float] = []
        self._binary: list[int] = []
        self._row_names: list[str] = []
        self._row_idx: list[np.ndarray] = []
        self._row_val: list[np.ndarray] = []
        self._sense: list[str] = []
        self._rhs: list[float] = []

    @property
    def n_vars(self) -> int:
        return len(self._names)

    def var(self, name: str, lo: float = 0.0, hi: float = INF,
            cost: float = 0.0, binary: bool = False) -> int:
        if lo > hi:
            raise ProgramError(f"variable {name!r}: lower bound {lo} above upper bound {hi}")
        self._names.append(name)
        self._lo.append(lo)
        self._hi.append(hi)
        self._c.append(cost)
        if binary:
            self._binary.append(len(self._names) - 1)
        return len(self._names) - 1

    def row(self, name: str, terms: list[tuple[int, float]], sense: str, rhs: float) -> int:
        if sense not in ("<=", "=", ">="):
            raise ProgramError(f"row {name!r}: unknown sense {sense!r}")
        # merge duplicate indices so callers can accumulate terms freely
        acc: dict[int, float] = {}
        for j, a in terms:
            acc[j] = acc.get(j, 0.0) + a
        idx = np.fromiter(acc.keys(), dtype=np.intp, count=len(acc))
        val = np.fromiter(acc.values(), dtype=np.float64, count=len(acc))
        order = np.argsort(idx, kind="stable")
        self._row_names.append(name)
        self._row_idx.append(idx[order])
        self._row_val.append(val[order])
        self._sense.append(sense)
        self._rhs.append(rhs)
        return len(self._row_names) - 1

    def lp(self) -> LinearProgram:
        prog = LinearProgram(
            names=list(self._names),
            lo=np.asarray(self._lo, dtype=np.float64),
            hi=np.asarray(self._hi, dtype=np.float64),
            c=np.asarray(self._c, dtype=np.float64),
            row_names=list(self._row_names),
            row_idx=list(self._row_idx),
            row_val=list(self._row_val),
            sense=list(self._sense),
            rhs=np.asarray(self._rhs, dtype=np.float64),
        )
        prog.validate()
        return prog

    def milp(self) -> MixedIntegerProgram:
        lp = self.lp()
        mask = np.zeros(lp.n_vars, dtype=bool)
        mask[self._binary] = True
        prog = MixedIntegerProgram(lp=lp, binary=mask)
        prog.validate()
        return prog


def _assemble_matrix(lp: LinearProgram) -> tuple[np.ndarray, np.ndarray]:
    """Equality standard form [A | I]; '>=' rows negated so slacks are >= 0.

    Returns the dense matrix and the per-row sign applied to the rhs.
    """
    n, m = lp.n_vars, lp.n_rows
    a = np.zeros((m, n + m), dtype=np.float64)
    sgn = np.ones(m, dtype=np.float64)
    for i, (idx, val, sense) in enumerate(zip(lp.row_idx, lp.row_val, lp.sense)):
        if sense == ">=":
            sgn[i] = -1.0
        a[i, idx] = sgn[i] * val
        a[i, n + i] = 1.0
    return a, sgn


def _assemble_bounds(lp: LinearProgram) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m = lp.n_rows
    lo = np.concatenate([lp.lo, np.zeros(m)])
    hi = np.concatenate([lp.hi, np.full(m, INF)])
    if m:
        eq = np.array([s == "=" for s in lp.sense], dtype=bool)
        hi[lp.n_vars:][eq] = 0.0
    c = np.concatenate([lp.c, np.zeros(m)])
    return lo, hi, c


class _Simplex:
    """Bounded-variable primal simplex working state (dense tableau)."""

    def __init__(self, a: np.ndarray, b: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                 c: np.ndarray):
        self.a0 = a                       # original equality matrix, never mutated
        self.b0 = b
        self.lo = lo
        self.hi = hi
        self.c = c
        self.m, self.ncols = a.shape
        self.pivots = 0
        self._refactor_budget = 3
        self.bland_mode = False
        self.zrow = np.zeros(self.ncols)
        self._zrow_fresh = False
        self.cold_start()

    # ----- state management -------------------------------------------------

    def cold_start(self) -> None:
        self.t = self.a0.copy()           # tableau B^-1 [A|I]; starts with B = I (slacks)
        n_struct = self.ncols - self.m
        self.basic = np.arange(n_struct, n_struct + self.m, dtype=np.intp)
        self.vstat = np.full(self.ncols, _FREE, dtype=np.int8)
        self.vstat[np.isfinite(self.hi)] = _AT_HI
        self.vstat[np.isfinite(self.lo)] = _AT_LO    # prefer lower bound when both exist
        self.vstat[self.basic] = _BASIC
        self._zrow_fresh = False
        self.recompute_xb()

    def warm_start(self, basis: _Basis) -> bool:
        """Restart from a previous basis; returns False if it is unusable."""
        if basis.basic.shape != (self.m,) or basis.vstat.shape != (self.ncols,):
            return False
        if np.array_equal(self.basic, basis.basic):
            self.vstat = basis.vstat.copy()     # tableau already matches this basis
            self._repair_vstat()
            self.recompute_xb()
            return True
        bmat = self.a0[:, basis.basic]
        try:
            t = np.linalg.solve(bmat, self.a0)
        except np.linalg.LinAlgError:
            return False
        if not np.all(np.isfinite(t)):
            return False
        self.t = t
        self.basic = basis.basic.copy()
        self.vstat = basis.vstat.copy()
        self._zrow_fresh = False
        self._repair_vstat()
        self.recompute_xb()
        return True

    def adopt(self, b: np.ndarray, lo: np.ndarray, hi: np.ndarray, c: np.ndarray) -> None:
        """Reuse the current basis for new rhs / bounds / costs (same matrix)."""
        self.b0 = b
        self.lo = lo
        self.hi = hi
        self.c = c
        self.pivots = 0
        self._refactor_budget = 3
        self._zrow_fresh = False
        self._repair_vstat()
        self.recompute_xb()

    def _repair_vstat(self) -> None:
        # a nonbasic variable may reference a bound that no longer exists
        for j in np.flatnonzero(self.vstat != _BASIC):
            s = self.vstat[j]
            if s == _AT_LO and not np.isfinite(self.lo[j]):
                self.vstat[j] = _AT_HI if np.isfinite(self.hi[j]) else _FREE
            elif s == _AT_HI and not np.isfinite(self.hi[j]):
                self.vstat[j] = _AT_LO if np.isfinite(self.lo[j]) else _FREE
            elif s == _FREE and np.isfinite(self.lo[j]):
                self.vstat[j] = _AT_LO
            elif s == _FREE and np.isfinite(self.hi[j]):
                self.vstat[j] = _AT_HI

    def nonbasic_values(self) -> np.ndarray:
        x = np.zeros(self.ncols)
        at_lo = self.vstat == _AT_LO
        at_hi = self.vstat == _AT_HI
        x[at_lo] = self.lo[at_lo]
        x[at_hi] = self.hi[at_hi]
        return x

    def recompute_xb(self) -> None:
        xn = self.nonbasic_values()
        xn[self.basic] = 0.0
        n_struct = self.ncols - self.m
        # slack block of the tableau holds B^-1
        self.xb = self.t[:, n_struct:] @ self.b0 - self.t @ xn

    def refactorize(self) -> None:
        bmat = self.a0[:, self.basic]
        try:
            self.t = np.linalg.solve(bmat, self.a0)
        except np.linalg.LinAlgError as exc:
            raise SolverNumericalError("basis matrix became singular") from exc
        self._zrow_fresh = False
        self.recompute_xb()

    # ----- pricing ------------------------------------------------------------

    def _eligible(self, d: np.ndarray) -> np.ndarray:
        movable = self.hi > self.lo
        up = (self.vstat == _AT_LO) & movable & (d > DUAL_TOL)
        dn = (self.vstat == _AT_HI) & movable & (d < -DUAL_TOL)
        fr = (self.vstat == _FREE) & (np.abs(d) > DUAL_TOL)
        return up | dn | fr

    def _infeasibility(self) -> tuple[np.ndarray, np.ndarray, float]:
        lob = self.lo[self.basic]
        hib = self.hi[self.basic]
        below = self.xb < lob - FEAS_TOL
        above = self.xb > hib + FEAS_TOL
        total = float(np.sum((lob - self.xb)[below]) + np.sum((self.xb - hib)[above]))
        return below, above, total

    # ----- ratio test and pivot -------------------------------------------------

    def _ratio_test(self, q: int, direction: float, phase1: bool,
                    below: np.ndarray, above: np.ndarray):
        col = self.t[:, q]
        move = -direction * col               # d xB_i / d step
        lob = self.lo[self.basic]
        hib = self.hi[self.basic]
        big = np.abs(col) > 1e-9

        target = np.full(self.m, np.nan)
        inc = big & (move > 0)
        dec = big & (move < 0)
        if phase1:
            # infeasible basics block at the bound they are violating;
            # basics moving further away from feasibility never block
            t_in = inc & below
            target[t_in] = lob[t_in]
            t_ok = inc & ~below & ~above
            target[t_ok] = hib[t_ok]
            t_de = dec & above
            target[t_de] = hib[t_de]
            t_ok2 = dec & ~below & ~above
            target[t_ok2] = lob[t_ok2]
        else:
            target[inc] = hib[inc]
            target[dec] = lob[dec]

        with np.errstate(invalid="ignore", divide="ignore"):
            ratios = (target - self.xb) / move
        ratios[~np.isfinite(ratios)] = INF
        np.maximum(ratios, 0.0, out=ratios)   # roundoff guard

        flip = self.hi[q] - self.lo[q]        # entering variable reaching its other bound
        if not np.isfinite(flip):
            flip = INF

        r_min = ratios.min() if self.m else INF
        if min(r_min, flip) == INF:
            return None, INF                  # unbounded direction
        if flip <= r_min:
            return -1, flip                   # bound flip, no basis change
        tied = np.flatnonzero(ratios <= r_min + 1e-9)
        if self.bland_mode:
            row = tied[np.argmin(self.basic[tied])]
        else:
            row = tied[np.argmax(np.abs(col[tied]))]
        return int(row), float(ratios[row])

    def _pivot(self, row: int, q: int, direction: float, step: float) -> None:
        col_q = self.t[:, q].copy()
        piv = col_q[row]
        if abs(piv) < PIVOT_TOL:
            raise SolverNumericalError(f"pivot magnitude {abs(piv):.3e} below tolerance")
        entering_from = {_AT_LO: self.lo[q], _AT_HI: self.hi[q], _FREE: 0.0}[self.vstat[q]]
        self.xb -= direction * step * col_q
        leaving = self.basic[row]
        lv = self.xb[row]
        # leaving variable exits at whichever bound blocked the move
        d_lo = abs(lv - self.lo[leaving]) if np.isfinite(self.lo[leaving]) else INF
        d_hi = abs(lv - self.hi[leaving]) if np.isfinite(self.hi[leaving]) else INF
        self.vstat[leaving] = _AT_LO if d_lo <= d_hi else _AT_HI
        self.basic[row] = q
        self.vstat[q] = _BASIC
        self.xb[row] = entering_from + direction * step

        prow = self.t[row] / piv
        self.t[row] = prow
        factor = col_q
        factor[row] = 0.0
        self.t -= np.outer(factor, prow)
        if self._zrow_fresh:
            self.zrow -= self.zrow[q] * prow
        self.pivots += 1

    def _flip(self, q: int, step: float) -> None:
        sgn = 1.0 if self.vstat[q] == _AT_LO else -1.0
        self.xb -= sgn * step * self.t[:, q]
        self.vstat[q] = _AT_HI if self.vstat[q] == _AT_LO else _AT_LO
        self.pivots += 1

    # ----- main loop ---------------------------------------------------------

    def run(self, max_pivots: int | None = None) -> str:
        """Phase 1 + phase 2; returns 'optimal' | 'infeasible' | 'unbounded'."""
        if max_pivots is None:
            max_pivots = 2000 + 60 * (self.m + self.ncols)
        degen_streak = 0

        while True:
            if self.pivots > max_pivots:
                if self._refactor_budget > 0:
                    self._refactor_budget -= 1
                    self.refactorize()
                    max_pivots += 1000 + 10 * self.m
                    self.bland_mode = True
                else:
                    raise SolverNumericalError("simplex iteration limit exceeded")
            if self.pivots and self.pivots % _REFRESH_EVERY == 0:
                self.recompute_xb()

            below, above, infeas = self._infeasibility()
            phase1 = infeas > FEAS_TOL * max(1.0, self.m)
            if phase1:
                sigma = above.astype(np.float64) - below.astype(np.float64)
                d = sigma @ self.t
                self._zrow_fresh = False
            else:
                if not self._zrow_fresh:
                    self.zrow = self.c[self.basic] @ self.t - self.c
                    self._zrow_fresh = True
                d = self.zrow

            elig = self._eligible(d)
            if not elig.any():
                return "infeasible" if phase1 else "optimal"

            if self.bland_mode:
                q = int(np.flatnonzero(elig)[0])
            else:
                score = np.where(elig, np.abs(d), -1.0)
                q = int(np.argmax(score))
            if self.vstat[q] == _FREE:
                direction = 1.0 if d[q] > 0 else -1.0
            else:
                direction = 1.0 if self.vstat[q] == _AT_LO else -1.0

            row, step = self._ratio_test(q, direction, phase1, below, above)
            if row is None:
                if phase1:
                    raise SolverNumericalError("phase-1 direction unbounded")
                return "unbounded"

            if step <= 1e-9:
                degen_streak += 1
                if degen_streak >= _BLAND_TRIGGER:
                    self.bland_mode = True
            else:
                degen_streak = 0
                self.bland_mode = False

            if row == -1:
                self._flip(q, step)
            else:
                self._pivot(row, q, direction, step)

    def solution(self) -> np.ndarray:
        x = self.nonbasic_values()
        x[self.basic] = self.xb
        return x

    def snapshot(self) -> _Basis:
        return _Basis(basic=self.basic.copy(), vstat=self.vstat.copy())


def _check_rows(lp: LinearProgram, x: np.ndarray) -> bool:
    for idx, val, sense, rhs in zip(lp.row_idx, lp.row_val, lp.sense, lp.rhs):
        lhs = float(val @ x[idx])
        scale = max(1.0, float(np.max(np.abs(val)))) if len(val) else 1.0
        tol = ROW_TOL * scale
        if sense == "<=" and lhs > rhs + tol:
            return False
        if sense == ">=" and lhs < rhs - tol:
            return False
        if sense == "=" and abs(lhs - rhs) > tol:
            return False
    return True


class LPSession:
    """Reusable workspace for sequences of structurally identical programs.

    Between calls only bounds, costs and right-hand sides may change; the
    constraint matrix must be identical whenever the dimensions match.
    The previous optimal basis then seeds the next solve.  Any dimension
    change triggers a clean cold start, so a session is always safe to
    reuse across different program shapes (just slower).
    """

    def __init__(self) -> None:
        self._sx: _Simplex | None = None
        self._shape: tuple[int, int] | None = None
        self._rows_key: int | None = None
        self._a0: np.ndarray | None = None
        self._sgn: np.ndarray | None = None

    def solve(self, lp: LinearProgram, warm: _Basis | None = None) -> SolveResult:
        lp.validate()
        shape = (lp.n_rows, lp.n_vars + lp.n_rows)
        rows_key = id(lp.row_idx)
        if self._a0 is None or self._shape != shape or self._rows_key != rows_key:
            self._a0, self._sgn = _assemble_matrix(lp)
            self._rows_key = rows_key
            self._shape = shape
            fresh_matrix = True
        else:
            fresh_matrix = False
        b = self._sgn * lp.rhs
        lo, hi, c = _assemble_bounds(lp)

        sx = self._sx
        if sx is not None and sx.a0.shape == shape:
            sx.a0 = self._a0
            if fresh_matrix:
                # same shape but a new matrix: the old tableau is invalid
                sx.b0 = b
                sx.lo, sx.hi, sx.c = lo, hi, c
                if not self._try_refactor(sx):
                    sx.cold_start()
            sx.adopt(b, lo, hi, c)
        else:
            sx = _Simplex(self._a0, b, lo, hi, c)
            self._sx = sx
        if warm is not None:
            if not sx.warm_start(warm):
                sx.cold_start()

        for _attempt in range(3):
            status = sx.run()
            if status != "optimal":
                break
            x = sx.solution()[: lp.n_vars]
            if _check_rows(lp, x):
                break
            sx.refactorize()          # drift: rebuild the tableau and re-iterate
        else:
            raise SolverNumericalError("could not reach a verified feasible optimum")

        if status != "optimal":
            return SolveResult(status=status, objective=INF, x=np.zeros(lp.n_vars),
                               names=lp.names, pivots=sx.pivots, basis=sx.snapshot())
        obj = float(lp.c @ x)
        return SolveResult(status="optimal", objective=obj, x=x.copy(), names=lp.names,
                           pivots=sx.pivots, basis=sx.snapshot())

    @staticmethod
    def _try_refactor(sx: _Simplex) -> bool:
        try:
            sx.refactorize()
            return True
        except SolverNumericalError:
            return False


def solve_lp(lp: LinearProgram, warm: _Basis | None = None) -> SolveResult:
    """One-shot LP solve.  Deterministic: identical program, identical result."""
    return LPSession().solve(lp, warm=warm)


def _fractionality(x: np.ndarray, mask: np.ndarray) -> np.ndarray:
    frac = np.abs(x - np.round(x))
    frac[~mask] = 0.0
    return frac


def solve_milp(mip: MixedIntegerProgram, rel_gap: float = 0.0,
               node_limit: int = 1_000_000, session: LPSession | None = None) -> SolveResult:
    """Best-first branch and bound over LP relaxations.

    Branching variable: most fractional binary, ties broken by the lowest
    variable index.  Nodes are explored in increasing LP-bound order with
    FIFO tie-breaking, so results are reproducible.  With ``rel_gap=0``
    the returned incumbent is a proven optimum.
    """
    if rel_gap < 0:
        raise ProgramError("rel_gap must be nonnegative")
    mip.validate()
    lp = mip.lp
    mask = mip.binary
    sess = session if session is not None else LPSession()

    def node_lp(lo: np.ndarray, hi: np.ndarray) -> LinearProgram:
        return LinearProgram(names=lp.names, lo=lo, hi=hi, c=lp.c,
                             row_names=lp.row_names, row_idx=lp.row_idx,
                             row_val=lp.row_val, sense=lp.sense, rhs=lp.rhs)

    incumbent: SolveResult | None = None
    inc_obj = INF
    total_pivots = 0

    def consider(res: SolveResult) -> None:
        nonlocal incumbent, inc_obj
        if res.objective < inc_obj - 1e-12:
            x = res.x.copy()
            x[mask] = np.round(x[mask])
            incumbent = SolveResult(status="optimal", objective=res.objective,
                                    x=x, names=lp.names)
            inc_obj = res.objective

    root = sess.solve(node_lp(lp.lo, lp.hi))
    nodes = 1
    total_pivots += root.pivots
    if root.status in ("infeasible", "unbounded"):
        root.nodes = nodes
        return root

    heap: list[tuple[float, int, np.ndarray, np.ndarray, _Basis]] = []
    counter = 0
    if _fractionality(root.x, mask).max(initial=0.0) <= INT_TOL:
        consider(root)
    else:
        # root probe: round every binary, test feasibility once for an incumbent
        p_lo, p_hi = lp.lo.copy(), lp.hi.copy()
        rounded = np.floor(root.x[mask] + 0.5)
        p_lo[mask] = rounded
        p_hi[mask] = rounded
        probe = sess.solve(node_lp(p_lo, p_hi), warm=root.basis)
        nodes += 1
        total_pivots += probe.pivots
        if probe.status == "optimal":
            consider(probe)
        heapq.heappush(heap, (root.objective, counter, lp.lo, lp.hi, root.basis))

    hit_limit = False
    while heap:
        bound = heap[0][0]
        if incumbent is not None and inc_obj - bound <= rel_gap * max(abs(inc_obj), 1e-9) + 1e-9:
            break
        if nodes >= node_limit:
            hit_limit = True
            break
        _, _, lo, hi, basis = heapq.heappop(heap)
        res = sess.solve(node_lp(lo, hi), warm=basis)
        nodes += 1
        total_pivots += res.pivots
        if res.status != "optimal":
            continue
        if incumbent is not None and res.objective >= inc_obj - 1e-9:
            continue
        frac = _fractionality(res.x, mask)
        if frac.max(initial=0.0) <= INT_TOL:
            consider(res)
            continue
        j = int(np.argmax(np.minimum(frac, 0.5)))   # most fractional, lowest index on ties
        lo0, hi0 = lo.copy(), hi.copy()
        hi0[j] = 0.0
        lo1, hi1 = lo.copy(), hi.copy()
        lo1[j] = 1.0
        counter += 1
        heapq.heappush(heap, (res.objective, counter, lo0, hi0, res.basis))
        counter += 1
        heapq.heappush(heap, (res.objective, counter, lo1, hi1, res.basis))

    if incumbent is None:
        status = "node_limit" if hit_limit else "infeasible"
        return SolveResult(status=status, objective=INF, x=np.zeros(lp.n_vars),
                           names=lp.names, nodes=nodes, pivots=total_pivots)

    best_bound = heap[0][0] if heap else inc_obj
    gap = max(0.0, inc_obj - best_bound) / max(abs(inc_obj), 1e-9)
    if gap < 1e-12:
        gap = 0.0
    incumbent.status = "node_limit" if hit_limit else "optimal"
    incumbent.gap = gap
    incumbent.nodes = nodes
    incumbent.pivots = total_pivots
    return incumbent


def dump_lp_text(prog: LinearProgram | MixedIntegerProgram) -> str:
    """Render a program in a CPLEX-LP-like text format.

    Grammar: a 'Minimize' section with the objective terms, 'Subject To'
    with one named row per line (terms, sense, rhs), 'Bounds' with one
    variable per line ('free' when unbounded), an optional 'Binaries'
    listing, and a closing 'End'.
    """
    if isinstance(prog, MixedIntegerProgram):
        lp, binary = prog.lp, prog.binary
    else:
        lp, binary = prog, np.zeros(prog.n_vars, dtype=bool)

    def terms(idx, val) -> str:
        parts = []
        for j, a in zip(idx, val):
            sign = "-" if a < 0 else "+"
            parts.append(f"{sign} {abs(a):.12g} {lp.names[j]}")
        if not parts:
            return "0"
        out = " ".join(parts)
        return out[2:] if out.startswith("+ ") else out

    lines = ["Minimize"]
    obj_idx = np.flatnonzero(lp.c)
    lines.append(" obj: " + terms(obj_idx, lp.c[obj_idx]))
    lines.append("Subject To")
    for name, idx, val, sense, rhs in zip(lp.row_names, lp.row_idx, lp.row_val,
                                          lp.sense, lp.rhs):
        lines.append(f" {name}: {terms(idx, val)} {sense} {rhs:.12g}")
    lines.append("Bounds")
    for j, name in enumerate(lp.names):
        lo, hi = lp.lo[j], lp.hi[j]
        if lo == -INF and hi == INF:
            lines.append(f" {name} free")
        elif hi == INF:
            lines.append(f" {lo:.12g} <= {name}")
        else:
            lines.append(f" {lo:.12g} <= {name} <= {hi:.12g}")
    if binary.any():
        lines.append("Binaries")
        lines.append(" " + " ".join(lp.names[j] for j in np.flatnonzero(binary)))
    lines.append("End")
    return "\n".join(lines) + "\n"
