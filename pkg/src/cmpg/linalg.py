"""Exact sparse linear solves over the rationals."""

from __future__ import annotations

from fractions import Fraction
from typing import Hashable, Mapping


class SingularSystemError(ArithmeticError):
    pass


def solve_sparse(equations: Mapping[Hashable, tuple]) -> dict:
    """Solve a square linear system given as ``{var: ({var: coef}, rhs)}``.

    Each entry is one equation; the keys name the unknowns and the system must
    have exactly one equation per unknown.  Gauss-Jordan elimination on
    dict-of-dict rows keeps the work proportional to fill-in, which stays
    small for the chain-shaped systems used here.
    """
    rows = {}
    for key, (coeffs, rhs) in equations.items():
        row = {v: Fraction(c) for v, c in coeffs.items() if c != 0}
        rows[key] = (row, Fraction(rhs))
    unknowns = list(equations)
    pending = list(rows)
    pivot_of: dict = {}
    for var in unknowns:
        pick = None
        for key in pending:
            if var in rows[key][0]:
                if pick is None or len(rows[key][0]) < len(rows[pick][0]):
                    pick = key
        if pick is None:
            raise SingularSystemError(f"no pivot for unknown {var!r}")
        pending.remove(pick)
        prow, prhs = rows[pick]
        inv = 1 / prow[var]
        prow = {v: c * inv for v, c in prow.items()}
        prhs *= inv
        rows[pick] = (prow, prhs)
        pivot_of[var] = pick
        for key, (row, rhs) in rows.items():
            if key == pick or var not in row:
                continue
            f = row.pop(var)
            for v, c in prow.items():
                if v == var:
                    continue
                nv = row.get(v, 0) - f * c
                if nv:
                    row[v] = nv
                else:
                    row.pop(v, None)
            rows[key] = (row, rhs - f * prhs)
    return {var: rows[pivot_of[var]][1] for var in unknowns}
