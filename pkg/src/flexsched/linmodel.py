"""Solver-agnostic linear model: variables, rows, and a minimize objective.

This is the exchange format between the model builders and the solve
engines. Also provides the LP-format text dump used to cross-check
against external solvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

LE = "<="
EQ = "="
GE = ">="

CONTINUOUS = "C"
BINARY = "B"

INF = math.inf


@dataclass
class LinearModel:
    """A MILP in minimize form: rows over bounded continuous/binary variables."""

    name: str = "model"
    var_names: list = field(default_factory=list)
    kinds: list = field(default_factory=list)
    lo: list = field(default_factory=list)
    up: list = field(default_factory=list)
    obj: list = field(default_factory=list)
    obj_const: float = 0.0
    rows: list = field(default_factory=list)  # (idx array, coef array, rel, rhs, name)

    @property
    def n_vars(self):
        return len(self.var_names)

    @property
    def n_rows(self):
        return len(self.rows)

    @property
    def n_binaries(self):
        return sum(1 for k in self.kinds if k == BINARY)

    def add_var(self, name, lo=0.0, up=INF, kind=CONTINUOUS, obj=0.0):
        """Declare a variable and return its column index."""
        if kind == BINARY and not (0.0 <= lo and up <= 1.0):
            raise ValueError(f"binary {name} must have bounds within [0,1]")
        if lo > up:
            raise ValueError(f"{name}: empty bound interval [{lo}, {up}]")
        self.var_names.append(name)
        self.kinds.append(kind)
        self.lo.append(float(lo))
        self.up.append(float(up))
        self.obj.append(float(obj))
        return len(self.var_names) - 1

    def add_row(self, terms, rel, rhs, name=None):
        """Add a linear constraint. terms is an iterable of (var index, coef)."""
        if rel not in (LE, EQ, GE):
            raise ValueError(f"bad relation {rel!r}")
        idx = []
        coef = []
        for j, a in terms:
            if a == 0.0:
                continue
            idx.append(j)
            coef.append(float(a))
        self.rows.append(
            (
                np.asarray(idx, dtype=np.int64),
                np.asarray(coef, dtype=np.float64),
                rel,
                float(rhs),
                name or f"r{len(self.rows)}",
            )
        )

    def add_obj(self, j, coef):
        self.obj[j] += float(coef)

    def validate(self):
        """Raise ValueError on structural defects (NaN, bad indices, bounds)."""
        n = self.n_vars
        for j in range(n):
            for v in (self.lo[j], self.up[j], self.obj[j]):
                if math.isnan(v):
                    raise ValueError(f"NaN in bounds/objective of {self.var_names[j]}")
            if math.isinf(self.obj[j]):
                raise ValueError(f"infinite objective coef on {self.var_names[j]}")
            if self.lo[j] > self.up[j]:
                raise ValueError(f"{self.var_names[j]}: lo > up")
            if self.kinds[j] == BINARY and (self.lo[j] not in (0.0, 1.0) or self.up[j] not in (0.0, 1.0)):
                raise ValueError(f"{self.var_names[j]}: binary bounds must be 0/1")
        for idx, coef, _rel, rhs, rname in self.rows:
            if idx.size and (idx.min() < 0 or idx.max() >= n):
                raise ValueError(f"row {rname} references undeclared variable")
            if idx.size != np.unique(idx).size:
                raise ValueError(f"row {rname} has duplicate variable terms")
            if not np.all(np.isfinite(coef)) or not math.isfinite(rhs):
                raise ValueError(f"row {rname} has non-finite data")

    def dense(self):
        """Return (A, rels, b, c, lo, up, is_binary) numpy views of the model."""
        m, n = self.n_rows, self.n_vars
        A = np.zeros((m, n))
        b = np.zeros(m)
        rels = []
        for i, (idx, coef, rel, rhs, _name) in enumerate(self.rows):
            A[i, idx] = coef
            b[i] = rhs
            rels.append(rel)
        c = np.asarray(self.obj, dtype=np.float64)
        lo = np.asarray(self.lo, dtype=np.float64)
        up = np.asarray(self.up, dtype=np.float64)
        is_bin = np.asarray([k == BINARY for k in self.kinds], dtype=bool)
        return A, rels, b, c, lo, up, is_bin

    def objective_value(self, values):
        return float(np.dot(np.asarray(self.obj), values) + self.obj_const)


def _num(x):
    # repr keeps round-trip exactness and is deterministic
    return repr(float(x))


def _terms_str(idx, coef, names):
    parts = []
    for j, a in zip(idx, coef):
        sign = "-" if a < 0 else "+"
        parts.append(f"{sign} {_num(abs(a))} {names[j]}")
    if not parts:
        return "0 zero_"
    out = " ".join(parts)
    return out[2:] if out.startswith("+ ") else out


def write_lp(model: LinearModel, path):
    """Write the model in LP text format so external solvers can cross-check."""
    names = model.var_names
    lines = [f"\\ {model.name}", "Minimize"]
    obj_idx = [j for j, a in enumerate(model.obj) if a != 0.0]
    obj_coef = [model.obj[j] for j in obj_idx]
    obj = _terms_str(obj_idx, obj_coef, names)
    if model.obj_const:
        obj += f" + {_num(model.obj_const)} one_"
    lines.append(f" obj: {obj}")
    lines.append("Subject To")
    for idx, coef, rel, rhs, rname in model.rows:
        op = {LE: "<=", EQ: "=", GE: ">="}[rel]
        lines.append(f" {rname}: {_terms_str(idx, coef, names)} {op} {_num(rhs)}")
    if model.obj_const:
        lines.append(" fix_one_: one_ = 1")
    lines.append("Bounds")
    for j, name in enumerate(names):
        lo, up = model.lo[j], model.up[j]
        lo_s = "-inf" if lo == -INF else _num(lo)
        up_s = "+inf" if up == INF else _num(up)
        lines.append(f" {lo_s} <= {name} <= {up_s}")
    if model.obj_const:
        lines.append(" one_ = 1")
    binaries = [names[j] for j, k in enumerate(model.kinds) if k == BINARY]
    if binaries:
        lines.append("Binaries")
        for chunk in range(0, len(binaries), 8):
            lines.append(" " + " ".join(binaries[chunk : chunk + 8]))
    lines.append("End")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
