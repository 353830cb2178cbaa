"""Combinatorial instance: simply-laced graph with orientation plus the
per-vertex integers (mu, lambda, m, theta) that size the operator algebra."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field


class InstanceError(ValueError):
    """Raised when an instance document or query is malformed."""


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple = ()
    warnings: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.errors

    def all_messages(self):
        return list(self.errors) + list(self.warnings)


@dataclass(frozen=True)
class Instance:
    """Immutable value object; safe to share between tasks."""

    vertices: tuple
    edges: tuple          # ordered (source, target) pairs, the orientation
    mu: dict
    lam: dict
    m: dict
    theta: dict
    _adj: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        adj = {v: set() for v in self.vertices}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        object.__setattr__(self, "_adj", adj)

    def neighbors(self, i):
        self._check_vertex(i)
        return sorted(self._adj[i], key=self.vertices.index)

    def arrows_out(self, i):
        """Vertices j with an oriented edge i -> j."""
        return [b for a, b in self.edges if a == i]

    def arrows_in(self, i):
        """Vertices j with an oriented edge j -> i."""
        return [a for a, b in self.edges if b == i]

    def adjacent(self, i, j) -> bool:
        self._check_vertex(i)
        self._check_vertex(j)
        return j in self._adj[i]

    def coweight_defect(self, i) -> int:
        """lambda_i - mu_i - (2 m_i - sum of neighbor m_j); zero when the
        coweight identity holds at i."""
        s = sum(self.m[j] for j in self._adj[i])
        return self.lam[i] - self.mu[i] - (2 * self.m[i] - s)

    def _check_vertex(self, i):
        if i not in self._adj:
            raise InstanceError(f"unknown vertex {i!r}")

    def digest(self) -> str:
        doc = {
            "vertices": list(self.vertices),
            "edges": [{"from": a, "to": b} for a, b in self.edges],
            "data": {
                v: {"mu": self.mu[v], "lambda": self.lam[v], "m": self.m[v], "theta": self.theta[v]}
                for v in self.vertices
            },
        }
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def cartan_entry(inst: Instance, i, j) -> int:
    """2 on the diagonal, -1 across an edge, 0 otherwise."""
    inst._check_vertex(i)
    inst._check_vertex(j)
    if i == j:
        return 2
    return -1 if inst.adjacent(i, j) else 0


def _require(cond, msg):
    if not cond:
        raise InstanceError(msg)


def load_instance(doc, strict: bool = True) -> Instance:
    """Build an Instance from a parsed JSON document.

    Structural problems (unknown vertices, duplicate edges, self-loops,
    negative counts, theta adjacency) are always fatal.  The coweight
    identity is fatal only when strict is set; pass strict=False to let the
    relation checkers be the arbiter on nonstandard data.
    """
    _require(isinstance(doc, dict), "instance document must be an object")
    extra = set(doc) - {"vertices", "edges", "data"}
    _require(not extra, f"unknown fields {sorted(extra)}")
    _require("vertices" in doc and "data" in doc, "missing 'vertices' or 'data'")

    verts = doc["vertices"]
    _require(isinstance(verts, list) and verts, "'vertices' must be a nonempty list")
    _require(all(isinstance(v, str) for v in verts), "vertex identifiers must be strings")
    _require(len(set(verts)) == len(verts), "duplicate vertex identifier")
    vset = set(verts)

    edges = []
    seen = set()
    for e in doc.get("edges", []):
        _require(isinstance(e, dict), "edge must be an object")
        extra = set(e) - {"from", "to"}
        _require(not extra, f"unknown edge fields {sorted(extra)}")
        _require("from" in e and "to" in e, "edge needs 'from' and 'to'")
        a, b = e["from"], e["to"]
        _require(a in vset, f"unknown vertex {a!r} in edge")
        _require(b in vset, f"unknown vertex {b!r} in edge")
        _require(a != b, f"self-loop at {a!r}")
        und = frozenset((a, b))
        _require(und not in seen, f"duplicate edge {a!r}-{b!r}")
        seen.add(und)
        edges.append((a, b))

    data = doc["data"]
    _require(isinstance(data, dict), "'data' must be an object")
    _require(set(data) == vset, "'data' keys must match 'vertices' exactly")
    mu, lam, m, theta = {}, {}, {}, {}
    for v in verts:
        row = data[v]
        _require(isinstance(row, dict), f"data[{v!r}] must be an object")
        extra = set(row) - {"mu", "lambda", "m", "theta"}
        _require(not extra, f"unknown data fields {sorted(extra)} at vertex {v!r}")
        for fieldname in ("mu", "lambda", "m", "theta"):
            _require(fieldname in row, f"missing {fieldname!r} at vertex {v!r}")
            _require(isinstance(row[fieldname], int) and not isinstance(row[fieldname], bool),
                     f"{fieldname!r} at vertex {v!r} must be an integer")
        mu[v] = row["mu"]
        lam[v] = row["lambda"]
        m[v] = row["m"]
        theta[v] = row["theta"]
        _require(lam[v] >= 0, f"negative lambda at vertex {v!r}")
        _require(m[v] >= 0, f"negative m at vertex {v!r}")
        _require(theta[v] in (0, 1), f"theta at vertex {v!r} must be 0 or 1")

    inst = Instance(tuple(verts), tuple(edges), mu, lam, m, theta)

    for a, b in edges:
        _require(theta[a] * theta[b] == 0, f"theta adjacency violation on edge {a!r}-{b!r}")
    if strict:
        for v in verts:
            _require(inst.coweight_defect(v) == 0,
                     f"coweight identity violation at vertex {v!r}")
    return inst


def load_instance_file(path, strict: bool = True) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise InstanceError(f"malformed JSON: {e}") from e
    return load_instance(doc, strict=strict)


def validate(inst: Instance, strict: bool = True) -> ValidationReport:
    """Report every violated invariant; never raises.

    With strict off the coweight identity downgrades to a warning.
    """
    errors = []
    warnings = []
    seen = set()
    for a, b in inst.edges:
        if a == b:
            errors.append(f"self-loop at {a!r}")
        und = frozenset((a, b))
        if und in seen:
            errors.append(f"duplicate edge {a!r}-{b!r}")
        seen.add(und)
        if inst.theta.get(a, 0) * inst.theta.get(b, 0) != 0:
            errors.append(f"theta adjacency violation on edge {a!r}-{b!r}")
    for v in inst.vertices:
        if inst.lam[v] < 0:
            errors.append(f"negative lambda at vertex {v!r}")
        if inst.m[v] < 0:
            errors.append(f"negative m at vertex {v!r}")
        if inst.theta[v] not in (0, 1):
            errors.append(f"theta at vertex {v!r} must be 0 or 1")
        d = inst.coweight_defect(v)
        if d != 0:
            msg = f"coweight identity violation at vertex {v!r} (defect {d})"
            (errors if strict else warnings).append(msg)
    return ValidationReport(tuple(errors), tuple(warnings))
