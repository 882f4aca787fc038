"""QUBO and Ising models, the Maximum Clique QUBO, and composite problems.

Both model types share one representation: an ordered tuple of integer
variables, a linear map, a quadratic map keyed by ``(i, j)`` with ``i < j``
and a constant offset. Energies are

    E(x) = sum_i h_i x_i + sum_{i<j} J_ij x_i x_j + offset

with ``x`` in {0, 1} for :class:`Qubo` and in {-1, +1} for :class:`IsingModel`.
A diagonal term ``(i, i)`` handed to the constructor is folded into the
linear part (``x_i^2 = x_i`` for bits, ``s_i^2 = 1`` for spins).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

import networkx as nx
import numpy as np

from .clique import Graph
from .errors import EvaluationError, GraphFormatError, NormalizationError, ValidationError

__all__ = [
    "Qubo",
    "IsingModel",
    "CompositeQubo",
    "energy",
    "max_clique_qubo",
    "qubo_to_ising",
    "ising_to_qubo",
    "combine",
    "normalize",
    "save_qubo",
    "load_qubo",
]


@dataclass(frozen=True)
class _QuadraticModel:
    linear: Mapping[int, float] = field(default_factory=dict)
    quadratic: Mapping[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0
    variables: tuple[int, ...] = ()

    domain: tuple[int, int] = field(default=(0, 1), init=False, repr=False, compare=False)

    def __post_init__(self):
        linear = {int(v): float(b) for v, b in self.linear.items()}
        offset = float(self.offset)
        quadratic: dict[tuple[int, int], float] = {}
        for (a, b), w in self.quadratic.items():
            a, b, w = int(a), int(b), float(w)
            if a == b:
                if self.domain == (0, 1):
                    linear[a] = linear.get(a, 0.0) + w
                else:
                    offset += w
                continue
            key = (a, b) if a < b else (b, a)
            quadratic[key] = quadratic.get(key, 0.0) + w
        variables = tuple(int(v) for v in self.variables)
        if len(set(variables)) != len(variables):
            raise ValidationError("duplicate variable ids")
        known = set(variables)
        extra = sorted({v for v in linear if v not in known}
                       | {v for k in quadratic for v in k if v not in known})
        variables = variables + tuple(extra)
        for v in variables:
            linear.setdefault(v, 0.0)
        object.__setattr__(self, "linear", linear)
        object.__setattr__(self, "quadratic", quadratic)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "variables", variables)

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_interactions(self) -> int:
        return len(self.quadratic)

    def degrees(self) -> dict[int, int]:
        deg = {v: 0 for v in self.variables}
        for a, b in self.quadratic:
            deg[a] += 1
            deg[b] += 1
        return deg

    def max_abs_coefficient(self) -> float:
        vals = [abs(w) for w in self.linear.values()] + [abs(w) for w in self.quadratic.values()]
        return max(vals, default=0.0)

    def scaled(self, factor: float):
        return type(self)({v: b * factor for v, b in self.linear.items()},
                          {k: w * factor for k, w in self.quadratic.items()},
                          self.offset * factor, self.variables)

    def relabeled(self, mapping: Mapping[int, int]):
        return type(self)({mapping[v]: b for v, b in self.linear.items()},
                          {(mapping[a], mapping[b]): w for (a, b), w in self.quadratic.items()},
                          self.offset, tuple(mapping[v] for v in self.variables))

    def energy(self, assignment: Mapping[int, int]) -> float:
        lo, hi = self.domain
        for v in self.variables:
            if v not in assignment:
                raise EvaluationError(f"assignment misses variable {v}")
            if assignment[v] not in (lo, hi):
                raise EvaluationError(f"value {assignment[v]!r} for variable {v} outside {{{lo}, {hi}}}")
        e = self.offset
        e += sum(b * assignment[v] for v, b in self.linear.items())
        e += sum(w * assignment[a] * assignment[b] for (a, b), w in self.quadratic.items())
        return float(e)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """``(h, rows, cols, J)`` with positions following ``variables``."""
        pos = {v: i for i, v in enumerate(self.variables)}
        h = np.array([self.linear[v] for v in self.variables], dtype=np.float64)
        keys = list(self.quadratic)
        rows = np.array([pos[a] for a, _ in keys], dtype=np.int64)
        cols = np.array([pos[b] for _, b in keys], dtype=np.int64)
        J = np.array([self.quadratic[k] for k in keys], dtype=np.float64)
        return h, rows, cols, J

    def energies(self, samples: np.ndarray) -> np.ndarray:
        """Vectorised energies for rows of ``samples`` ordered as ``variables``."""
        x = np.asarray(samples, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        h, rows, cols, J = self.arrays()
        e = x @ h + self.offset
        if len(J):
            e = e + (x[:, rows] * x[:, cols]) @ J
        return e

    def to_dict(self) -> dict:
        return {
            "n": self.num_variables,
            "linear": {str(v): self.linear[v] for v in self.variables},
            "quadratic": [[str(a), str(b), w] for (a, b), w in sorted(self.quadratic.items())],
            "offset": self.offset,
        }


@dataclass(frozen=True)
class Qubo(_QuadraticModel):
    """Binary quadratic model over ``x_i`` in {0, 1}."""

    domain: tuple[int, int] = field(default=(0, 1), init=False, repr=False, compare=False)


@dataclass(frozen=True)
class IsingModel(_QuadraticModel):
    """Spin model over ``s_i`` in {-1, +1}."""

    domain: tuple[int, int] = field(default=(-1, 1), init=False, repr=False, compare=False)


Model = Union[Qubo, IsingModel]


@dataclass(frozen=True)
class CompositeQubo:
    """Independent QUBOs placed in disjoint, contiguous variable blocks.

    ``maps[i]`` sends the variables of ``parts[i]`` to combined ids and
    ``scale_factors[i]`` is the multiplier applied to that part before it was
    added, so ``combined`` restricted to block ``i`` equals
    ``parts[i].scaled(scale_factors[i])``.
    """

    combined: Qubo
    parts: tuple[Qubo, ...]
    maps: tuple[dict[int, int], ...]
    scale_factors: tuple[float, ...]

    def block(self, i: int) -> tuple[int, ...]:
        return tuple(self.maps[i][v] for v in self.parts[i].variables)

    def split(self, sample: Mapping[int, int]) -> list[dict[int, int]]:
        """Restrict a combined assignment to each part's original variables."""
        return [{v: sample[m[v]] for v in part.variables} for part, m in zip(self.parts, self.maps)]


def energy(problem: Model, assignment: Mapping[int, int] | Sequence[int]) -> float:
    """Energy of one assignment; a sequence is read in ``problem.variables`` order."""
    if not isinstance(assignment, Mapping):
        values = list(assignment)
        if len(values) != problem.num_variables:
            raise EvaluationError(f"expected {problem.num_variables} values, got {len(values)}")
        assignment = dict(zip(problem.variables, values))
    return problem.energy(assignment)


def max_clique_qubo(graph: Graph | nx.Graph, A: float = 1.0, B: float = 2.0) -> Qubo:
    """Maximum Clique QUBO: reward ``-A`` per chosen vertex, penalty ``B`` per
    chosen non-adjacent pair. For ``B > A`` the minimisers are exactly the
    indicator vectors of maximum cliques, at energy ``-A * omega``.
    """
    if isinstance(graph, nx.Graph):
        graph = Graph.from_networkx(graph)
    linear = {v: -float(A) for v in range(graph.n)}
    quadratic = {e: float(B) for e in graph.complement_edges()}
    return Qubo(linear, quadratic, 0.0, tuple(range(graph.n)))


def qubo_to_ising(q: Qubo) -> IsingModel:
    """Substitute ``x = (s + 1) / 2``; energies agree state by state."""
    h = {v: b / 2.0 for v, b in q.linear.items()}
    J = {}
    offset = q.offset + sum(q.linear.values()) / 2.0
    for (a, b), w in q.quadratic.items():
        J[(a, b)] = w / 4.0
        h[a] += w / 4.0
        h[b] += w / 4.0
        offset += w / 4.0
    return IsingModel(h, J, offset, q.variables)


def ising_to_qubo(m: IsingModel) -> Qubo:
    """Substitute ``s = 2x - 1``; inverse of :func:`qubo_to_ising`."""
    h = {v: 2.0 * b for v, b in m.linear.items()}
    Q = {}
    offset = m.offset - sum(m.linear.values())
    for (a, b), w in m.quadratic.items():
        Q[(a, b)] = 4.0 * w
        h[a] -= 2.0 * w
        h[b] -= 2.0 * w
        offset += w
    return Qubo(h, Q, offset, m.variables)


def normalize(parts: Sequence[Qubo]) -> tuple[list[Qubo], list[float]]:
    """Scale each part so its largest absolute coefficient is 1.

    Returns the scaled parts and the multipliers used (``1 / max|coef|``);
    original energies are recovered as ``E_scaled / factor``.
    """
    scaled, factors = [], []
    for i, part in enumerate(parts):
        peak = part.max_abs_coefficient()
        if peak == 0.0:
            raise NormalizationError(f"part {i} has no non-zero coefficient")
        factors.append(1.0 / peak)
        scaled.append(part.scaled(1.0 / peak) if peak != 1.0 else part)
    return scaled, factors


def combine(parts: Sequence[Qubo], normalize_parts: bool = False) -> CompositeQubo:
    """Sum independent QUBOs after renaming them into contiguous blocks."""
    parts = tuple(parts)
    if not parts:
        raise ValueError("combine needs at least one part")
    if normalize_parts:
        scaled, factors = normalize(parts)
    else:
        scaled, factors = list(parts), [1.0] * len(parts)
    linear: dict[int, float] = {}
    quadratic: dict[tuple[int, int], float] = {}
    offset = 0.0
    maps = []
    start = 0
    for part in scaled:
        mapping = {v: start + i for i, v in enumerate(part.variables)}
        maps.append(mapping)
        for v, b in part.linear.items():
            linear[mapping[v]] = b
        for (a, b), w in part.quadratic.items():
            quadratic[(mapping[a], mapping[b])] = w
        offset += part.offset
        start += part.num_variables
    combined = Qubo(linear, quadratic, offset, tuple(range(start)))
    return CompositeQubo(combined, parts, tuple(maps), tuple(factors))


def save_qubo(q: Qubo, path: str | Path) -> None:
    Path(path).write_text(json.dumps(q.to_dict()) + "\n", encoding="utf-8")


def qubo_from_dict(data) -> Qubo:
    try:
        n = int(data["n"])
        linear = {int(k): float(v) for k, v in data["linear"].items()}
        quadratic = {}
        for i, row in enumerate(data["quadratic"]):
            if len(row) != 3:
                raise GraphFormatError(f"field 'quadratic'[{i}]: expected [i, j, J]")
            quadratic[(int(row[0]), int(row[1]))] = float(row[2])
        offset = float(data.get("offset", 0.0))
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        if isinstance(exc, GraphFormatError):
            raise
        raise GraphFormatError(f"malformed QUBO object: {exc}") from exc
    return Qubo(linear, quadratic, offset, tuple(range(n)))


def load_qubo(path: str | Path) -> Qubo:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return qubo_from_dict(data)


def to_ising(problem: Model) -> IsingModel:
    return problem if isinstance(problem, IsingModel) else qubo_to_ising(problem)


def spins_to_bits(s: np.ndarray) -> np.ndarray:
    return ((np.asarray(s) + 1) // 2).astype(np.int8)


def iter_assignments(variables: Iterable[int], domain: tuple[int, int]):
    variables = list(variables)
    for mask in range(1 << len(variables)):
        yield {v: domain[(mask >> i) & 1] for i, v in enumerate(variables)}
