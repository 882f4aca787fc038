"""Ground-state probability, time-to-solution and speedup.

With ``L(p) = max(1, ln(0.01) / ln(1 - p))`` anneals needed for 99%
confidence,

    TTS_seq      = (T_qpu + U) / A * L(p)
    TTS_ensemble = (T_qpu / K + U) / A * L(p_K),   p_K = mean(p_i)

``L`` is floored at one anneal: the raw formula drops below one anneal for
``p > 0.99`` and reaches 0 at ``p = 1``, neither of which is physical. The
floor keeps TTS continuous and non-increasing in ``p``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import ParameterError, UndefinedTTSError

__all__ = [
    "GROUND_TOLERANCE",
    "TtsReport",
    "gsp",
    "any_replica_gsp",
    "anneals_to_solution",
    "tts_sequential",
    "p_ensemble",
    "tts_ensemble",
    "tts_replicas",
    "speedup",
]

GROUND_TOLERANCE = 1e-9
_LN_TARGET = math.log(0.01)


def gsp(energies: np.ndarray, ground_energy: float, tol: float = GROUND_TOLERANCE) -> float:
    """Fraction of reads whose energy equals ``ground_energy`` within ``tol``."""
    e = np.asarray(energies, dtype=np.float64)
    if e.size == 0:
        raise ParameterError("gsp needs at least one read")
    return float(np.count_nonzero(np.abs(e - ground_energy) <= tol) / e.size)


def any_replica_gsp(energies: Sequence[np.ndarray], ground_energy: float,
                    tol: float = GROUND_TOLERANCE) -> float:
    """Fraction of anneals in which at least one replica hit the ground state."""
    hits = np.stack([np.abs(np.asarray(e, dtype=np.float64) - ground_energy) <= tol for e in energies])
    return float(np.count_nonzero(hits.any(axis=0)) / hits.shape[1])


def _check_p(p: float) -> None:
    if not (0.0 <= p <= 1.0) or math.isnan(p):
        raise ParameterError(f"probability must lie in [0, 1], got {p}")
    if p == 0.0:
        raise UndefinedTTSError("ground state never observed (p = 0); TTS is undefined")


def _check_costs(A: float, T_qpu: float, U: float) -> None:
    if A < 1:
        raise ParameterError(f"anneal count must be >= 1, got {A}")
    if T_qpu < 0 or U < 0:
        raise ParameterError(f"times must be >= 0, got T_qpu={T_qpu}, U={U}")


def anneals_to_solution(p: float) -> float:
    """Anneals needed for 99% confidence, floored at one."""
    _check_p(p)
    if p == 1.0:
        return 1.0
    return max(1.0, _LN_TARGET / math.log1p(-p))


def tts_sequential(p: float, A: float, T_qpu: float, U: float) -> float:
    _check_costs(A, T_qpu, U)
    return (T_qpu + U) / A * anneals_to_solution(p)


def p_ensemble(p_list: Sequence[float]) -> float:
    p_list = [float(p) for p in p_list]
    if not p_list:
        raise ParameterError("ensemble needs at least one probability")
    for i, p in enumerate(p_list):
        if not 0.0 <= p <= 1.0:
            raise ParameterError(f"p[{i}] = {p} outside [0, 1]")
    zero = [i for i, p in enumerate(p_list) if p == 0.0]
    if zero:
        raise UndefinedTTSError(f"ensemble TTS undefined: problems {zero[:10]} were never solved (p_i = 0)")
    return sum(p_list) / len(p_list)


def tts_ensemble(K: int, p_K: float, A: float, T_qpu: float, U: float) -> float:
    if K < 1:
        raise ParameterError(f"K must be >= 1, got {K}")
    _check_costs(A, T_qpu, U)
    return (T_qpu / K + U) / A * anneals_to_solution(p_K)


def tts_replicas(p_any: float, A: float, T_qpu: float, U: float) -> float:
    """Sequential TTS applied to the any-replica success probability."""
    return tts_sequential(p_any, A, T_qpu, U)


def speedup(tts_sequential_total: float, tts_parallel: float) -> float:
    if not (tts_sequential_total > 0 and tts_parallel > 0):
        raise ParameterError(f"speedup needs positive times, got {tts_sequential_total}, {tts_parallel}")
    return tts_sequential_total / tts_parallel


@dataclass
class TtsReport:
    """Per-problem probabilities plus the aggregate times of one comparison.

    ``per_problem_tts`` holds the sequential TTS of each problem when a
    sequential run was made; ``tts_parallel`` is the ensemble (or replica)
    TTS.
    """

    mode: str
    K: int
    per_problem_gsp: list[float]
    per_problem_tts: list[float] = field(default_factory=list)
    tts_parallel: float | None = None
    labels: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.mode not in ("distinct_problems", "replicas"):
            raise ParameterError(f"unknown report mode {self.mode!r}")

    @property
    def p_ensemble(self) -> float:
        return p_ensemble(self.per_problem_gsp)

    @property
    def tts_sequential_total(self) -> float | None:
        return math.fsum(self.per_problem_tts) if self.per_problem_tts else None

    @property
    def speedup(self) -> float | None:
        seq = self.tts_sequential_total
        if seq is None or self.tts_parallel is None:
            return None
        return speedup(seq, self.tts_parallel)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(tts_sequential_total=self.tts_sequential_total, speedup=self.speedup)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "TtsReport":
        keys = ("mode", "K", "per_problem_gsp", "per_problem_tts", "tts_parallel", "labels")
        return cls(**{k: d[k] for k in keys if k in d})

    def csv_rows(self) -> list[list]:
        """One row per problem and a final ensemble row."""
        rows = []
        for i, p in enumerate(self.per_problem_gsp):
            label = self.labels[i] if i < len(self.labels) else str(i)
            tts = self.per_problem_tts[i] if i < len(self.per_problem_tts) else ""
            rows.append([self.mode, label, repr(p), repr(tts) if tts != "" else ""])
        tail = self.tts_parallel
        rows.append([self.mode, "ensemble", repr(self.p_ensemble) if all(self.per_problem_gsp) else "",
                     repr(tail) if tail is not None else ""])
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["mode", "problem", "gsp", "tts"])
        w.writerows(self.csv_rows())
        return buf.getvalue()
