"""Latent-factor model: dot and cosine predictions, top-k lists, persistence."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

MAGIC = b"PBMF"
FORMAT_VERSION = 1

_MODE_CODES = {"dot": 0, "cosine": 1}
_MODE_NAMES = {code: name for name, code in _MODE_CODES.items()}
_HEADER = struct.Struct("<4sBQQQBd")  # magic, version, n, m, k, mode, r_max


class ModelFormatError(ValueError):
    """The file is not a factor-model file (bad magic or unknown version)."""


class ModelCorruptionError(ValueError):
    """The file is a factor-model file but its payload is inconsistent."""


def cosine_similarity(u: np.ndarray, v: np.ndarray, norm_epsilon: float = 1e-12) -> float:
    """(u . v) / max(|u| |v|, norm_epsilon); in [-1, 1] away from the clamp."""
    denom = math.sqrt(float(u @ u)) * math.sqrt(float(v @ v))
    if denom < norm_epsilon:
        denom = norm_epsilon
    return float(u @ v) / denom


@dataclass
class FactorModel:
    """User factors U (n x k) and item factors V (m x k) plus a prediction mode.

    "dot" mode scores a pair with U_i . V_j; "cosine" mode with the
    normalized score U_i . V_j / max(|U_i| |V_j|, norm_epsilon), which is
    invariant to the scale of either factor row.  `r_max` carries the rating
    scale of the training data so scores can be mapped back to ratings.
    """

    U: np.ndarray
    V: np.ndarray
    mode: str = "cosine"
    r_max: float = 1.0
    norm_epsilon: float = 1e-12

    def __post_init__(self) -> None:
        if self.mode not in _MODE_CODES:
            raise ValueError(f"mode must be one of {sorted(_MODE_CODES)}, got {self.mode!r}")
        if self.U.ndim != 2 or self.V.ndim != 2:
            raise ValueError("U and V must be 2-D matrices")
        if self.U.shape[1] != self.V.shape[1]:
            raise ValueError(
                f"U and V disagree on the latent dimension: {self.U.shape[1]} vs {self.V.shape[1]}"
            )
        if self.norm_epsilon <= 0:
            raise ValueError("norm_epsilon must be > 0")

    @property
    def n(self) -> int:
        return int(self.U.shape[0])

    @property
    def m(self) -> int:
        return int(self.V.shape[0])

    @property
    def k(self) -> int:
        return int(self.U.shape[1])

    # -- scalar predictions -------------------------------------------------

    def predict_dot(self, i: int, j: int) -> float:
        return float(self.U[i] @ self.V[j])

    def predict_cosine(self, i: int, j: int) -> float:
        return cosine_similarity(self.U[i], self.V[j], self.norm_epsilon)

    def predicted_rating(self, i: int, j: int) -> float:
        """Prediction mapped back to the rating scale [0, r_max]."""
        if self.mode == "cosine":
            c = self.predict_cosine(i, j)
            return min(max(c, 0.0), 1.0) * self.r_max
        return min(max(self.predict_dot(i, j), 0.0), self.r_max)

    # -- vectorized scoring (read-only; safe after training) -----------------

    def _pair_cosines(self, users: np.ndarray, items: np.ndarray) -> np.ndarray:
        us = self.U[users]
        vs = self.V[items]
        dots = np.einsum("ij,ij->i", us, vs)
        denom = np.maximum(
            np.linalg.norm(us, axis=1) * np.linalg.norm(vs, axis=1),
            self.norm_epsilon,
        )
        return dots / denom

    def scores_for_user(self, i: int) -> np.ndarray:
        """Ranking score of every item for user i (mode-dependent)."""
        dots = self.V @ self.U[i]
        if self.mode == "dot":
            return dots
        denom = np.maximum(
            float(np.linalg.norm(self.U[i])) * np.linalg.norm(self.V, axis=1),
            self.norm_epsilon,
        )
        return dots / denom

    def predicted_ratings(self, users: np.ndarray, items: np.ndarray) -> np.ndarray:
        if self.mode == "cosine":
            return np.clip(self._pair_cosines(users, items), 0.0, 1.0) * self.r_max
        dots = np.einsum("ij,ij->i", self.U[users], self.V[items])
        return np.clip(dots, 0.0, self.r_max)

    def normalized_scores(self, users: np.ndarray, items: np.ndarray) -> np.ndarray:
        """Score on the normalized [~0, 1] scale compared against 1/m.

        Cosine mode uses the cosine itself; dot mode falls back to
        predicted rating / r_max.
        """
        if self.mode == "cosine":
            return self._pair_cosines(users, items)
        return self.predicted_ratings(users, items) / self.r_max


def init_model(
    n: int,
    m: int,
    k: int,
    seed: int,
    scale: float = 0.1,
    *,
    mode: str = "cosine",
    r_max: float = 1.0,
    norm_epsilon: float = 1e-12,
) -> FactorModel:
    """Fresh model with entries drawn i.i.d. uniform on (0, scale].

    Strictly positive entries guarantee nonzero row norms (and positive
    cosines) at the first training step.  Deterministic per seed.
    """
    if n < 1 or m < 1 or k < 1:
        raise ValueError(f"n, m, k must all be >= 1, got ({n}, {m}, {k})")
    if scale <= 0:
        raise ValueError(f"scale must be > 0, got {scale}")
    rng = np.random.default_rng(seed)
    # rng.random() is uniform on [0, 1); 1 - x maps it onto (0, 1].
    U = scale * (1.0 - rng.random((n, k)))
    V = scale * (1.0 - rng.random((m, k)))
    return FactorModel(U=U, V=V, mode=mode, r_max=r_max, norm_epsilon=norm_epsilon)


@dataclass
class TopKLists:
    """Per-user ranked recommendation lists (descending scores)."""

    k_top: int
    items: list[np.ndarray]
    scores: list[np.ndarray]

    def __len__(self) -> int:
        return len(self.items)


def top_k(
    scorer: object | Callable[[int], np.ndarray],
    n_users: int,
    k_top: int,
    exclude: Sequence[np.ndarray] | None = None,
) -> TopKLists:
    """Highest-scoring items per user, ties broken by ascending item index.

    `scorer` is either an object exposing scores_for_user(i) or a plain
    callable i -> score vector.  `exclude` gives per-user item indices to
    leave out of the lists (typically each user's training items).
    """
    if k_top < 1:
        raise ValueError(f"k_top must be >= 1, got {k_top}")
    score_row = getattr(scorer, "scores_for_user", None) or scorer
    items: list[np.ndarray] = []
    scores: list[np.ndarray] = []
    for i in range(n_users):
        row = np.asarray(score_row(i), dtype=np.float64)
        # Stable sort on the negated scores keeps ascending item index
        # within every group of tied scores.
        order = np.argsort(-row, kind="stable")
        if exclude is not None and len(exclude[i]):
            keep = np.ones(row.shape[0], dtype=bool)
            keep[exclude[i]] = False
            order = order[keep[order]]
        top = order[:k_top]
        items.append(top)
        scores.append(row[top])
    return TopKLists(k_top=k_top, items=items, scores=scores)


def save_model(model: FactorModel, path: str | Path) -> None:
    """Write the model in the fixed little-endian binary format.

    Layout: magic `PBMF`, version byte, n/m/k as u64, mode byte
    (0 = dot, 1 = cosine), r_max as f64, then U row-major and V row-major
    as f64.  Round-trips bit-exactly.
    """
    header = _HEADER.pack(
        MAGIC,
        FORMAT_VERSION,
        model.n,
        model.m,
        model.k,
        _MODE_CODES[model.mode],
        float(model.r_max),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(model.U, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.V, dtype="<f8").tobytes())


def load_model(path: str | Path) -> FactorModel:
    """Read a model written by :func:`save_model`."""
    blob = Path(path).read_bytes()
    if len(blob) >= len(MAGIC) and blob[: len(MAGIC)] != MAGIC:
        raise ModelFormatError(f"{path}: not a factor-model file (bad magic)")
    if len(blob) < _HEADER.size:
        raise ModelCorruptionError(f"{path}: truncated header")
    _, version, n, m, k, mode_code, r_max = _HEADER.unpack_from(blob)
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"{path}: unsupported format version {version}")
    if mode_code not in _MODE_NAMES:
        raise ModelFormatError(f"{path}: unknown prediction mode code {mode_code}")
    if n < 1 or m < 1 or k < 1:
        raise ModelCorruptionError(f"{path}: impossible dimensions ({n}, {m}, {k})")
    expected = _HEADER.size + (n * k + m * k) * 8
    if len(blob) != expected:
        raise ModelCorruptionError(
            f"{path}: payload does not match header dimensions "
            f"(expected {expected} bytes, found {len(blob)})"
        )
    flat = np.frombuffer(blob, dtype="<f8", count=n * k + m * k, offset=_HEADER.size)
    U = flat[: n * k].reshape(n, k).astype(np.float64)
    V = flat[n * k :].reshape(m, k).astype(np.float64)
    return FactorModel(U=U, V=V, mode=_MODE_NAMES[mode_code], r_max=r_max)
