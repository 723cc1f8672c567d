"""Uniform grid functions, discrete L_p norms and their serialization."""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex samples on a uniform cubic grid in 1 to 3 dimensions.

    Sample ``values[i_0, ..., i_{d-1}]`` sits at ``origin + spacing * (i_0, ..., i_{d-1})``.
    """

    values: np.ndarray
    spacing: float
    origin: tuple

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex, copy=True)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "spacing", float(self.spacing))
        object.__setattr__(self, "origin", tuple(float(o) for o in np.atleast_1d(self.origin)))
        if not 1 <= vals.ndim <= 3:
            raise DomainError(f"grid dimension must be 1..3, got {vals.ndim}")
        if min(vals.shape) < 4:
            raise DomainError(f"every axis needs at least 4 samples, got {vals.shape}")
        if not self.spacing > 0 or not math.isfinite(self.spacing):
            raise DomainError("spacing must be positive and finite")
        if len(self.origin) != vals.ndim:
            raise DomainError("origin must have one entry per axis")
        if not np.all(np.isfinite(vals)):
            raise DomainError("grid values must be finite")

    # ---- geometry ---------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple:
        return self.values.shape

    @property
    def extent(self) -> tuple:
        return tuple(s * self.spacing for s in self.shape)

    def axes(self) -> list[np.ndarray]:
        return [o + self.spacing * np.arange(s) for o, s in zip(self.origin, self.shape)]

    def points(self) -> np.ndarray:
        """Sample coordinates, shape ``shape + (dim,)``."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def radius(self) -> np.ndarray:
        return np.linalg.norm(self.points(), axis=-1)

    @classmethod
    def centered(cls, shape, spacing: float, values=None) -> "GridFunction":
        """Grid symmetric about the origin (the origin is a node for odd sizes)."""
        shape = tuple(int(s) for s in np.atleast_1d(shape))
        origin = tuple(-spacing * (s - 1) / 2 for s in shape)
        if values is None:
            values = np.zeros(shape, dtype=complex)
        return cls(values, spacing, origin)

    @classmethod
    def sample(cls, fn: Callable[[np.ndarray], np.ndarray], shape, spacing: float, origin=None) -> "GridFunction":
        """Sample ``fn(points)`` where ``points`` has shape ``shape + (dim,)``."""
        shape = tuple(int(s) for s in np.atleast_1d(shape))
        if origin is None:
            origin = tuple(-spacing * (s - 1) / 2 for s in shape)
        blank = cls(np.zeros(shape, dtype=complex), spacing, origin)
        return blank.with_values(fn(blank.points()))

    def with_values(self, values) -> "GridFunction":
        values = np.asarray(values, dtype=complex)
        if values.shape != self.shape:
            raise DomainError(f"shape mismatch {values.shape} vs {self.shape}")
        return GridFunction(values, self.spacing, self.origin)

    def rescaled(self, factor: float) -> "GridFunction":
        """Same samples on the grid dilated by ``factor`` (spacing and origin scaled)."""
        return GridFunction(self.values, self.spacing * factor, tuple(o * factor for o in self.origin))

    def padded(self, cells: int) -> "GridFunction":
        """Zero-pad ``cells`` samples on every side of every axis."""
        if cells <= 0:
            return self
        vals = np.pad(self.values, cells)
        origin = tuple(o - cells * self.spacing for o in self.origin)
        return GridFunction(vals, self.spacing, origin)

    def shifted(self, cells) -> "GridFunction":
        """Translate the samples by whole cells; vacated cells are zero."""
        cells = tuple(int(c) for c in np.atleast_1d(cells))
        out = np.zeros(self.shape, dtype=complex)
        src, dst = [], []
        for c, s in zip(cells, self.shape):
            src.append(slice(max(0, -c), min(s, s - c)))
            dst.append(slice(max(0, c), min(s, s + c)))
        out[tuple(dst)] = self.values[tuple(src)]
        return self.with_values(out)

    def same_grid(self, other: "GridFunction") -> bool:
        return self.shape == other.shape and self.spacing == other.spacing and self.origin == other.origin

    # ---- arithmetic -------------------------------------------------------
    def __add__(self, other: "GridFunction") -> "GridFunction":
        if not self.same_grid(other):
            raise DomainError("grids differ")
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        if not self.same_grid(other):
            raise DomainError("grids differ")
        return self.with_values(self.values - other.values)

    def __mul__(self, c) -> "GridFunction":
        return self.with_values(self.values * complex(c))

    __rmul__ = __mul__

    # ---- serialization ----------------------------------------------------
    def to_bytes(self) -> bytes:
        """Little-endian header ``dim, shape[dim], spacing, origin[dim]`` then complex128 payload."""
        head = struct.pack("<q", self.dim)
        head += struct.pack(f"<{self.dim}q", *self.shape)
        head += struct.pack("<d", self.spacing)
        head += struct.pack(f"<{self.dim}d", *self.origin)
        return head + np.ascontiguousarray(self.values).astype("<c16").tobytes(order="C")

    @classmethod
    def from_bytes(cls, data: bytes) -> "GridFunction":
        if len(data) < 8:
            raise DomainError("truncated grid header")
        (dim,) = struct.unpack_from("<q", data, 0)
        if not 1 <= dim <= 3:
            raise DomainError(f"bad grid dimension {dim}")
        off = 8
        shape = struct.unpack_from(f"<{dim}q", data, off)
        off += 8 * dim
        (spacing,) = struct.unpack_from("<d", data, off)
        off += 8
        origin = struct.unpack_from(f"<{dim}d", data, off)
        off += 8 * dim
        count = int(np.prod(shape))
        if len(data) - off != 16 * count:
            raise DomainError("grid payload size does not match header")
        vals = np.frombuffer(data, dtype="<c16", count=count, offset=off).reshape(shape)
        return cls(vals.astype(complex), spacing, origin)

    def to_json(self) -> str:
        doc = {
            "dim": self.dim,
            "shape": list(self.shape),
            "spacing": self.spacing,
            "origin": list(self.origin),
            "values": [[v.real, v.imag] for v in self.values.ravel()],
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "GridFunction":
        doc = json.loads(text)
        shape = tuple(doc["shape"])
        if len(shape) != doc["dim"]:
            raise DomainError("dim and shape disagree")
        pairs = np.asarray(doc["values"], dtype=float).reshape(-1, 2)
        vals = (pairs[:, 0] + 1j * pairs[:, 1]).reshape(shape)
        return cls(vals, doc["spacing"], tuple(doc["origin"]))

    def save(self, path) -> None:
        path = str(path)
        if path.endswith(".json"):
            with open(path, "w") as fh:
                fh.write(self.to_json())
        else:
            with open(path, "wb") as fh:
                fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "GridFunction":
        path = str(path)
        if path.endswith(".json"):
            with open(path) as fh:
                return cls.from_json(fh.read())
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


@dataclass(frozen=True)
class LpNorm:
    p: float
    value: float


def lp_norm(f: GridFunction, p: float) -> LpNorm:
    """Riemann-sum ``L_p`` norm ``(h^d sum |f|^p)^(1/p)``; ``p = inf`` gives ``max |f|``."""
    p = float(p)
    if not (p >= 1):
        raise DomainError("p must be >= 1 or inf")
    a = np.abs(f.values)
    if math.isinf(p):
        return LpNorm(p, float(a.max(initial=0.0)))
    m = a.max(initial=0.0)
    if m == 0:
        return LpNorm(p, 0.0)
    # scale by the max to avoid overflow for large p
    s = float(np.sum((a / m) ** p))
    return LpNorm(p, float(m * (f.spacing ** f.dim * s) ** (1 / p)))
