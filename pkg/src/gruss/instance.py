"""Module instances: random generation and the versioned JSON file format.

File layout (UTF-8 JSON, ``"version": 1``)::

    {"version": 1, "k": K, "d": D, "n": N, "flavor": "cstar" | "hstar",
     "p": [p_1, ..., p_n],
     "xs": n x d x k x k array of [re, im] pairs (row-major), "ys": same,
     "a": d x k x k array of [re, im] pairs, "b": same,
     "r": R, "s": S}

Floats are written with Python's shortest round-trip repr, so a save/load
cycle reproduces every entry bit for bit.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CapExceeded, InstanceIOError, ParseError, VersionMismatch
from .module import FLAVORS, tuple_norms

FORMAT_VERSION = 1
K_CAP, D_CAP, N_CAP = 32, 16, 64


@dataclass(frozen=True, eq=False)
class ModuleInstance:
    """Everything one trial needs: data tuples, centres, radii and weights.

    ``r`` and ``s`` are the tight radii ``max_i ||x_i - a||`` and
    ``max_i ||y_i - b||`` measured with the norm of ``flavor``.
    """

    k: int
    d: int
    n: int
    flavor: str
    p: np.ndarray
    xs: np.ndarray
    ys: np.ndarray
    a: np.ndarray
    b: np.ndarray
    r: float
    s: float

    @classmethod
    def build(cls, p, xs, ys, a, b, flavor: str = "cstar") -> "ModuleInstance":
        xs = np.asarray(xs, dtype=np.complex128)
        ys = np.asarray(ys, dtype=np.complex128)
        a = np.asarray(a, dtype=np.complex128)
        b = np.asarray(b, dtype=np.complex128)
        n, d, k, _ = xs.shape
        r, s = tight_radii(xs, ys, a, b, flavor)
        return cls(k, d, n, flavor, np.asarray(p, dtype=float), xs, ys, a, b, r, s)

    def with_flavor(self, flavor: str) -> "ModuleInstance":
        if flavor == self.flavor:
            return self
        r, s = tight_radii(self.xs, self.ys, self.a, self.b, flavor)
        return dataclasses.replace(self, flavor=flavor, r=r, s=s)

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.k},{self.d},{self.n},{self.flavor}".encode())
        for arr in (self.p, self.xs, self.ys, self.a, self.b):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()[:16]

    def same_as(self, other: "ModuleInstance") -> bool:
        """Exact (bitwise) equality of every field."""
        scalars = (self.k, self.d, self.n, self.flavor, self.r, self.s)
        if scalars != (other.k, other.d, other.n, other.flavor, other.r, other.s):
            return False
        return all(
            x.shape == y.shape and np.array_equal(x, y)
            for x, y in zip((self.p, self.xs, self.ys, self.a, self.b), (other.p, other.xs, other.ys, other.a, other.b))
        )


def tight_radii(xs, ys, a, b, flavor: str) -> tuple[float, float]:
    if flavor not in FLAVORS:
        raise ValueError(f"flavor must be one of {FLAVORS}, got {flavor!r}")
    return float(tuple_norms(xs - a, flavor).max()), float(tuple_norms(ys - b, flavor).max())


# -- random generation -------------------------------------------------------


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent PCG64 stream for trial ``index`` of a run seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def complex_normal(rng: np.random.Generator, *shape: int) -> np.ndarray:
    """I.i.d. standard complex normal entries (``E|z|^2 = 1``)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def dirichlet_weights(rng: np.random.Generator, n: int) -> np.ndarray:
    """Symmetric Dirichlet(1) sample via normalized exponentials."""
    e = rng.standard_exponential(n)
    return e / e.sum()


def check_caps(k: int, d: int, n: int) -> None:
    for name, value, cap in (("k", k, K_CAP), ("d", d, D_CAP), ("n", n, N_CAP)):
        if not 1 <= value <= cap:
            raise CapExceeded(f"{name}={value} outside 1..{cap}")


def random_instance(rng, k: int, d: int, n: int, flavor: str = "cstar") -> ModuleInstance:
    """Sample tuples, centres and weights; radii are the tight suprema for ``flavor``.

    ``rng`` is a :class:`numpy.random.Generator` or an integer seed.
    """
    check_caps(k, d, n)
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    xs = complex_normal(rng, n, d, k, k)
    ys = complex_normal(rng, n, d, k, k)
    a = complex_normal(rng, d, k, k)
    b = complex_normal(rng, d, k, k)
    p = dirichlet_weights(rng, n)
    return ModuleInstance.build(p, xs, ys, a, b, flavor)


# -- persistence -------------------------------------------------------------


def _pairs(arr: np.ndarray) -> list:
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def instance_to_dict(inst: ModuleInstance) -> dict:
    return {
        "version": FORMAT_VERSION,
        "k": inst.k,
        "d": inst.d,
        "n": inst.n,
        "flavor": inst.flavor,
        "p": inst.p.tolist(),
        "xs": _pairs(inst.xs),
        "ys": _pairs(inst.ys),
        "a": _pairs(inst.a),
        "b": _pairs(inst.b),
        "r": inst.r,
        "s": inst.s,
    }


def _complex_field(payload: dict, key: str, shape: tuple[int, ...]) -> np.ndarray:
    try:
        raw = np.asarray(payload[key], dtype=float)
    except KeyError:
        raise ParseError(f"missing field {key!r}") from None
    except (TypeError, ValueError) as exc:
        raise ParseError(f"field {key!r} is not a numeric array: {exc}") from None
    if raw.shape != (*shape, 2):
        raise ParseError(f"field {key!r} has shape {raw.shape}, expected {(*shape, 2)}")
    if not np.isfinite(raw).all():
        raise ParseError(f"field {key!r} has non-finite entries")
    return raw[..., 0] + 1j * raw[..., 1]


def instance_from_dict(payload) -> ModuleInstance:
    if not isinstance(payload, dict):
        raise ParseError("instance file must hold a JSON object")
    version = payload.get("version")
    if version != FORMAT_VERSION or isinstance(version, bool):
        raise VersionMismatch(f"unsupported instance version {version!r}, expected {FORMAT_VERSION}")
    try:
        k, d, n = (int(payload[key]) for key in ("k", "d", "n"))
        flavor = payload["flavor"]
        r, s = float(payload["r"]), float(payload["s"])
    except KeyError as exc:
        raise ParseError(f"missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad header field: {exc}") from None
    if flavor not in FLAVORS:
        raise ParseError(f"unknown flavor {flavor!r}")
    check_caps(k, d, n)
    p = np.asarray(payload.get("p"), dtype=float)
    if p.shape != (n,):
        raise ParseError(f"field 'p' has shape {p.shape}, expected ({n},)")
    return ModuleInstance(
        k=k,
        d=d,
        n=n,
        flavor=flavor,
        p=p,
        xs=_complex_field(payload, "xs", (n, d, k, k)),
        ys=_complex_field(payload, "ys", (n, d, k, k)),
        a=_complex_field(payload, "a", (d, k, k)),
        b=_complex_field(payload, "b", (d, k, k)),
        r=r,
        s=s,
    )


def save_instance(inst: ModuleInstance, path) -> None:
    text = json.dumps(instance_to_dict(inst), separators=(",", ":"))
    try:
        Path(path).write_text(text + "\n", encoding="utf-8")
    except OSError as exc:
        raise InstanceIOError(f"cannot write {path}: {exc}") from exc


def load_instance(path) -> ModuleInstance:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InstanceIOError(f"cannot read {path}: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    return instance_from_dict(payload)
