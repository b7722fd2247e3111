"""Deformation matrices and reproducible deformed Ginibre sampling.

The model is ``H = A0 + H0`` where ``H0`` has iid complex Gaussian entries
with ``E h = 0``, ``E|h|^2 = 1/n`` and ``E h^2 = 0``.

Random streams are keyed by ``(master_seed, trial_index)`` through
:class:`numpy.random.SeedSequence` spawn keys feeding a counter-based Philox
generator, so a trial's matrix never depends on which worker drew it or in
what order.
"""
from dataclasses import dataclass, asdict
import hashlib
import json

import numpy as np

from .matrixio import read_matrix

__all__ = [
    "DeformationSpec", "GinibreDraw", "trial_rng", "realize_deformation",
    "sample_ginibre", "sample_deformed",
]

KINDS = ("zero", "scalar_shift", "two_atom", "jordan", "iid", "explicit")


@dataclass(frozen=True)
class DeformationSpec:
    """Declarative description of the deformation ``A0``.

    Use the named constructors (:meth:`zero`, :meth:`scalar_shift`, ...)
    rather than filling the fields by hand; which fields matter depends on
    `kind`.
    """
    kind: str
    n: int
    a: complex = 0.0
    entry_variance: float = 0.0
    seed: int = 0
    path: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError("unknown deformation kind %r (expected one of %s)"
                             % (self.kind, ", ".join(KINDS)))
        if int(self.n) < 1:
            raise ValueError("n must be positive, got %r" % (self.n,))
        if self.kind == "two_atom" and self.n % 2:
            raise ValueError("two_atom deformation needs even n, got %d" % self.n)
        if self.kind == "iid" and self.entry_variance < 0:
            raise ValueError("entry_variance must be non-negative")
        if self.kind == "explicit" and not self.path:
            raise ValueError("explicit deformation needs a path")

    @classmethod
    def zero(cls, n):
        return cls("zero", n)

    @classmethod
    def scalar_shift(cls, a, n):
        return cls("scalar_shift", n, a=complex(a))

    @classmethod
    def two_atom(cls, a, n):
        """``diag(a, ..., a, -a, ..., -a)`` with equal halves."""
        return cls("two_atom", n, a=complex(a))

    @classmethod
    def jordan(cls, eigenvalue, n):
        """Single Jordan block: `eigenvalue` on the diagonal, ones above it."""
        return cls("jordan", n, a=complex(eigenvalue))

    @classmethod
    def iid(cls, entry_variance, seed, n):
        return cls("iid", n, entry_variance=float(entry_variance), seed=int(seed))

    @classmethod
    def explicit(cls, path, n):
        return cls("explicit", n, path=str(path))

    def with_n(self, n):
        d = asdict(self)
        d["n"] = int(n)
        return DeformationSpec(**d)

    def to_dict(self):
        d = {"kind": self.kind, "n": self.n}
        if self.kind in ("scalar_shift", "two_atom", "jordan"):
            d["a"] = [self.a.real, self.a.imag]
        elif self.kind == "iid":
            d.update(entry_variance=self.entry_variance, seed=self.seed)
        elif self.kind == "explicit":
            d["path"] = self.path
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        a = d.pop("a", d.pop("eigenvalue", 0.0))
        if isinstance(a, (list, tuple)):
            a = complex(a[0], a[1])
        elif isinstance(a, str):
            a = complex(a.replace(" ", ""))
        return cls(kind=d.pop("kind"), n=int(d.pop("n")), a=complex(a),
                   entry_variance=float(d.pop("entry_variance", 0.0)),
                   seed=int(d.pop("seed", 0)), path=str(d.pop("path", "")))

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class GinibreDraw:
    n: int
    master_seed: int
    trial_index: int
    matrix: np.ndarray


def trial_rng(master_seed, trial_index):
    """Independent generator for one trial of one experiment."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(trial_index),))
    return np.random.Generator(np.random.Philox(ss))


def realize_deformation(spec):
    """Build the ``n x n`` complex matrix described by `spec`.

    Raises
    ------
    ValueError
        If an explicit matrix file has the wrong shape.
    dginibre.matrixio.MatrixFormatError
        If an explicit matrix file is malformed.
    """
    n = spec.n
    if spec.kind == "zero":
        return np.zeros((n, n), dtype=complex)
    if spec.kind == "scalar_shift":
        return spec.a * np.eye(n, dtype=complex)
    if spec.kind == "two_atom":
        half = n // 2
        return np.diag(np.r_[np.full(half, spec.a), np.full(half, -spec.a)])
    if spec.kind == "jordan":
        return spec.a * np.eye(n, dtype=complex) + np.eye(n, k=1, dtype=complex)
    if spec.kind == "iid":
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(spec.seed)))
        scale = np.sqrt(spec.entry_variance / 2.0)
        return scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    # explicit
    M = read_matrix(spec.path)
    if M.shape != (n, n):
        raise ValueError("explicit deformation %s has shape %r, expected (%d, %d)"
                         % (spec.path, M.shape, n, n))
    return M


def sample_ginibre(n, master_seed, trial_index):
    """Draw ``H0`` for one trial: real and imaginary parts iid ``N(0, 1/(2n))``."""
    rng = trial_rng(master_seed, trial_index)
    scale = np.sqrt(0.5 / n)
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    X *= scale
    return GinibreDraw(n=n, master_seed=int(master_seed),
                       trial_index=int(trial_index), matrix=X)


def sample_deformed(spec, master_seed, trial_index, A0=None):
    """``A0 + H0`` for one trial.

    Pass a pre-realized `A0` to skip rebuilding the deformation on every
    trial; it must match ``spec.n``.
    """
    if A0 is None:
        A0 = realize_deformation(spec)
    elif A0.shape != (spec.n, spec.n):
        raise ValueError("A0 has shape %r but spec.n = %d" % (A0.shape, spec.n))
    return A0 + sample_ginibre(spec.n, master_seed, trial_index).matrix
