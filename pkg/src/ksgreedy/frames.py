"""Equal-norm Parseval frames: generation, validation and (de)serialization.

Randomness comes from numpy's ``Generator`` over PCG64 seeded through
``SeedSequence(seed)``, so a given integer seed reproduces the same frame on
any platform shipping the same numpy bit generator.
"""
from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import AlphaMismatch, FrameFormatError, InvalidFrame

FRAME_TOL = 1e-9
ALPHA_MATCH_TOL = 1e-12

# one vector per row; the common squared norm is alpha
ALG1_CONSTANT = 221
ALG2_CONSTANT = 49


class GuaranteeRegime(str, enum.Enum):
    ALG1 = "Alg1Guaranteed"
    ALG2 = "Alg2Guaranteed"
    NONE = "NoGuarantee"

    def __str__(self):
        return self.value


def guarantee_regime(d: int, m: int) -> GuaranteeRegime:
    if m >= ALG1_CONSTANT * d * d:
        return GuaranteeRegime.ALG1
    if m >= ALG2_CONSTANT * d * d:
        return GuaranteeRegime.ALG2
    return GuaranteeRegime.NONE


@dataclass(frozen=True, eq=False)
class Frame:
    """m vectors in C^d stored as the rows of ``vectors`` (shape (m, d))."""

    vectors: np.ndarray
    alpha: float

    def __post_init__(self):
        v = np.array(self.vectors, dtype=np.complex128)
        if v.ndim != 2 or v.shape[0] == 0 or v.shape[1] == 0:
            raise FrameFormatError(f"vectors must be a non-empty (m, d) array, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise FrameFormatError("frame vectors must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "alpha", float(self.alpha))

    @classmethod
    def from_vectors(cls, vectors) -> "Frame":
        """Build a frame taking alpha as the mean squared norm."""
        v = np.asarray(vectors, dtype=np.complex128)
        if v.ndim == 1:
            v = v.reshape(-1, 1)
        alpha = float(np.mean(np.sum(np.abs(v) ** 2, axis=1)))
        return cls(v, alpha)

    @property
    def m(self) -> int:
        return self.vectors.shape[0]

    @property
    def d(self) -> int:
        return self.vectors.shape[1]

    @property
    def regime(self) -> GuaranteeRegime:
        return guarantee_regime(self.d, self.m)

    def partial_sum(self, indices) -> np.ndarray:
        """Sum of v_i v_i* over the given indices, as a dense array."""
        idx = np.asarray(list(indices), dtype=np.intp)
        sub = self.vectors[idx]
        return sub.T @ sub.conj()

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented
        return self.alpha == other.alpha and np.array_equal(self.vectors, other.vectors)

    def __hash__(self):
        return hash((self.alpha, self.vectors.tobytes()))

    def __repr__(self):
        return f"Frame(d={self.d}, m={self.m}, alpha={self.alpha!r})"


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    tolerance: float
    parseval_error: float
    norm_error: float
    count_error: float
    m_even: bool
    regime: GuaranteeRegime

    def failures(self):
        out = []
        if not self.parseval_error <= self.tolerance:
            out.append(f"||sum v v* - I||_F = {self.parseval_error:.3e}")
        if not self.norm_error <= self.tolerance:
            out.append(f"max |‖v_i‖² - alpha| = {self.norm_error:.3e}")
        if not self.count_error <= self.tolerance:
            out.append(f"|m alpha - d| = {self.count_error:.3e}")
        return out

    def to_dict(self):
        return {
            "passed": self.passed,
            "tolerance": self.tolerance,
            "parseval_error": self.parseval_error,
            "norm_error": self.norm_error,
            "count_error": self.count_error,
            "m_even": self.m_even,
            "regime": self.regime.value,
        }


def validate_frame(f: Frame, tol: float = FRAME_TOL) -> ValidationReport:
    """Measure how far ``f`` is from an equal-norm Parseval frame. Never raises."""
    gram = f.vectors.T @ f.vectors.conj()
    parseval = float(np.linalg.norm(gram - np.eye(f.d)))
    norms = np.sum(np.abs(f.vectors) ** 2, axis=1)
    norm_err = float(np.max(np.abs(norms - f.alpha)))
    count_err = abs(f.m * f.alpha - f.d)
    passed = parseval <= tol and norm_err <= tol and count_err <= tol
    return ValidationReport(
        passed=bool(passed),
        tolerance=tol,
        parseval_error=parseval,
        norm_error=norm_err,
        count_error=count_err,
        m_even=f.m % 2 == 0,
        regime=f.regime,
    )


def require_valid(f: Frame, tol: float = FRAME_TOL) -> ValidationReport:
    report = validate_frame(f, tol)
    if not report.passed:
        raise InvalidFrame("invalid frame: " + "; ".join(report.failures()))
    return report


def harmonic_frame(d: int, m: int, rows=None) -> Frame:
    """Rows ``rows`` of the m-point DFT matrix, scaled by 1/sqrt(m).

    Vector i has entries exp(2 pi i * i * r_k / m) / sqrt(m).  Defaults to the
    first d rows.
    """
    if not 1 <= d <= m:
        raise ValueError(f"harmonic frame needs 1 <= d <= m, got d={d}, m={m}")
    rows = list(range(d)) if rows is None else [int(r) for r in rows]
    if len(rows) != d:
        raise ValueError(f"need exactly d={d} rows, got {len(rows)}")
    if len(set(rows)) != d:
        raise ValueError(f"duplicate rows in selection {rows}")
    if any(not 0 <= r < m for r in rows):
        raise ValueError(f"rows must lie in [0, {m})")
    i = np.arange(m)[:, None]
    r = np.asarray(rows)[None, :]
    # reduce the exponent mod m before scaling, to keep the angle small
    angle = 2.0 * np.pi * ((i * r) % m) / m
    vectors = np.exp(1j * angle) / math.sqrt(m)
    return Frame(vectors, d / m)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Gaussian, R diagonal made positive."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = r.diagonal()
    return q * (diag / np.abs(diag))


def rotate_frame(f: Frame, seed: int) -> Frame:
    """Apply one seeded random unitary to every vector."""
    U = random_unitary(f.d, np.random.default_rng(seed))
    return Frame(f.vectors @ U.T, f.alpha)


def random_phase_frame(f: Frame, seed: int) -> Frame:
    """Multiply each vector by its own seeded unit phase."""
    theta = np.random.default_rng(seed).uniform(0.0, 2.0 * np.pi, size=f.m)
    return Frame(f.vectors * np.exp(1j * theta)[:, None], f.alpha)


def direct_sum(f1: Frame, f2: Frame) -> Frame:
    """Block-diagonal composition of two frames with the same alpha."""
    if abs(f1.alpha - f2.alpha) > ALPHA_MATCH_TOL:
        raise AlphaMismatch(f"alpha mismatch: {f1.alpha!r} vs {f2.alpha!r}")
    top = np.hstack([f1.vectors, np.zeros((f1.m, f2.d), dtype=np.complex128)])
    bottom = np.hstack([np.zeros((f2.m, f1.d), dtype=np.complex128), f2.vectors])
    return Frame(np.vstack([top, bottom]), f1.alpha)


def frame_to_dict(f: Frame) -> dict:
    return {
        "d": f.d,
        "m": f.m,
        "alpha": f.alpha,
        "vectors": [[[float(z.real), float(z.imag)] for z in row] for row in f.vectors],
    }


def serialize_frame(f: Frame) -> bytes:
    """Canonical compact JSON encoding; floats use shortest round-trip repr."""
    return (json.dumps(frame_to_dict(f), separators=(",", ":"), allow_nan=False) + "\n").encode("utf-8")


def frame_fingerprint(f: Frame) -> str:
    return hashlib.sha256(serialize_frame(f)).hexdigest()


def frame_from_dict(doc, validate=True, tol=FRAME_TOL) -> Frame:
    if not isinstance(doc, dict):
        raise FrameFormatError("frame document must be an object")
    for key in ("d", "m", "alpha", "vectors"):
        if key not in doc:
            raise FrameFormatError(f"frame document missing field {key!r}")
    d, m, alpha, rows = doc["d"], doc["m"], doc["alpha"], doc["vectors"]
    if not (isinstance(d, int) and isinstance(m, int)) or isinstance(d, bool) or isinstance(m, bool):
        raise FrameFormatError("fields 'd' and 'm' must be integers")
    if not isinstance(alpha, (int, float)) or isinstance(alpha, bool):
        raise FrameFormatError("field 'alpha' must be a number")
    if not isinstance(rows, list) or len(rows) != m:
        got = len(rows) if isinstance(rows, list) else type(rows).__name__
        raise FrameFormatError(f"header says m={m} but document holds {got} vectors")
    vectors = np.empty((m, d), dtype=np.complex128)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != d:
            raise FrameFormatError(f"vector {i} does not have d={d} entries")
        for k, pair in enumerate(row):
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)
            ):
                raise FrameFormatError(f"vector {i} entry {k} is not a [re, im] pair")
            vectors[i, k] = complex(pair[0], pair[1])
    f = Frame(vectors, alpha)
    if validate:
        require_valid(f, tol)
    return f


def deserialize_frame(data, validate=True, tol=FRAME_TOL) -> Frame:
    """Parse a frame document (bytes or str) and re-check its invariants."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise FrameFormatError(f"malformed frame document: {exc}") from exc
    return frame_from_dict(doc, validate=validate, tol=tol)


def load_frame(path, validate=True) -> Frame:
    with open(path, "rb") as fh:
        return deserialize_frame(fh.read(), validate=validate)


def save_frame(f: Frame, path) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_frame(f))
