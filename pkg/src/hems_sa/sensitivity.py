"""Saltelli sampling design and first-, second- and total-order Sobol indices.

The design stacks ``N (2d + 2)`` rows: ``A``, ``B``, then ``A_B^(i)`` (``A``
with column ``i`` taken from ``B``) for every input, then ``B_A^(i)``
(``B`` with column ``i`` taken from ``A``). Estimators:

* first order, ``S_i = mean(f_B * (f_AB_i - f_A)) / V``
* total order (Jansen), ``S_Ti = mean((f_A - f_AB_i)**2) / (2 V)``
* closed second order, ``S^c_ij = (mean(f_BA_i * f_AB_j) - mean(f_A) mean(f_B)) / V``,
  reported as the pure interaction ``S^c_ij - S_i - S_j``.

Estimates are not clamped, so small negative values are expected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_unit_samples
from .exceptions import DataError, DimensionUnsupported, VarianceZero
from .sobol import MAX_DIMENSION, sobol_points

VARIANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class SaltelliDesign:
    d: int
    n: int
    rows: np.ndarray = field(repr=False)

    def block(self, k: int) -> np.ndarray:
        return self.rows[k * self.n:(k + 1) * self.n]

    @property
    def A(self) -> np.ndarray:
        return self.block(0)

    @property
    def B(self) -> np.ndarray:
        return self.block(1)

    def AB(self, i: int) -> np.ndarray:
        """``A`` with column ``i`` (0-based) replaced by ``B``'s."""
        return self.block(2 + i)

    def BA(self, i: int) -> np.ndarray:
        return self.block(2 + self.d + i)

    def __len__(self):
        return self.rows.shape[0]


def design_size(d: int, n: int) -> int:
    return n * (2 * d + 2)


def saltelli_sample(d: int, n: int, skip: int = 1) -> SaltelliDesign:
    """Build the ``n (2d + 2)`` x ``d`` design from a 2d-dimensional Sobol draw."""
    if d < 2 or n < 2:
        raise ValueError("saltelli_sample needs d >= 2 and n >= 2")
    if 2 * d > MAX_DIMENSION:
        raise DimensionUnsupported(f"2d = {2 * d} exceeds {MAX_DIMENSION} Sobol dimensions")
    base = sobol_points(2 * d, n, skip)
    A, B = base[:, :d], base[:, d:]

    rows = np.empty((design_size(d, n), d))
    rows[:n] = A
    rows[n:2 * n] = B
    for i in range(d):
        ab = rows[(2 + i) * n:(3 + i) * n]
        ab[:] = A
        ab[:, i] = B[:, i]
        ba = rows[(2 + d + i) * n:(3 + d + i) * n]
        ba[:] = B
        ba[:, i] = A[:, i]
    rows.setflags(write=False)
    return SaltelliDesign(d=d, n=n, rows=rows)


@dataclass(frozen=True)
class SensitivityResult:
    labels: tuple[str, ...]
    first_order: np.ndarray
    total_order: np.ndarray
    second_order: np.ndarray  # pure interaction, symmetric, zero diagonal
    output_variance: float
    output_mean: float

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "first_order": self.first_order.tolist(),
            "total_order": self.total_order.tolist(),
            "second_order": self.second_order.tolist(),
            "output_variance": self.output_variance,
            "output_mean": self.output_mean,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data: dict) -> "SensitivityResult":
        return cls(
            labels=tuple(data["labels"]),
            first_order=np.asarray(data["first_order"], dtype=float),
            total_order=np.asarray(data["total_order"], dtype=float),
            second_order=np.asarray(data["second_order"], dtype=float),
            output_variance=float(data["output_variance"]),
            output_mean=float(data["output_mean"]),
        )


def estimate_indices(f_A, f_B, f_AB, f_BA, labels=None) -> SensitivityResult:
    """Sobol indices from model outputs on each design block.

    ``f_AB`` and ``f_BA`` are sequences of d arrays, one per input.
    """
    f_A = np.asarray(f_A, dtype=np.float64)
    f_B = np.asarray(f_B, dtype=np.float64)
    f_AB = np.asarray(f_AB, dtype=np.float64)
    f_BA = np.asarray(f_BA, dtype=np.float64)
    N = f_A.shape[0]
    d = f_AB.shape[0]
    if N < 2 or f_B.shape != (N,) or f_AB.shape != (d, N) or f_BA.shape != (d, N):
        raise DataError("every block must hold the same number (>= 2) of outputs")
    if labels is None:
        labels = tuple(f"x{i + 1}" for i in range(d))
    elif len(labels) != d:
        raise DataError(f"{len(labels)} labels for {d} inputs")

    pooled = np.concatenate([f_A, f_B])
    mean = float(pooled.mean())
    var = float(pooled.var(ddof=1))
    if not var > VARIANCE_FLOOR * mean * mean:
        raise VarianceZero(f"output variance {var:.3g} is negligible (mean {mean:.6g})")

    first = np.mean(f_B * (f_AB - f_A), axis=1) / var
    total = 0.5 * np.mean((f_A - f_AB) ** 2, axis=1) / var

    mean_sq = float(f_A.mean()) * float(f_B.mean())
    second = np.zeros((d, d))
    for i in range(d):
        for j in range(i + 1, d):
            closed = (float(np.mean(f_BA[i] * f_AB[j])) - mean_sq) / var
            second[i, j] = second[j, i] = closed - first[i] - first[j]

    return SensitivityResult(tuple(labels), first, total, second, var, mean)


def split_outputs(y, d: int, n: int):
    """Split outputs in design-row order into (f_A, f_B, f_AB, f_BA)."""
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.size != design_size(d, n):
        raise DataError(f"expected {design_size(d, n)} outputs, got {y.size}")
    blocks = y.reshape(2 * d + 2, n)
    return blocks[0], blocks[1], blocks[2:2 + d], blocks[2 + d:]


def analyze(design: SaltelliDesign, y, labels=None) -> SensitivityResult:
    return estimate_indices(*split_outputs(y, design.d, design.n), labels=labels)


# --- benchmark models -------------------------------------------------------

def linear_model(X):
    """``x1 + 2 x2`` on the unit square."""
    X = np.asarray(X)
    return X[:, 0] + 2.0 * X[:, 1]


def ishigami(X, a=7.0, b=0.1):
    """Ishigami function with inputs given on the unit cube (rescaled to [-pi, pi])."""
    Z = (2.0 * np.asarray(X) - 1.0) * np.pi
    return np.sin(Z[:, 0]) + a * np.sin(Z[:, 1]) ** 2 + b * Z[:, 2] ** 4 * np.sin(Z[:, 0])


def ishigami_indices(a=7.0, b=0.1) -> dict[str, np.ndarray]:
    """Analytic first- and total-order indices of the Ishigami function."""
    pi4, pi8 = np.pi ** 4, np.pi ** 8
    v1 = 0.5 * (1.0 + b * pi4 / 5.0) ** 2
    v2 = a * a / 8.0
    v13 = b * b * pi8 * (1.0 / 18.0 - 1.0 / 50.0)
    v = v1 + v2 + v13
    return {
        "first_order": np.array([v1, v2, 0.0]) / v,
        "total_order": np.array([v1 + v13, v2, v13]) / v,
    }


class SobolAnalyzer(BaseEstimator):
    """Estimator-style front end: ``sample`` a design, evaluate it, ``fit`` the outputs.

    Parameters
    ----------
    n_base : int
        Base sample count N; the design has ``N (2d + 2)`` rows.
    skip : int
        Leading Sobol points to drop (1 removes the origin).
    labels : sequence of str, optional
        Input names used in the fitted result.
    """

    def __init__(self, n_base=1024, skip=1, labels=None):
        self.n_base = n_base
        self.skip = skip
        self.labels = labels

    def sample(self, d: int) -> np.ndarray:
        return saltelli_sample(d, self.n_base, self.skip).rows

    def fit(self, X, y):
        X = check_unit_samples(X)
        d = X.shape[1]
        n, rem = divmod(X.shape[0], 2 * d + 2)
        if rem or n < 2:
            raise DataError(f"{X.shape[0]} rows is not a Saltelli design for d={d}")
        blocks = X.reshape(2 * d + 2, n, d)
        A, B = blocks[0], blocks[1]
        for i in range(d):
            expected_ab = A.copy()
            expected_ab[:, i] = B[:, i]
            expected_ba = B.copy()
            expected_ba[:, i] = A[:, i]
            if not (np.array_equal(blocks[2 + i], expected_ab) and np.array_equal(blocks[2 + d + i], expected_ba)):
                raise DataError(f"block for input {i} does not follow the Saltelli layout")
        self.result_ = estimate_indices(*split_outputs(y, d, n), labels=self.labels)
        self.n_features_in_ = d
        self.first_order_ = self.result_.first_order
        self.total_order_ = self.result_.total_order
        self.second_order_ = self.result_.second_order
        return self

    def transform(self, X=None):
        """Stack (first, total) indices as a (d, 2) array."""
        check_is_fitted(self, "result_")
        return np.column_stack([self.first_order_, self.total_order_])
