"""Compensated accumulation helpers shared by the series and quadrature code."""

from __future__ import annotations

import math

import numpy as np


def csum(values) -> float:
    """Correctly rounded sum of a 1-d sequence (Shewchuk via ``math.fsum``)."""
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())


class KahanAccumulator:
    """Elementwise Neumaier-compensated running sum over numpy arrays.

    Used where terms arrive one at a time (series evaluation, column-by-column
    matrix-vector products) so that ``math.fsum`` cannot be applied directly.
    """

    def __init__(self, shape=()):
        self.total = np.zeros(shape)
        self.comp = np.zeros(shape)

    def add(self, term) -> None:
        term = np.asarray(term, dtype=float)
        t = self.total + term
        big = np.abs(self.total) >= np.abs(term)
        self.comp += np.where(big, (self.total - t) + term, (term - t) + self.total)
        self.total = t

    @property
    def value(self):
        return self.total + self.comp


def cmatvec(matrix: np.ndarray, vector: np.ndarray) -> np.ndarray:
    """Row-wise compensated product ``matrix @ vector``.

    Columns are added pairwise with error-free TwoSum steps; the rounding
    errors of every step are collected and added back at the end.
    """
    matrix = np.asarray(matrix, dtype=float)
    vector = np.asarray(vector, dtype=float)
    terms = matrix * vector[np.newaxis, :]
    comp = np.zeros(matrix.shape[0])
    while terms.shape[1] > 1:
        if terms.shape[1] % 2:
            terms = np.hstack([terms, np.zeros((terms.shape[0], 1))])
        a, b = terms[:, 0::2], terms[:, 1::2]
        s = a + b
        bb = s - a
        comp += np.sum((a - (s - bb)) + (b - bb), axis=1)
        terms = s
    return terms[:, 0] + comp if terms.shape[1] else comp
