"""Spectral statistics: counting function, clusters, motifs, extrapolation,
and symmetry classification of eigenspaces."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .symmetry import (
    CLASS_ORDER,
    IRREP_CHARACTERS,
    SymmetryAction,
    class_average_characters,
)


@dataclass
class CountingData:
    """Eigenvalue counting function and its comparison to the Weyl term.

    N(t) counts eigenvalues <= t (so N(0) >= 1); D(t) = N(t) - (A/4pi) t;
    A(t) = (1/t) * integral of D over [0, t], evaluated in closed form.
    """

    eigenvalues: np.ndarray
    area: float

    def __post_init__(self):
        self.eigenvalues = np.sort(np.asarray(self.eigenvalues, dtype=float))
        self.weyl_slope = self.area / (4 * math.pi)

    def counting(self, t):
        t = np.asarray(t, dtype=float)
        return np.searchsorted(self.eigenvalues, t, side="right").astype(float)

    def difference(self, t):
        return self.counting(t) - self.weyl_slope * np.asarray(t, dtype=float)

    def average_difference(self, t):
        """(1/t) * int_0^t D(s) ds; exact since N is a step function."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t_arr <= 0):
            raise ValueError("average difference requires t > 0")
        lam = self.eigenvalues
        out = np.empty_like(t_arr)
        for i, ti in enumerate(t_arr):
            below = lam[lam <= ti]
            integral_N = float(np.sum(ti - below))
            out[i] = (integral_N - self.weyl_slope * ti**2 / 2) / ti
        return out if np.ndim(t) else float(out[0])

    def average_difference_by_intervals(self, t: float) -> float:
        """Same integral accumulated interval by interval (cross-check)."""
        if t <= 0:
            raise ValueError("average difference requires t > 0")
        lam = self.eigenvalues
        total = 0.0
        prev = 0.0
        count = 0
        for lam_j in lam:
            if lam_j > t:
                break
            total += count * (lam_j - prev)
            prev = lam_j
            count += 1
        total += count * (t - prev)
        total -= self.weyl_slope * t**2 / 2
        return total / t


def counting_function(eigenvalues, area: float) -> CountingData:
    return CountingData(np.asarray(eigenvalues, dtype=float), float(area))


@dataclass
class Cluster:
    start: int
    end: int  # inclusive
    mean: float
    multiplicity: int
    irrep: str | None = None
    flagged: bool = False


@dataclass
class ClusterSet:
    clusters: list[Cluster]
    rel_tol: float

    def multiplicities(self) -> list[int]:
        return [c.multiplicity for c in self.clusters]

    def flagged(self) -> list[Cluster]:
        return [c for c in self.clusters if c.flagged]

    def fractions(self, upto: int | None = None, weighted: bool = True) -> dict[int, float]:
        """Distribution of multiplicities over the first ``upto`` clusters.

        Weighted fractions count eigenvalues (an eigenvalue "has"
        multiplicity k when its cluster does); these approach the squared
        irrep dimensions over the group order.  Unweighted counts clusters.
        """
        mults = self.multiplicities()[: upto if upto else None]
        if weighted:
            total = sum(mults)
            return {k: sum(x for x in mults if x == k) / total for k in sorted(set(mults))}
        n = len(mults)
        return {k: mults.count(k) / n for k in sorted(set(mults))}


def cluster_multiplicities(eigenvalues, rel_tol: float = 1e-4) -> ClusterSet:
    """Greedy gap clustering: join while the gap is <= rel_tol * max(1, lam).

    Clusters wider than multiplicity 3 are flagged (no symmetry of this
    surface forces them), not dropped.
    """
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    lam = np.sort(np.asarray(eigenvalues, dtype=float))
    clusters: list[Cluster] = []
    start = 0
    for i in range(1, len(lam) + 1):
        if i == len(lam) or lam[i] - lam[i - 1] > rel_tol * max(1.0, abs(lam[i])):
            mult = i - start
            clusters.append(
                Cluster(
                    start=start,
                    end=i - 1,
                    mean=float(np.mean(lam[start:i])),
                    multiplicity=mult,
                    flagged=mult > 3,
                )
            )
            start = i
    return ClusterSet(clusters, rel_tol)


def find_motif(clusters: ClusterSet | list[int], motif=(3, 3, 1, 1, 3),
               starts: list[int] | None = None) -> list[int]:
    """Eigenvalue indices where consecutive cluster multiplicities match.

    Accepts a ClusterSet or a bare multiplicity sequence (then ``starts``
    may give the first eigenvalue index of each cluster; defaults to the
    cumulative sums).
    """
    if isinstance(clusters, ClusterSet):
        mults = clusters.multiplicities()
        first = [c.start for c in clusters.clusters]
    else:
        mults = list(clusters)
        if starts is not None:
            first = list(starts)
        else:
            first = list(np.concatenate([[0], np.cumsum(mults)[:-1]]).astype(int))
    k = len(motif)
    hits = []
    for i in range(len(mults) - k + 1):
        if tuple(mults[i : i + k]) == tuple(motif):
            hits.append(first[i])
    return hits


@dataclass
class SequenceFit:
    """Geometric-convergence fit lam(m) = limit + coeff * ratio**m."""

    levels: tuple[int, ...]
    values: tuple[float, ...]
    limit: float | None
    coeff: float = 0.0
    ratio: float = 0.0
    residual: float = float("nan")
    status: str = "ok"

    def model(self, m: float) -> float:
        if self.limit is None:
            raise ValueError(f"no fit available ({self.status})")
        return self.limit + self.coeff * self.ratio ** (m - self.levels[0])


def _aitken(values) -> tuple[float, float, float]:
    """Limit, coefficient and ratio from the last three values."""
    y0, y1, y2 = values[-3:]
    d1, d2 = y1 - y0, y2 - y1
    if d1 == 0.0 and d2 == 0.0:
        return y2, 0.0, 0.0
    denom = d2 - d1
    if denom == 0.0:
        raise ZeroDivisionError("pure arithmetic progression does not converge")
    limit = y2 - d2 * d2 / denom
    ratio = d2 / d1 if d1 != 0 else 0.0
    coeff = y2 - limit
    return limit, coeff, ratio


def fit_geometric(levels, values, mode: str = "auto") -> SequenceFit:
    """Fit the exponential model to one eigenvalue-versus-level sequence.

    With exactly three points (or mode="aitken") this is the classical
    delta-squared formula on the last three values; with more points and
    mode "auto"/"lsq" a least-squares fit of (limit, coeff, ratio) seeded
    from the last three.  Non-monotone or diverging input is reported.
    """
    levels = tuple(int(m) for m in levels)
    values = tuple(float(v) for v in values)
    if len(levels) != len(values) or len(values) < 3:
        raise ValueError("need at least three matched (level, value) pairs")
    diffs = np.diff(values)
    if np.any(diffs > 0) and np.any(diffs < 0):
        return SequenceFit(levels, values, None, status="non-monotone")

    try:
        limit, coeff, ratio = _aitken(values)
    except ZeroDivisionError:
        return SequenceFit(levels, values, None, status="diverging")
    if not (0.0 <= abs(ratio) < 1.0):
        return SequenceFit(levels, values, None, status="diverging")

    if mode == "aitken" or (mode == "auto" and len(values) == 3) or coeff == 0.0:
        fit = SequenceFit(levels, values, limit, coeff, ratio)
    else:
        from scipy.optimize import least_squares

        m0 = levels[0]
        x = np.array(levels, dtype=float) - m0

        def resid(p):
            lim, c, r = p
            return lim + c * r**x - np.array(values)

        # seed from the delta-squared estimate, coefficient moved to m0
        r0 = min(max(abs(ratio), 1e-6), 0.99)
        c0 = coeff / r0 ** (levels[-1] - m0)
        sol = least_squares(resid, x0=[limit, c0, r0],
                            bounds=([-np.inf, -np.inf, 0.0], [np.inf, np.inf, 0.999]))
        lim, c, r = sol.x
        fit = SequenceFit(levels, values, float(lim), float(c), float(r))

    preds = [fit.model(m) for m in levels]
    fit.residual = float(np.max(np.abs(np.array(preds) - np.array(values))))
    return fit


@dataclass
class RangeFit:
    start: int
    end: int
    per_level: dict[int, float]
    fit: SequenceFit


def extrapolate(levels: list[tuple[int, list]], rel_tol: float = 1e-4,
                mode: str = "auto") -> list[RangeFit]:
    """Cross-level extrapolation of matched eigenvalue clusters.

    ``levels`` is a list of (level, eigenvalues).  Each level is clustered
    and clusters are aligned by identical (start, end) index ranges;
    ranges that do not appear at every level are skipped with a
    "misaligned" status entry.
    """
    if len(levels) < 3:
        raise ValueError("need at least three levels to extrapolate")
    levels = sorted(levels, key=lambda t: t[0])
    per_level_clusters = {
        m: cluster_multiplicities(vals, rel_tol) for m, vals in levels
    }
    ms = [m for m, _ in levels]
    base = per_level_clusters[ms[0]]
    out: list[RangeFit] = []
    for c in base.clusters:
        rng = (c.start, c.end)
        values = {}
        for m in ms:
            match = next(
                (k for k in per_level_clusters[m].clusters
                 if (k.start, k.end) == rng),
                None,
            )
            if match is None:
                break
            values[m] = match.mean
        if len(values) != len(ms):
            out.append(RangeFit(c.start, c.end, values,
                                SequenceFit(tuple(ms), (), None, status="misaligned")))
            continue
        fit = fit_geometric(ms, [values[m] for m in ms], mode=mode)
        out.append(RangeFit(c.start, c.end, values, fit))
    return out


def classify_eigenspace(eigenvectors: np.ndarray, action: SymmetryAction,
                        mass, tol: float = 1e-3) -> str | None:
    """Irreducible-representation label of one eigenspace, or None.

    Computes the trace of the permutation action projected onto the
    eigenspace per conjugacy class and matches it against the character
    table; both degree-1 and both degree-3 representations are separated.
    """
    V = np.asarray(eigenvectors)
    if V.ndim == 1:
        V = V[:, None]
    MV = mass @ V
    traces = np.empty(len(action.matrices))
    for gi in range(len(action.matrices)):
        perm = action.permutations[gi]
        # action on functions: (g . v)[perm[i]] = v[i]
        PV = np.empty_like(V)
        PV[perm, :] = V
        traces[gi] = float(np.trace(MV.T @ PV))
    chars = class_average_characters(action, traces)
    vec = np.array([chars[c] for c in CLASS_ORDER])
    for name, ref in IRREP_CHARACTERS.items():
        if np.max(np.abs(vec - np.array(ref, dtype=float))) <= tol:
            return name
    return None


def classify_spectrum(clusters: ClusterSet, eigenvectors: np.ndarray,
                      action: SymmetryAction, mass, tol: float = 1e-3) -> ClusterSet:
    """Label every cluster in place and return the same ClusterSet."""
    for c in clusters.clusters:
        if c.end >= eigenvectors.shape[1]:
            continue
        c.irrep = classify_eigenspace(
            eigenvectors[:, c.start : c.end + 1], action, mass, tol
        )
    return clusters


@dataclass
class NetFunction:
    """Eigenfunction sampled at the corners of every developed triangle."""

    triangles_xy: np.ndarray  # (F, 3, 2)
    values: np.ndarray  # (F, 3)
    face_of: np.ndarray


def export_eigenfunction(mesh, eigenvector: np.ndarray) -> NetFunction:
    """Per-corner values on the development; glued copies agree exactly."""
    vals = np.asarray(eigenvector)[mesh.tris]
    return NetFunction(mesh.xy.copy(), vals, mesh.face_of.copy())
