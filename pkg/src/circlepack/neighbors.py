"""Per-circle adjacency lists and energy/gradient evaluation.

Each circle keeps a list of the circles (and optionally the container wall)
close enough to overlap soon. Evaluating energy and gradient over the listed
terms only makes the cost linear in the total list length instead of
quadratic in n; the lists are rebuilt periodically by the optimizer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Energy, Layout, Rng, all_pair_indices, evaluate_pairs

# Boundary-to-boundary distances at or below these count as adjacent.
DEFAULT_CONTAINER_MARGIN = 1.0
DEFAULT_PAIR_MARGIN = 1.0

_COINCIDENT_JITTER = 1e-8


@dataclass(eq=False)
class NeighborIndex:
    """Adjacency snapshot of a layout.

    ``pair_i``/``pair_j`` enumerate the adjacent unordered pairs (i < j,
    lexicographic); ``container_ids`` lists circles close to the wall. The
    pair relation is symmetric and self-free by construction. ``age`` counts
    optimizer iterations since the snapshot was taken; rebuilds produce a new
    index rather than mutating the arrays in place.
    """

    n: int
    pair_i: np.ndarray
    pair_j: np.ndarray
    container_ids: np.ndarray
    container_margin: float
    pair_margin: float
    age: int = 0
    _lists: list | None = field(default=None, repr=False)

    @property
    def lists(self) -> list[list[int]]:
        """Per-circle neighbor ids (both directions of every pair)."""
        if self._lists is None:
            out: list[list[int]] = [[] for _ in range(self.n)]
            for i, j in zip(self.pair_i.tolist(), self.pair_j.tolist()):
                out[i].append(j)
                out[j].append(i)
            self._lists = out
        return self._lists

    @property
    def container_adjacent(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[self.container_ids] = True
        return mask

    def total_list_length(self) -> int:
        return 2 * int(self.pair_i.size)


def build_index(
    layout: Layout,
    container_margin: float = DEFAULT_CONTAINER_MARGIN,
    pair_margin: float = DEFAULT_PAIR_MARGIN,
) -> NeighborIndex:
    """Scan all pairs and wall distances, listing those within the margins."""
    if container_margin < 0 or pair_margin < 0:
        raise ValueError("adjacency margins must be nonnegative")
    return _build_index_raw(layout.centers, layout.radius, container_margin, pair_margin)


def _build_index_raw(centers, radius, container_margin, pair_margin) -> NeighborIndex:
    n = centers.shape[0]
    pair_i, pair_j = all_pair_indices(n)
    delta = centers[pair_i] - centers[pair_j]
    dist = np.hypot(delta[:, 0], delta[:, 1])
    keep = dist - 2.0 <= pair_margin
    rad = np.hypot(centers[:, 0], centers[:, 1])
    near_wall = rad + 1.0 - radius <= container_margin
    return NeighborIndex(
        n=n,
        pair_i=pair_i[keep],
        pair_j=pair_j[keep],
        container_ids=np.flatnonzero(near_wall),
        container_margin=container_margin,
        pair_margin=pair_margin,
    )


def full_index(n: int) -> NeighborIndex:
    """Index listing every pair and every container term (no restriction)."""
    pair_i, pair_j = all_pair_indices(n)
    return NeighborIndex(
        n=n,
        pair_i=pair_i,
        pair_j=pair_j,
        container_ids=np.arange(n),
        container_margin=np.inf,
        pair_margin=np.inf,
    )


def index_energy(centers: np.ndarray, radius: float, index: NeighborIndex) -> float:
    """Energy over the index's listed terms only (no gradient)."""
    total, _, _ = evaluate_pairs(centers, radius, index.pair_i, index.pair_j, index.container_ids)
    return total


def gradient_eval(
    centers: np.ndarray,
    radius: float,
    index: NeighborIndex,
    rng: Rng | None = None,
):
    """Energy and analytic gradient over the index's listed terms.

    Returns ``(total, max_pair_depth, max_container_depth, grad, centers)``
    with ``grad`` of shape (n, 2). Coincident centers make the pair gradient
    direction undefined; in that case one member is nudged by 1e-8 in a
    random direction and the evaluation reruns on the nudged copy, which is
    returned so callers can adopt it.
    """
    pair_i, pair_j, cont = index.pair_i, index.pair_j, index.container_ids
    n = centers.shape[0]
    while True:
        if pair_i.size:
            delta = centers[pair_i] - centers[pair_j]
            dist = np.hypot(delta[:, 0], delta[:, 1])
            pdepth = np.maximum(2.0 - dist, 0.0)
            # active-only accumulation, matching geometry.evaluate_pairs
            d = pdepth[pdepth > 0.0]
            pair_term = 2.0 * float(np.dot(d, d))
            max_pair = float(pdepth.max())
        else:
            delta = dist = pdepth = None
            pair_term, max_pair = 0.0, 0.0
        if cont.size:
            pts = centers[cont]
            rad = np.hypot(pts[:, 0], pts[:, 1])
            cdepth = np.maximum(rad + 1.0 - radius, 0.0)
            c = cdepth[cdepth > 0.0]
            cont_term = float(np.dot(c, c))
            max_cont = float(cdepth.max())
        else:
            rad = cdepth = None
            cont_term, max_cont = 0.0, 0.0
        total = pair_term + cont_term

        if pdepth is not None and max_pair >= 2.0 and np.any(dist[pdepth > 0.0] == 0.0):
            centers = _nudge_coincident(centers, pair_i, pair_j, dist, rng)
            continue

        grad = np.zeros((n, 2))
        if pdepth is not None:
            active = pdepth > 0.0
            if np.any(active):
                ii = pair_i[active]
                jj = pair_j[active]
                # each pair appears twice in the energy, hence the factor 4
                coef = 4.0 * pdepth[active] / dist[active]
                push = coef[:, None] * delta[active]
                grad[:, 0] = np.bincount(jj, push[:, 0], minlength=n) - np.bincount(
                    ii, push[:, 0], minlength=n
                )
                grad[:, 1] = np.bincount(jj, push[:, 1], minlength=n) - np.bincount(
                    ii, push[:, 1], minlength=n
                )
        if cdepth is not None:
            active = cdepth > 0.0
            if np.any(active):
                ids = cont[active]
                # rad > 0 whenever the wall term is active, since radius > 0
                coef = 2.0 * cdepth[active] / rad[active]
                grad[ids] += coef[:, None] * centers[ids]
        return total, max_pair, max_cont, grad, centers


def _nudge_coincident(centers, pair_i, pair_j, dist, rng: Rng | None):
    if rng is None:
        rng = Rng(0)
    out = centers.copy()
    for k in np.flatnonzero(dist == 0.0):
        angle = 2.0 * np.pi * rng.random()
        out[pair_j[k]] = out[pair_j[k]] + _COINCIDENT_JITTER * np.array(
            [np.cos(angle), np.sin(angle)]
        )
    return out


def energy_gradient_full(layout: Layout, rng: Rng | None = None) -> tuple[Energy, np.ndarray]:
    """Exact energy and analytic gradient over all pairs and wall terms.

    The gradient comes back flattened as (dU/dx1, dU/dy1, ..., dU/dxn,
    dU/dyn). Terms with zero depth contribute exactly zero.
    """
    total, max_pair, max_cont, grad, _ = gradient_eval(
        layout.centers, layout.radius, full_index(layout.n), rng
    )
    energy = Energy(total=total, max_pair_depth=max_pair, max_container_depth=max_cont)
    return energy, grad.reshape(-1)


def energy_gradient_local(
    layout: Layout, index: NeighborIndex, rng: Rng | None = None
) -> tuple[Energy, np.ndarray]:
    """Like :func:`energy_gradient_full` but restricted to the index's lists.

    Sound immediately after a rebuild with the default margins: any
    overlapping term has boundary distance below zero and is therefore
    listed. Staleness beyond the optimizer's refresh period is the caller's
    contract violation.
    """
    total, max_pair, max_cont, grad, _ = gradient_eval(
        layout.centers, layout.radius, index, rng
    )
    energy = Energy(total=total, max_pair_depth=max_pair, max_container_depth=max_cont)
    return energy, grad.reshape(-1)
