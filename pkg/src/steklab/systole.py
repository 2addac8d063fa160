"""Shortest noncontractible edge loops on closed triangulated surfaces.

For each basepoint ``v`` the greedy homotopy basis of Erickson and
Whittlesey is built: a shortest-path tree ``T`` rooted at ``v``, a
maximum-weight spanning tree of the dual graph on the edges not in ``T``
(weighted by the length of the loop each edge closes), and the leftover
edges. The shortest leftover loop is the shortest noncontractible loop
based at ``v``; minimizing over basepoints gives the edge-graph systole.
"""

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import dijkstra, minimum_spanning_tree

__all__ = ["edge_systole", "euler_characteristic"]


def euler_characteristic(faces):
    faces = np.asarray(faces)
    edges = np.unique(np.sort(np.concatenate(
        [faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [0, 2]]]), axis=1), axis=0)
    return len(np.unique(faces)) - len(edges) + len(faces)


class _Surface:
    def __init__(self, vertices, faces):
        faces = np.asarray(faces, dtype=np.int64)
        self.faces = faces
        self.nv = int(faces.max()) + 1
        pairs = np.sort(np.concatenate(
            [faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [0, 2]]]), axis=1)
        owner = np.tile(np.arange(len(faces)), 3)
        edges, inv = np.unique(pairs, axis=0, return_inverse=True)
        inv = np.asarray(inv).ravel()
        self.edges = edges
        self.length = np.linalg.norm(
            vertices[edges[:, 0]] - vertices[edges[:, 1]], axis=1)
        ne = len(edges)
        # the two faces on either side of each edge
        order = np.argsort(inv, kind="stable")
        f_sorted = owner[order]
        counts = np.bincount(inv, minlength=ne)
        if np.any(counts != 2):
            raise ValueError("surface is not closed")
        self.dual = f_sorted.reshape(ne, 2)
        self.graph = sparse.csr_matrix(
            (np.concatenate([self.length, self.length]),
             (np.concatenate([edges[:, 0], edges[:, 1]]),
              np.concatenate([edges[:, 1], edges[:, 0]]))),
            shape=(self.nv, self.nv))
        # edge id lookup for tree edges
        self.edge_id = sparse.csr_matrix(
            (np.concatenate([np.arange(ne), np.arange(ne)]) + 1,
             (np.concatenate([edges[:, 0], edges[:, 1]]),
              np.concatenate([edges[:, 1], edges[:, 0]]))),
            shape=(self.nv, self.nv))
        nf = len(faces)
        key = np.sort(self.dual, axis=1)
        self.simple_dual = len(np.unique(key, axis=0)) == ne
        self.nf = nf
        if self.simple_dual:
            self.dual_id = sparse.csr_matrix(
                (np.concatenate([np.arange(ne), np.arange(ne)]) + 1,
                 (np.concatenate([self.dual[:, 0], self.dual[:, 1]]),
                  np.concatenate([self.dual[:, 1], self.dual[:, 0]]))),
                shape=(nf, nf))

    def loop_at(self, v):
        dist, pred = dijkstra(self.graph, directed=False, indices=v,
                              return_predecessors=True)
        nodes = np.flatnonzero(pred >= 0)
        tree = np.asarray(self.edge_id[nodes, pred[nodes]]).ravel() - 1
        in_tree = np.zeros(len(self.edges), dtype=bool)
        in_tree[tree] = True
        rest = np.flatnonzero(~in_tree)
        w = dist[self.edges[rest, 0]] + self.length[rest] + dist[self.edges[rest, 1]]
        cotree = self._max_dual_tree(rest, w)
        keep = np.ones(len(rest), dtype=bool)
        keep[cotree] = False
        if not keep.any():
            return np.inf
        return float(w[keep].min())

    def _max_dual_tree(self, rest, w):
        """Positions (into ``rest``) of a maximum-weight dual spanning tree."""
        f = self.dual[rest]
        if self.simple_dual:
            big = w.max() + 1.0
            M = sparse.coo_matrix((big - w, (f[:, 0], f[:, 1])),
                                  shape=(self.nf, self.nf)).tocsr()
            T = minimum_spanning_tree(M).tocoo()
            eids = np.asarray(self.dual_id[T.row, T.col]).ravel() - 1
            pos_of = np.full(len(self.edges), -1, dtype=np.int64)
            pos_of[rest] = np.arange(len(rest))
            return pos_of[eids]
        # Kruskal with union-find when two faces share several edges
        parent = np.arange(self.nf)

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        picked = []
        for pos in np.argsort(-w, kind="stable"):
            a, b = find(f[pos, 0]), find(f[pos, 1])
            if a != b:
                parent[a] = b
                picked.append(pos)
        return np.array(picked, dtype=np.int64)


def edge_systole(vertices, faces, basepoints=None):
    """Length of the shortest noncontractible closed edge path.

    Returns ``inf`` for spheres (no noncontractible loops).
    """
    if euler_characteristic(faces) == 2:
        return np.inf
    surf = _Surface(np.asarray(vertices, dtype=float), faces)
    if basepoints is None:
        basepoints = np.unique(faces)
    return min(surf.loop_at(int(v)) for v in basepoints)
