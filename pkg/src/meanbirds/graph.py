"""Follower/friend graph construction and per-node network metrics.

Degrees and reciprocity use the directed graph; HITS, eigenvector,
closeness, clustering, and community detection run on the undirected view.
Iterative methods start from a uniform vector, renormalize to unit
Euclidean norm every sweep, and are deterministic. The graph is immutable
after build; per-node metrics parallelize over nodes, the global iterative
methods synchronize per sweep.
"""

import json
import random
from collections import deque
from dataclasses import dataclass, field, asdict

import numpy as np

TOL = 1e-8
MAX_ITER = 1000


class GraphError(ValueError):
    pass


@dataclass
class SocialGraph:
    nodes: list
    out_adj: dict
    in_adj: dict
    self_loops_dropped: int = 0
    _und: dict = field(default=None, repr=False)
    _index: dict = field(default=None, repr=False)

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_edges(self):
        return sum(len(v) for v in self.out_adj.values())

    def undirected(self):
        """Symmetrized adjacency (sets), derived once on demand."""
        if self._und is None:
            und = {v: set() for v in self.nodes}
            for u, outs in self.out_adj.items():
                for v in outs:
                    und[u].add(v)
                    und[v].add(u)
            self._und = und
        return self._und

    def index(self):
        if self._index is None:
            self._index = {v: i for i, v in enumerate(self.nodes)}
        return self._index

    def edge_arrays(self):
        """Directed edges as (src_idx, dst_idx) numpy arrays in sorted order."""
        idx = self.index()
        src, dst = [], []
        for u in self.nodes:
            for v in sorted(self.out_adj[u]):
                src.append(idx[u])
                dst.append(idx[v])
        return np.array(src, dtype=np.int64), np.array(dst, dtype=np.int64)


def build_graph(edges_path=None, edge_list=None):
    """Build a deduplicated directed graph from 'follower followee' lines."""
    pairs = []
    dropped = 0
    if edge_list is not None:
        raw = list(edge_list)
        for i, (a, b) in enumerate(raw, start=1):
            pairs.append((str(a), str(b)))
    else:
        with open(edges_path, encoding="utf-8") as f:
            for i, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                parts = line.split()
                if len(parts) != 2:
                    raise GraphError(f"malformed edge line {i}: {line.strip()!r}")
                pairs.append((parts[0], parts[1]))
    nodes = set()
    edges = set()
    for a, b in pairs:
        nodes.add(a)
        nodes.add(b)
        if a == b:
            dropped += 1
            continue
        edges.add((a, b))
    node_list = sorted(nodes)
    out_adj = {v: set() for v in node_list}
    in_adj = {v: set() for v in node_list}
    for a, b in edges:
        out_adj[a].add(b)
        in_adj[b].add(a)
    return SocialGraph(
        nodes=node_list, out_adj=out_adj, in_adj=in_adj, self_loops_dropped=dropped
    )


def reciprocity(graph, node):
    """Fraction of a node's incoming follow edges that are mutual."""
    if node not in graph.in_adj:
        raise GraphError(f"unknown node {node!r}")
    incoming = graph.in_adj[node]
    if not incoming:
        return 0.0
    mutual = sum(1 for v in incoming if v in graph.out_adj[node])
    return mutual / len(incoming)


def _unit(x):
    norm = np.linalg.norm(x)
    if norm == 0:
        return x
    return x / norm


def hits(graph, tol=TOL, max_iter=MAX_ITER):
    """Hub and authority scores by mutual-recursion power iteration.

    Returns (hub: dict, authority: dict, converged: bool). Both score
    vectors are unit Euclidean norm (all zeros for an edge-free graph).
    """
    n = graph.n_nodes
    if n == 0:
        raise GraphError("empty graph")
    src, dst = graph.edge_arrays()
    h = np.full(n, 1.0 / np.sqrt(n))
    a = np.zeros(n)
    converged = False
    for _ in range(max_iter):
        a_new = np.zeros(n)
        np.add.at(a_new, dst, h[src])
        a_new = _unit(a_new)
        h_new = np.zeros(n)
        np.add.at(h_new, src, a_new[dst])
        h_new = _unit(h_new)
        if np.max(np.abs(h_new - h)) < tol and np.max(np.abs(a_new - a)) < tol:
            h, a = h_new, a_new
            converged = True
            break
        h, a = h_new, a_new
    hub = {v: float(h[i]) for i, v in enumerate(graph.nodes)}
    auth = {v: float(a[i]) for i, v in enumerate(graph.nodes)}
    return hub, auth, converged


def eigenvector_centrality(graph, tol=TOL, max_iter=MAX_ITER):
    """Principal-eigenvector scores of the undirected adjacency.

    Power iteration with the shift x <- x + Ax (same eigenvectors, breaks
    the period-2 oscillation on bipartite components). Isolated nodes score
    exactly 0. Returns (scores: dict, converged: bool).
    """
    n = graph.n_nodes
    if n == 0:
        raise GraphError("empty graph")
    und = graph.undirected()
    idx = graph.index()
    src, dst = [], []
    for u in graph.nodes:
        for v in sorted(und[u]):
            src.append(idx[u])
            dst.append(idx[v])
    src = np.array(src, dtype=np.int64)
    dst = np.array(dst, dtype=np.int64)
    active = np.array([len(und[v]) > 0 for v in graph.nodes])
    x = np.where(active, 1.0, 0.0)
    if not active.any():
        return {v: 0.0 for v in graph.nodes}, True
    x = _unit(x)
    converged = False
    for _ in range(max_iter):
        x_new = x.copy()
        np.add.at(x_new, dst, x[src])
        x_new = _unit(x_new)
        if np.max(np.abs(x_new - x)) < tol:
            x = x_new
            converged = True
            break
        x = x_new
    return {v: float(x[i]) for i, v in enumerate(graph.nodes)}, converged


def _bfs_distances(und, start):
    dist = {start: 0}
    q = deque([start])
    while q:
        u = q.popleft()
        du = dist[u]
        for v in und[u]:
            if v not in dist:
                dist[v] = du + 1
                q.append(v)
    return dist


def closeness(graph, node):
    """Component-local closeness: (reachable - 1) / sum of distances."""
    und = graph.undirected()
    if node not in und:
        raise GraphError(f"unknown node {node!r}")
    dist = _bfs_distances(und, node)
    reachable = len(dist) - 1
    if reachable == 0:
        return 0.0
    return reachable / sum(dist.values())


def closeness_all(graph):
    """Closeness for every node.

    Uses dense boolean frontier expansion for small graphs (quadratic
    memory) and per-node BFS beyond that.
    """
    n = graph.n_nodes
    und = graph.undirected()
    if n == 0:
        return {}
    if n > 4000:
        return {v: closeness(graph, v) for v in graph.nodes}
    idx = graph.index()
    adj = np.zeros((n, n), dtype=bool)
    for u, nbrs in und.items():
        for v in nbrs:
            adj[idx[u], idx[v]] = True
    out = {}
    for v in graph.nodes:
        i = idx[v]
        visited = np.zeros(n, dtype=bool)
        visited[i] = True
        frontier = visited.copy()
        total = 0
        count = 0
        d = 0
        while frontier.any():
            d += 1
            nxt = adj[frontier].any(axis=0) & ~visited
            visited |= nxt
            c = int(nxt.sum())
            total += d * c
            count += c
            frontier = nxt
        out[v] = count / total if count else 0.0
    return out


def clustering_coefficient(graph, node):
    """2 * links among neighbors / (deg * (deg - 1)); 0 when deg < 2."""
    und = graph.undirected()
    if node not in und:
        raise GraphError(f"unknown node {node!r}")
    nbrs = und[node]
    deg = len(nbrs)
    if deg < 2:
        return 0.0
    links = 0
    for v in nbrs:
        links += sum(1 for w in und[v] if w in nbrs)
    links //= 2
    return 2.0 * links / (deg * (deg - 1))


# ---------------------------------------------------------------------------
# Louvain community detection
# ---------------------------------------------------------------------------

def modularity(graph, communities, resolution=1.0):
    """Standard undirected modularity of a node -> community assignment."""
    und = graph.undirected()
    two_m = sum(len(nbrs) for nbrs in und.values())
    if two_m == 0:
        return 0.0
    q = 0.0
    deg_sum = {}
    intra = {}
    for v, nbrs in und.items():
        c = communities[v]
        deg_sum[c] = deg_sum.get(c, 0) + len(nbrs)
        intra[c] = intra.get(c, 0) + sum(1 for w in nbrs if communities[w] == c)
    for c in deg_sum:
        q += intra.get(c, 0) / two_m - resolution * (deg_sum[c] / two_m) ** 2
    return q


def _louvain_level(adj, weights, loops, order, resolution):
    """One local-move phase on a weighted graph; returns node -> community."""
    two_m = sum(sum(w.values()) for w in weights.values()) + 2 * sum(loops.values())
    if two_m == 0:
        return {v: v for v in adj}
    degree = {
        v: sum(weights[v].values()) + 2 * loops.get(v, 0.0) for v in adj
    }
    comm = {v: v for v in adj}
    sigma_tot = dict(degree)
    improved = True
    moved_any = False
    while improved:
        improved = False
        for v in order:
            cv = comm[v]
            k_v = degree[v]
            # weights from v into each neighboring community
            links = {}
            for u, w in weights[v].items():
                links[comm[u]] = links.get(comm[u], 0.0) + w
            sigma_tot[cv] -= k_v
            comm[v] = None
            best_c = cv
            best_gain = links.get(cv, 0.0) - resolution * k_v * sigma_tot[cv] / two_m
            for c, w_in in sorted(links.items(), key=lambda kv: str(kv[0])):
                if c == cv or c is None:
                    continue
                gain = w_in - resolution * k_v * sigma_tot[c] / two_m
                if gain > best_gain + 1e-12:
                    best_gain = gain
                    best_c = c
            comm[v] = best_c
            sigma_tot[best_c] += k_v
            if best_c != cv:
                improved = True
                moved_any = True
    return comm if moved_any else None


def louvain(graph, resolution=1.0, seed=0):
    """Two-phase Louvain: seeded local moves, then aggregation, to a fixed point.

    Returns (community_id per original node, modularity). Community ids are
    renumbered by each community's smallest member node id, so the output is
    stable for a fixed seed.
    """
    if graph.n_nodes == 0:
        raise GraphError("empty graph")
    rng = random.Random(seed)
    und = graph.undirected()
    # current weighted graph over super-nodes
    adj = {v: set(nbrs) for v, nbrs in und.items()}
    weights = {v: {u: 1.0 for u in nbrs} for v, nbrs in und.items()}
    loops = {v: 0.0 for v in adj}
    membership = {v: v for v in und}  # original node -> current super-node

    while True:
        order = sorted(adj)
        rng.shuffle(order)
        comm = _louvain_level(adj, weights, loops, order, resolution)
        if comm is None:
            break
        # aggregate: communities become the new super-nodes
        new_nodes = sorted(set(comm.values()), key=str)
        new_weights = {c: {} for c in new_nodes}
        new_loops = {c: 0.0 for c in new_nodes}
        for v in adj:
            cv = comm[v]
            new_loops[cv] += loops.get(v, 0.0)
            for u, w in weights[v].items():
                cu = comm[u]
                if cu == cv:
                    new_loops[cv] += w / 2.0
                else:
                    new_weights[cv][cu] = new_weights[cv].get(cu, 0.0) + w
        membership = {orig: comm[s] for orig, s in membership.items()}
        if len(new_nodes) == len(adj):
            break
        adj = {c: set(new_weights[c]) for c in new_nodes}
        weights = new_weights
        loops = new_loops

    # renumber communities by smallest original member
    groups = {}
    for orig, c in membership.items():
        groups.setdefault(c, []).append(orig)
    ordered = sorted(groups.values(), key=lambda g: min(g))
    community_id = {}
    for cid, members in enumerate(ordered):
        for v in members:
            community_id[v] = cid
    return community_id, modularity(graph, community_id, resolution)


def power_difference(user_id, mentioned_ids, accounts):
    """Mean follower/friend-ratio gap between a user and those they mention.

    Ratios come from the account profiles with a max(1, friends)
    denominator; mentions of unknown accounts are skipped; no (known)
    mentions means 0.
    """
    me = accounts.get(user_id)
    if me is None:
        return 0.0
    my_ratio = me.followers_count / max(1, me.friends_count)
    diffs = []
    for mid in mentioned_ids:
        other = accounts.get(mid)
        if other is None or mid == user_id:
            continue
        diffs.append(my_ratio - other.followers_count / max(1, other.friends_count))
    if not diffs:
        return 0.0
    return sum(diffs) / len(diffs)


@dataclass
class NodeMetrics:
    user_id: str
    friends: int = 0
    followers: int = 0
    ratio: float = 0.0
    reciprocity: float = 0.0
    hub: float = 0.0
    authority: float = 0.0
    eigenvector: float = 0.0
    closeness: float = 0.0
    clustering: float = 0.0
    community_id: int = -1
    power_diff: float = 0.0

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)


def compute_node_metrics(graph, accounts=None, mentions_by_user=None, seed=0,
                         tol=TOL, max_iter=MAX_ITER, pmap=None):
    """Full NodeMetrics table for every node of the graph.

    `accounts` and `mentions_by_user` (user -> list of mentioned ids) are
    needed only for the power-difference column; without them it stays 0.
    """
    hub, auth, _ = hits(graph, tol=tol, max_iter=max_iter)
    eig, _ = eigenvector_centrality(graph, tol=tol, max_iter=max_iter)
    clo = closeness_all(graph)
    comm, _mod = louvain(graph, seed=seed)
    mentions_by_user = mentions_by_user or {}
    accounts = accounts or {}

    def one(v):
        friends = len(graph.out_adj[v])
        followers = len(graph.in_adj[v])
        return NodeMetrics(
            user_id=v,
            friends=friends,
            followers=followers,
            ratio=followers / max(1, friends),
            reciprocity=reciprocity(graph, v),
            hub=hub[v],
            authority=auth[v],
            eigenvector=eig[v],
            closeness=clo[v],
            clustering=clustering_coefficient(graph, v),
            community_id=comm[v],
            power_diff=power_difference(v, mentions_by_user.get(v, []), accounts),
        )

    run = pmap if pmap is not None else lambda fn, xs: [fn(x) for x in xs]
    metrics = run(one, list(graph.nodes))
    return {m.user_id: m for m in metrics}


def save_node_metrics(metrics, path):
    with open(path, "w", encoding="utf-8") as f:
        for uid in sorted(metrics):
            f.write(metrics[uid].to_json() + "\n")


def load_node_metrics(path):
    out = {}
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                obj = json.loads(line)
                out[obj["user_id"]] = NodeMetrics(**obj)
    return out
