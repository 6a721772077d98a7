"""Reference implementations written independently of the package.

Each one is the slow, obvious version: breadth-first search with its own
multiplication rule, or brute force over orderings.
"""
from collections import deque
from itertools import permutations


def bfs(identity, step, radius):
    """{element: distance} for every element within ``radius`` of ``identity``."""
    dist = {identity: 0}
    todo = deque([identity])
    while todo:
        g = todo.popleft()
        d = dist[g]
        if d == radius:
            continue
        for x in step(g):
            if x not in dist:
                dist[x] = d + 1
                todo.append(x)
    return dist


# lamplighter Z wr Z: state = (sorted lamp items, position)
def lamplighter_steps(g):
    lamps, pos = g
    out = [(lamps, pos + 1), (lamps, pos - 1)]
    for delta in (1, -1):
        d = dict(lamps)
        d[pos] = d.get(pos, 0) + delta
        if d[pos] == 0:
            del d[pos]
        out.append((tuple(sorted(d.items())), pos))
    return out


def lamplighter_ball(radius):
    return bfs(((), 0), lamplighter_steps, radius)


# Heisenberg group, (x,y,z)(x',y',z') = (x+x', y+y', z+z' - y*x')
def h3_mul(g, h):
    return (g[0] + h[0], g[1] + h[1], g[2] + h[2] - g[1] * h[0])


H3_GENS = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]


def h3_ball(radius):
    return bfs((0, 0, 0), lambda g: [h3_mul(g, s) for s in H3_GENS], radius)


def free_reduce(w):
    out = []
    for ch in w:
        if out and out[-1] == ch.swapcase():
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def f2_ball(radius):
    return bfs("", lambda g: [free_reduce(g + s) for s in "aAbB"], radius)


def visiting_bruteforce(support, end, start=0):
    """Shortest walk on Z from ``start`` visiting every support point, ending at ``end``."""
    support = list(support)
    if not support:
        return abs(end - start)
    best = None
    for order in permutations(support):
        pts = [start, *order, end]
        d = sum(abs(a - b) for a, b in zip(pts, pts[1:]))
        best = d if best is None else min(best, d)
    return best


def l1(a, b):
    return sum(abs(x - y) for x, y in zip(a, b))


def min_cross(tiles, dist):
    """Smallest distance between points of distinct tiles (None with < 2 tiles)."""
    best = None
    for i in range(len(tiles)):
        for j in range(i + 1, len(tiles)):
            for x in tiles[i]:
                for y in tiles[j]:
                    d = dist(x, y)
                    best = d if best is None else min(best, d)
    return best


def diam(tile, dist):
    return max((dist(x, y) for x in tile for y in tile), default=0)
