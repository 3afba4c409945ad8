"""Literal, unoptimized re-implementation of the update procedure.

Sets are plain Python sets of arrival times and every TTL is recomputed
from scratch. Used only to cross-check the sketch state step by step.
"""

import math


class RefGuess:
    def __init__(self, gamma, caps, delta, n):
        self.gamma = gamma
        self.caps = caps
        self.k = sum(caps)
        self.delta = delta
        self.n = n
        self.AV = set()
        self.repV = {}
        self.RV = set()
        self.A = set()
        self.repsC = {}
        self.R = set()


class RefSketch:
    def __init__(self, gammas, caps, delta, n):
        self.n = n
        self.caps = caps
        self.k = sum(caps)
        self.t = 0
        self.pts = {}
        self.G = [RefGuess(g, caps, delta, n) for g in gammas]

    def ttl(self, a):
        return max(0, self.n - (self.t - a))

    def d(self, a, b):
        return math.dist(self.pts[a].coords, self.pts[b].coords)

    def update(self, p):
        self.t += 1
        self.pts[p.arrival] = p
        i = p.color
        x = self.t - self.n
        for G in self.G:
            for s in (G.AV, G.A, G.RV, G.R):
                s.discard(x)
            for lst in G.repsC.values():
                for col in lst.values():
                    if x in col:
                        col.remove(x)
            P = p.arrival
            EV = [v for v in G.AV if self.d(P, v) <= 2 * G.gamma]
            if not EV:
                G.AV.add(P)
                G.repV[P] = P
                G.RV.add(P)
                self.cleanup(G)
            else:
                v = max(EV, key=self.ttl)
                G.RV.discard(G.repV[v])
                G.repV[v] = P
                G.RV.add(P)
            # c-side candidates are taken after any cleanup of the v-side
            E = [a for a in G.A if self.d(P, a) <= G.delta * G.gamma / 2]
            if not E:
                G.A.add(P)
                G.repsC[P] = {i: [P]}
                G.R.add(P)
            else:
                a = min(E, key=lambda a: (len(G.repsC[a].get(i, [])), -self.ttl(a)))
                col = G.repsC[a].setdefault(i, [])
                col.append(P)
                G.R.add(P)
                if len(col) > self.caps[i]:
                    o = min(col, key=self.ttl)
                    col.remove(o)
                    G.R.discard(o)

    def cleanup(self, G):
        if len(G.AV) == self.k + 2:
            v_old = min(G.AV, key=self.ttl)
            G.AV.discard(v_old)
            del G.repV[v_old]
        if len(G.AV) == self.k + 1:
            tmin = min(self.ttl(v) for v in G.AV)
            for s in (G.A, G.RV, G.R):
                for q in [q for q in s if self.ttl(q) < tmin]:
                    s.discard(q)
            for lst in G.repsC.values():
                for col in lst.values():
                    col[:] = [q for q in col if self.ttl(q) >= tmin]
