#!/usr/bin/env python3
"""Writes the 2x2 Wishart model in scaled half-vectorization coordinates."""
import argparse
import json

import numpy as np


def index_pairs(d):
    return [(i, j) for i in range(d) for j in range(i, d)]


def unsvec(v, d):
    m = np.zeros((d, d))
    for k, (i, j) in enumerate(index_pairs(d)):
        s = 1.0 if i == j else 1.0 / np.sqrt(2.0)
        m[i, j] = m[j, i] = s * v[k]
    return m


def svec(m):
    d = m.shape[0]
    return np.array([m[i, j] * (1.0 if i == j else np.sqrt(2.0)) for i, j in index_pairs(d)])


def covariance(x, sigma):
    d = x.shape[0]
    pairs = index_pairs(d)
    c = np.zeros((len(pairs), len(pairs)))
    for a, (i, j) in enumerate(pairs):
        for b, (k, l) in enumerate(pairs):
            v = x[i, k] * sigma[j, l] + x[i, l] * sigma[j, k] + x[j, k] * sigma[i, l] + x[j, l] * sigma[i, k]
            sa = 1.0 if i == j else np.sqrt(2.0)
            sb = 1.0 if k == l else np.sqrt(2.0)
            c[a, b] = sa * sb * v
    return c


def upper(m):
    return [float(m[i, j]) for i in range(m.shape[0]) for j in range(i, m.shape[0])]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--beta", type=float, default=3.0)
    ap.add_argument("--out", default="models/wishart_2d.json")
    args = ap.parse_args()

    d = 2
    p = d * (d + 1) // 2
    m = np.array([[-0.5, 0.1], [0.0, -0.4]])
    q = np.array([[0.4, 0.1], [0.0, 0.3]])
    sigma = q.T @ q

    cols = []
    mats = [np.zeros((p, p))]
    for k in range(p):
        u = unsvec(np.eye(p)[k], d)
        cols.append(svec(m @ u + u @ m.T))
        mats.append(covariance(u, sigma))
    a = np.column_stack(cols)
    doc = {
        "dim": p,
        "state_space": {"kind": "psd", "d": d},
        "a0": [float(v) for v in svec(args.beta * sigma)],
        "a": [float(v) for v in a.flatten(order="F")],
        "A": [upper(c) for c in mats],
        "K": [],
    }
    with open(args.out, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


if __name__ == "__main__":
    main()
