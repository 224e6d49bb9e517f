#!/usr/bin/env python3
"""Regenerate the frozen basis tables under data/.

Produces mutually unbiased basis families for d = 4, 8 (joint eigenbases of
maximal commuting Pauli classes found via a symplectic-spread search) and
d = 9 (quadratic phases over GF(9)), plus the d = 2, 3 equiangular fiducials.
Everything is verified numerically before being written, so the shipped files
are self-contained data; the library only has to re-verify them.
"""

import argparse
import itertools
import json
import math
import os

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)


def pauli_matrix(xbits, zbits):
    """Hermitian n-qubit Pauli for symplectic coordinates (x, z)."""
    mats = []
    for xq, zq in zip(xbits, zbits):
        mats.append([I2, Z, X, Y][2 * xq + zq])
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def bits(v, n):
    return [(v >> i) & 1 for i in range(n)]


def symp(u, v, n):
    ux, uz = u >> n, u & ((1 << n) - 1)
    vx, vz = v >> n, v & ((1 << n) - 1)
    return bin((ux & vz) ^ (uz & vx)).count("1") % 2


def lagrangians(n):
    """All maximal isotropic subspaces of F_2^{2n}, as frozensets of nonzero points."""
    total = 1 << (2 * n)
    found = set()
    pts = range(1, total)
    for v1 in pts:
        for v2 in pts:
            if v2 <= v1 or symp(v1, v2, n):
                continue
            for v3 in pts if n == 3 else [None]:
                if n == 3:
                    if v3 <= v2 or symp(v1, v3, n) or symp(v2, v3, n):
                        continue
                    gens = [v1, v2, v3]
                else:
                    gens = [v1, v2]
                span = set()
                for coeffs in itertools.product([0, 1], repeat=len(gens)):
                    w = 0
                    for c, g in zip(coeffs, gens):
                        if c:
                            w ^= g
                    span.add(w)
                span.discard(0)
                if len(span) == (1 << len(gens)) - 1:
                    found.add(frozenset(span))
    return [sorted(s) for s in found]


def spread(classes, total_pts):
    """Backtracking exact cover: disjoint classes covering all nonzero points."""
    all_pts = set(range(1, total_pts))
    by_point = {}
    for idx, cls in enumerate(classes):
        for p in cls:
            by_point.setdefault(p, []).append(idx)

    chosen = []

    def rec(covered):
        if covered == all_pts:
            return True
        pivot = min(all_pts - covered)
        for idx in by_point[pivot]:
            cls = set(classes[idx])
            if cls & covered:
                continue
            chosen.append(idx)
            if rec(covered | cls):
                return True
            chosen.pop()
        return False

    if not rec(set()):
        raise RuntimeError("no spread found")
    return [classes[i] for i in chosen]


def independent_generators(cls, n):
    gens = []
    span = {0}
    for p in cls:
        if p not in span:
            gens.append(p)
            span = {a ^ b for a in span for b in [0, p]} | span
            span = set()
            for coeffs in itertools.product([0, 1], repeat=len(gens)):
                w = 0
                for c, g in zip(coeffs, gens):
                    if c:
                        w ^= g
                span.add(w)
        if len(gens) == n:
            break
    return gens


def pauli_mub(nq):
    d = 1 << nq
    classes = lagrangians(nq)
    expected = {2: 15, 3: 135}[nq]
    assert len(classes) == expected, (len(classes), expected)
    part = spread(classes, 1 << (2 * nq))
    bases = []
    for cls in part:
        gens = independent_generators(cls, nq)
        gmats = []
        for g in gens:
            gx, gz = g >> nq, g & ((1 << nq) - 1)
            gmats.append(pauli_matrix(bits(gx, nq), bits(gz, nq)))
        basis = []
        for signs in itertools.product([1, -1], repeat=nq):
            proj = np.eye(d, dtype=complex)
            for s, G in zip(signs, gmats):
                proj = proj @ (np.eye(d) + s * G) / 2
            col = proj[:, np.argmax(np.linalg.norm(proj, axis=0))]
            basis.append(col / np.linalg.norm(col))
        bases.append(basis)
    return bases


def gf9_mub():
    """Ten MUBs of C^9 from quadratic Gauss phases over GF(9) = F_3[i], i^2 = -1."""
    els = [(u, v) for u in range(3) for v in range(3)]
    idx = {e: k for k, e in enumerate(els)}

    def mul(a, b):
        return ((a[0] * b[0] + 2 * a[1] * b[1]) % 3, (a[0] * b[1] + a[1] * b[0]) % 3)

    def tr(a):
        return (2 * a[0]) % 3  # a + a^3 for a = u + v*i

    w = np.exp(2j * np.pi / 3)
    bases = [[np.eye(9, dtype=complex)[:, j] for j in range(9)]]
    for a in els:
        basis = []
        for b in els:
            vec = np.zeros(9, dtype=complex)
            for k in els:
                phase = (tr(mul(a, mul(k, k))) + tr(mul(b, k))) % 3
                vec[idx[k]] = w**phase / 3.0
            basis.append(vec)
        bases.append(basis)
    return bases


def verify_family(bases, tol=1e-12):
    d = len(bases[0][0])
    gram_dev = 0.0
    cross_dev = 0.0
    target = 1.0 / math.sqrt(d)
    for a, basis in enumerate(bases):
        for i, u in enumerate(basis):
            for j, v in enumerate(basis):
                gram_dev = max(gram_dev, abs(np.vdot(u, v) - (i == j)))
        for b in range(a + 1, len(bases)):
            for u in basis:
                for v in bases[b]:
                    cross_dev = max(cross_dev, abs(abs(np.vdot(u, v)) - target))
    assert gram_dev < tol and cross_dev < tol, (gram_dev, cross_dev)
    return gram_dev, cross_dev


def ket_json(vec):
    return {
        "shape": [len(vec)],
        "entries": [[float(z.real), float(z.imag)] for z in vec],
    }


def family_json(bases):
    d = len(bases[0][0])
    return {
        "schema": "qcert/1",
        "kind": "mub_family",
        "d": d,
        "bases": [[ket_json(v) for v in basis] for basis in bases],
    }


def sic_fiducial(d):
    if d == 2:
        c = 1.0 / math.sqrt(3.0)
        a = math.sqrt((1.0 + c) / 2.0)
        b = math.sqrt((1.0 - c) / 2.0)
        return np.array([a, b * np.exp(1j * np.pi / 4)], dtype=complex)
    if d == 3:
        return np.array([0.0, 1.0, -1.0], dtype=complex) / math.sqrt(2.0)
    raise ValueError(d)


def verify_sic(d, fid, tol=1e-12):
    omega = np.exp(2j * np.pi / d)
    Xd = np.zeros((d, d), dtype=complex)
    Zd = np.zeros((d, d), dtype=complex)
    for k in range(d):
        Xd[(k + 1) % d, k] = 1.0
        Zd[k, k] = omega**k
    orbit = []
    for j in range(d):
        for k in range(d):
            orbit.append(np.linalg.matrix_power(Xd, j) @ np.linalg.matrix_power(Zd, k) @ fid)
    dev = 0.0
    for p in range(len(orbit)):
        for q in range(p + 1, len(orbit)):
            dev = max(dev, abs(abs(np.vdot(orbit[p], orbit[q])) ** 2 - 1.0 / (d + 1)))
    assert dev < tol, dev
    return dev


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    for name, bases in [
        ("mub_d4.json", pauli_mub(2)),
        ("mub_d8.json", pauli_mub(3)),
        ("mub_d9.json", gf9_mub()),
    ]:
        gram, cross = verify_family(bases)
        path = os.path.join(args.out, name)
        with open(path, "w") as f:
            json.dump(family_json(bases), f)
            f.write("\n")
        print(f"{name}: {len(bases)} bases, gram_dev={gram:.2e}, cross_dev={cross:.2e}")

    for d in (2, 3):
        fid = sic_fiducial(d)
        dev = verify_sic(d, fid)
        path = os.path.join(args.out, f"sic_d{d}.json")
        with open(path, "w") as f:
            json.dump(
                {"schema": "qcert/1", "kind": "sic_fiducial", "d": d, "fiducial": ket_json(fid)},
                f,
            )
            f.write("\n")
        print(f"sic_d{d}.json: equiangular_dev={dev:.2e}")


if __name__ == "__main__":
    main()
