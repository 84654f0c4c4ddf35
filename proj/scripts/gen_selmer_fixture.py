"""Offline generator for fixtures/selmer_known.csv (needs cypari).

dim_phiprime is the F_3-rank of the Kummer image of A(Q) under the y-function
of a Kubert model, i.e. dim A(Q)/phi'(B(Q)); this equals dim Sel_phi'(B)
because Sha is trivial at these conductors. dim_phi then follows from
dim A(Q)/3A(Q) = dim A/phi'B + dim B/phiA - dim B(Q)[phi']/phi(A(Q)[3]),
where the last term vanishes since B[phi'] = mu_3 has no rational points.
"""
import itertools
import sys

from cypari import pari

CORPUS = [(-1, 1), (2, 1), (2, 4), (4, 2), (1, 1), (0, 1), (1, 3), (-2, 1), (4, 7), (0, 2),
          (4, 1), (4, 4), (4, 3), (-3, 1), (3, 2), (4, 6), (-3, 4), (3, 5), (-4, 1), (2, 2),
          (1, 2), (-1, 2), (-2, 2)]
EXTRA = [[0, 0, 0, 0, 16]]


def order3_point(E):
    tors = pari.elltors(E)
    gens = tors[2]
    pts = [pari("[0]")]
    for g in gens:
        pts = pts + [pari.elladd(E, p, pari.ellmul(E, g, k)) for p in list(pts) for k in range(1, int(pari.ellorder(E, g)))]
    for P in pts:
        if P != pari("[0]") and int(pari.ellorder(E, P)) == 3:
            return P
    return None


def cube_vector(q, primes):
    q = pari(q)
    num, den = pari.numerator(q), pari.denominator(q)
    return [(int(pari.valuation(num, p)) - int(pari.valuation(den, p))) % 3 for p in primes]


def f3_rank(rows):
    rows = [r[:] for r in rows]
    rank, col = 0, 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] % 3), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = 1 if rows[rank][col] % 3 == 1 else 2
        rows[rank] = [(x * inv) % 3 for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col] % 3:
                f = rows[i][col]
                rows[i] = [(a - f * b) % 3 for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def record(coeffs):
    E = pari.ellinit(coeffs)
    r_lo, r_hi, _, gens = pari.ellrank(E)[:4]
    assert int(r_lo) == int(r_hi), coeffs
    T = order3_point(E)
    assert T is not None
    E1 = pari.ellchangecurve(E, pari(f"[1,{T[0]},0,{T[1]}]"))
    s = pari(E1[3]) / pari(E1[2])
    K = pari.ellchangecurve(E1, pari(f"[1,0,{s},0]"))
    assert K[1] == 0 and K[3] == 0 and K[4] == 0
    v1, v2 = pari(f"[1,{T[0]},0,{T[1]}]"), pari(f"[1,0,{s},0]")
    tors_gens = list(pari.elltors(E)[2])
    free = [P for P in gens]
    generators = tors_gens + free
    orders = [int(pari.ellorder(E, g)) for g in tors_gens] + [0] * len(free)
    pts = []
    for coeffs3 in itertools.product(range(3), repeat=len(generators)):
        P = pari("[0]")
        for c, g in zip(coeffs3, generators):
            P = pari.elladd(E, P, pari.ellmul(E, g, c))
        if P == pari("[0]"):
            continue
        Q = pari.ellchangepoint(pari.ellchangepoint(P, v1), v2)
        if Q[1] == 0:
            continue
        pts.append(Q[1])
    primes = sorted({int(p) for y in pts for p in pari.factor(pari.abs(pari.numerator(y) * pari.denominator(y)))[0]} - {1})
    dim_phiprime = f3_rank([cube_vector(y, primes) for y in pts]) if primes else 0
    tors3 = sum(1 for o in orders if o and o % 3 == 0)
    dim_phi = int(r_lo) + tors3 - dim_phiprime
    return dim_phi, dim_phiprime


def main(out):
    lines = ["curve,dim_phi,dim_phiprime"]
    for a1, a3 in CORPUS:
        c = [a1, 0, a3, 0, 0]
        lines.append("[%s],%d,%d" % (",".join(map(str, c)), *record(c)))
    for c in EXTRA:
        lines.append("[%s],%d,%d" % (",".join(map(str, c)), *record(c)))
    open(out, "w").write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "fixtures/selmer_known.csv")
