"""Freeze local reduction data from PARI for the Tate's-algorithm regression test.

Run offline; the library never calls PARI. Output columns:
a1,a2,a3,a4,a6,p,kodaira,c_p,f_p,reduction,v_u
where v_u is the p-adic valuation of the scaling u from the given model to a
minimal one.
"""
import random
import re
import sys

from cypari import pari


def kodaira_name(k):
    k = int(k)
    if k == 1:
        return "I0"
    if k in (2, 3, 4):
        return {2: "II", 3: "III", 4: "IV"}[k]
    if k > 4:
        return "I%d" % (k - 4)
    if k == -1:
        return "I0*"
    if k in (-2, -3, -4):
        return {-2: "II*", -3: "III*", -4: "IV*"}[k]
    return "I%d*" % (-k - 4)


def reduction_class(e, p, kod):
    if kod == "I0":
        return "good"
    if re.fullmatch(r"I[1-9][0-9]*", kod):
        return "split" if int(pari.ellap(e, p)) == 1 else "nonsplit"
    return "additive"


def curves(rng):
    base = [
        [1, 0, 1, 0, 0], [0, 0, 0, 0, 16], [0, 0, 0, 0, 2], [0, 0, 0, 0, 1], [0, 0, 0, 1, 0],
        [-1, 0, 1, 0, 0], [2, 0, 1, 0, 0], [4, 0, 2, 0, 0], [0, 0, 1, 0, 0], [1, 0, 3, 0, 0],
        [-2, 0, 1, 0, 0], [-3, 0, 1, 0, 0], [3, 0, 2, 0, 0], [-4, 0, 1, 0, 0], [-3, 0, 8, 0, 0],
        [0, 0, 0, -432, 8208], [0, -1, 1, -10, -20], [1, -1, 1, -1, -14], [0, 0, 0, -1, 0],
        [0, 0, 0, 0, -432], [0, 0, 0, -11, -14], [1, 1, 1, -10, -10], [0, 1, 0, -1, 0],
        [0, 0, 0, -4, 4], [0, 0, 0, 0, 1728], [0, 0, 0, 2, 0], [0, 0, 0, 0, 3],
    ]
    out = [list(c) for c in base]
    # twists of a few bases by d, in short form y^2 = x^3 + d b2 x^2 + 8d^2 b4 x + 16 d^3 b6
    for c in base[:8]:
        e = pari.ellinit(c)
        b2, b4, b6 = int(e[5]), int(e[6]), int(e[7])
        for d in (-1, 2, -3, 5, -26, 6, -7, 10, 39):
            out.append([0, d * b2, 0, 8 * d * d * b4, 16 * d ** 3 * b6])
    # non-minimal scalings at 2, 3, 5
    for c in base[:6]:
        for u in (2, 3, 5):
            out.append([c[0] * u, c[1] * u ** 2, c[2] * u ** 3, c[3] * u ** 4, c[4] * u ** 6])
    # random small curves
    while len(out) < 160:
        c = [rng.randint(-3, 3) for _ in range(3)] + [rng.randint(-60, 60), rng.randint(-200, 200)]
        if int(pari("ellinit(%s).disc" % str(c))) != 0:
            out.append(c)
    return out


def main():
    rng = random.Random(20240601)
    w = sys.stdout
    w.write("a1,a2,a3,a4,a6,p,kodaira,c_p,f_p,reduction,v_u\n")
    for c in curves(rng):
        e = pari.ellinit(c)
        disc = int(e[11])
        primes = sorted(set(int(q) for q in pari.factor(abs(disc))[0]) | {2, 3})
        primes.append(int(pari.nextprime(rng.randint(5, 1000))))
        for p in primes:
            f, kod, urst, cp = pari.elllocalred(e, p)
            kname = kodaira_name(kod)
            vu = int(pari.valuation(urst[0], p))
            red = reduction_class(pari.ellinit(pari.ellchangecurve(e, urst)[:5]), p, kname)
            w.write("%s,%d,%s,%d,%d,%s,%d\n" % (",".join(map(str, c)), p, kname, int(cp), int(f), red, vu))


if __name__ == "__main__":
    main()
