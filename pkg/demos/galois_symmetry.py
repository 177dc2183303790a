"""
Taylor data of the cylinder distances along gamma live in Q(p_x).

At x = 1/2, p_x = sqrt(5)/2.  Swapping lines by sigma and conjugating
p_x -> -p_x maps the coefficient table to itself.
"""
from fractions import Fraction

from critcluster import galois_probe as gp

x = Fraction(1, 2)
print("p_x =", gp.p_x(x), " theta_delta =", gp.theta_delta(x))
for bound in (10**3, 10**7):
    r = gp.sigma_conjugation_check(x, bound)
    print(f"denominator bound {bound:>8}: conclusive={r.conclusive}, symmetric={r.symmetric},"
          f" sigma alone={r.sigma_alone_symmetric}, largest denominator {r.max_denominator}")

table = gp.taylor_table(x)
key = sorted(table)[1]
print("one coefficient:", key, "=", gp.recover_mp(table[key], x, 10**7))
