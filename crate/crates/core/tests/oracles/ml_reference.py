"""Reference values for E_alpha(-x), computed by Talbot inversion of the
Laplace transform s^(alpha-1) / (s^alpha + 1) at 40 digits, cross-checked
against the power series where it is well conditioned."""
import mpmath as mp

mp.mp.dps = 40


def ml_talbot(alpha, x):
    # E_alpha(-x) = f(t=1) with F(s) = s^(a-1)/(s^a + x)
    a = mp.mpf(alpha)
    return mp.invertlaplace(lambda s: s ** (a - 1) / (s ** a + x), 1, method="talbot")


def ml_series(alpha, x, terms=2000):
    a = mp.mpf(alpha)
    return mp.fsum((-mp.mpf(x)) ** k / mp.gamma(1 + a * k) for k in range(terms))


if __name__ == "__main__":
    pts = []
    for alpha in ["0.3", "0.5", "0.7", "0.9"]:
        for x in ["0.1", "0.5", "1", "2", "3", "5", "8", "12", "20", "30"]:
            v = ml_talbot(alpha, mp.mpf(x))
            if mp.mpf(x) <= 3:
                s = ml_series(alpha, mp.mpf(x))
                assert abs(v - s) < mp.mpf("1e-20"), (alpha, x, v, s)
            pts.append((alpha, x, v))
    for alpha, x, v in pts:
        print(f"    ({alpha}, {x}, {mp.nstr(v, 20)}),")
