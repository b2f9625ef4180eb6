# Eigenangles of the 16-site free CMV block (alpha = 0 inside, alpha = 1 at the
# cuts -9 and 7), built as L*M from explicit 2x2 blocks.
import numpy as np

lo, hi = -8, 8
n = hi - lo


def theta(a):
    r = np.sqrt(1 - abs(a) ** 2)
    return np.array([[np.conj(a), r], [r, -a]])


def alpha(s):
    return 1.0 if s in (-9, 7) else 0.0


def factor(parity):
    m = np.zeros((n, n), complex)
    for s in range(lo - 1, hi):
        if s % 2 != parity:
            continue
        t = theta(alpha(s))
        for di in range(2):
            for dj in range(2):
                i, j = s + di - lo, s + dj - lo
                if 0 <= i < n and 0 <= j < n:
                    m[i, j] = t[di, dj]
    return m


u = factor(0) @ factor(1)
assert np.allclose(u.conj().T @ u, np.eye(n))
ang = np.sort(np.mod(np.angle(np.linalg.eigvals(u)) / (2 * np.pi), 1.0))
with open("free_n16_eigenangles.csv", "w", newline="\n") as f:
    f.write("index,angle_turns\n")
    for i, a in enumerate(ang):
        f.write(f"{i},{a:.17g}\n")
