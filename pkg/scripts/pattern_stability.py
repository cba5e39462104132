"""Linear stability of stored patterns in the averaged network.

With odd-harmonic coupling the Jacobian at a stored pattern xi (phases 0 or
pi) is, up to a positive factor, minus the signed Laplacian
L = diag(sum_j w_nj) - w with w_nj = s_nj * xi_n * xi_j. The smallest
non-trivial eigenvalue of L decides stability: negative means the stored
pattern is unstable, zero means a neutral direction along which mismatch can
drift the state.

    python scripts/pattern_stability.py            # shipped patterns
    python scripts/pattern_stability.py other.txt  # any pattern file
"""

import sys

import numpy as np

from memonn.onn import PatternSet, hebbian_weights, shipped_patterns


def laplacian_spectrum(ps: PatternSet, k: int) -> np.ndarray:
    s = hebbian_weights(ps).s
    xi = ps.patterns[k]
    w = s * np.outer(xi, xi)
    lap = np.diag(w.sum(axis=1)) - w
    return np.sort(np.linalg.eigvalsh(lap))


def main():
    ps = PatternSet.load(sys.argv[1]) if len(sys.argv) > 1 else shipped_patterns()
    print("overlaps:\n", ps.patterns @ ps.patterns.T)
    for k in range(ps.p):
        ev = laplacian_spectrum(ps, k)
        nontrivial = ev[1:]
        print(f"pattern {k}: min {nontrivial.min():+.3f}, "
              f"zero modes {int(np.sum(np.abs(nontrivial) < 1e-9))}, "
              f"negative modes {int(np.sum(nontrivial < -1e-9))}")


if __name__ == "__main__":
    main()
