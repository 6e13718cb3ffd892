"""Compare the compiled kernels with the numpy fallback.

Times one Hamiltonian application in the odd sector and one all-pairs
correlator pass over a ground-state-sized vector, for a few chain lengths.

    python3 benchmarks/bench_kernels.py --sizes 10 12 14 --repeat 5
"""

import argparse
import timeit

import numpy as np

from kitaevnet import kernels
from kitaevnet.model import ChainSpec, build_kitaev_hamiltonian, get_basis


def time_call(fn, repeat):
    fn()  # warm-up
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_size(n, repeat, backends):
    op = build_kitaev_hamiltonian(ChainSpec(n, 1.0, 1.3, 0.5), basis=get_basis(n, -1))
    b = op.basis
    args = op.terms.args()
    diag = op.diagonal_part()
    rng = np.random.default_rng(0)
    v = rng.standard_normal(op.dim)
    psi = rng.standard_normal(1 << n) + 0j
    psi /= np.linalg.norm(psi)

    rows = []
    for name in backends:
        impl = kernels.get_backend(name)
        out = np.zeros(op.dim)

        def matvec():
            out[:] = 0.0
            impl.apply_terms(b.states, b.lookup, *args, diag, v, out)

        t_mv = time_call(matvec, repeat)
        t_pc = time_call(lambda: impl.pair_correlators(psi, n), repeat)
        rows.append((name, t_mv, t_pc))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[10, 12, 14])
    parser.add_argument("--repeat", type=int, default=5)
    opts = parser.parse_args()

    backends = ["python"]
    if kernels.compiled_available():
        backends.insert(0, "compiled")
    else:
        print("compiled kernels not built; timing the fallback only")

    print(f"{'N':>3} {'backend':>9} {'matvec [ms]':>12} {'pairs [ms]':>11}")
    for n in opts.sizes:
        rows = bench_size(n, opts.repeat, backends)
        for name, t_mv, t_pc in rows:
            print(f"{n:>3} {name:>9} {1e3 * t_mv:12.3f} {1e3 * t_pc:11.3f}")
        if len(rows) == 2:
            print(f"{n:>3} {'speedup':>9} {rows[1][1] / rows[0][1]:11.1f}x "
                  f"{rows[1][2] / rows[0][2]:10.1f}x")


if __name__ == "__main__":
    main()
