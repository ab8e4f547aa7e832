"""Compare the compiled and numpy kernel backends.

Usage: ``python3 benchmarks/bench_kernels.py [--sites 14] [--repeat 5]``
"""
import argparse
import timeit

import numpy as np

from mirrorchain import kernels
from mirrorchain.chain import build_uniform_pst


def bench(impl, n_sites, repeat):
    rng = np.random.default_rng(0)
    amps = rng.normal(size=1 << n_sites) + 1j * rng.normal(size=1 << n_sites)
    spec = build_uniform_pst(n_sites, verify=False)
    k = n_sites // 2
    states = impl.sector_states(n_sites, k)

    def jw():
        for site in range(n_sites):
            impl.jw_apply(amps, site, True)

    cases = {
        f"jw_apply x{n_sites}": jw,
        f"sector_states k={k}": lambda: impl.sector_states(n_sites, k),
        f"sector_hamiltonian k={k}": lambda: impl.sector_hamiltonian(n_sites, states, spec.couplings,
                                                                     spec.fields),
    }
    return {name: min(timeit.repeat(fn, number=1, repeat=repeat)) for name, fn in cases.items()}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sites", type=int, default=14)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = kernels.available_backends()
    results = {name: bench(impl, args.sites, args.repeat) for name, impl in backends.items()}
    names = list(next(iter(results.values())))
    print(f"N = {args.sites}, best of {args.repeat} (seconds); active backend: {kernels.BACKEND}")
    header = f"{'kernel':<28}" + "".join(f"{b:>12}" for b in results)
    if "cython" in results:
        header += f"{'speedup':>10}"
    print(header)
    for name in names:
        row = f"{name:<28}" + "".join(f"{results[b][name]:>12.5f}" for b in results)
        if "cython" in results:
            row += f"{results['python'][name] / results['cython'][name]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
