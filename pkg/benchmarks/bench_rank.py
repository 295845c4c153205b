"""Compare the compiled and pure-Python Gaussian-integer rank kernels.

Workloads are the exact Dirac blocks of the bundled models plus random
small-entry matrices in the size range the invariant complex produces.

    python3 benchmarks/bench_rank.py --repeat 20
"""

import argparse
import timeit

import numpy as np

from twisted_hodge.exterior import Form
from twisted_hodge.linalg import _log2_hadamard, _EXT_LOG2_BOUND, kernel_backend, rank_int, to_gaussian_integers
from twisted_hodge.model import load_model
from twisted_hodge.twisted import dirac_assemble


def model_workloads():
    out = []
    for name in ("kodaira_thurston", "hopf_surface", "iwasawa", "torus_n3"):
        m = load_model(name)
        theta = Form.one_form_01([1] + [0] * (m.n - 1))
        for p in range(m.n + 1):
            mat = dirac_assemble(m, theta, p, 1).matrix
            out.append((f"{name} p={p} {mat.shape[0]}x{mat.shape[1]}", to_gaussian_integers(mat)))
    return out


def random_workloads(rng, sizes):
    out = []
    for size in sizes:
        re = rng.integers(-1, 2, size=(size, size)) * (rng.random((size, size)) < 0.2)
        im = rng.integers(-1, 2, size=(size, size)) * (rng.random((size, size)) < 0.2)
        out.append((f"random sparse {size}x{size}", (re.tolist(), im.tolist())))
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--sizes", default="8,16,24")
    args = ap.parse_args(argv)

    if kernel_backend() != "compiled":
        print("compiled kernel unavailable; only the Python kernel will be timed")
    rng = np.random.default_rng(args.seed)
    work = model_workloads() + random_workloads(rng, [int(s) for s in args.sizes.split(",")])

    print(f"{'workload':34s} {'rank':>4s} {'routed':>8s} {'python ms':>10s} {'compiled ms':>12s} {'speedup':>8s}")
    for label, (re, im) in work:
        py_rank = rank_int(re, im, backend="python")
        t_py = timeit.timeit(lambda: rank_int(re, im, backend="python"), number=args.repeat) / args.repeat
        routed = "compiled" if _log2_hadamard(re, im) <= _EXT_LOG2_BOUND else "python"
        if kernel_backend() == "compiled":
            c_rank = rank_int(re, im, backend="compiled")
            if c_rank != py_rank:
                raise SystemExit(f"rank mismatch on {label}: python {py_rank}, compiled {c_rank}")
            t_c = timeit.timeit(lambda: rank_int(re, im, backend="compiled"), number=args.repeat) / args.repeat
            speed = f"{t_py / t_c:8.1f}x"
            tc = f"{t_c * 1e3:12.3f}"
        else:
            speed, tc = f"{'-':>8s}", f"{'-':>12s}"
        print(f"{label:34s} {py_rank:4d} {routed:>8s} {t_py * 1e3:10.3f} {tc} {speed}")


if __name__ == "__main__":
    main()
