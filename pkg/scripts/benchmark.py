"""Wall time and traced peak memory of single full runs.

    python scripts/benchmark.py --sizes 512,1024,2048,4096
"""

import argparse
import time
import tracemalloc

from tripack.process import run


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="512,1024,2048")
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    run(64, 0)  # JIT warm-up
    print(f"{'n':>6} {'seconds':>9} {'peak/n^2 (bytes)':>17} {'M':>9} {'final_edges':>12}")
    for n in (int(x) for x in args.sizes.split(",")):
        tracemalloc.start()
        t0 = time.perf_counter()
        rec = run(n, args.seed)
        elapsed = time.perf_counter() - t0
        peak = tracemalloc.get_traced_memory()[1]
        tracemalloc.stop()
        print(f"{n:>6} {elapsed:>9.2f} {peak / n**2:>17.2f} {rec.M:>9} {rec.final_edges:>12}")


if __name__ == "__main__":
    main()
