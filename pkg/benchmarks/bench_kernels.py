"""Time the hot kernels under the numba backend and the pure-numpy fallback.

Each backend runs in its own interpreter because the switch is read at import:

    python benchmarks/bench_kernels.py [--repeat 3] [--json]
"""
import argparse
import json
import os
import subprocess
import sys
import time

WORKLOADS = {
    "lorenz_trajectory": "lorenz.integrate_real((1.0, 1.0, 20.0), SM, 20.0, 1e-10, n_samples=201)",
    "lyapunov": "lorenz.lyapunov_max(SM, (1.0, 1.0, 20.0), t_total=20.0, t_transient=2.0)",
    "amplifier_exact": "amplifier.propagate_exact(0.01, MED, 1.0, 20.0, 401)",
    "implicit_roots": "amplifier.solve_implicit(0.01, MED, 1.0, Z)",
    "two_level_bloch": "bloch.integrate_two_level(bloch.TwoLevelState(1.0, 0j), 0.5, MED, 20.0, 1e-10)",
    "traveling_wave": ("multimode.integrate_traveling_wave(F0, 0.0, 1.0, SM.with_(r=2.0), 2.0, 1e-8,"
                       " n_samples=5)"),
}

SETUP = """
import numpy as np
from mbloch import amplifier, bloch, lorenz, multimode
from mbloch.lorenz import SingleModeParams
from mbloch.params import CavityParams, MediumParams
SM = SingleModeParams(10.0, 1.0, 8 / 3, 28.0)
MED = MediumParams(1.0, 1.0, 0.5, 1.0, 0.3)
Z = np.linspace(0.0, 20.0, 20001)
CAV = CavityParams.from_power_reflectivity(0.5, 1.0, 2.0)
F0 = multimode.FieldOnRing.from_function(lambda z: 0.1 + 0.01 * np.cos(2 * np.pi * z), 16, CAV)
"""


def child(repeat):
    import timeit

    namespace = {}
    exec(SETUP, namespace)
    from mbloch import backend

    out = {"backend": backend(), "timings": {}}
    for name, stmt in WORKLOADS.items():
        t0 = time.perf_counter()
        exec(stmt, namespace)
        first = time.perf_counter() - t0
        best = min(timeit.repeat(stmt, globals=namespace, number=1, repeat=repeat))
        out["timings"][name] = {"first_call": first, "best": best}
    print(json.dumps(out))


def run_backend(disable_jit, repeat):
    env = dict(os.environ, MBLOCH_DISABLE_JIT="1" if disable_jit else "0")
    proc = subprocess.run([sys.executable, __file__, "--child", "--repeat", str(repeat)],
                          env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true", help="print raw results as JSON")
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)
    if args.child:
        child(args.repeat)
        return
    jit = run_backend(False, args.repeat)
    ref = run_backend(True, args.repeat)
    if args.json:
        print(json.dumps({"numba": jit, "numpy": ref}, indent=1))
        return
    print(f"{'workload':<20}{'numba first':>14}{'numba best':>14}{'numpy best':>14}{'speedup':>10}")
    for name in WORKLOADS:
        a, b = jit["timings"][name], ref["timings"][name]
        print(f"{name:<20}{a['first_call']:>13.3f}s{a['best']:>13.4f}s{b['best']:>13.4f}s"
              f"{b['best'] / a['best']:>9.1f}x")


if __name__ == "__main__":
    main()
