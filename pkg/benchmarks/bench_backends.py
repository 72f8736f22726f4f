#!/usr/bin/env python3
"""Benchmark: compiled kernels versus the pure-Python fallback.

Times the raw kernels on representative register sizes and then a full
Monte Carlo experiment on each backend.  Run after an editable install:

    python benchmarks/bench_backends.py
"""

import math
import time

import numpy as np

from qsdc3 import backend
from qsdc3.adversary import AttackModel, ChannelSegment
from qsdc3.harness import ExperimentConfig, run_experiment
from qsdc3.protocol import AbortPolicy, SchedulePolicy

RH = math.sqrt(0.5)
PAIR_AMPS = (0j, RH + 0j, RH + 0j, 0j)
PROBE_AMPS = (0j, 0.5 + 0j, 0.5 + 0j, 0j, 0.5 + 0j, 0j, 0j, 0.5 + 0j)


def time_call(fn, args, repeats=200_000):
    start = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - start) / repeats


def kernel_suite(impl):
    return [
        ("apply_1q (4 amps)", impl.apply_1q, (PAIR_AMPS, 1, 1)),
        ("prob_zero Z (8 amps)", impl.prob_zero, (PROBE_AMPS, 1, 0)),
        ("prob_zero X (4 amps)", impl.prob_zero, (PAIR_AMPS, 0, 1)),
        ("collapse Z (8 amps)", impl.collapse, (PROBE_AMPS, 2, 0, 0)),
        ("bell_probs", impl.bell_probs, (PAIR_AMPS,)),
        ("attach_ancilla", impl.attach_ancilla, (PAIR_AMPS, 1, 0.6 + 0j, 0.8 + 0j)),
    ]


def bench_kernels():
    from qsdc3 import _corepy

    try:
        from qsdc3 import _core_cy
    except ImportError:
        print("compiled extension not built; kernel comparison skipped")
        return
    print("%-24s %12s %12s %8s" % ("kernel", "python (us)", "compiled (us)", "speedup"))
    for (name, fn_py, args), (_, fn_cy, _) in zip(kernel_suite(_corepy), kernel_suite(_core_cy)):
        t_py = time_call(fn_py, args) * 1e6
        t_cy = time_call(fn_cy, args) * 1e6
        print("%-24s %12.3f %12.3f %7.1fx" % (name, t_py, t_cy, t_py / t_cy))


def bench_experiment():
    config = ExperimentConfig(
        message_length=64,
        trials=40,
        schedule=SchedulePolicy(0.4, 0.2, 0.3),
        attack=AttackModel.entangle_measure(0.5, ChannelSegment.A_TO_B, ChannelSegment.C_TO_A),
        abort_policy=AbortPolicy.RECORD_AND_CONTINUE,
        seed=1,
    )
    print()
    print("full experiment (64 bits x 40 trials, probe attack):")
    reports = {}
    original = backend.active_backend()
    try:
        for which in ("python", "compiled"):
            try:
                backend.set_backend(which)
            except ImportError:
                print("  %-9s not available" % which)
                continue
            start = time.perf_counter()
            result = run_experiment(config)
            elapsed = time.perf_counter() - start
            reports[which] = result.to_dict()
            print(
                "  %-9s %6.2f s  (%d rounds, %.1f us/round)"
                % (which, elapsed, result.rounds_total, 1e6 * elapsed / result.rounds_total)
            )
    finally:
        backend.set_backend(original)
    if len(reports) == 2:
        same = reports["python"] == reports["compiled"]
        print("  reports identical across backends:", same)


if __name__ == "__main__":
    np.random.default_rng(0)  # touch numpy so import cost stays out of timings
    print("active backend at import:", backend.active_backend())
    bench_kernels()
    bench_experiment()
