import math

import numpy as np
import pytest

from paulitree.engine import run_analytical
from paulitree.errormap import Thresholds
from paulitree.montecarlo import run_mc, run_mc_parallel
from paulitree.noise import NoiseParams
from paulitree.pauli import Pauli
from paulitree.program import (
    CNot,
    OneQubitEvent,
    ProgramError,
    TwoQubitEvent,
    build_basic_program,
    elaborate,
)
from tests.test_engine import QUIET, toy


class TestStatistics:
    def test_matches_exact_crash_mass(self):
        prog = toy([TwoQubitEvent(0, 1, 0.3)])
        p = 0.3 * 9 / 15
        rep = run_mc(prog, 40000, seed=7)
        sigma = math.sqrt(p * (1 - p) / rep.iterations)
        assert abs(rep.crash_rate - p) < 5 * sigma

    def test_matches_analytical_engine_on_gate_spread(self):
        prog = toy([OneQubitEvent(0, 0.3), CNot(0, 1)])
        exact = run_analytical(prog, Thresholds()).crash_probability
        rep = run_mc(prog, 40000, seed=3)
        sigma = math.sqrt(exact * (1 - exact) / rep.iterations)
        assert abs(rep.crash_rate - exact) < 5 * sigma

    def test_ci95_formula(self):
        rep = run_mc(toy([TwoQubitEvent(0, 1, 0.3)]), 5000, seed=1)
        p = rep.crash_rate
        assert rep.ci95_halfwidth == pytest.approx(
            1.96 * math.sqrt(p * (1 - p) / 5000)
        )

    def test_zero_noise_never_crashes(self):
        prog = elaborate(build_basic_program(QUIET))
        rep = run_mc(prog, 256, seed=0)
        assert rep.crashes == 0
        assert rep.crash_rate == 0.0


class TestReproducibility:
    PROG = toy([TwoQubitEvent(0, 1, 0.3)])

    def test_same_seed_same_tally(self):
        a = run_mc(self.PROG, 10000, seed=42)
        b = run_mc(self.PROG, 10000, seed=42)
        assert a.crashes == b.crashes

    def test_seeds_are_distinct_streams(self):
        counts = {run_mc(self.PROG, 65536, seed=s).crashes for s in range(4)}
        assert len(counts) > 1

    def test_sharding_is_deterministic(self):
        a = run_mc_parallel(self.PROG, 10000, seed=5, shards=4)
        b = run_mc_parallel(self.PROG, 10000, seed=5, shards=4)
        assert a.crashes == b.crashes
        assert a.shards == 4

    def test_worker_count_does_not_change_the_tally(self):
        serial = run_mc_parallel(self.PROG, 8000, seed=9, shards=4, jobs=1)
        parallel = run_mc_parallel(self.PROG, 8000, seed=9, shards=4, jobs=2)
        assert serial.crashes == parallel.crashes

    def test_uneven_iteration_split(self):
        rep = run_mc_parallel(self.PROG, 10, seed=0, shards=3)
        assert rep.iterations == 10
        assert 0 <= rep.crashes <= 10

    def test_single_shard_equals_run_mc(self):
        a = run_mc(self.PROG, 4096, seed=11)
        b = run_mc_parallel(self.PROG, 4096, seed=11, shards=1)
        assert a.crashes == b.crashes


class TestValidationAndInjection:
    def test_argument_validation(self):
        prog = toy([])
        with pytest.raises(ValueError):
            run_mc(prog, 0, seed=0)
        with pytest.raises(ValueError):
            run_mc_parallel(prog, 10, seed=0, shards=0)
        with pytest.raises(ProgramError):
            run_mc(build_basic_program(QUIET), 10, seed=0)

    def test_injected_faults_are_deterministic(self):
        prog = elaborate(build_basic_program(QUIET))
        clean = run_mc(prog, 64, seed=1, initial_errors={3: Pauli.Y})
        assert clean.crashes == 0  # a single fault is always corrected
        crashed = run_mc(prog, 64, seed=1,
                         initial_errors={3: Pauli.X, 5: Pauli.X})
        assert crashed.crashes == 64  # a same-block pair never is
