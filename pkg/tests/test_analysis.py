import math

import pytest

from fractconv.analysis import (
    SUITES,
    CheckStats,
    TrialConfig,
    figure1_ratio,
    lambda_convergence_study,
    run_suite,
)
from fractconv.errors import InvalidArgument
from fractconv.partition import make_uniform_partition


def test_check_stats_bookkeeping():
    c = CheckStats("x")
    assert not c.record(1.0, 2.0, 0.0)
    assert not c.record(2.0 + 1e-9, 2.0, 1e-8)
    assert c.record(3.0, 2.0, 1e-8, scale=4.0)
    assert c.trials == 3 and c.violations == 1
    assert c.worst_slack == -1.0 and c.worst_relative_excess == 0.25
    m = c.merge(CheckStats("x", 2, 0.5, -1.0, 0, 0.0))
    assert m.trials == 5 and m.violations == 1 and m.worst_slack == -1.0


def test_trial_config_validation():
    for bad in (dict(trials=0), dict(lambdas=(1.0,)), dict(ps=(0.0,)), dict(M=0), dict(alpha_kinds=("wild",))):
        with pytest.raises(InvalidArgument):
            TrialConfig(**bad)
    with pytest.raises(InvalidArgument):
        run_suite("bogus", TrialConfig(trials=1))


@pytest.mark.parametrize("suite", SUITES)
def test_small_suites_pass(suite):
    tc = TrialConfig(seed=3, trials=2, M=64, ps=(1.0, 2.0, math.inf))
    rep = run_suite(suite, tc)
    assert rep.checks
    assert rep.passed, [c for c in rep.checks.values() if c.violations]


def test_reports_are_deterministic():
    tc = TrialConfig(seed=11, trials=3, M=64)
    a = run_suite("lipschitz", tc).to_json(timing=False)
    b = run_suite("lipschitz", tc).to_json(timing=False)
    assert a == b
    assert '"seconds"' not in a


def test_figure1_ratio():
    assert figure1_ratio(2.0) <= 0.6


def test_lambda_study_shrinks_toward_seed():
    part = make_uniform_partition((0, 3), 6)
    st = lambda_convergence_study("sin(3*pi*x)", "exp(x)", [0.3 / m for m in range(1, 7)], part, 2.0, "x/8", M=128)
    assert st.under_envelope and st.decreasing
    assert st.distances[-1] < st.distances[0] / 4
