"""Property tests over randomized inputs (at least 100 cases each)."""

from collections import Counter

from hypothesis import given, settings
from hypothesis import strategies as st

from fastibl import AgentParams, state_from_features
from fastibl.baseline import BaselineMemory
from fastibl.core import OptionKey, base_level, blended_value, retrieval_probabilities
from fastibl.harness import ExperimentConfig, run_experiment, write_csv
from fastibl.rng import NoiseStream
from fastibl.speedy import SpeedyMemory, speedy_base_level, speedy_probabilities

CASES = settings(max_examples=150, deadline=None)

activations = st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=40)
taus = st.floats(0.01, 5.0)
stamp_sets = st.lists(st.integers(0, 500), min_size=1, max_size=30, unique=True)
decays = st.floats(0.05, 2.0)


@CASES
@given(activations, taus)
def test_probabilities_sum_to_one(acts, tau):
    assert abs(sum(retrieval_probabilities(acts, tau)) - 1.0) < 1e-12
    p = speedy_probabilities(acts, tau)
    assert abs(p.sum() - 1.0) < 1e-12 and (p >= 0).all()


@CASES
@given(activations, taus, st.data())
def test_blend_within_outcome_range(acts, tau, data):
    xs = data.draw(st.lists(st.floats(-100, 100, allow_nan=False),
                            min_size=len(acts), max_size=len(acts)))
    v = blended_value(retrieval_probabilities(acts, tau), xs)
    span = 1e-12 * max(1.0, max(abs(x) for x in xs))
    assert min(xs) - span <= v <= max(xs) + span


@CASES
@given(stamp_sets, decays, st.integers(1, 50))
def test_extra_occurrence_raises_base_level(stamps, d, gap):
    t = max(stamps) + gap + 1
    extra = max(stamps) + gap  # unused stamp in (max, t)
    before = base_level(stamps, t, d)
    after = base_level(stamps + [extra], t, d)
    assert after > before
    assert abs(speedy_base_level(sorted(stamps + [extra]), t, d) - after) < 1e-12


@CASES
@given(stamp_sets, decays, st.integers(1, 50))
def test_more_recent_occurrences_raise_base_level(stamps, d, shift):
    t = max(stamps) + shift + 1
    older = base_level(stamps, t, d)
    newer = base_level([s + shift for s in stamps], t, d)
    assert newer > older


def _history(draw_ops):
    options = [OptionKey(state_from_features((i,)), a) for i in range(3) for a in range(2)]
    return [(options[i], x, delayed) for i, x, delayed in draw_ops]


ops = st.lists(st.tuples(st.integers(0, 5), st.sampled_from([-0.05, -0.01, 0.25, 0.75]),
                         st.booleans()), min_size=1, max_size=60)


@CASES
@given(ops, st.sampled_from([0.0, 0.75, 3.0]))
def test_equal_credit_conserves_timestamps(history, final):
    params = AgentParams(default_utility=1.0)
    for cls in (BaselineMemory, SpeedyMemory):
        memory = cls(params)
        noise = NoiseStream(0)
        for t, (option, x, delayed) in enumerate(_history(history), start=1):
            memory.evaluate([option], t, noise)
            memory.respond(option, x, t, delayed)
        def stamps_per_option():
            return {o: Counter(s for ts in g.values() for s in ts)
                    for o, g in memory.as_dict().items()}
        before = stamps_per_option()
        pending = [p.timestamp for p in memory.pending]
        memory.assign_credit(final)
        assert stamps_per_option() == before
        for o, g in memory.as_dict().items():
            for x, ts in g.items():
                for s in ts:
                    if s in pending:
                        assert x == final


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(1, 3), st.integers(1, 15))
def test_metric_columns_seed_deterministic(tmp_path_factory, seed, runs, episodes):
    d = tmp_path_factory.mktemp("csv")
    config = ExperimentConfig(task="binary", runs=runs, episodes=episodes, seed=seed)
    a = write_csv(run_experiment(config), d / "a.csv").read_text().splitlines()
    b = write_csv(run_experiment(config), d / "b.csv").read_text().splitlines()
    strip = lambda lines: [ln.rsplit(",", 1)[0] for ln in lines]
    assert strip(a) == strip(b)
    assert len(a) == runs * episodes + 1
