import numpy as np
import pytest

from fastibl.envs import (TASKS, CooperativeNavigation, Fireman, InsiderAttack, Minimap,
                          binary_step, coopnav_reward, encode_grid_observation,
                          fireman_payoff, load_map, make_task, parse_map)
from fastibl.envs.binary import RISKY, SAFE, BinaryChoice
from fastibl.envs.fireman import E1, E2, E3
from fastibl.envs.grid import DOWN, RIGHT, UP, MapFormatError, format_map
from fastibl.envs.insider import (CONTINUE, WITHDRAW, Computer, ScenarioError, attack_outcome,
                                  load_scenario, parse_scenario)
from fastibl.envs.minimap import GREEN_REWARD, STEP_PENALTY, WALL_PENALTY, YELLOW_REWARD


class FixedDraw:
    def __init__(self, value):
        self.value = value

    def random(self):
        return self.value


# -- binary choice -------------------------------------------------------------

def test_binary_outcomes():
    assert binary_step(SAFE, 0.1) == 3.0
    assert binary_step(RISKY, 0.5) == 4.0
    assert binary_step(RISKY, 0.9) == 0.0
    with pytest.raises(ValueError):
        binary_step(2, 0.5)


def test_binary_risky_mean():
    env = BinaryChoice(np.random.default_rng(0))
    draws = [env.step(RISKY) for _ in range(100_000)]
    assert abs(np.mean(draws) - 3.2) < 0.05
    assert set(draws) == {0.0, 4.0}


# -- insider attack ------------------------------------------------------------

def test_insider_outcomes():
    c = Computer(reward=8.0, penalty=4.0, monitor_prob=0.3)
    assert attack_outcome(c, WITHDRAW, monitored=True) == 0.0
    assert attack_outcome(c, WITHDRAW, monitored=False) == 0.0
    assert attack_outcome(c, CONTINUE, monitored=False) == 8.0
    assert attack_outcome(c, CONTINUE, monitored=True) == -4.0


def test_default_scenario_shape():
    s = load_scenario()
    assert len(s.layouts) == 4 and all(len(layout) == 6 for layout in s.layouts)
    env = InsiderAttack(s, np.random.default_rng(0))
    assert env.default_utility == pytest.approx(1.1 * s.max_reward)


@pytest.mark.parametrize("bad", [
    {},
    {"layouts": [], "signaling": {}},
    {"layouts": [{"computers": [{"reward": 1, "penalty": 1, "monitor_prob": 0.5}]}],
     "signaling": {}},
    {"layouts": [{"computers": [{"reward": 1, "penalty": 1, "monitor_prob": 1.5}] * 6}],
     "signaling": {}},
])
def test_bad_scenarios(bad):
    with pytest.raises(ScenarioError):
        parse_scenario(bad)


def test_scenario_not_json(tmp_path):
    p = tmp_path / "s.json"
    p.write_text("{not json")
    with pytest.raises(ScenarioError):
        load_scenario(p)


# -- minimap -------------------------------------------------------------------

TINY = """5 3
#####
#Syg#
#...#
"""


def tiny_minimap():
    return Minimap(parse_map(TINY), np.random.default_rng(0), step_limit=50)


def test_minimap_rewards():
    env = tiny_minimap()
    env.reset()
    r = env.step(UP)
    assert r.rewards == (WALL_PENALTY,) and env.pos == (1, 1) and not r.delayed
    r = env.step(RIGHT)
    assert r.rewards == (YELLOW_REWARD,) and r.delayed and YELLOW_REWARD == 0.75
    r = env.step(RIGHT)
    assert r.rewards == (GREEN_REWARD,) and r.delayed and GREEN_REWARD == 0.25
    assert r.done  # every victim rescued


def test_minimap_step_penalty():
    env = tiny_minimap()
    env.reset()
    r = env.step(DOWN)
    assert r.rewards == (STEP_PENALTY,) and STEP_PENALTY == -0.01
    assert WALL_PENALTY == -0.05


def test_minimap_encoding():
    grid = parse_map(TINY)
    obs = encode_grid_observation("minimap", grid, [(1, 2)], victims={(2, 1): "y", (3, 1): "g"})
    assert obs[2, 1] == 240 and obs[1, 2] == 150 and obs[1, 3] == 200 and obs[0, 0] == 100
    assert obs[1, 1] == 0  # empty start cell


def test_minimap_incremental_observation_matches_full_encoding():
    env = tiny_minimap()
    env.reset()
    for a in (DOWN, RIGHT, UP):
        env.step(a)
        full = encode_grid_observation("minimap", env.grid, [env.pos], victims=env.victims)
        np.testing.assert_array_equal(env.obs, full)


def test_shipped_minimap():
    grid = load_map(default="minimap.txt")
    assert (grid.width, grid.height) == (93, 50)
    assert grid.count("g") == 24 and grid.count("y") == 10
    mini = load_map(default="minimap_mini.txt")
    assert (mini.width, mini.height) == (10, 10)


def test_step_limit_ends_episode():
    env = tiny_minimap()
    env.reset(step_limit=2)
    env.step(UP)
    assert env.step(UP).done


# -- fireman -------------------------------------------------------------------

@pytest.mark.parametrize("a1,a2,value", [
    (E1, E1, 11.0), (E1, E2, -30.0), (E1, E3, 0.0),
    (E2, E1, -30.0), (E2, E3, 6.0),
    (E3, E1, 0.0), (E3, E2, 0.0), (E3, E3, 5.0),
])
def test_fireman_payoff_matrix(a1, a2, value):
    assert fireman_payoff(a1, a2, np.random.default_rng(0)) == value


def test_fireman_stochastic_cell():
    assert fireman_payoff(E2, E2, FixedDraw(0.2)) == 14.0
    assert fireman_payoff(E2, E2, FixedDraw(0.7)) == 0.0
    rng = np.random.default_rng(1)
    draws = [fireman_payoff(E2, E2, rng) for _ in range(20_000)]
    assert set(draws) == {0.0, 14.0}
    assert abs(np.mean([d == 14.0 for d in draws]) - 0.5) < 0.02


def test_fireman_observation_hides_partner():
    env = Fireman(rng=np.random.default_rng(0))
    env.reset()
    x2, y2 = env.pos[1]
    obs = encode_grid_observation("fireman", env.grid, env.pos, fire=env.fire,
                                  items=env.item_cells, viewer=0)
    assert obs[y2, x2] == 0
    x1, y1 = env.pos[0]
    assert obs[y1, x1] == 240
    assert env.observe(0) == __import__("fastibl").state_from_grid(obs)


def test_fireman_episode_pays_once_both_wait():
    env = Fireman(rng=np.random.default_rng(0))
    env.reset()
    env.holding = [E3, E3]
    env.pos = [env.fire, env.fire]
    r = env.step([None, None])  # already standing on the fire
    assert r.delayed and r.done and r.rewards == (5.0, 5.0)


# -- cooperative navigation ----------------------------------------------------

LANDMARKS = [(1, 1), (5, 5), (8, 2)]


def test_coopnav_all_on_one_landmark():
    assert coopnav_reward([(5, 5)] * 3, LANDMARKS) == 1.0


def test_coopnav_three_distinct():
    assert coopnav_reward(LANDMARKS, LANDMARKS) == 3.0


def test_coopnav_none_covered():
    assert coopnav_reward([(0, 0), (0, 1), (2, 2)], LANDMARKS) == 0.0


def test_coopnav_reward_range():
    rng = np.random.default_rng(2)
    for _ in range(500):
        pos = [tuple(rng.integers(0, 4, 2)) for _ in range(3)]
        lm = [tuple(rng.integers(0, 4, 2)) for _ in range(3)]
        assert coopnav_reward(pos, lm) in {0.0, 1.0, 2.0, 3.0}


def test_coopnav_landmark_encoding():
    env = CooperativeNavigation(rng=np.random.default_rng(0))
    obs = encode_grid_observation("coopnav", env.grid, [(0, 0), (0, 1), (0, 2)],
                                  landmarks=LANDMARKS)
    assert obs[5, 5] == 50  # L2
    assert obs[1, 1] == 40 and obs[2, 8] == 60
    assert obs[0, 0] == 240 and obs[1, 0] == 200 and obs[2, 0] == 150


def test_coopnav_done_when_all_covered():
    env = CooperativeNavigation(rng=np.random.default_rng(0))
    env.reset()
    env.landmarks = [(1, 1), (5, 5), (8, 2)]
    env.pos = [(0, 1), (5, 4), (8, 3)]
    r = env.step([RIGHT, DOWN, UP])
    assert r.rewards == (3.0, 3.0, 3.0) and r.done and r.delayed


# -- maps and registry ---------------------------------------------------------

@pytest.mark.parametrize("text", ["", "3 2\n...\n", "2 1\n.Q\n", "x y\n..\n", "3 1\n..\n"])
def test_bad_maps(text):
    with pytest.raises(MapFormatError):
        parse_map(text)


def test_map_roundtrip():
    grid = parse_map(TINY)
    assert format_map(parse_map(format_map(grid))) == format_map(grid)


def test_registry():
    rng = np.random.default_rng(0)
    for name in TASKS:
        assert make_task(name, rng).name == name
    with pytest.raises(ValueError):
        make_task("pacman", rng)
