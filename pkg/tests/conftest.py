import numpy as np
import pytest

from priorstab import DecisionProblem, Prior

# Conditional mean returns of the six stock portfolios across the four
# regimes, used as a regression anchor throughout the suite.
PORTFOLIO_ACTS = (
    "equity_core",
    "balanced_equity",
    "multi_asset",
    "bond_dominant",
    "real_asset_tilt",
    "equal_weight",
)
REGIME_STATES = ("Expansion", "Recovery", "Stagnation", "Recession")
PORTFOLIO_UTILITIES = np.array(
    [
        [0.021, 0.059, -0.011, -0.049],
        [0.018, 0.051, -0.011, -0.037],
        [0.015, 0.051, -0.011, -0.029],
        [0.006, 0.024, -0.007, -0.024],
        [0.014, 0.042, -0.008, -0.045],
        [0.015, 0.041, -0.009, -0.024],
    ]
)


@pytest.fixture
def toy_problem():
    return DecisionProblem(("a", "b"), ("s1", "s2"), [[1.0, 0.0], [0.0, 1.0]])


@pytest.fixture
def toy_prior():
    return Prior("ref", [0.7, 0.3])


@pytest.fixture
def portfolio_problem():
    return DecisionProblem(PORTFOLIO_ACTS, REGIME_STATES, PORTFOLIO_UTILITIES)


@pytest.fixture
def uniform4():
    return Prior("uniform", [0.25, 0.25, 0.25, 0.25])


def random_problem(rng, max_acts=5, max_states=5, min_acts=2, min_states=2):
    n = int(rng.integers(min_acts, max_acts + 1))
    m = int(rng.integers(min_states, max_states + 1))
    utilities = rng.uniform(-1.0, 1.0, size=(n, m))
    acts = tuple(f"act{i}" for i in range(n))
    states = tuple(f"state{j}" for j in range(m))
    return DecisionProblem(acts, states, utilities)


def random_prior(rng, m, name="p"):
    return Prior(name, rng.dirichlet(np.ones(m)))


@pytest.fixture
def make_problem():
    return random_problem


@pytest.fixture
def make_prior():
    return random_prior


# ---------------------------------------------------------------------------
# Synthetic return panel with four planted (return, volatility) regimes.

PLANTED_CENTERS = {
    "Expansion": (0.040, 0.010),
    "Recovery": (0.025, 0.030),
    "Stagnation": (0.000, 0.020),
    "Recession": (-0.045, 0.045),
}
PLANTED_RET_NOISE = 0.004
PLANTED_VOL_NOISE = 0.0025


def build_planted_panel(seed=777, months=120):
    """120 months drawn from four well-separated planted regimes.

    Separation between regime centers is several within-cluster standard
    deviations in both features, so any reasonable clustering recovers the
    planted partition.
    """
    rng = np.random.default_rng(seed)
    names = list(PLANTED_CENTERS)
    per_regime = months // 4
    planted = np.repeat(np.arange(4), per_regime)
    rng.shuffle(planted)
    planted_names = [names[g] for g in planted]

    ret = np.array([PLANTED_CENTERS[n][0] for n in planted_names])
    ret = ret + rng.normal(0.0, PLANTED_RET_NOISE, months)
    vol = np.array([PLANTED_CENTERS[n][1] for n in planted_names])
    vol = np.abs(vol + rng.normal(0.0, PLANTED_VOL_NOISE, months))

    bond = 0.2 * ret + rng.normal(0.002, 0.002, months)
    commodity = rng.normal(0.0, 0.01, months)

    month_labels = []
    year, month = 2015, 1
    for _ in range(months):
        month_labels.append(f"{year:04d}-{month:02d}")
        month += 1
        if month > 12:
            year, month = year + 1, 1

    assets = ("market", "bond_fund", "commodity_fund")
    returns = np.column_stack([ret, bond, commodity])
    return {
        "months": tuple(month_labels),
        "assets": assets,
        "returns": returns,
        "volatility": vol,
        "planted_names": planted_names,
    }


def planted_monthly_csv(panel):
    lines = ["date," + ",".join(panel["assets"]) + ",market_vol"]
    for i, month in enumerate(panel["months"]):
        cells = [repr(float(x)) for x in panel["returns"][i]]
        cells.append(repr(float(panel["volatility"][i])))
        lines.append(month + "," + ",".join(cells))
    return "\n".join(lines) + "\n"


PLANTED_WEIGHTS_CSV = (
    "portfolio,market,bond_fund,commodity_fund\n"
    "all_market,1.0,0.0,0.0\n"
    "defensive_mix,0.2,0.7,0.1\n"
    "balanced,0.4,0.4,0.2\n"
)


@pytest.fixture(scope="session")
def planted_panel():
    return build_planted_panel()
