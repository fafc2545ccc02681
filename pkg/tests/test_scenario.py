import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdbloch.constants import HBAR
from qdbloch.coulomb import VANISHING
from qdbloch.errors import ConfigError
from qdbloch.scenario import (
    REGISTRY,
    Scenario,
    apply_overrides,
    dump_scenario,
    get_registered,
    load_scenario,
    parse_override,
    parse_pairs,
    resolve,
)


def test_defaults_are_valid_two_level():
    s = Scenario()
    assert s.d == 2
    assert s.valence_energies() == (0.0,)
    rho = s.initial_matrix()
    assert rho[1, 1] == 1 and np.trace(rho) == 1


def test_valence_ladder_deepest_first():
    s = Scenario(n_v=3, valence_splitting=1.5)
    assert s.valence_energies() == (-3.0, -1.5, 0.0)
    ec, ev = s.energies_joule()
    assert ec[0] == pytest.approx(HBAR * s.omega0)
    assert ev[0] == pytest.approx(-3.0 * HBAR * s.omega0)


def test_explicit_valence_energies():
    s = Scenario(n_v=2, eps_v=(-0.7, 0.0))
    assert s.valence_energies() == (-0.7, 0.0)


def test_custom_initial_state():
    s = REGISTRY["field-free-remark"]
    rho = s.initial_matrix()
    assert np.allclose(np.diag(rho).real, [0.3, 0.2, 0.5])
    assert rho[1, 2] == rho[2, 1] == 0.2
    assert np.all(np.linalg.eigvalsh(rho) >= 0)


@pytest.mark.parametrize(
    "kw",
    [
        dict(n_v=0),
        dict(eps_c=(1.0, 2.0)),
        dict(n_v=2, eps_v=(0.0,)),
        dict(mode="half"),
        dict(boundary="periodic"),
        dict(tau=0.0),
        dict(R0=-1.0),
        dict(axis=3),
        dict(n_left=2),
        dict(probe_cell=500),
        dict(record_stride=0),
        dict(initial_state="thermal"),
        dict(initial_state="custom", init_populations=(1.0,)),
        dict(initial_state="custom", init_populations=(1.5, -0.5)),
        dict(initial_state="custom", init_populations=(0.5, 0.5), init_valence_coherence=0.1),
    ],
)
def test_invalid_scenarios_rejected(kw):
    with pytest.raises(ConfigError):
        Scenario(**kw)


def test_parse_pairs_comments_and_errors():
    pairs = parse_pairs(["# header", "", "R0 = 1e-21  # J", "mode=vanishing_intraband"])
    assert pairs == {"R0": "1e-21", "mode": "vanishing_intraband"}
    with pytest.raises(ConfigError, match="duplicate"):
        parse_pairs(["k = 1", "k = 2"])
    with pytest.raises(ConfigError, match="expected"):
        parse_pairs(["just words"])


def test_overrides_typed():
    s = apply_overrides(Scenario(), {"n_v": "2", "R0": "2e-21", "complex_phases": "yes", "eps_c": "1.1"})
    assert s.n_v == 2 and s.R0 == 2e-21 and s.complex_phases is True and s.eps_c == (1.1,)
    with pytest.raises(ConfigError, match="unknown"):
        apply_overrides(Scenario(), {"R00": "1"})
    with pytest.raises(ConfigError, match="cannot parse"):
        apply_overrides(Scenario(), {"n_v": "two"})
    with pytest.raises(ConfigError):
        apply_overrides(Scenario(), {"complex_phases": "maybe"})
    assert parse_override("R0 = 3e-21") == ("R0", "3e-21")
    with pytest.raises(ConfigError):
        parse_override("R0")


def test_load_with_base(tmp_path):
    f = tmp_path / "mine.scn"
    f.write_text("base = coulomb-strong\nname = mine\nmode = vanishing_intraband\n")
    s = load_scenario(f)
    ref = REGISTRY["coulomb-strong"]
    assert s.name == "mine" and s.mode == VANISHING
    assert s.R0 == ref.R0 and s.carrier_frequency == ref.carrier_frequency
    assert resolve(str(f)) == s
    with pytest.raises(ConfigError):
        resolve(str(tmp_path / "absent.scn"))
    f.write_text("base = nonsense\n")
    with pytest.raises(ConfigError, match="unknown registry"):
        load_scenario(f)


@pytest.mark.parametrize("name", sorted(REGISTRY))
def test_registry_round_trip(tmp_path, name):
    s = get_registered(name)
    assert s.name == name
    f = tmp_path / "s.scn"
    f.write_text(dump_scenario(s))
    assert load_scenario(f) == s


@settings(max_examples=50, deadline=None)
@given(
    R0=st.floats(0, 1e-20, allow_subnormal=False),
    k=st.floats(0, 6, allow_subnormal=False),
    tau=st.floats(1e-15, 1e-12),
    n_v=st.integers(1, 3),
    mode=st.sampled_from(["full", "vanishing_intraband"]),
)
def test_dump_load_round_trip_property(tmp_path_factory, R0, k, tau, n_v, mode):
    s = Scenario(R0=R0, k=k, tau=tau, n_v=n_v, mode=mode)
    f = tmp_path_factory.mktemp("rt") / "s.scn"
    f.write_text(dump_scenario(s))
    assert load_scenario(f) == s


def test_registry_contents():
    assert {"sit-2level", "sit-3level-resonant", "sit-3level-detuned", "coulomb-weak", "coulomb-strong",
            "ablation-free", "ablation-strong", "field-free-remark"} <= set(REGISTRY)
    assert REGISTRY["sit-3level-resonant"].valence_energies() == (-1.0, 0.0)
    assert REGISTRY["sit-3level-detuned"].valence_energies() == (-2.0, 0.0)
    assert REGISTRY["ablation-strong"].mode == VANISHING
