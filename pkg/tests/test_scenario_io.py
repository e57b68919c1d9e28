import textwrap

import pytest
import yaml

from onewaypos.airsim import Delay, run_scenario
from onewaypos.corpus import bundled_corpus
from onewaypos.errors import ValidationError
from onewaypos.scenario_io import _Loader, build_scenario, dump_scenario, load_scenario, parse_scenario

MINIMAL = textwrap.dedent("""\
    meta: {schema_version: 1, name: tiny, seed: 3, dims: 2, c: 3.0e8}
    stations:
      - {id: S1, pos: [-90, -120], schedule: [0.0]}
      - {id: S2, pos: [120, -90], schedule: [0.0]}
      - {id: S3, pos: [0, 150], schedule: [0.0]}
    terminal:
      true_pos: [0, 0]
      verifier: {error_limit_m: 1.0}
""")


def test_minimal_file_loads(tmp_path):
    p = tmp_path / "tiny.yaml"
    p.write_text(MINIMAL)
    s = load_scenario(p)
    assert (s.name, s.dims, s.rng_seed, len(s.stations)) == ("tiny", 2, 3, 3)
    assert run_scenario(s).result.accepted


def test_seed_override():
    assert parse_scenario(MINIMAL, seed_override=77).rng_seed == 77


def test_negative_delay_names_path():
    text = MINIMAL + "attacks:\n  - {kind: delay, delay: -1.0e-6}\n"
    with pytest.raises(ValidationError) as exc:
        parse_scenario(text)
    assert exc.value.path == "attacks[0].delay"
    assert exc.value.line == 10


def test_negative_per_station_delay():
    text = MINIMAL + "attacks:\n  - kind: delay\n    delay: {S2: -5.0}\n"
    with pytest.raises(ValidationError) as exc:
        parse_scenario(text)
    assert exc.value.path == "attacks[0].delay.S2"


def test_two_stations_load_then_abort():
    text = MINIMAL.replace("  - {id: S3, pos: [0, 150], schedule: [0.0]}\n", "")
    s = parse_scenario(text)
    assert len(s.stations) == 2
    assert run_scenario(s).result.code == "TooFewBroadcasts"


@pytest.mark.parametrize("mutate,path", [
    (lambda d: d["meta"].update(colour="red"), "meta.colour"),
    (lambda d: d["meta"].pop("dims"), "meta.dims"),
    (lambda d: d["meta"].update(schema_version=2), "meta.schema_version"),
    (lambda d: d["stations"][1].update(pos=[1.0]), "stations[1].pos"),
    (lambda d: d["stations"][2].update(id="S1"), "stations[2].id"),
    (lambda d: d["terminal"]["verifier"].update(error_limit_m=0), "terminal.verifier.error_limit_m"),
    (lambda d: d.update(protocol="telepathy"), "protocol"),
    (lambda d: d.update(attacks=[{"kind": "teleport"}]), "attacks[0].kind"),
])
def test_validation_paths(mutate, path):
    doc = yaml.load(MINIMAL, Loader=_Loader)
    mutate(doc)
    with pytest.raises(ValidationError) as exc:
        build_scenario(doc)
    assert exc.value.path == path


def test_unsigned_exponent_is_a_float():
    assert yaml.load("[3e8, 3.0e8, 1.5e-6, 7, '3e8']", Loader=_Loader) == [3e8, 3e8, 1.5e-6, 7, "3e8"]


def test_parse_error_reports_line():
    with pytest.raises(ValidationError) as exc:
        parse_scenario("meta: {name: [unclosed\nstations: []\n")
    assert exc.value.line is not None


def test_delay_seconds_become_ticks():
    s = parse_scenario(MINIMAL + "attacks:\n  - {kind: delay, delay: {S1: 1.0e-6}}\n")
    assert s.attacks == (Delay((("S1", 1_000_000),)),)


def test_bundled_documents_round_trip():
    for name, doc in bundled_corpus().items():
        text = dump_scenario(doc)
        assert yaml.safe_load(text) == doc
        assert parse_scenario(text) == build_scenario(doc), name
