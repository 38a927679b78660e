import json
import os
from pathlib import Path

import jsonschema
import pytest

import discourse

DATA = Path(discourse.DATA_DIR)
SCHEMA_PATH = os.environ.get(
    "DISCOURSE_SCHEMA",
    str(Path(__file__).resolve().parents[2] / "protocol" / "protocol.schema.json"))


@pytest.fixture(scope="module")
def validator():
    with open(SCHEMA_PATH) as f:
        schema = json.load(f)
    jsonschema.Draft202012Validator.check_schema(schema)
    return jsonschema.Draft202012Validator(schema)


def test_golden_replay_matches(validator):
    r = discourse.replay(str(DATA / "scripts/oranges.jsonl"),
                         golden=str(DATA / "golden/oranges.golden.jsonl"))
    assert r["diffs"] == []
    assert r["system_turns"] == 7
    for record in r["transcript"]:
        validator.validate(record)
    assert r["transcript"][-1]["kind"] == "end"
    assert r["transcript"][-1]["payload"]["violations"] == 0


def test_session_round_trip(validator):
    s = discourse.Session(policy="cooperative")
    for record in s.hello():
        validator.validate(record)
    msg = {"kind": "user-event", "tick": 1,
           "payload": {"utt": "1", "speaker": "USER", "tick": 1, "turn": "release",
                       "acts": [{"type": "YNQ", "content": "(:AT ENGINE-E1 AVON)"}]}}
    validator.validate(msg)
    out = s.send(msg)
    for record in out:
        validator.validate(record)
    acts = [a for r in out if r["kind"] == "utterance" for a in r["payload"]["acts"]]
    assert {"type": "INFORM-IF", "content": "(YES (:AT ENGINE-E1 AVON))"} in [
        {"type": a["type"], "content": a["content"]} for a in acts]
    end = s.send({"kind": "finish"})
    assert end[-1]["kind"] == "end"
    assert s.ended


def test_bad_lines_get_error_records(validator):
    s = discourse.Session()
    out = s.send("not json at all")
    assert len(out) == 1 and out[0]["kind"] == "error"
    validator.validate(out[0])
    out = s.send({"kind": "user-event", "tick": 1,
                  "payload": {"utt": "1", "speaker": "USER", "tick": 1, "turn": "release",
                              "acts": [{"type": "GREET"}]}})
    assert out[0]["kind"] == "error"
    # The session is still usable.
    assert s.send({"kind": "snapshot"})[0]["payload"]["utt"] == "current"


def test_kb_and_terms():
    assert discourse.kb_query("(:AT ORANGES CORNING)") == "YES"
    assert discourse.kb_query("(:ISA ORANGES ENGINE)") == "NO"
    assert discourse.kb_query("(:AT ORANGES AVON)") == "UNKNOWN"
    assert discourse.kb_query("(:AT ENGINE-E2 BATH)", world="two_engines") == "YES"
    assert discourse.parse_term("( :AT  ORANGES\nCORNING )") == "(:AT ORANGES CORNING)"
    with pytest.raises(discourse.DiscourseError):
        discourse.parse_term("(:AT")
    with pytest.raises(discourse.DiscourseError):
        discourse.kb_query("(:AT ORANGES ?X)")


def test_command_records_validate(validator):
    rec = discourse.parse_command("inform! (LOAD ORANGES BOXCAR-B1 CORNING) keep", "u1", 3)
    validator.validate({"kind": "user-event", "payload": rec, "tick": 3})
    assert rec["acts"][0]["marks"] == ["imperative"]


def test_variant_replay():
    r = discourse.replay(str(DATA / "scripts/variant.jsonl"),
                         golden=str(DATA / "golden/variant.golden.jsonl"))
    assert r["diffs"] == []
