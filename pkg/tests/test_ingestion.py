from pathlib import Path

import pytest

from disagree_audit.domain import GroupPartition, LabelSpace, validate_records
from disagree_audit.ingestion import (IngestError, Schema, export_interchange,
                                      interchange_domain, join_responses, load_interchange,
                                      load_profiles, load_responses, pooled_sp_counts,
                                      summarize_dataset)
from disagree_audit.simulator import load_scenario, sample_population
from disagree_audit.domain import CriticFeedback

FIXTURES = Path(__file__).parent / "fixtures"
MINI = FIXTURES / "mini_compas"


@pytest.fixture
def schema():
    return Schema.load(MINI / "schema.json")


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_header_only_profiles(tmp_path, schema):
    path = write(tmp_path, "p.csv", "id,sex,race,decile_score,two_year_recid\n")
    assert load_profiles(path, schema) == []


def test_unknown_token_strict(tmp_path, schema):
    strict = Schema.from_dict({
        "profiles": {"record_id": "id", "system_label": "score",
                     "attributes": [{"column": "race", "categories": ["C", "O"],
                                     "values": {"Caucasian": "C", "Other": "O"}}]},
        "responses": {"critic_id": "w", "response": "a"}})
    path = write(tmp_path, "p.csv", "id,race,score\n1,Caucasian,7\n2,Martian,3\n")
    with pytest.raises(IngestError, match="Martian") as err:
        load_profiles(path, strict)
    assert ":3:" in str(err.value)
    lenient = Schema.from_dict({**{"profiles": {"record_id": "id", "system_label": "score",
                                                "strict": False,
                                                "attributes": [{"column": "race",
                                                                "categories": ["C", "O"],
                                                                "values": {"Caucasian": "C"}}]}},
                                "responses": {"critic_id": "w", "response": "a"}})
    rows = load_profiles(path, lenient)
    assert [r.record_id for r in rows] == ["1"]


def test_profile_errors(tmp_path, schema):
    missing = write(tmp_path, "m.csv", "id,sex,decile_score,two_year_recid\n")
    with pytest.raises(IngestError, match="race"):
        load_profiles(missing, schema)
    dup = write(tmp_path, "d.csv", "id,sex,race,decile_score,two_year_recid\n"
                "a,Male,Other,3,0\na,Male,Other,4,0\n")
    with pytest.raises(IngestError, match="duplicate"):
        load_profiles(dup, schema)


def test_binarization_and_groups(schema):
    rows = {r.record_id: r for r in load_profiles(MINI / "profiles.csv", schema)}
    assert len(rows) == 40
    r0 = rows["d000"]          # Male, Other, decile 3
    assert r0.system_label == 0 and r0.group == 2
    r1 = rows["d001"]          # Female, Caucasian, decile 10
    assert r1.system_label == 1 and r1.group == 1
    assert schema.groups.names[0] == "Caucasian/Male"


def test_join_and_summary(schema):
    profiles = load_profiles(MINI / "profiles.csv", schema)
    feedbacks = join_responses(profiles, load_responses(MINI / "responses.csv", schema))
    assert [f.critic_id for f in feedbacks] == [f"w{i:02d}" for i in range(8)]
    for f in feedbacks:
        assert validate_records(f.records, schema.labels, schema.groups).clean
    summary = summarize_dataset(feedbacks)
    assert summary.critics == 8 and summary.records_per_critic == {20: 8}
    assert sum(summary.group_occupancy.values()) == 160
    pooled = pooled_sp_counts(profiles, schema.labels, schema.groups)
    assert sum(map(sum, pooled)) == 40


def test_echo_and_complement_critics(tmp_path, schema):
    profiles = load_profiles(MINI / "profiles.csv", schema)
    lines = ["worker,id,answer"]
    for p in profiles:
        lines.append(f"echo,{p.record_id},{'yes' if p.system_label else 'no'}")
        lines.append(f"contrarian,{p.record_id},{'no' if p.system_label else 'yes'}")
    responses = load_responses(write(tmp_path, "r.csv", "\n".join(lines) + "\n"), schema)
    by_id = {f.critic_id: f for f in join_responses(profiles, responses)}
    assert all(r.disagreement == 0 for r in by_id["echo"].records)
    assert all(r.disagreement == 1 for r in by_id["contrarian"].records)


def test_response_errors(tmp_path, schema):
    profiles = load_profiles(MINI / "profiles.csv", schema)
    dangling = load_responses(write(tmp_path, "r.csv", "worker,id,answer\nw,zzz,yes\nw,yyy,no\n"),
                              schema)
    with pytest.raises(IngestError, match="yyy, zzz"):
        join_responses(profiles, dangling)
    with pytest.raises(IngestError, match="maybe"):
        load_responses(write(tmp_path, "b.csv", "worker,id,answer\nw,d000,maybe\n"), schema)
    with pytest.raises(IngestError, match="twice"):
        load_responses(write(tmp_path, "t.csv", "worker,id,answer\nw,d000,no\nw,d000,no\n"),
                       schema)


def test_empty_summary():
    summary = summarize_dataset([])
    assert (summary.critics, summary.records, summary.group_occupancy) == (0, 0, {})


def test_interchange_round_trip(tmp_path, schema):
    profiles = load_profiles(MINI / "profiles.csv", schema)
    feedbacks = join_responses(profiles, load_responses(MINI / "responses.csv", schema))
    export_interchange(feedbacks, tmp_path / "ic.csv")
    assert load_interchange(tmp_path / "ic.csv") == feedbacks


def test_simulator_export_round_trip(tmp_path):
    spec = load_scenario(FIXTURES / "scenario_k3.json")
    records = sample_population(spec)
    feedbacks = [CriticFeedback("sim-a", records[:80]), CriticFeedback("sim-b", records[80:])]
    export_interchange(feedbacks, tmp_path / "ic.csv")
    loaded = load_interchange(tmp_path / "ic.csv")
    assert loaded == feedbacks
    assert summarize_dataset(loaded) == summarize_dataset(feedbacks)
    labels, groups = interchange_domain(loaded)
    assert labels == LabelSpace(3) and groups == GroupPartition.numbered(2)


def test_schema_validation():
    with pytest.raises(IngestError, match="missing key"):
        Schema.from_dict({"profiles": {}})
    with pytest.raises(IngestError, match="unknown categories"):
        Schema.from_dict({"profiles": {"record_id": "id", "system_label": "s",
                                       "attributes": [{"column": "g", "categories": ["a", "b"],
                                                       "values": {"x": "c"}}]},
                          "responses": {"critic_id": "w", "response": "a"}})
