import anyconfig
import pytest

import dbinfer
from dbinfer.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, anyconfig.loads(out, ac_parser="json") if out.strip().startswith("{") else out


def number(value):
    return dbinfer.Fraction(value["num"], value["den"])


@pytest.mark.parametrize("name, expected", [("household", -1), ("job-training", 1), ("campaign-ad", 0)])
def test_estimands(capsys, name, expected):
    code, report = run(capsys, "estimands", "--corpus", name, "--contrast", "1,0")
    assert code == 0
    assert number(report["contrasts"][0]["aeed"]) == expected


def test_estimands_positivity_failure_still_writes_the_report(tmp_path):
    anyconfig.dump(
        {"N": 2, "kind": "explicit", "support": [[1, 0], [1, 1]], "mass_num": [1, 1], "mass_den": [2, 2]},
        str(tmp_path / "design.json"),
        ac_parser="json",
    )
    anyconfig.dump({"kind": "individualistic", "N": 2}, str(tmp_path / "mapping.json"), ac_parser="json")
    anyconfig.dump(
        {"kind": "rule", "rule": {"name": "household"}, "space": {"N": 2, "rule": "product"}},
        str(tmp_path / "schedule.json"),
        ac_parser="json",
    )
    output = tmp_path / "report.json"
    code = main(
        [
            "estimands",
            "--design", str(tmp_path / "design.json"),
            "--mapping", str(tmp_path / "mapping.json"),
            "--schedule", str(tmp_path / "schedule.json"),
            "--contrast", "1,0",
            "--output", str(output),
        ]
    )
    assert code == 2
    report = anyconfig.load(str(output))
    assert report["contrasts"][0]["trim_suggestion"] == [1]
    assert report["contrasts"][0]["aeed"] is None


def test_check_household(capsys):
    code, report = run(capsys, "check", "--corpus", "household")
    assert code == 3
    assert report["nurva"]["holds"]
    counterexample = report["sutva"]["counterexample"]
    assert (counterexample["unit"], counterexample["z"], counterexample["z_prime"]) == (0, [1, 0], [1, 1])


def test_check_swapped(capsys):
    code, report = run(capsys, "check", "--corpus", "household-swapped")
    assert code == 0
    assert report["nurva"]["holds"] and report["sutva"]["holds"]


def test_check_hidden_variation(capsys):
    code, report = run(capsys, "check", "--corpus", "hidden-variation")
    assert code == 3
    assert report["nurva"]["holds"] and not report["sutva"]["holds"]


def test_estimate_a_drawn_household(capsys):
    code, report = run(capsys, "estimate", "--corpus", "household", "--draw", "7", "--target", "aeed:1,0")
    assert code == 0
    assert number(report["point"]) == -1
    assert report["zero_joint_pairs"] > 0


def test_estimate_reports_the_sample_mean(capsys):
    code, report = run(capsys, "estimate", "--corpus", "srswor", "--draw", "3", "--target", "aepo:1")
    assert code == 0
    assert number(report["point"]) == number(report["sample_mean"])


def test_estimate_from_a_data_file(tmp_path, capsys):
    anyconfig.dump({"z": [1, 0, 1, 0], "y": [3, 0, 4, 0]}, str(tmp_path / "data.json"), ac_parser="json")
    code, report = run(
        capsys, "estimate", "--corpus", "srswor", "--data", str(tmp_path / "data.json"), "--target", "aepo:1"
    )
    assert code == 0
    assert number(report["point"]) == dbinfer.Fraction(7, 2)


def test_missing_data_file(tmp_path):
    assert main(["estimate", "--corpus", "srswor", "--data", str(tmp_path / "missing.json")]) == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["estimands", "--corpus", "nowhere"],
        ["estimands", "--corpus", "household", "--design", "design.json"],
        ["estimands", "--corpus", "household", "--contrast", "1"],
        ["probabilities"],
    ],
)
def test_input_errors(argv):
    assert main(argv) == 1


def test_simulate_exact_bias(capsys):
    code, report = run(capsys, "simulate", "--corpus", "household", "--target", "aepo:0", "--exact")
    assert code == 0
    assert number(report["bias"]) == 0
    assert number(report["expected"]) == 1


def test_simulate_is_deterministic(tmp_path):
    for name in ("first.json", "second.json"):
        assert main(["simulate", "--corpus", "household", "--R", "100", "--seed", "5", "-o", str(tmp_path / name)]) == 0
    assert (tmp_path / "first.json").read_bytes() == (tmp_path / "second.json").read_bytes()


def test_simulate_sweep_plot_data(tmp_path):
    output, plot = tmp_path / "sweep.json", tmp_path / "sweep.csv"
    code = main(
        [
            "simulate", "--sweep", "partial-interference", "--sizes", "4,8",
            "--R", "50", "--seed", "1", "-o", str(output), "--plot-data", str(plot),
        ]
    )
    assert code == 0
    assert [row["N"] for row in anyconfig.load(str(output))["rows"]] == [4, 8]
    assert plot.read_text().splitlines()[0].startswith("N,")


def test_simulate_coverage(capsys):
    code, report = run(
        capsys, "simulate", "--corpus", "household", "--target", "aeed:1,0", "--coverage", "--R", "200"
    )
    assert code == 0
    assert report["coverage"] == 1.0


def test_probabilities_carryover(capsys):
    code, report = run(capsys, "probabilities", "--corpus", "voter-carryover", "--label", "1")
    assert code == 0
    assert [number(x) for x in report["marginal"]["1"]] == [
        dbinfer.Fraction(1, 2), dbinfer.Fraction(3, 4), dbinfer.Fraction(3, 4), dbinfer.Fraction(3, 4)
    ]
    assert report["provenance"]["kind"] == "exact-enumeration"


def test_probabilities_rebel_survey(capsys):
    code, report = run(capsys, "probabilities", "--corpus", "rebel-survey", "--label", "1")
    assert {number(x) for x in report["marginal"]["1"]} == {dbinfer.Fraction(3, 10)}


def test_probabilities_household(capsys):
    code, report = run(capsys, "probabilities", "--corpus", "household", "--label", "1")
    assert [x["decimal"] for x in report["marginal"]["1"]] == ["0.5", "0.5"]
    assert number(report["joint"]["1,1"][0][1]) == 0
    assert report["zero_joint_pairs"]["1"] == [[0, 1], [1, 0]]


def test_probabilities_csv(capsys):
    code, out = run(capsys, "probabilities", "--corpus", "household", "--label", "1", "--format", "csv")
    assert code == 0
    assert out.splitlines() == ["unit,label,pi", "0,1,0.5", "1,1,0.5"]


def test_cap_flag_is_scoped_to_the_run(capsys):
    cap = dbinfer.config.settings.cap
    assert main(["estimands", "--corpus", "rebel-survey", "--cap", "10"]) == 1
    assert dbinfer.config.settings.cap == cap


def test_estimands_csv_lists_unit_epos(capsys):
    code, out = run(capsys, "estimands", "--corpus", "household", "--contrast", "1,0", "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "kind,unit,label,value,positivity"
    assert lines[1:5] == ["epo,0,0,1,True", "epo,1,0,1,True", "epo,0,1,0,True", "epo,1,1,0,True"]
    assert lines[-1].startswith("aeed,")


@pytest.mark.parametrize("name", ["household", "job-training", "voter-carryover"])
def test_estimand_reports_parse_back_exactly(capsys, name):
    code, report = run(capsys, "estimands", "--corpus", name, "--contrast", "1,0")
    assert code == 0
    design, space, mapping, schedule = dbinfer.corpus.load_corpus(name)
    expected = dbinfer.estimands.estimand_report(design, mapping, schedule, contrasts=[(1, 0)])
    for d, value in expected.aepo.items():
        assert number(report["aepo"][str(d)]) == value
        assert [number(x) for x in report["epo"][str(d)]] == expected.epo[d]
    assert number(report["contrasts"][0]["aeed"]) == expected.contrasts[0].aeed


def test_help_states_unit_numbering():
    assert "numbered from 0" in dbinfer.cli.parser().format_help()
