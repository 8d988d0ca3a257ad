import csv
import io
import json
import subprocess
import sys
from argparse import Namespace

import jsonschema
import pytest

from jordanlab.cli import CSV_COLUMNS, RunConfig, main, resolve_config
from jordanlab.dsl import _schema


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def validate(doc, name):
    jsonschema.Draft202012Validator(_schema(name)).validate(doc)


# -- compute ---------------------------------------------------------------------

def test_compute_s5_json():
    code, text = run("compute", "S5", "--json", "--no-timing")
    assert code == 0
    doc = json.loads(text)
    validate(doc, "jordan_report.schema.json")
    assert (doc["J"], doc["Jbar"], doc["method"]) == (120, 20, "full-enumeration")


def test_compute_c7_text():
    code, text = run("compute", "C7")
    assert code == 0
    assert "J = 1, Jbar = 1" in text


def test_compute_swap_uses_socle_shortcut():
    code, text = run("compute", "(A5 * A5) : C2 [swap]", "--json", "--no-timing")
    assert code == 0
    doc = json.loads(text)
    validate(doc, "jordan_report.schema.json")
    assert (doc["J"], doc["method"]) == (7200, "socle-shortcut")


def test_compute_catalog_label():
    code, text = run("compute", "heis-54", "--json", "--no-timing")
    doc = json.loads(text)
    assert code == 0 and doc["label"] == "heis-54" and doc["Jbar"] == 6


def test_compute_bound_only_exit_3():
    code, text = run("compute", "PSL(2,7) * C2", "--order-cap", "100", "--json", "--no-timing")
    assert code == 3
    doc = json.loads(text)
    validate(doc, "jordan_report.schema.json")
    assert doc["method"] == "bound-only"


def test_compute_parse_error_exit_1(capsys):
    code, _ = run("compute", "S5 *")
    assert code == 1
    assert "at byte 4" in capsys.readouterr().err


def test_usage_error_exit_1():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_bad_config_exit_1():
    assert run("compute", "S3", "--order-cap", "0")[0] == 1


def test_degree_cap_exit_2():
    code, text = run("compute", "S5 * S5", "--degree-cap", "8")
    assert code == 2
    assert "degree cap" in json.loads(text)["error"]


def test_csv_columns():
    code, text = run("compute", "S4", "--csv", "--no-timing")
    assert code == 0
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_COLUMNS
    rec = dict(zip(rows[0], rows[1]))
    assert (rec["J"], rec["Jbar"], rec["timing"]) == ("6", "6", "")


def test_markdown():
    code, text = run("compute", "S4", "--md")
    assert code == 0
    assert text.splitlines()[0].startswith("| label | expr | order")


# -- subgroups / cd-lattice ------------------------------------------------------------

def test_subgroups_s5():
    code, text = run("subgroups", "S5")
    assert code == 0
    assert text.splitlines()[0] == "S5: 156 subgroups in 19 classes"


def test_subgroups_c6_json():
    code, text = run("subgroups", "C6", "--json")
    doc = json.loads(text)
    assert code == 0 and doc["subgroup_count"] == 4


def test_subgroups_over_cap():
    code, text = run("subgroups", "A6", "--order-cap", "100")
    assert code == 2 and "uncertified" in json.loads(text)["error"]


def test_cd_lattice_s3():
    code, text = run("cd-lattice", "S3")
    assert code == 0
    assert text.strip() == "max measure 9, members: {C3}"


# -- verify-paper ----------------------------------------------------------------------

def test_verify_paper_c():
    code, text = run("verify-paper", "--field", "C")
    assert code == 0
    assert text.splitlines()[-1] == "J(Cr2(C)) = 7200 \u2014 attained by swap-A5"


def test_verify_paper_r_and_p2r():
    code, text = run("verify-paper", "--field", "R", "--field", "P2R")
    assert code == 0
    last = text.splitlines()[-2:]
    assert last[0] == "J(Cr2(R)) = 120, Jbar = 20 \u2014 attained by S5"
    assert last[1].endswith(" = 60, Jbar = 12 \u2014 attained by A5")


def test_verify_paper_json_schema_and_axioms():
    code, text = run("verify-paper", "--json", "--no-timing", "--jobs", "4")
    assert code == 0
    doc = json.loads(text)
    validate(doc, "verify_report.schema.json")
    assert doc["ok"]
    axioms = {r["id"] for r in doc["rows"] if r["verdict"] == "axiom"}
    assert {"CB-R-excl", "P2R-excl-d3", "P2R-excl-d5", "dP-C-1", "dP-C-7", "dP-C-8-blowup"} == axioms
    assert all(r["quote"] for r in doc["rows"])


def test_verify_paper_unverified_exit_2():
    code, text = run("verify-paper", "--field", "R", "--order-cap", "50")
    assert code == 2
    assert "blocked" in text


def test_verify_paper_bad_ledger(tmp_path):
    p = tmp_path / "l.json"
    p.write_text("[]")
    assert run("verify-paper", "--ledger", str(p))[0] == 1


def test_verify_paper_failed_row_exit_1(tmp_path):
    from jordanlab.ledger import default_ledger_path
    doc = json.loads(default_ledger_path().read_text(encoding="utf-8"))
    for r in doc:
        if r["id"] == "dP-C-5":
            r["value"] = 119
    p = tmp_path / "l.json"
    p.write_text(json.dumps(doc))
    assert run("verify-paper", "--field", "C", "--ledger", str(p))[0] == 1


# -- report ------------------------------------------------------------------------------

def test_report_labels_json():
    code, text = run("report", "S4", "A5", "--json", "--no-timing")
    assert code == 0
    docs = json.loads(text)
    assert [d["label"] for d in docs] == ["S4", "A5"]
    for d in docs:
        validate(d, "jordan_report.schema.json")


def test_report_input_file(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("# two groups\nS3\nD5 * C2\n", encoding="utf-8")
    code, text = run("report", "--input", str(p), "--csv", "--no-timing")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(text)))
    assert [r["label"] for r in rows] == ["S3", "D5 * C2"]


def test_custom_catalog(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps([{"label": "f20", "expr": "C5 : C4 [explicit frob]",
                              "actions": {"frob": {"images": {"h0": ["n0^2"]}}}}]))
    code, text = run("compute", "f20", "--catalog", str(p), "--json", "--no-timing")
    assert code == 0 and json.loads(text)["J"] == 4
    p.write_text("")
    assert run("compute", "S3", "--catalog", str(p))[0] == 1


# -- determinism and configuration --------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ("compute", "S4", "--json", "--no-timing"),
    ("report", "D6", "heis-27", "--json", "--no-timing"),
    ("verify-paper", "--field", "R", "--json", "--no-timing", "--jobs", "3"),
])
def test_byte_identical_runs(argv):
    assert run(*argv) == run(*argv)


def test_env_precedence():
    ns = Namespace(order_cap=None, element_cap=None, degree_cap=None, time_budget=None, format=None,
                   catalog=None, ledger=None, jobs=None, no_timing=False)
    assert resolve_config(ns, {}) == RunConfig()
    cfg = resolve_config(ns, {"JL_ORDER_CAP": "200", "JL_FORMAT": "csv", "JL_TIME_BUDGET": "5"})
    assert (cfg.order_cap, cfg.format, cfg.time_budget) == (200, "csv", 5.0)
    ns.order_cap = 300
    assert resolve_config(ns, {"JL_ORDER_CAP": "200"}).order_cap == 300


def test_env_applies_to_main(monkeypatch):
    monkeypatch.setenv("JL_FORMAT", "json")
    monkeypatch.setenv("JL_ORDER_CAP", "100")
    code, text = run("compute", "PSL(2,7) * C2", "--no-timing")
    assert code == 3 and json.loads(text)["method"] == "bound-only"


def test_run_config_invariants():
    with pytest.raises(ValueError):
        RunConfig(format="xml")
    with pytest.raises(ValueError):
        RunConfig(element_cap=0)


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "jordanlab", "compute", "A5", "--json", "--no-timing"],
                       capture_output=True, text=True, timeout=120)
    assert r.returncode == 0
    assert json.loads(r.stdout)["J"] == 60
