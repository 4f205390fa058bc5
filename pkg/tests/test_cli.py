import json
import subprocess
import sys

import pytest

from hlp.cli import main, manifest_path


def generate(tmp_path, builder, *params, variant=None, name="pkg.json"):
    out = tmp_path / name
    args = ["generate", builder, "--out", str(out)]
    for p in params:
        args += ["--param", p]
    if variant:
        args += ["--variant", variant]
    assert main(args) == 0
    return out


def test_manifest_path():
    assert manifest_path("a/b.json") == "a/b.manifest.json"
    assert manifest_path("pkg") == "pkg.manifest.json"


def test_validate_blowup(tmp_path, capsys):
    path = generate(tmp_path, "blowup-p2")
    assert main(["validate", str(path)]) == 0
    assert capsys.readouterr().out.strip().endswith("valid")


def test_validate_shape_mismatch(tmp_path, capsys):
    path = generate(tmp_path, "blowup-p2")
    doc = json.loads(path.read_text())
    doc["dims"] = [1, 0, 3, 0, 1]
    path.write_text(json.dumps(doc))
    assert main(["validate", str(path)]) == 2
    assert "malformed" in capsys.readouterr().err


def test_validate_noncommuting(tmp_path, capsys):
    path = generate(tmp_path, "blowup-p2", variant="blowup-noncommuting")
    assert main(["validate", str(path)]) == 1
    out = capsys.readouterr().out
    assert "commutation: FAILED" in out and out.strip().endswith("invalid")


def test_validate_missing_file(tmp_path):
    assert main(["validate", str(tmp_path / "nope.json")]) == 2


def test_analyze_blowup_json(tmp_path, capsys):
    path = generate(tmp_path, "blowup-p2")
    assert main(["analyze", str(path), "--format", "json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["summary"]["lambda.dim"] == 1
    assert report["passed"] is True
    assert set(report["results"]) == {
        "filtration", "hl", "decomp", "hrr", "lambda", "defect", "rif", "grauert", "signature", "splitting"
    }


def test_analyze_variant_reports_witness(tmp_path, capsys):
    path = generate(tmp_path, "blowup-p2", variant="blowup-hrr-sign")
    assert main(["analyze", str(path), "--checks", "hrr", "--format", "json"]) == 1
    report = json.loads(capsys.readouterr().out)
    failed = [c for c in report["results"]["hrr"]["checks"] if not c["passed"]]
    assert failed and all("witness" in c for c in failed)


def test_analyze_text_format(tmp_path, capsys):
    path = generate(tmp_path, "blowup-p2", variant="blowup-signature-flip")
    assert main(["analyze", str(path), "--checks", "signature,defect"]) == 1
    text = capsys.readouterr().out
    assert "signature: FAIL" in text and "defect: PASS" in text
    assert "witness" in text and text.strip().endswith("result: FAIL")


def test_analyze_point_package(tmp_path, capsys):
    path = generate(tmp_path, "projective-space", "a=0")
    assert main(["analyze", str(path), "--format", "json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["manifest"]["perverse_betti"] == [[0, 0, 1]]


def test_analyze_generated_projective_plane(tmp_path):
    path = generate(tmp_path, "projective-space", "a=2")
    assert main(["analyze", str(path), "--out", str(tmp_path / "r.txt")]) == 0
    assert (tmp_path / "r.txt").read_text().strip().endswith("result: PASS")


def test_generate_writes_manifest(tmp_path):
    path = generate(tmp_path, "sl2sl2", "m11=1")
    manifest = json.loads(open(manifest_path(str(path))).read())
    assert manifest["builder"] == "sl2sl2"
    assert manifest["expected"]["biprimitives"] == [[1, 1, 1]]


def test_generate_variant_manifest_lists_targets(tmp_path):
    path = generate(tmp_path, "blowup-p2", variant="blowup-degenerate-fiber")
    manifest = json.loads(open(manifest_path(str(path))).read())
    assert manifest["failing_checks"] == ["rif", "splitting"]


@pytest.mark.parametrize(
    "args",
    [
        ["generate", "nope", "--out", "x.json"],
        ["generate", "projective-space", "--param", "a", "--out", "x.json"],
        ["generate", "projective-space", "--param", "a=-1", "--out", "x.json"],
        ["generate", "threefold-model", "--param", "gram=1,2;3", "--out", "x.json"],
    ],
)
def test_generate_bad_input(tmp_path, monkeypatch, args):
    monkeypatch.chdir(tmp_path)
    assert main(args) == 2


def test_unknown_check(tmp_path):
    path = generate(tmp_path, "blowup-p2")
    assert main(["analyze", str(path), "--checks", "hrr,bogus"]) == 2


def test_usage_errors():
    for argv in ([], ["analyze"], ["validate", "a", "b"], ["analyze", "x", "--format", "xml"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


def test_deterministic_output(tmp_path):
    path = generate(tmp_path, "threefold-model", "r=2")
    outs = []
    for k in range(2):
        target = tmp_path / f"r{k}.json"
        assert main(["analyze", str(path), "--format", "json", "--out", str(target)]) == 0
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]


def test_module_entry_point(tmp_path):
    path = generate(tmp_path, "blowup-p2")
    done = subprocess.run(
        [sys.executable, "-m", "hlp", "validate", str(path)], capture_output=True, text=True, check=False
    )
    assert done.returncode == 0
    done = subprocess.run(
        [sys.executable, "-m", "hlp", "analyze", str(tmp_path / "missing.json")],
        capture_output=True,
        text=True,
        check=False,
    )
    assert done.returncode == 2
