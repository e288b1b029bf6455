"""Smoke test for the `phishlens` Python extension.

Builds the extension with cargo (maturin is not required), loads it from a
temporary directory and exercises extraction, training, persistence and
prediction against the recorded fixture corpus.

    python3 python/smoke_test.py        # or: pytest python/smoke_test.py
"""

import csv
import importlib.util
import os
import shutil
import subprocess
import sys
import sysconfig
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "crates" / "core" / "fixtures" / "corpus"

_module = None


def load():
    global _module
    if _module is not None:
        return _module
    subprocess.run(
        ["cargo", "build", "-q", "-p", "phishlens-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    target = Path(os.environ.get("CARGO_TARGET_DIR", ROOT / "target"))
    built = target / "debug" / "libphishlens_py.so"
    if not built.exists():
        built = built.with_suffix(".dylib")
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    dest = Path(tempfile.mkdtemp()) / f"phishlens{suffix}"
    shutil.copy(built, dest)
    spec = importlib.util.spec_from_file_location("phishlens", dest)
    _module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(_module)
    return _module


def labeled_urls():
    with open(CORPUS / "urls.csv", newline="") as f:
        return [(r["url"], int(r["label"])) for r in csv.DictReader(f)]


def test_schema():
    pl = load()
    names = pl.feature_names()
    assert len(names) == 23, names
    assert names[0] == "Have_At" and names[-1] == "email"
    assert pl.schema_version() >= 1


def test_extract_matches_matrix():
    pl = load()
    rows = {url: feats for url, feats, _ in pl.load_matrix(str(CORPUS / "golden_matrix.csv"))}
    names = pl.feature_names()
    for url, _ in labeled_urls()[:10]:
        got = pl.extract(url, evidence_dir=str(CORPUS))
        assert [got[n] for n in names] == rows[url], url
    try:
        pl.extract("http://exa mple.com/", evidence_dir=str(CORPUS))
    except ValueError:
        pass
    else:
        raise AssertionError("malformed url accepted")


def test_train_save_load_predict():
    pl = load()
    matrix = str(CORPUS / "golden_matrix.csv")
    model = pl.Model.train(matrix, "rf", seed=5)
    assert model.kind == "random_forest"
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "rf.model")
        saved_id = model.save(path)
        assert saved_id == model.model_id
        again = pl.Model.load(path)
        assert again.model_id == saved_id

    for url, feats, label in pl.load_matrix(matrix):
        a, b = model.predict(feats), again.predict(feats)
        assert a == b, url
        assert (a[0] == "deceptive") == (a[1] >= 0.5)
    metrics = model.evaluate(matrix)
    assert 0.9 <= metrics["accuracy"] <= 1.0, metrics

    feats = pl.extract("http://paypal-secure-login.com/webscr/cmd=login", evidence_dir=str(CORPUS))
    assert model.predict(feats)[0] == "deceptive"
    try:
        model.predict([0] * 22)
    except ValueError:
        pass
    else:
        raise AssertionError("short vector accepted")


def test_bad_inputs():
    pl = load()
    for call in (
        lambda: pl.Model.load("/no/such/model"),
        lambda: pl.Model.train(str(CORPUS / "golden_matrix.csv"), "svm"),
        lambda: pl.extract("http://a.example/", evidence_dir="/no/such/dir"),
    ):
        try:
            call()
        except (ValueError, OSError):
            continue
        raise AssertionError("bad input accepted")


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for t in tests:
        t()
        print(f"ok {t.__name__}")
    print(f"{len(tests)} passed")
    sys.exit(0)
