"""End-to-end checks of the daadb command line tool. Usage: test_cli.py <path-to-daadb>"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

EXE = sys.argv[1]

QUICK = [
    "--known-ratio", "1", "--feature-dim", "16", "--max-epochs", "8",
    "--config",
]

INTENTS = {
    "flight": "book a flight ticket to",
    "weather": "what is the weather forecast in",
    "music": "play some music by",
    "alarm": "set an alarm for",
}


def run(*args, ok=True):
    proc = subprocess.run([EXE, *map(str, args)], capture_output=True, text=True)
    if ok and proc.returncode != 0:
        raise AssertionError(f"{args} failed ({proc.returncode}):\n{proc.stderr}")
    if not ok and proc.returncode == 0:
        raise AssertionError(f"{args} unexpectedly succeeded")
    return proc


def write_corpus(path, per_class, offset=0):
    lines = ["text\tlabel"]
    for i in range(per_class):
        for label, words in INTENTS.items():
            lines.append(f"{words} item{i + offset}\t{label}")
    path.write_text("\n".join(lines) + "\n")


def main():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        cfg = tmp / "quick.toml"
        cfg.write_text(
            'seeds = "0-1"\n'
            "[synthetic]\nnum_classes = 3\ndim = 3\ntrain_per_class = 60\n"
            "valid_per_class = 20\ntest_per_class = 30\nopen_test = 60\n"
        )

        out = tmp / "run"
        run("run", *QUICK, cfg, "--output", out, "--dump-radii", "--jobs", "2")
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seeds"] == [0, 1], manifest["seeds"]
        assert manifest["aggregate"]["runs"] == 2
        assert manifest["config"]["known_ratio"] == 1.0
        assert (out / "seed_1" / "radii.csv").read_text().startswith("class,raw,radius\n")

        # The same config hashes the same wherever its output goes.
        out2 = tmp / "run2"
        run("run", *QUICK, cfg, "--output", out2)
        assert json.loads((out2 / "manifest.json").read_text())["config_hash"] == manifest["config_hash"]
        assert (out2 / "results.json").read_text() == (out / "results.json").read_text()

        table = run("export-table", out, out2 / "results.json").stdout.splitlines()
        assert table[0].split()[:4] == ["dataset", "known", "method", "ACC"], table
        assert len(table) == 3

        abl = run("ablate-radius", *QUICK, cfg, "--factors", "0.5,1,2").stdout.splitlines()
        assert abl[0] == "factor,acc,learned" and len(abl) == 4
        assert abl[2].startswith("1,") and abl[2].endswith(",1")

        study = run("study-labeled-ratio", *QUICK, cfg, "--ratios", "0.5,1", "--methods", "da_adb,msp")
        rows = study.stdout.splitlines()
        assert rows[0] == "ratio,method,acc" and len(rows) == 5, rows

        # Text corpus with hashed features, then predict from the saved model.
        data = tmp / "data" / "toy"
        data.mkdir(parents=True)
        write_corpus(data / "train.tsv", 12)
        write_corpus(data / "dev.tsv", 3, 100)
        write_corpus(data / "test.tsv", 4, 200)
        text_out = tmp / "text"
        run("run", "--data-dir", tmp / "data", "--dataset", "toy", "--known-ratio", "0.5",
            "--hash-dim", "256", "--max-epochs", "10", "--output", text_out)
        pred = run("predict", "--model", text_out / "seed_0" / "model.daadb", "--input", data / "test.tsv")
        lines = pred.stdout.splitlines()
        assert lines[0] == "text\tpredicted_label"
        assert len(lines) == 17
        labels = {line.split("\t")[1] for line in lines[1:]}
        assert labels <= set(INTENTS) | {"<OPEN>"}, labels

        # Usage and runtime errors.
        run("run", "--method", "svm", ok=False)
        run("run", "--known-ratio", "0.25", "--seed", "0", ok=False)
        bad = run("run", "--dataset", "missing", "--data-dir", tmp, ok=False)
        assert "daadb:" in bad.stderr
        run(ok=False)
    print("cli ok")


if __name__ == "__main__":
    main()
