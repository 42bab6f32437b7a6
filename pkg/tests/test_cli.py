import unittest
import contextlib
import io
import json
import os
import sys
import tempfile

# Ensure src/ is on sys.path for direct imports without installation
ROOT = os.path.dirname(os.path.dirname(__file__))
SRC = os.path.join(ROOT, "src")
if SRC not in sys.path:
    sys.path.insert(0, SRC)

from nkappa import cli, config


def rational(num, den):
    return {"format": 1, "type": "rational", "dim": 1, "entries": [[{"num": num, "den": den}]]}


class TestCLI(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = self._tmp.name
        self._verbose = config.VERBOSE

    def tearDown(self):
        config.VERBOSE = self._verbose
        self._tmp.cleanup()

    def write(self, name, doc):
        path = os.path.join(self.tmp, name)
        with open(path, "w", encoding="utf-8") as f:
            f.write(doc if isinstance(doc, str) else json.dumps(doc))
        return path

    def run_cli(self, *argv):
        out, err = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            code = cli.main(list(argv))
        return code, out.getvalue()

    def test_kappa(self):
        path = self.write("v.json", rational([-1], [0, 0, 1]))
        out_path = os.path.join(self.tmp, "kappa.json")
        code, out = self.run_cli("kappa", "-f", path, "-o", out_path)
        self.assertEqual(code, cli.EXIT_OK)
        self.assertIn("kappa=1", out)
        with open(out_path, encoding="utf-8") as f:
            doc = json.load(f)
        self.assertEqual(doc["kappa"], 1)
        self.assertTrue(doc["stabilized"])

    def test_kappa_without_stabilization(self):
        path = self.write("v.json", rational([-1], [0, 0, 1]))
        code, _ = self.run_cli("--kernel-grid-max", "8", "kappa", "-f", path)
        self.assertEqual(code, cli.EXIT_UNSTABLE)

    def test_classify_example2(self):
        path = self.write("ex2.json", {"format": 1, "type": "builtin", "name": "example2", "gamma": 1.0, "d": 0.0})
        report = os.path.join(self.tmp, "report.json")
        trace = os.path.join(self.tmp, "trace.csv")
        code, out = self.run_cli("classify", "-f", path, "-o", report, "--csv", trace)
        self.assertEqual(code, cli.EXIT_OK)
        self.assertIn("subclass=N1", out)
        self.assertIn("realizable=True", out)
        with open(report, encoding="utf-8") as f:
            self.assertEqual(json.load(f)["kappa"], 1)
        with open(trace, encoding="utf-8") as f:
            self.assertTrue(f.readline().startswith("y,direction"))

    def test_classify_report_json(self):
        path = self.write("v.json", rational([-1], [0, 0, 1]))
        report = os.path.join(self.tmp, "report.json")
        code, out = self.run_cli("classify", "-f", path, "-o", report)
        self.assertEqual(code, cli.EXIT_OK)
        self.assertIn("infinity=gen_zero_nonpos", out)
        with open(report, encoding="utf-8") as f:
            doc = json.load(f)
        self.assertEqual(doc["subclass"], "N1")
        self.assertIs(doc["cond_growth"], True)
        self.assertIs(doc["cond_decay_on_B"], True)
        self.assertIs(doc["realizable"], True)

    def test_factor(self):
        code, out = self.run_cli("factor", "-f", self.write("z3.json", rational([0, 0, 0, 1], [1])))
        self.assertEqual(code, cli.EXIT_OK)
        self.assertIn("realizable=False", out)

    def test_factor_constant_is_inconsistent(self):
        code, out = self.run_cli("factor", "-f", self.write("c.json", rational([3], [1])))
        self.assertEqual(code, cli.EXIT_INCONSISTENT)
        self.assertIn("[error]", out)

    def test_bad_input(self):
        code, out = self.run_cli("kappa", "-f", self.write("bad.json", '{"type": "rational",\n "dim": }'))
        self.assertEqual(code, cli.EXIT_USAGE)
        self.assertIn("line 2", out)
        code, _ = self.run_cli("kappa", "-f", os.path.join(self.tmp, "missing.json"))
        self.assertEqual(code, cli.EXIT_USAGE)

    def test_usage(self):
        self.assertEqual(self.run_cli()[0], cli.EXIT_USAGE)
        self.assertEqual(self.run_cli("frobnicate")[0], cli.EXIT_USAGE)
        self.assertEqual(self.run_cli("kappa")[0], cli.EXIT_USAGE)

    def test_realize_verify_transfer(self):
        fn = self.write("v.json", rational([-1], [0, 0, 1]))
        model = os.path.join(self.tmp, "model.json")
        code, out = self.run_cli("realize", "-f", fn, "-o", model)
        self.assertEqual(code, cli.EXIT_OK)
        self.assertIn("n=2 kappa=1", out)
        code, out = self.run_cli("verify", "-f", fn, "-m", model)
        self.assertEqual(code, cli.EXIT_OK)
        self.assertIn("passed=True", out)
        code, out = self.run_cli("impedance", "-m", model, "-z", "2i")
        self.assertEqual(code, cli.EXIT_OK)
        self.assertIn("value=0.2", out)
        code, _ = self.run_cli("transfer", "-m", model, "-z", "1+i", "-z", "-2+0.5i")
        self.assertEqual(code, cli.EXIT_OK)
        code, out = self.run_cli("impedance", "-m", model, "-z", "-2+0.5i", "-z=-2+0.5i")
        self.assertEqual(code, cli.EXIT_OK)
        self.assertEqual(out.count("z=-2+0.5i value=-0.207"), 2)

    def test_verify_wrong_function(self):
        fn = self.write("v.json", rational([-1], [0, 0, 1]))
        other = self.write("w.json", rational([-1], [0, 1]))
        model = os.path.join(self.tmp, "model.json")
        self.run_cli("realize", "--method", "pf", "-f", fn, "-o", model)
        code, out = self.run_cli("verify", "-f", other, "-m", model)
        self.assertEqual(code, cli.EXIT_INCONSISTENT)
        self.assertIn("passed=False", out)

    def test_realize_needs_strictly_proper(self):
        code, _ = self.run_cli("realize", "-f", self.write("z.json", rational([0, 1], [1])))
        self.assertEqual(code, cli.EXIT_INCONSISTENT)

    def test_schur(self):
        code, out = self.run_cli("schur", "--nodes", "100", "-z", "2i")
        self.assertEqual(code, cli.EXIT_OK)
        self.assertIn("kappa=1", out)
        self.assertIn("err=", out)

    def test_scan(self):
        out_path = os.path.join(self.tmp, "scan.csv")
        code, _ = self.run_cli("scan", "-f", self.write("v.json", rational([-1], [0, 1])), "-o", out_path)
        self.assertEqual(code, cli.EXIT_OK)
        with open(out_path, encoding="utf-8") as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], "y,direction,growth_Vff_over_y,B_bound_y_ImVff,decay_abs_Vf")
        self.assertEqual(len(lines), 1 + 41)

    def test_corpus_matches_kappa(self):
        outdir = os.path.join(self.tmp, "corpus")
        code, _ = self.run_cli("--seed", "0x10", "corpus", "--count", "3", "--poles", "2", "--outdir", outdir)
        self.assertEqual(code, cli.EXIT_OK)
        with open(os.path.join(outdir, "manifest.json"), encoding="utf-8") as f:
            manifest = json.load(f)
        self.assertEqual(len(manifest["functions"]), 3)
        for item in manifest["functions"]:
            code, out = self.run_cli("kappa", "-f", os.path.join(outdir, item["file"]))
            self.assertEqual(code, cli.EXIT_OK)
            self.assertIn(f"kappa={item['kappa']} ", out)


if __name__ == "__main__":
    unittest.main()
