"""Smoke tests for the python module and the CLI.

Run through ctest; ADGRID_MODULE_DIR points at the built extension and
ADGRID_CLI at the command-line binary.
"""

import json
import math
import os
import subprocess
import sys
import tempfile

sys.path.insert(0, os.environ["ADGRID_MODULE_DIR"])

import _core as ag  # noqa: E402


def check(cond, what):
    if not cond:
        raise AssertionError(what)
    print(f"ok: {what}")


def model_and_system():
    model = ag.make_model(ag.Kind.TorusSup, 1, 8)
    check(model.K_X == 1.0 and model.q == 0.5, "torus model constants")
    ok, _ = ag.verify_quasimetric(model, 20000, 1)
    check(ok, "quasimetric verified")
    ok, _ = ag.verify_doubling(model)
    check(ok, "doubling verified")
    sys_ = ag.build_system(model)
    ok, violations = ag.verify_system(sys_)
    check(ok and not violations, "cube axioms verified")
    return model, sys_


def haar_roundtrip(model, sys_):
    haar = ag.make_haar(sys_)
    cubes = [ag.Cube(level, [f]) for level in range(4) for f in range(2**level)]
    coeffs = [math.sin(1.0 + i) for i in range(len(cubes))]
    f = ag.synthesize(haar, cubes, coeffs)
    back = ag.analyze(haar, cubes, f)
    err = max(abs(a - b) for a, b in zip(coeffs, back))
    check(err < 1e-12, f"haar round trip (err {err:.2e})")
    return haar


def adapted_grid(sys_):
    params = ag.InstanceParams()
    inst = ag.random_admissible_instance(sys_, 5, params)
    ok, _ = ag.check_hypotheses(sys_, inst)
    check(ok, "instance admissible")
    grid = ag.build_adapted_grid(sys_, inst)
    ok, ratio, _ = ag.verify_adapted_grid(sys_, inst, grid)
    check(ok, f"adapted grid verified (ratio {ratio:.3f})")


def norms(sys_, haar):
    tau = ag.make_axis_shift(sys_, 3)
    ok, C_h, _ = ag.certify_relation(sys_, haar, tau)
    check(ok and C_h == 2.0, "shift relation certified")
    op = ag.make_shift_operator(sys_, haar, tau)
    est = ag.opnorm_exact_2(op)
    check(abs(est.value - 1.0) < 1e-9, f"shift p=2 norm equals 1 ({est.value:.12f})")

    fam = ag.make_classical_stripes(sys_, 2)
    ok, K1, K2, eps, _ = ag.verify_S1_S4(sys_, fam)
    check(ok and K1 == 1.0 and K2 == 1.0 and eps == 1.0, "classical stripe constants")
    fns = ag.make_stripe_functions(sys_, fam, haar)
    sop = ag.make_stripe_operator_handle(sys_, haar, fns, 1)
    sest = ag.opnorm_exact_2(sop)
    check(abs(sest.value - 0.5) < 1e-9, f"stripe p=2 norm equals 1/2 ({sest.value:.12f})")

    low = ag.opnorm_lower_p(sop, 4.0, 2, 0)
    redo = ag.witness_ratio(sop, list(low.witness), 4.0)
    check(abs(redo - low.value) <= 1e-12 * max(1.0, low.value), "witness reproduces")


def theta_pipeline(sys_, haar):
    tau = ag.make_axis_shift(sys_, 2)
    ell = ag.ell_for_shift(sys_, 4.0, 2.0)
    dec = ag.decompose(sys_, tau, 4.0, ell, 0, ag.theta_conflict_radius(sys_, 4.0))
    checked = 0
    for j in range(dec.M_k):
        for i in range(ell):
            try:
                theta = ag.build_theta(sys_, dec, j, i, 4.0)
            except ag.ModelError:
                continue
            if not theta.support:
                continue
            ok, c5, bound, _ = ag.domination_check(sys_, dec, j, i, theta, haar)
            check(ok and c5 <= bound, f"domination class j{j}i{i} (c5 {c5:.3f})")
            checked += 1
            if checked >= 2:
                return
    check(checked > 0, "at least one class checked")


def cli_roundtrip():
    cli = os.environ["ADGRID_CLI"]
    with tempfile.TemporaryDirectory() as tmp:
        cfg = os.path.join(tmp, "run.cfg")
        with open(cfg, "w") as fh:
            fh.write("kind=torus_sup\nk=1\nJ=7\nseed=3\n")
        out1, out2 = os.path.join(tmp, "o1"), os.path.join(tmp, "o2")
        for out in (out1, out2):
            rc = subprocess.run([cli, "verify-cubes", "--config", cfg, "--out", out]).returncode
            check(rc == 0, f"verify-cubes exit 0 ({out})")
        with open(os.path.join(out1, "report.json")) as fh:
            rep = json.load(fh)
        check(rep["cubes_ok"] and rep["schema_version"] == 1, "report content")
        b1 = open(os.path.join(out1, "report.json"), "rb").read()
        b2 = open(os.path.join(out2, "report.json"), "rb").read()
        check(b1 == b2, "byte-identical reruns")

        # unknown keys are config errors
        bad = os.path.join(tmp, "bad.cfg")
        with open(bad, "w") as fh:
            fh.write("kind=torus_sup\nnope=1\n")
        rc = subprocess.run(
            [cli, "verify-cubes", "--config", bad, "--out", os.path.join(tmp, "o3")]
        ).returncode
        check(rc == 1, "bad config exits 1")

        # fault injection reports and exits 2
        rc = subprocess.run(
            [cli, "adapt-demo", "--config", cfg, "--out", os.path.join(tmp, "o4"), "--faults"]
        ).returncode
        check(rc == 2, "fault injection exits 2")
        with open(os.path.join(tmp, "o4", "report.json")) as fh:
            rep = json.load(fh)
        viols = [e.get("violation", "") for e in rep["instances"] if not e["ok"]]
        check(len(viols) > 0 and all(v for v in viols), "fault violations are named")

        # norm curves write CSV
        ncfg = os.path.join(tmp, "norms.cfg")
        with open(ncfg, "w") as fh:
            fh.write("kind=torus_sup\nk=1\nJ=7\nlambda_list=1,2\np_list=2\n")
        out5 = os.path.join(tmp, "o5")
        rc = subprocess.run([cli, "stripe-norms", "--config", ncfg, "--out", out5]).returncode
        check(rc == 0, "stripe-norms exit 0")
        rows = open(os.path.join(out5, "stripe_norms.csv")).read().strip().split("\n")
        check(rows[0].startswith("operator,p,lambda"), "stripe csv header")
        check(len(rows) == 3, "stripe csv rows")


def witness_file_roundtrip(sys_, haar):
    # a dumped witness function must reproduce the reported lower bound
    cli = os.environ["ADGRID_CLI"]
    with tempfile.TemporaryDirectory() as tmp:
        cfg = os.path.join(tmp, "w.cfg")
        with open(cfg, "w") as fh:
            fh.write("kind=torus_sup\nk=1\nJ=8\nm_list=3\np_list=4\n"
                     "dump_witness=1\nrestarts=1\n")
        out = os.path.join(tmp, "o")
        rc = subprocess.run([cli, "shift-norms", "--config", cfg, "--out", out]).returncode
        check(rc == 0, "shift-norms with witness dump")
        rows = open(os.path.join(out, "shift_norms.csv")).read().strip().split("\n")[1:]
        fields = rows[0].split(",")
        reported = float(fields[4])
        wfile = fields[8]
        check(wfile.startswith("witness_"), "witness file referenced")
        values = []
        with open(os.path.join(out, wfile)) as fh:
            next(fh)
            for line in fh:
                cell, value = line.strip().split(",")
                values.append(float(value))
        f = ag.CellFunction.zero(sys_.model)
        f.v = values
        cubes = [ag.Cube(lv, [c]) for lv in range(8) for c in range(2**lv)]
        coeffs = ag.analyze(haar, cubes, f)
        tau = ag.make_axis_shift(sys_, 3)
        op = ag.make_shift_operator(sys_, haar, tau)
        redo = ag.witness_ratio(op, coeffs, 4.0)
        check(abs(redo - reported) <= 1e-9 * max(1.0, reported),
              f"dumped witness reproduces the bound ({redo:.12f} vs {reported:.12f})")


def main():
    model, sys_ = model_and_system()
    haar = haar_roundtrip(model, sys_)
    adapted_grid(sys_)
    norms(sys_, haar)
    theta_pipeline(sys_, haar)
    cli_roundtrip()
    witness_file_roundtrip(sys_, haar)
    print("smoke: all checks passed")


if __name__ == "__main__":
    main()
