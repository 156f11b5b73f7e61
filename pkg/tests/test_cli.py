import json
import random
import subprocess
import sys

import pytest

from guillopack.bench import fill_nicely, gen_hard_family, pinwheel, random_pseudo_tree
from guillopack.cli import BAD_INPUT, INFEASIBLE, OK, main
from guillopack.compartments import pseudo_to_dict
from guillopack.core import Instance, dump_json, instance_to_dict, packing_to_dict


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def write(tmp_path, name, obj):
    path = tmp_path / name
    dump_json(obj, path)
    return str(path)


def test_check(tmp_path, capsys):
    _, p = gen_hard_family(3)
    code, out = run(capsys, "check", "--in", write(tmp_path, "h.json", packing_to_dict(p)))
    d = json.loads(out)
    assert code == OK and d["separable"] and d["stages"] == 5
    _, p = pinwheel()
    code, out = run(capsys, "check", "--in", write(tmp_path, "p.json", packing_to_dict(p)))
    assert code == INFEASIBLE and json.loads(out)["witness_items"] == [1, 2, 3, 4]


def test_bad_input(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["check", "--in", str(bad)]) == BAD_INPUT
    assert main(["oracle", "--in", write(tmp_path, "i.json", {"N": 3})]) == BAD_INPUT
    assert main(["nosuch"]) == BAD_INPUT
    assert main(["gen-random", "--n", "2", "--N", "4", "--profile", "skewed"]) == OK
    capsys.readouterr()


def test_oracle_and_ratio(tmp_path, capsys):
    inst, _ = pinwheel()
    path = write(tmp_path, "pw.json", instance_to_dict(inst))
    code, out = run(capsys, "oracle", "--in", path, "--flavor", "guillotine")
    assert code == OK and json.loads(out)["value"] == 3
    code, out = run(capsys, "ratio", "--pinwheel")
    assert code == OK and json.loads(out)["max_ratio"] == "4/3"
    inst, _ = gen_hard_family(2)
    code, out = run(capsys, "oracle", "--in", write(tmp_path, "h.json", instance_to_dict(inst)),
                    "--flavor", "stages:2")
    assert json.loads(out)["value"] == 3


def test_solve_with_outputs(tmp_path, capsys):
    rng = random.Random(4)
    tree = random_pseudo_tree(16, rng, depth=2)
    items, _ = fill_nicely(tree, rng, N=16)
    inst = Instance(16, tuple(items))
    ipath = write(tmp_path, "i.json", instance_to_dict(inst))
    tpath = write(tmp_path, "t.json", pseudo_to_dict(tree))
    svg, stats = tmp_path / "o.svg", tmp_path / "s.json"
    code, out = run(capsys, "solve", "--in", ipath, "--compartments", tpath, "--svg", str(svg), "--stats", str(stats),
                    "--eps", "1/2")
    assert code == OK
    assert svg.read_text().startswith("<svg")
    assert json.loads(stats.read_text())["value"] == len(json.loads(out)["placements"])
    code, _ = run(capsys, "solve", "--in", ipath, "--eps-large", "1/4")
    assert code == BAD_INPUT


def test_lpack_modes(tmp_path, capsys):
    _, p = gen_hard_family(2)
    code, out = run(capsys, "lpack", "--in", write(tmp_path, "h.json", packing_to_dict(p)))
    d = json.loads(out)
    assert code == OK and d["region"] == {"N": 8, "h_wide": 3, "w_tall": 3}
    req = {"instance": {"N": 8, "items": [{"id": 1, "w": 8, "h": 2}, {"id": 2, "w": 2, "h": 8}]},
           "region": {"h_wide": 2, "w_tall": 2}}
    code, out = run(capsys, "lpack", "--in", write(tmp_path, "r.json", req))
    assert code == OK and json.loads(out)["value"] == 1
    _, p = pinwheel()
    assert main(["lpack", "--in", write(tmp_path, "p.json", packing_to_dict(p))]) == INFEASIBLE


def test_small_tools(tmp_path, capsys):
    inst = {"N": 10, "items": [{"id": i, "w": 2, "h": 3} for i in range(1, 6)]}
    code, out = run(capsys, "nfdh", "--in", write(tmp_path, "n.json", inst))
    assert code == OK and json.loads(out)["area"] == 30
    gap = {"capacities": [3, 2], "sizes": [[2, None], [2, 2], [1, 1]], "profits": [[3, 0], [2, 2], [1, 1]]}
    code, out = run(capsys, "gap", "--in", write(tmp_path, "g.json", gap))
    assert code == OK and json.loads(out)["value"] == 6
    m = {"items": [{"id": 1, "w": 3, "h": 3}, {"id": 2, "w": 2, "h": 2}], "boxes": [[0, 0, 2, 2], [0, 0, 3, 3]]}
    code, out = run(capsys, "match", "--in", write(tmp_path, "m.json", m))
    assert code == OK and json.loads(out)["size"] == 2
    code, out = run(capsys, "classify", "--in", write(tmp_path, "c.json", {"N": 16, "items": [{"id": 1, "w": 16, "h": 1}]}),
                    "--eps", "1/2", "--eps-large", "1/2", "--eps-small", "1/8")
    assert json.loads(out)["classes"] == {"1": "horizontal"}
    assert main(["gap", "--in", write(tmp_path, "bad.json", {"capacities": [1]})]) == BAD_INPUT


def test_compose_and_render(tmp_path, capsys):
    rng = random.Random(7)
    tree = random_pseudo_tree(16, rng, depth=2)
    items, fills = fill_nicely(tree, rng, N=16)
    req = {"instance": instance_to_dict(Instance(16, tuple(items))), "tree": pseudo_to_dict(tree),
           "fillings": [[{"id": i, "x": r.x0, "y": r.y0} for i, r in f] for f in fills], "eps": "1/2"}
    code, out = run(capsys, "compose", "--in", write(tmp_path, "c.json", req))
    d = json.loads(out)
    assert code == OK and len(d["packing"]["placements"]) == len(items)
    ppath = write(tmp_path, "p.json", d["packing"])
    tpath = write(tmp_path, "t.json", d["tree"])
    code, out = run(capsys, "render", "--in", ppath, "--tree", tpath)
    assert code == OK and out.count('class="cut') == json.dumps(d["tree"]).count('"cut"')
    code, out = run(capsys, "render", "--in", ppath, "--cuts")
    assert code == OK
    assert "<line" in out or len(items) <= 1


def test_generators_and_bench(tmp_path, capsys):
    code, out = run(capsys, "gen-hard", "--k", "2")
    assert code == OK and len(json.loads(out)["instance"]["items"]) == 4
    code, out = run(capsys, "gen-random", "--n", "3", "--N", "8", "--seed", "5")
    assert code == OK and json.loads(out)["N"] == 8
    code, out = run(capsys, "bench", "--random", "2")
    assert code == OK and out.splitlines()[0].startswith("instance,solver")
    assert main(["bench"]) == BAD_INPUT


@pytest.mark.parametrize("args", [["--help"], ["check", "--help"]])
def test_help_exits_zero(args, capsys):
    assert main(args) == OK
    capsys.readouterr()


def test_console_module_runs():
    r = subprocess.run([sys.executable, "-m", "guillopack.cli", "gen-hard", "--k", "1"], capture_output=True, text=True)
    assert r.returncode == 0 and '"N": 4' in r.stdout
