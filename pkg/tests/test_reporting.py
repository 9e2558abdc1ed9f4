"""Report rendering: delimited tables plus figures on the Agg backend."""

import numpy as np
import pytest

from rlcfr.agents import AgentSpec, make_agent
from rlcfr.errors import ConfigError
from rlcfr.match import play_match
from rlcfr.reporting import (convergence_report, load_metrics, match_report,
                             training_report)


def test_load_metrics_skips_comments_and_validates_width(tmp_path):
    p = tmp_path / "metrics.tsv"
    p.write_text("# epoch\tn\tr\tc\ta\twall\n"
                 "1\t4\t0.1\t0.2\t-0.3\t12.5\n"
                 "2\t5\t0.2\t0.1\t-0.4\t11.0\n")
    m = load_metrics(p)
    assert m.shape == (2, 6)
    assert m[1, 0] == 2.0
    p.write_text("1\t2\t3\n")
    with pytest.raises(ConfigError):
        load_metrics(p)
    with pytest.raises(ConfigError):
        load_metrics(tmp_path / "absent.tsv")
    p.write_text("# header only\n")
    with pytest.raises(ConfigError):
        load_metrics(p)


def test_training_report_writes_table_and_figure(tmp_path):
    p = tmp_path / "metrics.tsv"
    lines = ["%d\t8\t%.3f\t%.3f\t%.3f\t9.0" % (e, 0.01 * e, 1.0 / e, -0.1 * e)
             for e in range(1, 6)]
    p.write_text("\n".join(lines) + "\n")
    paths = training_report(p, tmp_path / "rep")
    names = sorted(x.name for x in paths)
    assert names == ["training_curves.png", "training_curves.tsv"]
    for x in paths:
        assert x.exists() and x.stat().st_size > 0
    tsv = [x for x in paths if x.suffix == ".tsv"][0]
    rows = [l for l in tsv.read_text().splitlines() if not l.startswith("#")]
    assert len(rows) == 5


def test_convergence_report_decreasing_curve(kuhn, tmp_path):
    paths = convergence_report(kuhn, tmp_path, iteration_grid=(50, 400))
    names = sorted(x.name for x in paths)
    assert names == ["convergence.png", "convergence.tsv"]
    tsv = [x for x in paths if x.suffix == ".tsv"][0]
    rows = [l.split("\t") for l in tsv.read_text().splitlines()
            if l and not l.startswith("#")]
    assert [int(r[0]) for r in rows] == [50, 400]
    e50, e400 = (float(r[1]) for r in rows)
    assert e400 < e50


def test_match_report_ledger_matches_hands(toy, tmp_path):
    a = make_agent(toy, AgentSpec(kind="UNIFORM"))
    res = play_match(toy, a, a, 12, seed=3)
    paths = match_report(res, tmp_path, ante=toy.ante)
    names = sorted(x.name for x in paths)
    assert names == ["match_ledger.tsv", "match_running.png"]
    tsv = [x for x in paths if x.suffix == ".tsv"][0]
    rows = [l for l in tsv.read_text().splitlines() if not l.startswith("#")]
    assert len(rows) == 12
