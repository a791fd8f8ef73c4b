import json
import logging
import os
import sys
from fractions import Fraction

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

if True:
    from config import (RunConfig, default_enum_budget, default_workers, load_field_spec,
                        parse_grid, parse_hyperplane, setup_logging)
    from errors import ValidationError
    from report import ReportWriter

logger = logging.getLogger('Test.Config')


@pytest.mark.trivial
def test_field_aliases():
    """测试数域别名与整数描述"""
    assert load_field_spec("q5") == {"kind": "quadratic", "D": 5}
    assert load_field_spec("QI") == {"kind": "quadratic", "D": -1}, "别名不区分大小写"
    assert load_field_spec("d:13") == {"kind": "quadratic", "D": 13}
    assert load_field_spec("-7") == {"kind": "quadratic", "D": -7}
    with pytest.raises(ValidationError):
        load_field_spec("not-a-field")


@pytest.mark.trivial
def test_field_spec_file(tmp_path):
    """测试从 JSON 文件读取数域"""
    path = tmp_path / "cubic.json"
    path.write_text(json.dumps({"kind": "custom", "degree": 3, "r1": 1, "r2": 1, "disc": -23}))
    assert load_field_spec(str(path))["disc"] == -23
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "quartic"}))
    with pytest.raises(ValidationError):
        load_field_spec(str(bad))


@pytest.mark.trivial
def test_parse_hyperplane():
    """测试超平面系数解析"""
    assert parse_hyperplane(None, 3) == (Fraction(1), Fraction(0), Fraction(0)), "缺省为 τ_{v0} = 0"
    assert parse_hyperplane("1, -1/2", 2) == (Fraction(1), Fraction(-1, 2))
    with pytest.raises(ValidationError):
        parse_hyperplane("1,2,3", 2)
    with pytest.raises(ValidationError):
        parse_hyperplane("1,x", 2)


@pytest.mark.trivial
def test_parse_grid():
    """测试网格描述"""
    assert np.allclose(parse_grid("log:100:10000:3"), [100, 1000, 10000])
    assert np.allclose(parse_grid("lin:0:1:5"), [0, 0.25, 0.5, 0.75, 1])
    assert np.allclose(parse_grid("0.1,0.5"), [0.1, 0.5])
    with pytest.raises(ValidationError):
        parse_grid("log:a:b:3")


@pytest.mark.trivial
def test_run_config(tmp_path, monkeypatch):
    """测试运行配置的序列化"""
    monkeypatch.setenv("HECKELAB_WORKERS", "3")
    monkeypatch.setenv("HECKELAB_SEED", "7")
    cfg = RunConfig(field="qi", T=50.0)
    assert cfg.workers == 3 and cfg.seed == 7, "环境变量应提供缺省值"
    data = cfg.to_dict()
    assert "workers" not in data and "out_dir" not in data, "报告中的配置不含运行环境"

    path = tmp_path / "run.json"
    path.write_text(json.dumps({"field": "q13", "beta": 0.9}))
    loaded = RunConfig.from_json(str(path))
    assert loaded.field == "q13" and loaded.beta == 0.9
    path.write_text(json.dumps({"field": "q13", "colour": "red"}))
    with pytest.raises(ValidationError):
        RunConfig.from_json(str(path))


@pytest.mark.trivial
def test_workers_validation(monkeypatch):
    """测试 HECKELAB_WORKERS 的检查"""
    for value in ("zero", "0"):
        monkeypatch.setenv("HECKELAB_WORKERS", value)
        with pytest.raises(ValidationError):
            default_workers()


@pytest.mark.trivial
def test_enum_budget_from_env(monkeypatch):
    """测试 HECKELAB_ENUM_BUDGET 与 HECKELAB_SEED 的检查"""
    monkeypatch.setenv("HECKELAB_ENUM_BUDGET", "500")
    assert default_enum_budget() == 500
    assert RunConfig(field="q5").enum_budget == 500, "RunConfig 应读取枚举预算"
    for value in ("lots", "0"):
        monkeypatch.setenv("HECKELAB_ENUM_BUDGET", value)
        with pytest.raises(ValidationError):
            default_enum_budget()
    monkeypatch.setenv("HECKELAB_SEED", "-1")
    with pytest.raises(ValidationError):
        RunConfig(field="q5")


@pytest.mark.trivial
def test_report_is_deterministic(tmp_path):
    """测试同样的内容写出逐字节相同的报告"""
    payload = {"b": np.float64(1 / 3), "a": [1 + 2j, np.int64(4)], "flag": np.bool_(True)}
    writer = ReportWriter(str(tmp_path))
    first = writer.write_json("run", payload, {"b": "无量纲"}, {"seed": 1}).read_bytes()
    second = writer.write_json("run.json", dict(reversed(list(payload.items()))),
                               {"b": "无量纲"}, {"seed": 1}).read_bytes()
    assert first == second, "报告应与字典顺序无关"
    document = json.loads(first)
    assert document["result"]["a"][0] == {"re": 1.0, "im": 2.0}, "复数编码为 re/im"
    assert document["result"]["flag"] is True
    assert document["config"] == {"seed": 1}


@pytest.mark.trivial
def test_report_csv(tmp_path):
    """测试 CSV 报告"""
    path = ReportWriter(str(tmp_path)).write_csv("rows", ["T", "ratio"], [(100, 0.98), (1000, 1.0)])
    assert path.read_text(encoding="utf-8").splitlines() == ["T,ratio", "100,0.98", "1000,1"]


@pytest.mark.trivial
def test_setup_logging(tmp_path):
    """测试日志配置"""
    logger_ = setup_logging("debug", str(tmp_path))
    assert logger_.name == "HeckeLab"
    assert any(name.startswith("hecke_") for name in os.listdir(tmp_path)), "应创建日志文件"
    with pytest.raises(ValidationError):
        setup_logging("chatty", str(tmp_path))


def main():
    """运行所有测试"""
    print("\n=== 运行配置与报告测试 ===")
    test_field_aliases()
    test_parse_hyperplane()
    test_parse_grid()


if __name__ == "__main__":
    main()
