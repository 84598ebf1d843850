import numpy as np
import pytest

from coneinf.config import ConfigError, load_model, parse_kappa, parse_model_text, parse_tangent
from coneinf.hilbert import norm_sq

MODEL_1 = """
# sign tangent plus truncated sign, unnormalised
base = normal
kappa = identity
tangent = 0 | -1 1
tangent = -1 0 1 | 0 -1 1 0
cone = true
"""


class TestParseKappa:
    @pytest.mark.parametrize("name, x, expected", [
        ("identity", [-2.0, 0.5], [-2.0, 0.5]),
        ("sign", [-2.0, 0.5], [-1.0, 1.0]),
        ("table -1:-2 1:2", [0.0, 0.5], [0.0, 1.0]),
    ])
    def test_known(self, name, x, expected):
        np.testing.assert_allclose(parse_kappa(name)(np.array(x)), expected)

    @pytest.mark.parametrize("bad", ["cube", "table 1:2:3", "table a:b"])
    def test_unknown(self, bad):
        with pytest.raises(ConfigError):
            parse_kappa(bad)


class TestParseTangent:
    def test_step_values(self):
        g = parse_tangent("-1 0 1 | 0 -1 1 0", 2)
        np.testing.assert_array_equal(g(np.array([-2.0, -0.5, 0.5, 2.0])), [0, -1, 1, 0])

    @pytest.mark.parametrize("bad", ["0 -1 1", "0 | 1", "x | 1 2", "1 0 | 1 2 3"])
    def test_malformed(self, bad):
        with pytest.raises(ConfigError):
            parse_tangent(bad, 1)


class TestParseModel:
    def test_reproduces_first_model_crosses(self):
        m = parse_model_text(MODEL_1)
        assert len(m.generators) == 2 and m.cone
        b1 = m.gram.cross[0]
        assert b1 == pytest.approx(0.7978845608028654, abs=5e-9)
        assert m.cone_projection().coeffs[1] == 0.0

    def test_normalize(self):
        m = parse_model_text(MODEL_1 + "normalize = yes\n")
        for g in m.generators:
            assert norm_sq(g, m.P) == pytest.approx(1.0, abs=1e-9)
        assert m.gram.gram[0, 1] == pytest.approx(0.8262502599921442, abs=1e-9)

    def test_span_flag_and_bases(self):
        m = parse_model_text("base = laplace\ntangent = 0 | -1 1\ncone = off\n")
        assert not m.cone
        m = parse_model_text("base = uniform\nkappa = sign\ntangent = 0 | -1 1\n")
        assert m.gram.cross[0] == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("text", [
        "base = normal\n",                            # no tangent
        "tangent = 0 | -1 1\nbase = cauchy\n",        # unknown base
        "tangent = 0 | -1 1\ncolour = red\n",         # unknown key
        "tangent = 0 | -1 1\njust words\n",           # no '='
        "tangent = 0 | -1 1\ncone = maybe\n",         # bad boolean
        "tangent = 0 | 0 0\nnormalize = true\n",      # zero norm
    ])
    def test_errors(self, text):
        with pytest.raises(ConfigError):
            parse_model_text(text)

    def test_config_error_is_value_error(self):
        assert issubclass(ConfigError, ValueError)

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "model.txt"
        path.write_text(MODEL_1)
        assert len(load_model(path).generators) == 2
