import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from ednig.errors import ContractError
from ednig.net import SPP, GeneratorConfig, build_generator, count_parameters, crop, pad_to_multiple
from oracles import generator_param_count, window_max_naive


@pytest.fixture(scope="module")
def gen():
    return build_generator(GeneratorConfig(), 0)


class TestConfig:
    def test_widths(self):
        assert GeneratorConfig().widths == (12, 24, 48, 96, 192)

    @pytest.mark.parametrize("k", [(5, 8, 13), (9, 5, 13), (5, 5, 9)])
    def test_bad_spp(self, k):
        with pytest.raises(ContractError):
            GeneratorConfig(spp_kernels=k)


class TestParameters:
    def test_default_budget(self, gen):
        n = count_parameters(gen)
        assert 1.56e6 <= n <= 1.91e6
        assert n == generator_param_count()

    def test_half_width_closed_form(self):
        n6 = count_parameters(build_generator(GeneratorConfig(base_channels=6)))
        assert n6 == generator_param_count(base=6)
        assert 0.2 < n6 / generator_param_count() < 0.3

    def test_empty(self):
        assert count_parameters([]) == 0
        assert count_parameters({}) == 0

    def test_seed_independent(self):
        assert count_parameters(build_generator(init_seed=1)) == count_parameters(build_generator(init_seed=2))


class TestInit:
    def test_same_seed_identical(self):
        a, b = build_generator(init_seed=7).state_dict(), build_generator(init_seed=7).state_dict()
        assert all(torch.equal(a[k], b[k]) for k in a)

    def test_different_seed_differs(self):
        a, b = build_generator(init_seed=7).state_dict(), build_generator(init_seed=8).state_dict()
        assert not torch.equal(a["encoder.0.0.weight"], b["encoder.0.0.weight"])


class TestSPP:
    def test_constant_pre_fusion(self):
        spp = SPP(4)
        x = torch.full((1, 4, 6, 6), 0.7)
        np.testing.assert_allclose(spp.pooled(x).numpy(), 0.7)
        assert spp.pooled(x).shape == (1, 16, 6, 6)

    def test_shape(self):
        assert SPP(192)(torch.randn(1, 192, 32, 32)).shape == (1, 192, 32, 32)

    def test_impulse_plateaus(self):
        spp = SPP(1)
        x = torch.zeros(1, 1, 21, 21)
        x[0, 0, 10, 10] = 1.0
        pooled = spp.pooled(x)[0].numpy()
        np.testing.assert_array_equal(pooled[0], x[0, 0].numpy())
        for i, k in enumerate((5, 9, 13), start=1):
            np.testing.assert_array_equal(pooled[i], window_max_naive(x[0, 0].numpy(), k))
            assert pooled[i].sum() == k * k

    def test_small_map_valid(self):
        assert SPP(2)(torch.randn(1, 2, 2, 2)).shape == (1, 2, 2, 2)


class TestForward:
    @pytest.mark.parametrize("size", [64, 128])
    def test_shape_and_range(self, gen, size):
        with torch.no_grad():
            out = gen(torch.rand(1, 4, size, size) * 2 - 1)
        assert out.shape == (1, 3, size, size)
        assert out.abs().max() < 1

    def test_trace(self, gen):
        trace = []
        with torch.no_grad():
            gen(torch.rand(1, 4, 64, 64), trace=trace)
        assert [tuple(t.shape[1:]) for t in trace] == [(12, 64, 64), (24, 32, 32), (48, 16, 16), (96, 8, 8), (192, 4, 4)]

    def test_indivisible(self, gen):
        with pytest.raises(ContractError, match="pad_to_multiple"):
            gen(torch.zeros(1, 4, 40, 64))

    def test_deterministic(self, gen):
        x = torch.rand(1, 4, 32, 32)
        with torch.no_grad():
            assert torch.equal(gen(x), gen(x))


class TestPadding:
    def test_lol_size(self):
        padded, box = pad_to_multiple(np.zeros((400, 600, 3)))
        assert padded.shape == (400, 608, 3)
        assert box == (0, 0, 400, 600)

    def test_multiple_unchanged(self):
        x = np.random.default_rng(0).random((512, 512, 4))
        padded, box = pad_to_multiple(x)
        np.testing.assert_array_equal(padded, x)
        assert box == (0, 0, 512, 512)

    @settings(max_examples=37, deadline=None)
    @given(h=st.integers(1, 70), w=st.integers(1, 70), c=st.sampled_from([1, 3, 4]))
    def test_roundtrip(self, h, w, c):
        x = np.random.default_rng(h * 100 + w).random((h, w, c)).astype(np.float32)
        padded, box = pad_to_multiple(x, 16)
        assert padded.shape[0] % 16 == 0 and padded.shape[1] % 16 == 0
        np.testing.assert_array_equal(crop(padded, box), x)
