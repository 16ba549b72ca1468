import math

import pytest
import torch

from ednig.critic import CriticConfig, build_critic, critic_score
from ednig.errors import ContractError, NumericError
from ednig.net import build_generator, count_parameters
from oracles import critic_param_count


def test_widths_and_params():
    c = build_critic()
    assert CriticConfig().widths == (12, 24, 48, 96, 192)
    assert count_parameters(c) == critic_param_count()
    assert count_parameters(c) < count_parameters(build_generator())


def test_scalar_per_item():
    c = build_critic()
    with torch.no_grad():
        assert c(torch.rand(2, 3, 64, 96) * 2 - 1).shape == (2,)


@pytest.mark.slow
def test_full_size_input():
    with torch.no_grad():
        assert build_critic()(torch.zeros(1, 3, 512, 512)).shape == (1,)


def test_same_seed_same_weights():
    a, b = build_critic(init_seed=3).state_dict(), build_critic(init_seed=3).state_dict()
    assert all(torch.equal(a[k], b[k]) for k in a)


def test_zero_weights_gives_bias():
    c = build_critic()
    with torch.no_grad():
        for p in c.parameters():
            p.zero_()
        c.fc.bias.fill_(0.25)
    assert critic_score(c, torch.rand(1, 3, 32, 32)) == 0.25


def test_finite_over_trials():
    g = torch.Generator().manual_seed(0)
    for seed in range(100):
        c = build_critic(init_seed=seed)
        x = torch.rand(1, 3, 32, 32, generator=g) * 2 - 1
        assert math.isfinite(critic_score(c, x))


def test_head_linearity():
    c = build_critic(init_seed=1)
    x = torch.rand(1, 3, 64, 64) * 2 - 1
    with torch.no_grad():
        c.fc.bias.fill_(0.3)
    s1 = critic_score(c, x) - 0.3
    with torch.no_grad():
        c.fc.weight.mul_(2)
    s2 = critic_score(c, x) - 0.3
    assert s2 == pytest.approx(2 * s1, rel=1e-5, abs=1e-7)


def test_indivisible_rejected():
    with pytest.raises(ContractError):
        critic_score(build_critic(), torch.zeros(1, 3, 48, 64))


def test_nonfinite_names_layer():
    c = build_critic()
    with torch.no_grad():
        c.features[2].weight[0, 0, 0, 0] = float("inf")
    with pytest.raises(NumericError, match="features"):
        critic_score(c, torch.rand(1, 3, 32, 32))


def test_leaky_variant():
    c = build_critic(CriticConfig(activation="leaky_relu"))
    assert isinstance(c.features[1], torch.nn.LeakyReLU)
    with pytest.raises(ContractError):
        CriticConfig(activation="relu6")


def test_no_shared_weights_with_generator():
    g, c = build_generator(), build_critic()
    gids = {id(p) for p in g.parameters()}
    assert not any(id(p) in gids for p in c.parameters())
