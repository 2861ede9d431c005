import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from seqpurify.denoise import purify_profile
from seqpurify.ensemble import (
    EnsembleConfig,
    EnsembleError,
    ReturnDefense,
    borda_vote,
    ensemble_recommend,
    round_half_up,
    sample_count,
    vote,
)
from seqpurify.positioning import occurrence_profile
from seqpurify.recsys import CallableRecommender, train_reference

P = (1, 2, 5)


def test_defaults():
    cfg = EnsembleConfig()
    assert (cfg.m, cfg.count_mean, cfg.count_spread) == (10, 3.5, 0.5)


@pytest.mark.parametrize("bad", [dict(m=0), dict(count_spread=-1), dict(variant="x"), dict(vote="x")])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        EnsembleConfig(**bad)


class TestSampleCount:
    def test_degenerate_spread(self):
        cfg = EnsembleConfig(count_spread=0.0)
        rng = np.random.default_rng(0)
        assert {sample_count(rng, cfg, 10) for _ in range(50)} == {4}

    def test_clamped_to_profile(self):
        cfg = EnsembleConfig()
        rng = np.random.default_rng(1)
        assert {sample_count(rng, cfg, 2) for _ in range(200)} <= {1, 2}

    def test_lower_clamp(self):
        cfg = EnsembleConfig(count_mean=-5.0)
        assert sample_count(np.random.default_rng(0), cfg, 5) == 1
        cfg0 = EnsembleConfig(count_mean=-5.0, min_count=0)
        assert sample_count(np.random.default_rng(0), cfg0, 5) == 0

    def test_round_half_up(self):
        assert [round_half_up(x) for x in (2.5, 3.5, 3.49, -0.5)] == [3, 4, 3, 0]


class TestBorda:
    def test_hand_points(self):
        assert borda_vote([[10, 11, 12], [11, 10, 12]], 3) == [10, 11, 12]

    def test_appearances_break_point_ties(self):
        # 7, 2 and 8 all earn 3 points; 8 appears twice, then 2 < 7 by id.
        assert borda_vote([[7, 8, 1], [2, 3, 8]], 3) == [8, 2, 7]

    def test_single_list_identity(self):
        assert borda_vote([[4, 2, 9]], 3) == [4, 2, 9]

    def test_unanimity(self):
        assert borda_vote([[4, 2, 9]] * 3, 3) == [4, 2, 9]

    def test_plurality_rule(self):
        assert vote([[1, 2], [1, 3], [2, 1]], 2, "plurality") == [1, 2]

    @given(
        st.lists(
            st.lists(st.integers(0, 20), min_size=1, max_size=5, unique=True),
            min_size=1,
            max_size=6,
        ),
        st.randoms(use_true_random=False),
    )
    def test_list_order_invariance(self, lists, rnd):
        shuffled = list(lists)
        rnd.shuffle(shuffled)
        assert borda_vote(shuffled, 5) == borda_vote(lists, 5)


class TestReturnDefense:
    def test_single_prompt_reduces_to_purify_then_recommend(self, tiny_db, tiny_graph):
        rec = train_reference(tiny_db, graph=tiny_graph)
        cfg = EnsembleConfig(m=1, count_spread=0.0, k=3)
        got = ensemble_recommend(rec, tiny_graph, P, cfg)
        scores = occurrence_profile(tiny_graph, P)
        purified = purify_profile(tiny_graph, P, scores, min(round_half_up(3.5), len(P)))
        assert got == rec.recommend(purified.items, 3)

    def test_no_ens_uses_rounded_mean(self, tiny_graph):
        d = ReturnDefense(tiny_graph, EnsembleConfig(variant="no_ens"))
        prompts = d.prompts((1, 2, 3, 4, 5, 6))
        assert len(prompts) == 1 and len(prompts[0].edits) == 4

    def test_identical_prompts_vote_to_single_output(self, tiny_graph):
        mock = CallableRecommender(lambda p, k: list(reversed(p))[:k] or [0])
        cfg1 = EnsembleConfig(m=1, count_spread=0.0, k=3)
        cfg3 = EnsembleConfig(m=3, count_spread=0.0, k=3)
        d3 = ReturnDefense(tiny_graph, cfg3)
        prompts = d3.prompts(P)
        assert len({p.items for p in prompts}) == 1
        assert d3.recommend(mock, P) == ReturnDefense(tiny_graph, cfg1).recommend(mock, P)

    def test_prompt_counts_are_seeded_per_user(self, tiny_graph):
        d = ReturnDefense(tiny_graph, EnsembleConfig(seed=4))
        profile = tuple(range(1, 9))
        a = [len(p.edits) for p in d.prompts(profile, user_id=3)]
        assert a == [len(p.edits) for p in d.prompts(profile, user_id=3)]
        assert len(a) == 10 and set(a) <= set(range(1, 9))

    def test_rr_deletes_only(self, tiny_graph):
        d = ReturnDefense(tiny_graph, EnsembleConfig(variant="rr"))
        for p in d.prompts((1, 2, 5, 3)):
            assert all(e.replacement is None for e in p.edits)

    def test_rop_uses_random_graph(self, tiny_graph):
        d = ReturnDefense(tiny_graph, EnsembleConfig(variant="rop"))
        assert d.graph is not tiny_graph
        assert [m.nnz for m in d.graph.hops] == [m.nnz for m in tiny_graph.hops]

    def test_recommender_failure_carries_edits(self, tiny_graph):
        def boom(profile, k):
            raise RuntimeError("victim down")

        d = ReturnDefense(tiny_graph, EnsembleConfig(m=2, count_spread=0.0))
        with pytest.raises(EnsembleError) as exc:
            d.recommend(CallableRecommender(boom), P)
        assert exc.value.prompt_index == 0
        assert exc.value.edits == exc.value.purified.edits
        assert "victim down" in str(exc.value)
