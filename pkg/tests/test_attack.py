import numpy as np
import pytest

from oracles import exhaustive_single_pixel_successes, reference_predict
from pixelbench.attack import (AttackConfig, PixelBounds, PixelPerturbation,
                               apply_perturbation, de_attack, fitness, success)
from pixelbench.data import Image
from pixelbench.errors import BoundsError, ConfigError
from pixelbench.features import project


class TestApplyPerturbation:
    def test_single_pixel_write(self):
        img = Image(width=2, height=2, channels=1,
                    pixels=np.zeros(4, dtype=np.uint8))
        out = apply_perturbation(img, PixelPerturbation(pixels=((0, 0, (255,)),)))
        assert out.pixels.tolist() == [255, 0, 0, 0]
        assert np.count_nonzero(out.pixels) == 1

    def test_identity_write(self):
        img = Image(width=2, height=2, channels=1,
                    pixels=np.array([9, 8, 7, 6], dtype=np.uint8))
        out = apply_perturbation(img, PixelPerturbation(pixels=((1, 0, (8,)),)))
        assert np.array_equal(out.pixels, img.pixels)

    def test_rgb_offsets_are_interleaved(self):
        img = Image(width=3, height=2, channels=3,
                    pixels=np.zeros(18, dtype=np.uint8))
        out = apply_perturbation(img, PixelPerturbation(pixels=((2, 1, (1, 2, 3)),)))
        offset = (1 * 3 + 2) * 3  # row 1, col 2, channel-interleaved
        assert out.pixels[offset:offset + 3].tolist() == [1, 2, 3]
        assert np.count_nonzero(out.pixels) == 3

    def test_out_of_bounds_coordinate(self):
        img = Image(width=2, height=2, channels=1,
                    pixels=np.zeros(4, dtype=np.uint8))
        with pytest.raises(BoundsError):
            apply_perturbation(img, PixelPerturbation(pixels=((2, 0, (1,)),)))

    def test_original_is_untouched(self):
        img = Image(width=2, height=2, channels=1,
                    pixels=np.zeros(4, dtype=np.uint8))
        apply_perturbation(img, PixelPerturbation(pixels=((0, 1, (5,)),)))
        assert img.pixels.tolist() == [0, 0, 0, 0]


class TestFitnessAndSuccess:
    def test_pure_correct_leaf_has_fitness_one(self, attackable_pipeline):
        pipeline, image = attackable_pipeline
        assert fitness(pipeline, image, true_class=0) == 1.0
        assert success(pipeline, image, true_class=0) is False

    def test_pure_wrong_leaf_has_fitness_zero(self, attackable_pipeline):
        pipeline, image = attackable_pipeline
        flipped = apply_perturbation(image, PixelPerturbation(pixels=((0, 0, (255,)),)))
        assert fitness(pipeline, flipped, true_class=0) == 0.0
        assert success(pipeline, flipped, true_class=0) is True

    def test_targeted_semantics(self, attackable_pipeline):
        pipeline, image = attackable_pipeline
        assert fitness(pipeline, image, true_class=0, target_class=1) == 1.0
        assert success(pipeline, image, true_class=0, target_class=1) is False
        flipped = apply_perturbation(image, PixelPerturbation(pixels=((0, 0, (255,)),)))
        assert fitness(pipeline, flipped, true_class=0, target_class=1) == 0.0
        assert success(pipeline, flipped, true_class=0, target_class=1) is True

    def test_matches_tree_walk_oracle(self, attackable_pipeline):
        pipeline, image = attackable_pipeline
        rng = np.random.default_rng(6)
        for _ in range(100):
            pixels = rng.integers(0, 256, size=16, dtype=np.uint8)
            img = Image(width=4, height=4, channels=1, pixels=pixels)
            feats = project(pipeline.extractor, img)
            _, expected_class, expected_dist = reference_predict(pipeline.model, feats)
            assert fitness(pipeline, img, true_class=0) == pytest.approx(
                expected_dist[0])
            assert success(pipeline, img, true_class=0) == (expected_class != 0)


class TestDeAttack:
    def test_pop_size_validation(self):
        with pytest.raises(ConfigError):
            AttackConfig(pop_size=3)

    def test_unattackable_model_never_succeeds(self, single_leaf_pipeline):
        pipeline, image = single_leaf_pipeline
        config = AttackConfig(pop_size=8, iterations=6, num_attacks=3, seed=1,
                              early_stop=False)
        traces = de_attack(pipeline, image, true_class=0, config=config)
        assert len(traces) == 3
        for trace in traces:
            assert trace.succeeded is False
            assert trace.success_iteration is None
            fits = [r.best_fitness for r in trace.records]
            assert fits == [1.0] * len(fits)

    def test_exhaustively_confirmed_fixture_is_beaten(self, attackable_pipeline):
        pipeline, image = attackable_pipeline
        hits = exhaustive_single_pixel_successes(pipeline, image, true_class=0)
        assert hits  # successes exist: pixels (0,0) and (1,1) above 100
        assert {(x, y) for x, y, _ in hits} == {(0, 0), (1, 1)}
        assert all(v > 100 for _, _, v in hits)
        wins = 0
        for seed in range(20):
            config = AttackConfig(pop_size=40, iterations=30, seed=seed,
                                  early_stop=True)
            trace = de_attack(pipeline, image, true_class=0, config=config)[0]
            wins += trace.succeeded
            if trace.succeeded:
                predicted, _ = pipeline.predict_image(trace.final_image)
                assert predicted != 0
        assert wins >= 18

    def test_num_attacks_yields_reproducible_distinct_runs(self, attackable_pipeline):
        pipeline, image = attackable_pipeline
        config = AttackConfig(pop_size=8, iterations=5, num_attacks=5, seed=123,
                              early_stop=False)
        first = de_attack(pipeline, image, true_class=0, config=config)
        second = de_attack(pipeline, image, true_class=0, config=config)
        assert len(first) == 5
        assert [t.run_index for t in first] == [0, 1, 2, 3, 4]
        payloads = [t.tobytes() for t in first]
        assert payloads == [t.tobytes() for t in second]
        assert len(set(payloads)) == 5  # derived seeds differ per run

    def test_runs_are_independent_of_how_many_follow(self, attackable_pipeline):
        # run i depends only on (base seed, i): a shorter simulation is a
        # prefix of a longer one
        pipeline, image = attackable_pipeline
        longer = de_attack(pipeline, image, true_class=0,
                           config=AttackConfig(pop_size=8, iterations=5,
                                               num_attacks=5, seed=77,
                                               early_stop=False))
        shorter = de_attack(pipeline, image, true_class=0,
                            config=AttackConfig(pop_size=8, iterations=5,
                                                num_attacks=2, seed=77,
                                                early_stop=False))
        assert [t.tobytes() for t in shorter] == \
            [t.tobytes() for t in longer[:2]]

    def test_best_fitness_is_nonincreasing(self, attackable_pipeline):
        pipeline, image = attackable_pipeline
        config = AttackConfig(pop_size=10, iterations=20, num_attacks=4, seed=7,
                              early_stop=False)
        for trace in de_attack(pipeline, image, true_class=0, config=config):
            fits = [r.best_fitness for r in trace.records]
            assert all(a >= b for a, b in zip(fits, fits[1:]))

    def test_candidates_respect_bounds(self, attackable_pipeline):
        pipeline, image = attackable_pipeline
        bounds = PixelBounds(x=(1, 2), y=(0, 3), values=((10, 90),))
        config = AttackConfig(pop_size=8, iterations=10, seed=3,
                              early_stop=False, bounds=bounds)
        trace = de_attack(pipeline, image, true_class=0, config=config)[0]
        for record in trace.records:
            for x, y, values in record.best_candidate.pixels:
                assert 1 <= x <= 2
                assert 0 <= y <= 3
                assert 10 <= values[0] <= 90
        # the bounded region excludes both vulnerable pixels
        assert trace.succeeded is False

    def test_every_evaluated_candidate_respects_bounds(self, attackable_pipeline,
                                                       monkeypatch):
        from pixelbench import attack as attack_module

        pipeline, image = attackable_pipeline
        bounds = PixelBounds(x=(1, 3), y=(0, 2), values=((5, 200),))
        observed = []
        original_call = attack_module._Evaluator.__call__

        def spying_call(self, candidates):
            observed.append(np.array(candidates, copy=True))
            return original_call(self, candidates)

        monkeypatch.setattr(attack_module._Evaluator, "__call__", spying_call)
        config = AttackConfig(pop_size=8, iterations=12, seed=6,
                              early_stop=False, bounds=bounds)
        de_attack(pipeline, image, true_class=0, config=config)
        assert observed
        lo = np.array([1, 0, 5])
        hi = np.array([3, 2, 200])
        for batch in observed:
            assert (batch >= lo).all() and (batch <= hi).all()

    def test_bounds_outside_image_rejected(self, attackable_pipeline):
        pipeline, image = attackable_pipeline
        config = AttackConfig(pop_size=8, iterations=2,
                              bounds=PixelBounds(x=(0, 4), y=(0, 3),
                                                 values=((0, 255),)))
        with pytest.raises(ConfigError):
            de_attack(pipeline, image, true_class=0, config=config)

    def test_success_flags_are_monotone_and_justified(self, attackable_pipeline):
        pipeline, image = attackable_pipeline
        config = AttackConfig(pop_size=12, iterations=15, num_attacks=6, seed=42,
                              early_stop=False)
        for trace in de_attack(pipeline, image, true_class=0, config=config):
            flags = [r.success for r in trace.records]
            assert flags == sorted(flags)  # never drops back to False
            seen = False
            for record in trace.records:
                perturbed = apply_perturbation(image, record.best_candidate)
                seen = seen or success(pipeline, perturbed, true_class=0)
                assert record.success == seen

    def test_multi_pixel_candidates(self, attackable_pipeline):
        pipeline, image = attackable_pipeline
        config = AttackConfig(pop_size=8, iterations=4, num_pixels=2, seed=9,
                              early_stop=False)
        trace = de_attack(pipeline, image, true_class=0, config=config)[0]
        for record in trace.records:
            assert len(record.best_candidate.pixels) == 2

    def test_early_stop_halts_at_first_success(self, attackable_pipeline):
        pipeline, image = attackable_pipeline
        config = AttackConfig(pop_size=40, iterations=30, seed=0, early_stop=True)
        trace = de_attack(pipeline, image, true_class=0, config=config)[0]
        assert trace.succeeded
        assert len(trace.records) == (trace.success_iteration or 0)

    def test_final_image_of_failed_run_applies_best_candidate(self, single_leaf_pipeline):
        pipeline, image = single_leaf_pipeline
        config = AttackConfig(pop_size=6, iterations=3, seed=2, early_stop=False)
        trace = de_attack(pipeline, image, true_class=0, config=config)[0]
        expected = apply_perturbation(image, trace.final_perturbation)
        assert np.array_equal(trace.final_image.pixels, expected.pixels)
