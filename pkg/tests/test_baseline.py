import json
import random

import pytest

from polyextract import (
    CompositionPBD,
    CompositionPNC,
    Curve,
    DataError,
    PaperRecord,
    SampleRecord,
    build_profile,
    discrete_frechet,
    expand_with_baseline,
    load_profile,
    profile_from_json,
    profile_to_json,
    round_count,
    save_profile,
)


def pnc_paper(paper_id, *samples_):
    return PaperRecord(paper_id, "pnc", tuple(samples_))


def thermal(x="temp", y="mass", data=((0.0, 0.0), (1.0, 1.0))):
    return Curve("thermal", x, y, data)


class TestRoundCount:
    @pytest.mark.parametrize(
        "value,expected", [(0.4, 0), (0.5, 1), (1.5, 2), (1.49, 1), (2.0, 2)]
    )
    def test_half_up(self, value, expected):
        assert round_count(value, "half-up") == expected

    def test_floor_and_ceil(self):
        assert round_count(1.9, "floor") == 1
        assert round_count(1.1, "ceil") == 2

    def test_unknown_mode(self):
        with pytest.raises(DataError):
            round_count(1.0, "banker")


class TestBuildProfile:
    def test_single_curve_is_its_own_medoid(self):
        c = thermal()
        profile = build_profile([pnc_paper("p1", SampleRecord(CompositionPNC(), (c,)))])
        entry = profile.entries["thermal"]
        assert entry.medoid is not None
        assert entry.medoid == c.points
        assert entry.curve_count == 1
        assert entry.mean_count == pytest.approx(1.0)

    def test_medoid_minimizes_cumulative_distance(self):
        candidates = [
            thermal(data=[(0.0, 0.0), (1.0, 0.0)]),
            thermal(data=[(0.0, 0.1), (1.0, 0.1)]),
            thermal(data=[(0.0, 5.0), (1.0, 5.0)]),
        ]
        corpus = [
            pnc_paper(f"p{i}", SampleRecord(CompositionPNC(), (c,)))
            for i, c in enumerate(candidates)
        ]
        profile = build_profile(corpus)
        entry = profile.entries["thermal"]
        costs = [
            sum(discrete_frechet(a.points, b.points) for b in candidates)
            for a in candidates
        ]
        best = candidates[costs.index(min(costs))]
        assert entry.medoid == best.points

    def test_empty_point_curves_skipped_for_medoid_but_counted(self):
        with_points = thermal(data=[(0.0, 2.0), (1.0, 2.0)])
        empty = thermal(data=[])
        profile = build_profile(
            [pnc_paper("p1", SampleRecord(CompositionPNC(), (with_points, empty)))]
        )
        entry = profile.entries["thermal"]
        assert entry.medoid == with_points.points
        assert entry.curve_count == 2
        assert entry.mean_count == pytest.approx(2.0)

    def test_modal_headers_tie_breaks_lexicographically(self):
        curves = [
            thermal(x="alpha", y="zeta"),
            thermal(x="beta", y="zeta"),
        ]
        profile = build_profile(
            [pnc_paper("p1", SampleRecord(CompositionPNC(), tuple(curves)))]
        )
        entry = profile.entries["thermal"]
        assert entry.x_header == "alpha"
        assert entry.y_header == "zeta"

    def test_modal_headers_prefer_most_frequent(self):
        curves = [
            thermal(x="temp"),
            thermal(x="temp"),
            thermal(x="time"),
        ]
        profile = build_profile(
            [pnc_paper("p1", SampleRecord(CompositionPNC(), tuple(curves)))]
        )
        entry = profile.entries["thermal"]
        assert entry.x_header == "temp"

    def test_mean_count_uses_all_samples(self):
        samples = [
            SampleRecord(CompositionPNC(), (thermal(), thermal())),
            SampleRecord(CompositionPNC(), ()),
        ]
        profile = build_profile([pnc_paper("p1", *samples)])
        entry = profile.entries["thermal"]
        assert entry.mean_count == pytest.approx(1.0)
        assert profile.total_samples == 2

    def test_category_never_seen_has_no_entry(self):
        profile = build_profile(
            [pnc_paper("p1", SampleRecord(CompositionPNC(), (thermal(),)))]
        )
        names = set(profile.entries)
        assert names == {"thermal"}

    def test_mixed_domains_rejected(self):
        pnc = pnc_paper("p1", SampleRecord(CompositionPNC(), ()))
        pbd = PaperRecord("p2", "pbd", (SampleRecord(CompositionPBD(), ()),))
        with pytest.raises(DataError):
            build_profile([pnc, pbd])

    def test_empty_corpus_rejected(self):
        with pytest.raises(DataError):
            build_profile([])

    def test_zero_samples_rejected(self):
        with pytest.raises(DataError):
            build_profile([pnc_paper("p1")])

    def test_order_invariance(self):
        rng = random.Random(3)
        papers = [
            pnc_paper(
                f"p{i}",
                SampleRecord(
                    CompositionPNC(),
                    (thermal(x=f"x{i}", data=[(0.0, float(i)), (1.0, float(i))]),),
                ),
            )
            for i in range(5)
        ]
        base = profile_to_json(build_profile(papers))
        for _ in range(3):
            shuffled = list(papers)
            rng.shuffle(shuffled)
            assert profile_to_json(build_profile(shuffled)) == base


class TestExpandWithBaseline:
    def make_profile(self):
        corpus = [
            pnc_paper(
                "p1",
                SampleRecord(CompositionPNC(), (thermal(), thermal(x="time"))),
                SampleRecord(
                    CompositionPNC(),
                    (Curve("electrical", "freq", "perm", [(0.0, 1.0), (1.0, 1.0)]),),
                ),
            )
        ]
        return build_profile(corpus)

    def test_copies_match_rounded_mean(self):
        profile = self.make_profile()
        pred = pnc_paper("q1", SampleRecord(CompositionPNC(matrix_component="epoxy"), ()))
        expanded = expand_with_baseline(pred, profile)
        names = [c.property_name for c in expanded.samples[0].properties]
        # thermal mean 1.0 -> 1 copy, electrical mean 0.5 -> 1 copy (half-up)
        assert names == ["thermal", "electrical"]

    def test_floor_rounding_drops_half_counts(self):
        profile = self.make_profile()
        pred = pnc_paper("q1", SampleRecord(CompositionPNC(), ()))
        expanded = expand_with_baseline(pred, profile, rounding="floor")
        names = [c.property_name for c in expanded.samples[0].properties]
        assert names == ["thermal"]

    def test_replaces_existing_curves(self):
        profile = self.make_profile()
        stale = Curve("mechanical", "old", "old", [(9.0, 9.0)])
        pred = pnc_paper("q1", SampleRecord(CompositionPNC(), (stale,)))
        expanded = expand_with_baseline(pred, profile)
        names = [c.property_name for c in expanded.samples[0].properties]
        assert "mechanical" not in names

    def test_composition_untouched(self):
        profile = self.make_profile()
        comp = CompositionPNC(matrix_component="epoxy", filler_mass="5%")
        pred = pnc_paper("q1", SampleRecord(comp, ()))
        expanded = expand_with_baseline(pred, profile)
        assert expanded.samples[0].composition == comp

    def test_pbd_emits_exactly_one_curve(self):
        corpus = [
            PaperRecord(
                "p1",
                "pbd",
                (
                    SampleRecord(
                        CompositionPBD(),
                        (
                            Curve("biodegradation", "day", "pct", [(0.0, 0.0), (7.0, 3.0)]),
                            Curve("biodegradation", "day", "pct", [(0.0, 0.0), (7.0, 5.0)]),
                        ),
                    ),
                ),
            )
        ]
        profile = build_profile(corpus)
        pred = PaperRecord("q1", "pbd", (SampleRecord(CompositionPBD(), ()),))
        expanded = expand_with_baseline(pred, profile)
        assert len(expanded.samples[0].properties) == 1
        assert expanded.samples[0].properties[0].property_name == "biodegradation"

    def test_domain_mismatch_rejected(self):
        profile = self.make_profile()
        pred = PaperRecord("q1", "pbd", (SampleRecord(CompositionPBD(), ()),))
        with pytest.raises(DataError):
            expand_with_baseline(pred, profile)

    def test_entry_without_medoid_reported_not_expanded(self):
        corpus = [pnc_paper("p1", SampleRecord(CompositionPNC(), (thermal(data=[]),)))]
        profile = build_profile(corpus)
        diagnostics = []
        pred = pnc_paper("q1", SampleRecord(CompositionPNC(), ()))
        expanded = expand_with_baseline(pred, profile, diagnostics=diagnostics)
        assert expanded.samples[0].properties == ()
        assert any("thermal" in note for note in diagnostics)


class TestProfilePersistence:
    def test_json_round_trip(self):
        corpus = [
            pnc_paper(
                "p1",
                SampleRecord(CompositionPNC(), (thermal(), thermal(data=[]))),
            )
        ]
        profile = build_profile(corpus)
        restored = profile_from_json(profile_to_json(profile))
        assert restored == profile

    def test_json_is_auditable(self):
        profile = build_profile(
            [pnc_paper("p1", SampleRecord(CompositionPNC(), (thermal(),)))]
        )
        payload = json.loads(profile_to_json(profile))
        assert payload["domain"] == "pnc"
        assert payload["total_samples"] == 1
        entry = payload["categories"]["thermal"]
        assert entry["mean_count"] == 1.0
        assert entry["medoid"] == [[0.0, 0.0], [1.0, 1.0]]

    def test_file_round_trip(self, tmp_path):
        profile = build_profile(
            [pnc_paper("p1", SampleRecord(CompositionPNC(), (thermal(),)))]
        )
        path = tmp_path / "profile.json"
        save_profile(profile, path)
        assert load_profile(path) == profile
