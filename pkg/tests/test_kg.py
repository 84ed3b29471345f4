import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hhea.kg import (
    AnchorFileError,
    AnchorSet,
    CalendarConfig,
    FactFileError,
    TimeSpan,
    entity_time_vector,
    load_anchors,
    load_kg,
    save_kg,
    split_anchors,
    time_index,
)
from conftest import write_anchors, write_facts


class TestTimeIndex:
    CAL = CalendarConfig()

    def test_calendar_base(self):
        assert time_index("1995-01", self.CAL) == 0

    def test_formula(self):
        assert time_index("1996-03", self.CAL) == 14

    def test_calendar_end(self):
        assert time_index("2021-12", self.CAL) == 323

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            time_index("2022-01", self.CAL)
        with pytest.raises(ValueError):
            time_index("1994-12", self.CAL)
        with pytest.raises(ValueError):
            time_index("1995-13", self.CAL)
        with pytest.raises(ValueError):
            time_index("not-a-date", self.CAL)

    def test_custom_calendar(self):
        cal = CalendarConfig(base_year=2000, n_months=24)
        assert time_index("2001-12", cal) == 23


class TestLoadKg:
    def test_direct_construction(self, tiny_kg):
        assert tiny_kg.n_entities == 3
        assert tiny_kg.n_relations == 1
        assert tiny_kg.n_facts == 2

    def test_first_appearance_ids(self, tiny_kg):
        assert tiny_kg.entity_names == ["a", "b", "c"]
        assert tiny_kg.entity_id("b") == 1

    def test_too_few_fields(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("a\tr1\n")
        with pytest.raises(FactFileError, match=":1:"):
            load_kg(str(path), temporal=False)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.tsv"
        path.write_text("")
        with pytest.raises(FactFileError, match="no facts"):
            load_kg(str(path), temporal=False)

    def test_comments_ignored(self, tmp_path):
        path = tmp_path / "c.tsv"
        path.write_text("# header\na\tr\tb\n")
        assert load_kg(str(path), temporal=False).n_facts == 1

    def test_unparseable_time_is_error(self, tmp_path):
        path = tmp_path / "t.tsv"
        path.write_text("a\tr\tb\t1995-XX\n")
        with pytest.raises(FactFileError, match=":1:"):
            load_kg(str(path), temporal=True)

    def test_time_outside_calendar(self, tmp_path):
        path = tmp_path / "t.tsv"
        path.write_text("a\tr\tb\t2030-01\n")
        with pytest.raises(FactFileError):
            load_kg(str(path), temporal=True)

    def test_reversed_interval_is_error(self, tmp_path):
        path = tmp_path / "t.tsv"
        path.write_text("a\tr\tb\t1996-01\t1995-01\n")
        with pytest.raises(FactFileError, match="ends before"):
            load_kg(str(path), temporal=True)

    def test_temporal_line_in_plain_file_is_error(self, tmp_path):
        path = tmp_path / "t.tsv"
        path.write_text("a\tr\tb\t1995-01\n")
        with pytest.raises(FactFileError):
            load_kg(str(path), temporal=False)

    def test_single_month_becomes_point_interval(self, temporal_kg):
        assert temporal_kg.facts()[1].time == TimeSpan(0, 0)

    def test_names_with_spaces(self, tmp_path):
        path = tmp_path / "s.tsv"
        path.write_text("Barack Obama\tmet\tAngela Merkel\n")
        kg = load_kg(str(path), temporal=False)
        assert kg.entity_names == ["Barack Obama", "Angela Merkel"]

    def test_self_loop_allowed(self, tmp_path):
        path = tmp_path / "l.tsv"
        path.write_text("a\tr\ta\n")
        kg = load_kg(str(path), temporal=False)
        assert kg.degree(0) == 2

    def test_deterministic(self, tmp_path):
        path = tmp_path / "d.tsv"
        write_facts(path, [("x", "r", "y"), ("y", "r", "z"), ("x", "r", "z")])
        kg1 = load_kg(str(path), temporal=False)
        kg2 = load_kg(str(path), temporal=False)
        assert kg1.entity_names == kg2.entity_names
        assert np.array_equal(kg1.heads, kg2.heads)


class TestRoundTrip:
    def test_plain(self, tiny_kg, tmp_path):
        out = tmp_path / "out.tsv"
        save_kg(tiny_kg, str(out))
        again = load_kg(str(out), temporal=False)
        assert again.entity_names == tiny_kg.entity_names
        assert again.relation_names == tiny_kg.relation_names
        assert again.facts() == tiny_kg.facts()

    def test_temporal(self, temporal_kg, tmp_path):
        out = tmp_path / "out.tsv"
        save_kg(temporal_kg, str(out))
        again = load_kg(str(out), temporal=True)
        assert again.entity_names == temporal_kg.entity_names
        assert again.facts() == temporal_kg.facts()

    name_strategy = st.text(
        alphabet=st.characters(blacklist_characters="\t\n\r#", blacklist_categories=("Cs",)),
        min_size=1,
        max_size=12,
    ).filter(lambda s: not s.startswith("#"))

    @given(data=st.data())
    @settings(max_examples=40, deadline=None)
    def test_round_trip_property(self, data):
        import tempfile

        from hhea.kg import month_string

        names = data.draw(
            st.lists(self.name_strategy, min_size=2, max_size=8, unique=True)
        )
        rels = data.draw(st.lists(self.name_strategy, min_size=1, max_size=3, unique=True))
        n_facts = data.draw(st.integers(min_value=1, max_value=12))
        cal = CalendarConfig()
        rows = []
        for _ in range(n_facts):
            head = data.draw(st.sampled_from(names))
            tail = data.draw(st.sampled_from(names))
            rel = data.draw(st.sampled_from(rels))
            begin = data.draw(st.integers(min_value=0, max_value=323))
            end = data.draw(st.integers(min_value=begin, max_value=323))
            rows.append((head, rel, tail, month_string(begin, cal), month_string(end, cal)))
        with tempfile.TemporaryDirectory() as tmp:
            path = f"{tmp}/prop.tsv"
            write_facts(path, rows)
            kg = load_kg(path, temporal=True)
            out = f"{tmp}/prop_out.tsv"
            save_kg(kg, out)
            again = load_kg(out, temporal=True)
        assert again.entity_names == kg.entity_names
        assert again.relation_names == kg.relation_names
        assert again.facts() == kg.facts()


class TestAdjacency:
    def test_degree_equals_incidences(self, temporal_kg):
        degrees = temporal_kg.degrees()
        incidences = np.zeros(temporal_kg.n_entities, dtype=int)
        for f in temporal_kg.facts():
            incidences[f.head] += 1
            incidences[f.tail] += 1
        assert np.array_equal(degrees, incidences)

    def test_each_fact_contributes_two_entries(self, tiny_kg):
        assert tiny_kg.degrees().sum() == 2 * tiny_kg.n_facts

    def test_adjacency_entries(self, tiny_kg):
        entries = tiny_kg.adjacency(1)  # entity "b"
        assert sorted((n, d) for n, _, d, _ in entries) == [(0, -1), (2, 1)]


class TestAnchors:
    def test_load(self, tmp_path, tiny_kg):
        other = tmp_path / "kg2.tsv"
        write_facts(other, [("x", "r", "y"), ("y", "r", "z")])
        kg2 = load_kg(str(other), temporal=False)
        anchors_path = tmp_path / "anchors.tsv"
        write_anchors(anchors_path, [("a", "x"), ("b", "y")])
        anchors = load_anchors(str(anchors_path), tiny_kg, kg2)
        assert anchors.pairs == [(0, 0), (1, 1)]

    def test_unknown_entity_names_side(self, tmp_path, tiny_kg):
        other = tmp_path / "kg2.tsv"
        write_facts(other, [("x", "r", "y")])
        kg2 = load_kg(str(other), temporal=False)
        anchors_path = tmp_path / "anchors.tsv"
        write_anchors(anchors_path, [("a", "nope")])
        with pytest.raises(AnchorFileError, match="KG2 entity 'nope'"):
            load_anchors(str(anchors_path), tiny_kg, kg2)

    def test_duplicate_pair_rejected(self, tmp_path, tiny_kg):
        other = tmp_path / "kg2.tsv"
        write_facts(other, [("x", "r", "y")])
        kg2 = load_kg(str(other), temporal=False)
        anchors_path = tmp_path / "anchors.tsv"
        write_anchors(anchors_path, [("a", "x"), ("a", "x")])
        with pytest.raises(AnchorFileError, match="duplicate"):
            load_anchors(str(anchors_path), tiny_kg, kg2)

    def test_many_to_one_allowed(self, tmp_path, tiny_kg):
        other = tmp_path / "kg2.tsv"
        write_facts(other, [("x", "r", "y")])
        kg2 = load_kg(str(other), temporal=False)
        anchors_path = tmp_path / "anchors.tsv"
        write_anchors(anchors_path, [("a", "x"), ("b", "x")])
        assert len(load_anchors(str(anchors_path), tiny_kg, kg2)) == 2


class TestSplitAnchors:
    def test_small_split(self):
        anchors = AnchorSet([(i, i) for i in range(10)])
        train, test = split_anchors(anchors, 0.3, seed=7)
        assert len(train) == 3 and len(test) == 7
        assert set(train.pairs).isdisjoint(test.pairs)
        assert sorted(train.pairs + test.pairs) == anchors.pairs

    def test_5058_pairs_split(self):
        # Independent oracle: round(0.3 * 5058) = 1517.
        anchors = AnchorSet([(i, i) for i in range(5058)])
        train, test = split_anchors(anchors, 0.3, seed=0)
        assert len(train) == 1517
        assert len(test) == 3541

    def test_deterministic(self):
        anchors = AnchorSet([(i, 2 * i) for i in range(25)])
        a = split_anchors(anchors, 0.3, seed=42)
        b = split_anchors(anchors, 0.3, seed=42)
        assert a[0].pairs == b[0].pairs and a[1].pairs == b[1].pairs

    def test_different_seed_differs(self):
        anchors = AnchorSet([(i, i) for i in range(100)])
        a = split_anchors(anchors, 0.3, seed=1)
        b = split_anchors(anchors, 0.3, seed=2)
        assert a[0].pairs != b[0].pairs

    def test_empty_side_rejected(self):
        anchors = AnchorSet([(0, 0), (1, 1)])
        with pytest.raises(ValueError):
            split_anchors(anchors, 0.01, seed=0)
        with pytest.raises(ValueError):
            split_anchors(AnchorSet([]), 0.5, seed=0)

    @given(
        n=st.integers(min_value=2, max_value=200),
        fraction=st.floats(min_value=0.05, max_value=0.95),
        seed=st.integers(min_value=0, max_value=2**31 - 1),
    )
    @settings(max_examples=50, deadline=None)
    def test_partition_property(self, n, fraction, seed):
        anchors = AnchorSet([(i, i + 1) for i in range(n)])
        try:
            train, test = split_anchors(anchors, fraction, seed)
        except ValueError:
            return  # degenerate fraction for this n
        assert len(train) + len(test) == n
        assert set(train.pairs).isdisjoint(test.pairs)


class TestEntityTimeVector:
    def test_span(self, temporal_kg):
        vec = entity_time_vector(temporal_kg, temporal_kg.entity_id("a"))
        # facts: [2, 4] and [0, 1]
        assert vec.tolist()[:6] == [1, 1, 1, 1, 1, 0]

    def test_union_no_double_count(self, tmp_path):
        path = tmp_path / "t.tsv"
        write_facts(
            path,
            [("a", "r", "b", "1995-01", "1995-01"), ("a", "r", "c", "1995-01", "1995-02")],
        )
        kg = load_kg(str(path), temporal=True)
        vec = entity_time_vector(kg, 0)
        assert vec[0] == 1 and vec[1] == 1 and vec[2:].sum() == 0

    def test_values_binary_and_length(self, temporal_kg):
        for e in range(temporal_kg.n_entities):
            vec = entity_time_vector(temporal_kg, e)
            assert vec.shape == (temporal_kg.calendar.n_months,)
            assert set(np.unique(vec)) <= {0, 1}

    def test_non_temporal_rejected(self, tiny_kg):
        with pytest.raises(ValueError):
            entity_time_vector(tiny_kg, 0)
