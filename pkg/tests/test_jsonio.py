import json

import pytest

import profin as pf
from profin import jsonio

from conftest import random_f0, random_partition, xy_member


class TestStructureRoundTrip:
    def test_emit_parse_emit_stable(self, rng):
        for _ in range(25):
            s = pf.expand_constants(random_f0(rng, max_size=5),
                                    rng.randint(0, 2))
            blob = jsonio.structure_to_json(s)
            again = jsonio.structure_to_json(jsonio.structure_from_json(blob))
            assert again == blob

    def test_labels_survive(self):
        s = xy_member()
        parsed = jsonio.structure_from_json(jsonio.structure_to_json(s))
        assert {parsed.label_of(v) for v in parsed.vertices} == {"x", "y"}

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError):
            jsonio.structure_from_json(
                {"m": 1, "vertices": ["a", "a"], "relations": [[]],
                 "constants": []})

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError):
            jsonio.structure_from_json(
                {"m": 1, "vertices": ["a"], "relations": [[["a", "b"]]],
                 "constants": []})

    def test_declared_n_checked(self):
        with pytest.raises(ValueError):
            jsonio.structure_from_json(
                {"m": 1, "n": 2, "vertices": ["a"],
                 "relations": [[["a", "a"]]], "constants": ["a"]})

    def test_non_dense_ids_round_trip(self):
        s = pf.FinStructure(1, [3, 7], [{(3, 7), (7, 3)}])
        blob = jsonio.structure_to_json(s)
        parsed = jsonio.structure_from_json(blob)
        assert jsonio.structure_to_json(parsed) == blob


class TestMapRoundTrip:
    def test_quotient_projection(self, rng):
        for _ in range(10):
            s = random_f0(rng, max_size=5)
            _, proj = pf.quotient(s, random_partition(rng, s))
            blob = jsonio.map_to_json(proj)
            again = jsonio.map_from_json(blob)
            assert pf.check_epimorphism(again)
            assert jsonio.map_to_json(again) == blob

    def test_witness_schema_fields(self):
        phi = pf.identity_map(xy_member())
        blob = jsonio.map_to_json(phi)
        assert set(blob) >= {"map", "checked", "domain", "codomain"}
        assert blob["map"] == [["x", "x"], ["y", "y"]]


class TestLabellingRoundTrip:
    def test_width_two(self):
        z3 = pf.preset_group("Z3")
        lab = pf.Labelling([0, 1], z3, 2, {0: (1, 2), 1: (0, 1)})
        blob = jsonio.labelling_to_json(lab)
        again = jsonio.labelling_from_json(blob)
        assert again.values == lab.values and again.width == 2


class TestAlgebraRoundTrip:
    @pytest.mark.parametrize("name", ["Z3", "2elt-semilattice"])
    def test_presets(self, name):
        a = pf.preset_algebra(name)
        again = jsonio.algebra_from_json(jsonio.algebra_to_json(a))
        assert again == a


class TestDot:
    def test_constants_double_circled(self):
        s = pf.expand_constants(xy_member(), 1)
        dot = jsonio.structure_to_dot(s)
        assert "peripheries=2" in dot
        assert dot.count("->") == 4

    def test_relation_colors_distinct(self):
        s = pf.FinStructure(2, [0], [{(0, 0)}, {(0, 0)}])
        dot = jsonio.structure_to_dot(s)
        assert 'label="s1"' in dot and 'label="s2"' in dot
        assert "color=black" in dot and "color=red" in dot

    def test_stable_output(self, rng):
        s = random_f0(rng, max_size=5)
        assert jsonio.structure_to_dot(s) == jsonio.structure_to_dot(s)


class TestDumps:
    def test_sorted_and_compact(self):
        out = jsonio.dumps({"b": 1, "a": [2, 3]})
        assert out == '{"a":[2,3],"b":1}\n'
        json.loads(out)
