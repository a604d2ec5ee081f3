import json
import math

import numpy as np
import pytest

import nullbeam as nb


class TestDefaultScenario:
    def test_array_and_rf_parameters(self, default_scenario):
        sc = default_scenario
        assert sc.num_emitters == 42
        assert sc.num_readers == 1
        assert sc.carrier_frequency_hz == 920e6
        assert sc.per_emitter_power_dbm == 11.0
        assert sc.symbol_power == 0.8

    def test_reader_position(self, default_scenario):
        assert tuple(default_scenario.reader_positions[0][:2]) == (2.86, 1.226)

    def test_emitters_form_ceiling_grid(self, default_scenario):
        pos = default_scenario.emitter_positions
        assert np.all(pos[:, 2] == 2.4)
        assert np.unique(pos[:, 0]).size == 6
        assert np.unique(pos[:, 1]).size == 7
        assert pos[:, 0].min() > 0 and pos[:, 0].max() < 4.0
        assert pos[:, 1].min() > 0 and pos[:, 1].max() < 8.0

    def test_derived_quantities(self, default_scenario):
        sc = default_scenario
        assert sc.wavelength_m == pytest.approx(0.32586136739, rel=1e-9)
        assert sc.per_emitter_power_w == pytest.approx(1e-3 * 10 ** 1.1, rel=1e-12)

    def test_bd_position_is_overridable(self):
        sc = nb.default_techtile_scenario(bd_position=(1.0, 2.0, 1.3))
        assert tuple(sc.bd_position) == (1.0, 2.0, 1.3)


class TestScenarioValidation:
    def test_duplicate_positions_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            nb.Scenario(
                emitter_positions=[[0, 0, 2], [0, 0, 2]],
                bd_position=[1, 1, 1],
                reader_positions=[[2, 2, 1]],
            )

    def test_bd_on_reader_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            nb.Scenario(
                emitter_positions=[[0, 0, 2]],
                bd_position=[1, 1, 1],
                reader_positions=[[1, 1, 1]],
            )

    @pytest.mark.parametrize("overrides", [
        {"carrier_frequency_hz": 0.0},
        {"carrier_frequency_hz": -1.0},
        {"symbol_power": 0.0},
        {"reflection_efficiency": 0.0},
        {"reflection_efficiency": 1.5},
        {"carrier_frequency_hz": float("nan")},
    ])
    def test_invalid_scalars_rejected(self, overrides):
        kwargs = dict(
            emitter_positions=[[0, 0, 2], [1, 0, 2]],
            bd_position=[1, 1, 1],
            reader_positions=[[2, 2, 1]],
        )
        kwargs.update(overrides)
        with pytest.raises(ValueError):
            nb.Scenario(**kwargs)

    def test_positions_are_read_only(self, default_scenario):
        with pytest.raises(ValueError):
            default_scenario.emitter_positions[0, 0] = 99.0


class TestLoadScenario:
    def test_empty_document_gives_default(self, default_scenario):
        assert nb.load_scenario("") == default_scenario
        assert nb.load_scenario("{}") == default_scenario

    def test_emitter_override(self):
        emitters = [[float(i), 0.0, 2.4] for i in range(10)]
        sc = nb.load_scenario(json.dumps({"emitters": emitters}))
        assert sc.num_emitters == 10
        assert np.array_equal(sc.emitter_positions, np.asarray(emitters))

    def test_scalar_overrides(self):
        sc = nb.load_scenario(json.dumps({"fc_hz": 868e6, "p_dbm": 5.0}))
        assert sc.carrier_frequency_hz == 868e6
        assert sc.per_emitter_power_dbm == 5.0
        assert sc.symbol_power == 0.8

    def test_duplicate_emitters_rejected(self):
        doc = {"emitters": [[0, 0, 2.4], [0, 0, 2.4]]}
        with pytest.raises(ValueError, match="distinct"):
            nb.load_scenario(json.dumps(doc))

    def test_unknown_field_named(self):
        with pytest.raises(ValueError, match="frequency_hz"):
            nb.load_scenario('{"frequency_hz": 920e6}')

    def test_bad_scalar_type_named(self):
        with pytest.raises(ValueError, match="fc_hz"):
            nb.load_scenario('{"fc_hz": "fast"}')

    def test_bad_point_shape_named(self):
        with pytest.raises(ValueError, match="bd"):
            nb.load_scenario('{"bd": [1.0, 2.0]}')

    def test_invalid_json_reported(self):
        with pytest.raises(ValueError, match="JSON"):
            nb.load_scenario("{not json")

    @pytest.mark.parametrize("doc", [
        {},
        {"fc_hz": 2.4e9, "eta": 0.25},
        {"emitters": [[0.1, 0.2, 2.4], [1.0, 0.2, 2.4], [2.0, 0.2, 2.4]],
         "bd": [1.0, 4.0, 1.1], "readers": [[3.0, 6.0, 0.9], [0.5, 7.0, 1.2]]},
    ])
    def test_round_trip(self, doc):
        sc = nb.load_scenario(json.dumps(doc))
        assert nb.load_scenario(nb.serialize_scenario(sc)) == sc

    def test_digest_tracks_content(self, default_scenario):
        again = nb.default_techtile_scenario()
        assert nb.scenario_digest(default_scenario) == nb.scenario_digest(again)
        moved = nb.default_techtile_scenario(bd_position=(3.4, 1.8, 1.2))
        assert nb.scenario_digest(moved) != nb.scenario_digest(default_scenario)


class TestGridSpec:
    def test_exact_multiple_keeps_endpoint(self):
        grid = nb.GridSpec(origin=(0, 0), extent=(1.25, 1.25), step=0.025,
                           plane_height=1.0)
        assert (grid.nx, grid.ny) == (51, 51)
        assert grid.num_cells == 2601
        assert grid.x_coords[0] == 0.0
        assert grid.x_coords[-1] == pytest.approx(1.25, abs=1e-12)

    def test_non_multiple_counts(self):
        grid = nb.GridSpec(origin=(0, 0), extent=(1.0, 0.7), step=0.3,
                           plane_height=1.0)
        assert (grid.nx, grid.ny) == (4, 3)

    def test_step_larger_than_extent_gives_single_cell(self):
        grid = nb.GridSpec(origin=(0, 0), extent=(0.5, 0.5), step=2.0,
                           plane_height=1.0)
        assert grid.num_cells == 1

    def test_centered_contains_center_cell(self):
        grid = nb.GridSpec.centered((2.86, 1.226), step=0.025, plane_height=1.0)
        ix, iy = grid.cell_of((2.86, 1.226))
        assert (ix, iy) == (25, 25)
        assert grid.x_coords[ix] == pytest.approx(2.86, abs=1e-12)

    def test_cell_of_clips_to_grid(self):
        grid = nb.GridSpec(origin=(0, 0), extent=(1, 1), step=0.5, plane_height=1.0)
        assert grid.cell_of((-5.0, 5.0)) == (0, grid.ny - 1)

    @pytest.mark.parametrize("kwargs", [
        {"origin": (0, 0), "extent": (1, 1), "step": 0.0, "plane_height": 1.0},
        {"origin": (0, 0), "extent": (0, 1), "step": 0.1, "plane_height": 1.0},
        {"origin": (0, 0), "extent": (1, -2), "step": 0.1, "plane_height": 1.0},
    ])
    def test_invalid_grid_rejected(self, kwargs):
        with pytest.raises(ValueError):
            nb.GridSpec(**kwargs)
