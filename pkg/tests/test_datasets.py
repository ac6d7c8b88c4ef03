import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risbeam.datasets import (
    DEFAULT_MAPPING,
    POWER_SANITY_FLOOR_DBM,
    AbsorptionTable,
    BeampatternTable,
    load_column_mapping,
    read_absorption,
    read_beampattern,
    read_table,
    write_absorption,
    write_beampattern,
)
from risbeam.errors import DomainError, NotFoundError, ParseError


def small_beampattern():
    beams = [(-3, 0), (0, 0), (3, 0)]
    rotations = [-6.0, 0.0, 6.0]
    power = [[-61.5, -60.0, -63.25],
             [-60.0, -59.5, -61.0],
             [-64.0, -62.0, -60.5]]
    return BeampatternTable(beams, rotations, power, theta_t_deg=-1.5)


def small_absorption():
    beams = [(0, -3), (3, -3)]
    counts = [4, 16, 100]
    power = [[-75.0, -66.0, -60.0],
             [-76.5, -67.25, -61.0]]
    return AbsorptionTable(beams, counts, power)


class TestBeampatternTable:
    def test_shape_mismatch_rejected(self):
        with pytest.raises(DomainError, match="shape"):
            BeampatternTable([(0, 0)], [0.0, 3.0], [[-60.0]])

    def test_validate_catches_unsorted_rotations(self):
        t = BeampatternTable([(0, 0)], [3.0, 0.0], [[-60.0, -61.0]])
        with pytest.raises(DomainError):
            t.validate()

    def test_validate_catches_duplicate_beams(self):
        t = BeampatternTable([(0, 0), (0, 0)], [0.0],
                             [[-60.0], [-61.0]])
        with pytest.raises(DomainError):
            t.validate()

    def test_validate_catches_nan_and_sanity_floor(self):
        t = BeampatternTable([(0, 0)], [0.0], [[np.nan]])
        with pytest.raises(DomainError):
            t.validate()
        t = BeampatternTable([(0, 0)], [0.0],
                             [[POWER_SANITY_FLOOR_DBM - 1]])
        with pytest.raises(DomainError):
            t.validate()

    def test_row_and_column_slices(self):
        t = small_beampattern()
        labels, vals = t.row((0, 0))
        np.testing.assert_array_equal(labels, [-6.0, 0.0, 6.0])
        np.testing.assert_array_equal(vals, [-60.0, -59.5, -61.0])
        labels, vals = t.column(6.0)
        np.testing.assert_array_equal(vals, [-63.25, -61.0, -60.5])

    def test_slices_are_copies(self):
        t = small_beampattern()
        t.row((0, 0)).values[0] = 0.0
        assert t.power_dbm[1, 0] == -60.0

    def test_missing_beam_names_neighbours(self):
        with pytest.raises(NotFoundError, match="nearest"):
            small_beampattern().row((1, 0))

    def test_missing_rotation(self):
        with pytest.raises(NotFoundError):
            small_beampattern().column(2.0)

    def test_equality_is_by_value(self):
        assert small_beampattern() == small_beampattern()
        other = small_beampattern()
        other.power_dbm[0, 0] += 1e-9
        assert small_beampattern() != other
        assert small_beampattern() != "not a table"


class TestAbsorptionTable:
    def test_validate_catches_non_square_count(self):
        t = AbsorptionTable([(0, 0)], [50], [[-60.0]])
        with pytest.raises(DomainError, match="non-square"):
            t.validate()

    def test_validate_catches_descending_counts(self):
        t = AbsorptionTable([(0, 0)], [16, 4], [[-60.0, -61.0]])
        with pytest.raises(DomainError):
            t.validate()

    def test_column_lookup(self):
        t = small_absorption()
        labels, vals = t.column(16)
        np.testing.assert_array_equal(vals, [-66.0, -67.25])
        with pytest.raises(NotFoundError):
            t.column(25)


class TestRoundTrips:
    def test_beampattern_round_trip(self, tmp_path):
        t = small_beampattern()
        p = tmp_path / "bp.csv"
        write_beampattern(t, p)
        assert read_beampattern(p) == t

    def test_absorption_round_trip(self, tmp_path):
        t = small_absorption()
        p = tmp_path / "ab.csv"
        write_absorption(t, p)
        assert read_absorption(p) == t

    def test_write_is_byte_stable(self, tmp_path):
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_beampattern(small_beampattern(), p1)
        write_beampattern(read_beampattern(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_integral_angles_written_without_decimals(self, tmp_path):
        p = tmp_path / "bp.csv"
        write_beampattern(small_beampattern(), p)
        lines = p.read_text().splitlines()
        assert lines[0] == "# theta_t=-1.500000"
        assert lines[1] == "theta_n,phi_n,rot_-6,rot_0,rot_6"
        assert lines[2].startswith("-3,0,")

    def test_campaign_round_trip(self, quiet_beampattern, tmp_path):
        p = tmp_path / "campaign.csv"
        write_beampattern(quiet_beampattern, p)
        assert read_beampattern(p) == quiet_beampattern

    @settings(max_examples=25, deadline=None)
    @given(st.data())
    def test_random_table_round_trip(self, tmp_path_factory, data):
        n_beams = data.draw(st.integers(1, 6))
        n_rot = data.draw(st.integers(1, 5))
        beams = [(3 * i, -3 * i) for i in range(n_beams)]
        rotations = np.arange(n_rot) * 3.0
        power = data.draw(
            st.lists(
                st.lists(st.floats(-120, 0).map(lambda v: round(v, 6)),
                         min_size=n_rot, max_size=n_rot),
                min_size=n_beams, max_size=n_beams))
        t = BeampatternTable(beams, rotations, power)
        p = tmp_path_factory.mktemp("rt") / "t.csv"
        write_beampattern(t, p)
        assert read_beampattern(p) == t


class TestReaderErrors:
    def test_ragged_row_located(self, tmp_path):
        p = tmp_path / "bp.csv"
        p.write_text("theta_n,phi_n,rot_0\n0,0,-60\n3,0\n")
        with pytest.raises(ParseError, match="line 3"):
            read_beampattern(p)

    def test_bad_number_located_by_column(self, tmp_path):
        p = tmp_path / "bp.csv"
        p.write_text("theta_n,phi_n,rot_0,rot_3\n0,0,-60,oops\n")
        with pytest.raises(ParseError, match="column 2"):
            read_beampattern(p)

    def test_wrong_header_start(self, tmp_path):
        p = tmp_path / "bp.csv"
        p.write_text("azimuth,phi_n,rot_0\n0,0,-60\n")
        with pytest.raises(ParseError, match="header"):
            read_beampattern(p)

    def test_empty_file(self, tmp_path):
        p = tmp_path / "bp.csv"
        p.write_text("")
        with pytest.raises(ParseError, match="empty"):
            read_beampattern(p)

    def test_header_only(self, tmp_path):
        p = tmp_path / "bp.csv"
        p.write_text("theta_n,phi_n,rot_0\n")
        with pytest.raises(ParseError, match="no data rows"):
            read_beampattern(p)

    def test_bad_theta_t_comment(self, tmp_path):
        p = tmp_path / "bp.csv"
        p.write_text("# tilt=4\ntheta_n,phi_n,rot_0\n0,0,-60\n")
        with pytest.raises(ParseError, match="line 1"):
            read_beampattern(p)

    def test_non_square_count_in_header(self, tmp_path):
        p = tmp_path / "ab.csv"
        p.write_text("theta_n,phi_n,n_50\n0,0,-60\n")
        with pytest.raises(ParseError, match="non-square"):
            read_absorption(p)

    def test_validation_failure_reported_as_parse_error(self, tmp_path):
        p = tmp_path / "bp.csv"
        p.write_text("theta_n,phi_n,rot_3,rot_0\n0,0,-60,-61\n")
        with pytest.raises(ParseError):
            read_beampattern(p)


class TestColumnMapping:
    def test_load_and_apply(self, tmp_path):
        mp = tmp_path / "cols.map"
        mp.write_text("# external column names\n"
                      "theta_n = beam_az\n"
                      "phi_n = beam_el\n"
                      "rot_prefix = angle_\n")
        mapping = load_column_mapping(mp)
        assert mapping == {"theta_n": "beam_az", "phi_n": "beam_el",
                           "rot_prefix": "angle_"}
        p = tmp_path / "bp.csv"
        p.write_text("beam_az,beam_el,angle_0,angle_3\n0,0,-60,-61\n")
        t = read_beampattern(p, mapping)
        np.testing.assert_array_equal(t.rotations, [0.0, 3.0])

    def test_unknown_key_rejected(self, tmp_path):
        mp = tmp_path / "cols.map"
        mp.write_text("power_prefix = p_\n")
        with pytest.raises(ParseError, match="unknown mapping key"):
            load_column_mapping(mp)

    def test_missing_equals_rejected(self, tmp_path):
        mp = tmp_path / "cols.map"
        mp.write_text("theta_n beam_az\n")
        with pytest.raises(ParseError, match="line 1"):
            load_column_mapping(mp)

    def test_unknown_key_in_dict_rejected(self, tmp_path):
        p = tmp_path / "bp.csv"
        p.write_text("theta_n,phi_n,rot_0\n0,0,-60\n")
        with pytest.raises(DomainError):
            read_beampattern(p, {"bogus": "x"})

    def test_defaults_cover_all_keys(self):
        assert set(DEFAULT_MAPPING) == {"theta_n", "phi_n", "rot_prefix",
                                        "n_prefix", "theta_t_key"}


class TestSchemaSniffing:
    def test_dispatch_beampattern(self, tmp_path):
        p = tmp_path / "t.csv"
        write_beampattern(small_beampattern(), p)
        assert isinstance(read_table(p), BeampatternTable)

    def test_dispatch_absorption(self, tmp_path):
        p = tmp_path / "t.csv"
        write_absorption(small_absorption(), p)
        assert isinstance(read_table(p), AbsorptionTable)

    def test_unidentifiable_schema(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("theta_n,phi_n,power\n0,0,-60\n")
        with pytest.raises(ParseError, match="schema"):
            read_table(p)


def test_absorption_full_mask_matches_beampattern_at_zero(
        quiet_beampattern, quiet_absorption):
    """The all-elements-active absorption column is the same physical
    measurement as the beampattern at rotation 0."""
    full = quiet_absorption.column(100).values
    fixed = quiet_beampattern.column(0.0).values
    np.testing.assert_array_equal(full, fixed)
