import json
import math

import pytest
from cases import FULL, SMALL
from hypothesis import given, settings
from hypothesis import strategies as st

from nlsefam import Kind, Params, ScanSpace, scan, scan_c2star
from nlsefam.family import classify, k_values
from nlsefam.scan import EXAMPLES, ScanRecord, evaluate, sample_params, summarize, to_jsonl


def test_forced_examples_verdicts():
    recs = scan(ScanSpace("off"), seed=0, g=FULL, budget=4)
    assert [r.verdict for r in recs] == ["Vanishing", "NonVanishing", "Vanishing", "Vanishing"]
    assert recs[0].kind == "HyperbolicC2" and abs(recs[0].disc_h) < 1e-10
    assert recs[0].root_structure == "simple+double"
    assert [r.params for r in recs] == list(EXAMPLES)


def test_budget_zero():
    assert scan(ScanSpace("off"), 0, SMALL, 0) == []
    assert scan_c2star(0, SMALL, 0) == []
    with pytest.raises(ValueError):
        sample_params(ScanSpace("off"), 0, -1)


def test_sampling_is_seeded():
    a = sample_params(ScanSpace("off"), 7, 30)
    b = sample_params(ScanSpace("off"), 7, 30)
    c = sample_params(ScanSpace("off"), 8, 30)
    assert a == b and a != c
    assert a[:4] == list(EXAMPLES)
    assert sample_params(ScanSpace("off"), 7, 30, include_examples=False)[0] != EXAMPLES[0]


def test_byte_identical_output():
    space = ScanSpace("off")
    one = to_jsonl(scan(space, 3, SMALL, 8), {"seed": 3})
    two = to_jsonl(scan(space, 3, SMALL, 8), {"seed": 3})
    assert one == two
    lines = one.splitlines()
    assert json.loads(lines[0])["schema_version"] == 1
    footer = json.loads(lines[-1])
    assert footer["summary"] and sum(footer["counts"].values()) == 8


def test_parallel_matches_serial():
    space = ScanSpace("c2", 0.1, 10)
    assert scan(space, 5, SMALL, 6, workers=2) == scan(space, 5, SMALL, 6, workers=1)


@pytest.mark.parametrize("family, kind", [("c2", Kind.HYPERBOLIC_C2), ("c2star", Kind.RATIONAL_C2STAR)])
def test_sampling_laws(family, kind):
    space = ScanSpace(family)
    for p in sample_params(space, 11, 50, include_examples=False):
        assert 1e-2 <= abs(p.c1) <= 1e2
        assert classify(p).kind is kind


def test_space_validation():
    with pytest.raises(ValueError):
        ScanSpace("nope")
    with pytest.raises(ValueError):
        ScanSpace("off", 1.0, 0.5)


def test_c2star_examples():
    rec = scan_c2star(0, SMALL, 1, mag_min=2.0, mag_max=2.0)  # smoke: fixed magnitudes
    assert rec[0].kind == "RationalC2star"
    r = evaluate(0, Params(4 / 3, 2.0, 0.25, 8 / 9), SMALL)
    assert r.root_structure == "simple+triple"
    assert abs(r.g2h) < 1e-12 and abs(r.g3h) < 1e-12
    assert r.verdict == "Vanishing"
    p = Params(-0.75, -3.0, -1.0, 16 / 3)
    assert p.a == (-3.0) ** 2 / (12 * -1.0)
    r = evaluate(1, p, SMALL)
    assert r.kind == "RationalC2star" and r.root_structure == "simple+triple"
    assert r.verdict == "Vanishing"


def test_triple_root_location():
    from nlsefam import r1_coeffs, roots
    rs = roots(r1_coeffs(Params(-0.75, -3.0, -1.0, 16 / 3)))
    assert [(round(v, 9), m) for v, m in rs.roots] == [(0.0, 1), (round(4 / 3, 9), 3)]


def test_unsupported_records():
    # h0 is not a root of R1: nothing can be built
    r = evaluate(0, Params(1.0, 2.0, 1.0, 1.0, h0=0.3), SMALL)
    assert r.verdict == "Unsupported" and math.isnan(r.t_max_abs) and r.note
    # c2/c1 < 0: no real f0
    r = evaluate(1, Params(1.0, 2.0, -1.0, 1.0), SMALL)
    assert r.verdict == "Unsupported"
    d = r.to_dict()
    assert d["t_max_abs"] is None and d["class"] == r.kind


def test_summary_flags_off_family_vanishing():
    p = Params(1.0, 2.0, 1.0, 1.0)
    recs = [ScanRecord(0, p, "GenericElliptic", 1.0, 0, 0, "simple", 1e-9, 0.1, "Vanishing"),
            ScanRecord(1, p, "HyperbolicC2", 0.0, 0, 0, "simple", 1e-9, 0.1, "Vanishing"),
            ScanRecord(2, p, "GenericElliptic", 1.0, 0, 0, "simple", 1.0, 0.1, "NonVanishing")]
    s = summarize(recs).to_dict()
    assert s["off_family_vanishing"] == [0] and s["off_family_vanishing_flag"]
    assert s["counts"] == {"Vanishing": 2, "NonVanishing": 1, "Indeterminate": 0, "Unsupported": 0}


def test_off_family_small_sweep():
    recs = scan(ScanSpace("off"), 1, SMALL, 12, include_examples=False)
    assert all(r.kind not in ("HyperbolicC2", "RationalC2star") for r in recs)
    assert not any(r.verdict == "Vanishing" for r in recs)


@given(st.floats(0.05, 5), st.floats(0.2, 5), st.booleans())
@settings(max_examples=15, deadline=None)
def test_admissible_hyperbolic_records_vanish(am, c1m, neg):
    s = -1.0 if neg else 1.0
    c2 = c1m * c1m / (16 * am) * s
    p = Params(s * am, s * c1m, c2, 2 * s * c1m * c2)
    k = k_values(p)
    if not (k.admissible01 or k.admissible03):
        return
    assert evaluate(0, p, SMALL).verdict == "Vanishing"
