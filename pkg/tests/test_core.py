import numpy as np
import pytest

from sceneforge.core import (
    BoundingBox,
    Color,
    MaskKind,
    ObjectSample,
    TransitionError,
    allowed_outputs,
)

S = MaskKind.SINGLE
MO = MaskKind.MULTI_OBJECT
MP = MaskKind.MULTI_PART
SEMA = MaskKind.SEMANTIC
C = MaskKind.CLASS


def test_exactly_five_kinds_with_expected_codes():
    assert {k.code for k in MaskKind} == {"S", "MO", "MP", "Sema", "C"}
    assert len(MaskKind) == 5


def test_parse_roundtrip_and_rejects_unknown():
    for kind in MaskKind:
        assert MaskKind.parse(kind.code) is kind
    with pytest.raises(ValueError):
        MaskKind.parse("bogus")


def test_allowed_outputs_single():
    assert allowed_outputs(S, True) == {S, MO, C}


def test_allowed_outputs_multipart():
    assert allowed_outputs(MP, True) == {S, MO, MP, C}


def test_allowed_outputs_semantic_without_labels():
    assert allowed_outputs(SEMA, False) == {S, MO, SEMA}


@pytest.mark.parametrize("kind", [MO, C])
def test_derived_kinds_are_not_inputs(kind):
    with pytest.raises(TransitionError):
        allowed_outputs(kind, True)


@pytest.mark.parametrize("kind", [S, MP, SEMA])
@pytest.mark.parametrize("labels", [True, False])
def test_single_and_multiobject_always_producible(kind, labels):
    outputs = allowed_outputs(kind, labels)
    assert S in outputs and MO in outputs
    assert outputs <= set(MaskKind)


def test_class_requires_labels():
    for kind in (S, MP, SEMA):
        assert C in allowed_outputs(kind, True)
        assert C not in allowed_outputs(kind, False)


def test_color_rejects_white_black_and_out_of_range():
    with pytest.raises(ValueError):
        Color(1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        Color(0.0, 0.5, 0.5)
    with pytest.raises(ValueError):
        Color(0.5, 0.5, 1.5)
    assert Color(1.0, 1.0, 0.5).rgb8 == (255, 255, 128)


def test_bounding_box_validation():
    BoundingBox(0, 0, 1, 1)
    with pytest.raises(ValueError):
        BoundingBox(-1, 0, 5, 5)
    with pytest.raises(ValueError):
        BoundingBox(0, 0, 0, 5)
    assert BoundingBox(2, 3, 4, 5).as_list() == [2, 3, 4, 5]


def _sample(h=8, w=6, kind=S):
    image = np.zeros((h, w, 3), np.uint8)
    mask = np.zeros((h, w, 3), np.uint8)
    mask[2:4, 1:3] = 255
    return ObjectSample(image=image, mask=mask, class_label="leaf", input_kind=kind)


def test_sample_normalizes_single_channel_mask():
    image = np.zeros((4, 4, 3), np.uint8)
    mask = np.zeros((4, 4), np.uint8)
    mask[1, 1] = 255
    sample = ObjectSample(image=image, mask=mask, class_label="x", input_kind=S)
    assert sample.mask.shape == (4, 4, 3)
    assert sample.foreground.sum() == 1


def test_sample_rejects_shape_mismatch_and_empty_mask():
    image = np.zeros((4, 4, 3), np.uint8)
    with pytest.raises(ValueError):
        ObjectSample(image=image, mask=np.zeros((5, 4, 3), np.uint8), class_label="x", input_kind=S)
    with pytest.raises(ValueError):
        ObjectSample(image=image, mask=np.zeros((4, 4, 3), np.uint8), class_label="x", input_kind=S)


def test_sample_rejects_derived_input_kind():
    image = np.zeros((4, 4, 3), np.uint8)
    mask = np.full((4, 4, 3), 255, np.uint8)
    with pytest.raises(TransitionError):
        ObjectSample(image=image, mask=mask, class_label="x", input_kind=MO)


def test_sample_arrays_become_read_only():
    sample = _sample()
    with pytest.raises(ValueError):
        sample.image[0, 0] = 1
