import pytest

from vecmemsim.config import VectorConfig, validate_config


def make_cfg(vlen=512, elen=64, dlen=512, mlen=512):
    return validate_config(VectorConfig(vlen, elen, dlen, mlen))


@pytest.fixture
def p_cfg():
    """Performance geometry: 64-byte beat, 32 rows."""
    return make_cfg(512, 64, 512, 512)


@pytest.fixture
def e_cfg():
    """Efficiency geometry: 16-byte beat, 16 rows."""
    return make_cfg(256, 64, 256, 128)
