import numpy as np
import pytest

from sdirank.catalog import Catalog, Item, load_catalog

FIXTURE_CSV = """id,text:title,text:desc,aspect:color,aspect:brand,aspect:style
s1,Red running shoe,light mesh,Red,Nike,sport
s2,Red trail boot,waterproof leather,red,Adidas,outdoor
s3,Blue running shoe,mesh,Blue,Nike,sport
s4,Green sandal,summer strap,,Puma,casual
s5,Black leather boot,winter,Black,Nike,
"""


@pytest.fixture
def fixture_csv(tmp_path):
    path = tmp_path / "catalog.csv"
    path.write_text(FIXTURE_CSV, encoding="utf-8")
    return path


@pytest.fixture
def fixture_catalog(fixture_csv):
    return load_catalog(fixture_csv)


def make_catalog(rows, name="color"):
    """Single-aspect catalog from a list of values (None = missing)."""
    items = [
        Item(f"i{j}", f"doc {j}", {} if v is None else {name: v})
        for j, v in enumerate(rows)
    ]
    return Catalog.from_items(items)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
