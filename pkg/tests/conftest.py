from importlib import resources
from pathlib import Path

import pytest

from pagetime.manifest import parse_worksheet_csv
from pagetime.profile import load_profile

DATA = Path(str(resources.files("pagetime") / "data"))

# Appendix 1 SUM column, rows 1..27
APPENDIX_SUMS = [
    1159.36, 337.34, 401.48, 545.11, 405.40, 464.75, 399.15, 411.84, 394.32,
    443.34, 487.09, 422.82, 374.37, 417.00, 407.62, 2500.70, 188.32, 349.15,
    189.41, 1353.15, 195.42, 593.79, 1224.71, 186.57, 185.92, 186.57, 425.08,
]

TABLE11_PAIRS = [
    (10260.43, 10567),
    (15504.78, 15154),
    (10301.52, 10213),
    (6156.92, 6147),
    (14051.69, 14386),
    (15969.20, 16615),
]


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def appendix_manifest():
    return parse_worksheet_csv((DATA / "id-omg.csv").read_bytes())


@pytest.fixture(scope="session")
def worksheet_profile():
    return load_profile((DATA / "id-worksheet.profile").read_bytes())
