import pytest

from laneconflict.detect import ConflictConfig, detect_conflicts
from laneconflict.scenario import default_site, generate, reference_scenario


@pytest.fixture(scope="session")
def site():
    return default_site()


@pytest.fixture(scope="session")
def reference_dataset():
    return generate(reference_scenario(seed=0))


@pytest.fixture(scope="session")
def reference_events(reference_dataset):
    return detect_conflicts(reference_dataset, ConflictConfig())


SMALL_TRACKS_CSV = """frame,id,x,y,vx,vy,length,width
0,1,10.0,1.75,20.0,0.0,4.5,1.8
1,1,10.8,1.75,20.0,0.0,4.5,1.8
2,1,11.6,1.75,20.0,0.0,4.5,1.8
0,2,30.0,5.25,18.0,0.0,12.0,2.5
1,2,30.72,5.25,18.0,0.0,12.0,2.5
2,2,31.44,5.25,18.0,0.0,12.0,2.5
0,3,50.0,8.75,22.0,0.0,4.2,1.8
1,3,50.88,8.75,22.0,0.0,4.2,1.8
2,3,51.76,8.75,22.0,0.0,4.2,1.8
"""


@pytest.fixture
def small_dataset_files(tmp_path, site):
    from laneconflict.io import write_site

    tracks = tmp_path / "tracks.csv"
    tracks.write_text(SMALL_TRACKS_CSV)
    site_path = tmp_path / "site.json"
    write_site(site, str(site_path))
    return str(tracks), str(site_path)
