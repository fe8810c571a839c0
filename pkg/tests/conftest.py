import pytest

from helpers import write_cube_obj


@pytest.fixture(scope="session")
def cube_obj_path(tmp_path_factory):
    directory = tmp_path_factory.mktemp("meshes")
    return write_cube_obj(directory)
