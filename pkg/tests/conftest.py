import warnings

import pytest

warnings.filterwarnings("ignore", message="The TBB threading layer")


@pytest.fixture(scope="session")
def partition_result():
    """The full sweep and partition, computed once per session."""
    from w160.partition import run_partition

    return run_partition()


@pytest.fixture(scope="session")
def ic2(partition_result):
    from w160.ic2 import ic2_report

    return ic2_report(partition_result.classes, partition_result.class_orbit)


@pytest.fixture(scope="session")
def witness_class(partition_result):
    cid = partition_result.class_of_pair()[(0, 9)]
    return cid, partition_result.classes[cid]
