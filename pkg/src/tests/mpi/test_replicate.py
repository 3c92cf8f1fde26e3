import array

import numpy
import pytest

from pyclawfdr.common import ReplicationError
from pyclawfdr.mpi_utils import dispatched_partition, ordered_gather, world_rank
from pyclawfdr.sim import GeneratorSpec, replicate

from .common import mpi_available

from runtests.mpi import MPITest


def _test_dispatched_partition(comm):
    test_ranks = [0]
    if comm is not None:
        import mpi4py.MPI

        test_ranks = list(range(comm.size))
    for x in (
        [],
        ["a"],
        ["a", "b"],
        ["a", "b", "c"] * 2,
        ["a", "b", "c"] * 16,
    ):
        for root in test_ranks:
            x_accessed_local = array.array("i", [0]) * len(x)
            for i, xi in dispatched_partition(comm, list(enumerate(x)), root=root):
                assert x[i] == xi
                x_accessed_local[i] += 1
            x_accessed = array.array("i", [0]) * len(x)
            if comm is not None:
                comm.Allreduce(
                    [x_accessed_local, mpi4py.MPI.INT],
                    [x_accessed, mpi4py.MPI.INT],
                    op=mpi4py.MPI.SUM,
                )
                comm.Barrier()
            else:
                x_accessed[:] = x_accessed_local[:]
            for xi in x_accessed:
                assert xi == 1


def _test_ordered_gather(comm):
    n = 7
    local = {}
    for i, _ in dispatched_partition(comm, list(enumerate(range(n)))):
        local[i] = i * i
    assert ordered_gather(comm, local, n) == [i * i for i in range(n)]


_spec = GeneratorSpec("grouped", 1, sizes=(120, 80))


def _test_replicate(comm):
    serial = replicate(_spec, ["claw", "bh"], 5, master_seed=4)
    distributed = replicate(_spec, ["claw", "bh"], 5, master_seed=4, comm=comm)
    assert numpy.array_equal(serial.fdp, distributed.fdp)
    assert numpy.array_equal(serial.tdp, distributed.tdp)
    assert serial.rows() == distributed.rows()


def _test_replicate_failure(comm):
    # every process raises the same error
    with pytest.raises(ReplicationError) as excinfo:
        replicate(_spec, ["semisup_claw"], 3, comm=comm)
    assert excinfo.value.replication == 0


def test_dispatched_partition_no_comm():
    _test_dispatched_partition(None)


def test_ordered_gather_no_comm():
    _test_ordered_gather(None)
    assert world_rank(None) == 0


def test_replicate_no_comm():
    _test_replicate(None)


if mpi_available:

    @MPITest(commsize=[1, 2, 4])
    def test_dispatched_partition(comm):
        _test_dispatched_partition(comm)

    @MPITest(commsize=[1, 2, 3])
    def test_ordered_gather(comm):
        _test_ordered_gather(comm)
        assert world_rank(comm) == comm.rank

    @MPITest(commsize=[1, 2, 3])
    def test_replicate(comm):
        _test_replicate(comm)

    @MPITest(commsize=[1, 2])
    def test_replicate_failure(comm):
        _test_replicate_failure(comm)
