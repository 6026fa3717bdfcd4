// Generated test {{TEST_ID}} (backend: template)
// Canonical environment lifecycle probe: init, query communicator metadata,
// cross-check rank identities, and shut down cleanly on every rank.
#include <mpi.h>
#include <cstdio>

{{MINICHECK}}

int main(int argc, char** argv) {
    MPI_Init(&argc, &argv);
    int rank = -1;
    int size = 0;
    MPI_Comm_rank(MPI_COMM_WORLD, &rank);
    MPI_Comm_size(MPI_COMM_WORLD, &size);
    const bool setup_ok = (size == {{NUM_PROCESSES}});
    if (!setup_ok && rank == 0) {
        std::fprintf(stderr, "This test requires exactly %d processes.\n", {{NUM_PROCESSES}});
    }
    if (setup_ok) {
        minicheck::install_watchdog({{TIMEOUT_SECONDS}});
        MC_CHECK(rank >= 0 && rank < size, "rank is within [0, size)");
        int rank_sum = 0;
        MPI_Allreduce(&rank, &rank_sum, 1, MPI_INT, MPI_SUM, MPI_COMM_WORLD);
        MC_CHECK_EQ_INT(rank_sum, size * (size - 1) / 2, "every rank identity is distinct and accounted for");
        minicheck::disarm_watchdog();
    }

    int local_fail = minicheck::failure_count() > 0 ? 1 : 0;
    int any_fail = 0;
    MPI_Allreduce(&local_fail, &any_fail, 1, MPI_INT, MPI_MAX, MPI_COMM_WORLD);
    MPI_Finalize();
    if (!setup_ok) {
        return minicheck::MC_SETUP_ERROR;
    }
    if (rank == 0) {
        std::fprintf(stderr, "[{{TEST_ID}}] RESULT: %s\n", any_fail ? "FAIL" : "PASS");
    }
    return any_fail ? minicheck::MC_ASSERT_FAIL : minicheck::MC_PASS;
}
