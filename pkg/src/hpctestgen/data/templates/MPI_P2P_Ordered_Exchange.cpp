// Generated test {{TEST_ID}} (backend: template)
// Rank-ordered exchange: both roles run concurrently and each rank checks
// the payload it received from its partner.
#include <mpi.h>
#include <cstdio>

{{MINICHECK}}

{{EXCERPT}}

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
        // Role ordering under test: rank0_send_first={{RANK0_SEND_FIRST}},
        // rank1_recv_first={{RANK1_RECV_FIRST}}.
        minicheck::install_watchdog({{TIMEOUT_SECONDS}});
        int received = {{TARGET_FUNCTION}}(1 - rank);
        minicheck::disarm_watchdog();
        MC_CHECK_EQ_INT(received, 1 - rank, "received the partner rank's payload on this rank");
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
