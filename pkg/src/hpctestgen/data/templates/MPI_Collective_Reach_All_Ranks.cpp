// Generated test {{TEST_ID}} (backend: template)
// The collective's result is asserted on every participating rank; a rank
// left out of the collective keeps its sentinel and fails its assertion.
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
        const int expected = 42;
        minicheck::install_watchdog({{TIMEOUT_SECONDS}});
        int got = {{TARGET_FUNCTION}}(expected);
        minicheck::disarm_watchdog();
        // assert_on_all_ranks={{ASSERT_ON_ALL_RANKS}}: one assertion site per rank.
{{PER_RANK_ASSERTIONS}}
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
