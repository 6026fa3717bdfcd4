// Synchronization point that only rank 0 ever reaches.
void staged_sync() {
    int rank = -1;
    MPI_Comm_rank(MPI_COMM_WORLD, &rank);
    if (rank == 0) {
        MPI_Barrier(MPI_COMM_WORLD); // BUG: other ranks skip the barrier
    }
}
