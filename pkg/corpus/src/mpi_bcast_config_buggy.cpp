// Distributes a configuration value from the root to every rank.
int broadcast_config(int value) {
    int rank = -1;
    MPI_Comm_rank(MPI_COMM_WORLD, &rank);
    if (rank != 0) {
        value = -1; // non-roots wait for the broadcast value
    }
    if (rank == 0) {
        MPI_Bcast(&value, 1, MPI_INT, 0, MPI_COMM_WORLD); // BUG: only the root joins
    }
    return value;
}
