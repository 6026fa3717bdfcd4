// Sums per-rank contributions on the root.
double total_energy(double local_energy) {
    double total = 0.0;
    MPI_Reduce(&local_energy, &total, 1, MPI_DOUBLE, MPI_SUM, 0, MPI_COMM_WORLD);
    return total;
}
