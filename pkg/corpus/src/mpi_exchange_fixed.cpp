// Ordered exchange: rank 0 sends then receives, rank 1 receives then sends.
int exchange_data(int partner_rank) {
    static int send_buf[65536];
    static int recv_buf[65536];
    int rank = -1;
    MPI_Comm_rank(MPI_COMM_WORLD, &rank);
    send_buf[0] = rank;
    recv_buf[0] = -1;
    if (rank == 0) {
        MPI_Send(send_buf, 65536, MPI_INT, partner_rank, 0, MPI_COMM_WORLD);
        MPI_Recv(recv_buf, 65536, MPI_INT, partner_rank, 0, MPI_COMM_WORLD, MPI_STATUS_IGNORE);
    } else {
        MPI_Recv(recv_buf, 65536, MPI_INT, partner_rank, 0, MPI_COMM_WORLD, MPI_STATUS_IGNORE);
        MPI_Send(send_buf, 65536, MPI_INT, partner_rank, 0, MPI_COMM_WORLD);
    }
    return recv_buf[0];
}
