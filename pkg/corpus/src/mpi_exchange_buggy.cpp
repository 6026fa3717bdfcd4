// Symmetric exchange: both ranks issue a blocking send first.
void exchange_data(int rank, int partner_rank) {
    static int send_buf[65536];
    static int recv_buf[65536];
    send_buf[0] = rank; // Both processes try to send first
    MPI_Send(send_buf, 65536, MPI_INT, partner_rank, 0, MPI_COMM_WORLD);
    MPI_Recv(recv_buf, 65536, MPI_INT, partner_rank, 0, MPI_COMM_WORLD, MPI_STATUS_IGNORE);
}
