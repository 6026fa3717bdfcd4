// Block checksums computed by tasks, then combined by the spawning thread.
long long checksum_blocks(const int* data, long long* block_sums, int blocks, int block_len) {
    long long total = 0;
    #pragma omp parallel
    {
        #pragma omp single
        {
            for (int b = 0; b < blocks; ++b) {
                #pragma omp task
                {
                    long long s = 0;
                    for (int j = 0; j < block_len; ++j) {
                        s += data[b * block_len + j];
                    }
                    block_sums[b] = s;
                }
            }
            // BUG: consumes block_sums with no taskwait; tasks may still run
            for (int b = 0; b < blocks; ++b) {
                total += block_sums[b];
            }
        }
    }
    return total;
}
