// Scales each input and adds one, staging through a temporary.
void scale_offsets(const double* in, double* out, int n) {
    double t = 0.0;
    #pragma omp parallel for
    for (int i = 0; i < n; ++i) {
        t = in[i] * 2.0; // BUG: 't' is shared across threads
        out[i] = t + 1.0;
    }
}
