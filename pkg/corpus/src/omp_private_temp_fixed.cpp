// Scales each input and adds one; the staging temporary is per-thread.
void scale_offsets(const double* in, double* out, int n) {
    double t = 0.0;
    #pragma omp parallel for private(t)
    for (int i = 0; i < n; ++i) {
        t = in[i] * 2.0;
        out[i] = t + 1.0;
    }
}
