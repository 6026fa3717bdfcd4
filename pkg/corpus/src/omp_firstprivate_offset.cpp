// Applies a captured offset to every element; the offset is copied per thread.
void offset_apply(const double* in, double* out, int n, double offset) {
    #pragma omp parallel for firstprivate(offset)
    for (int i = 0; i < n; ++i) {
        out[i] = in[i] + offset;
    }
}
