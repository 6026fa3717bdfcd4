// Doubles every element under an explicit dynamic schedule.
void scaled_copy(const double* in, double* out, int n) {
    #pragma omp parallel for schedule(dynamic, 16)
    for (int i = 0; i < n; ++i) {
        out[i] = in[i] * 2.0;
    }
}
