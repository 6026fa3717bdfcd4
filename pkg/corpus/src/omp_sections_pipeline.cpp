// Three independent pipeline stages dispatched as parallel sections.
void run_pipeline_stages(int* stage_runs) {
    #pragma omp parallel sections
    {
        #pragma omp section
        {
            stage_runs[0] += 1;
        }
        #pragma omp section
        {
            stage_runs[1] += 1;
        }
        #pragma omp section
        {
            stage_runs[2] += 1;
        }
    }
}
