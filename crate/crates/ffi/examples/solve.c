/* Minimal consumer of the C API: load an instance, solve, print x. */
#include <stdio.h>
#include "scs.h"

int main(int argc, char **argv) {
    if (argc < 2) {
        fprintf(stderr, "usage: %s INSTANCE\n", argv[0]);
        return 2;
    }
    ScsProblem *problem = NULL;
    if (scs_problem_load(argv[1], SCS_FORMAT_AUTO, &problem) != SCS_STATUS_OK) {
        fprintf(stderr, "load: %s\n", scs_last_error());
        return 2;
    }
    ScsSolverParams params = scs_params_default();
    params.full_support = 1;
    ScsResult *result = NULL;
    if (scs_solve(problem, &params, &result) != SCS_STATUS_OK) {
        fprintf(stderr, "solve: %s\n", scs_last_error());
        scs_problem_free(problem);
        return 3;
    }
    size_t n = 0;
    scs_result_x(result, NULL, 0, &n);
    double x[64];
    if (n > 64 || scs_result_x(result, x, n, &n) != SCS_STATUS_OK) {
        return 3;
    }
    double value = 0.0;
    size_t iterations = 0;
    ScsTermination term;
    scs_result_value(result, &value);
    scs_result_summary(result, &iterations, &term);
    printf("value %.10f iterations %zu termination %d\n", value, iterations, (int)term);
    for (size_t i = 0; i < n; i++) {
        printf("x[%zu] = %.10f\n", i, x[i]);
    }
    scs_result_free(result);
    scs_problem_free(problem);
    return 0;
}
