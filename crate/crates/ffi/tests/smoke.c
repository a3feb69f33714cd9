#include <stdio.h>
#include <stdlib.h>

#include "netcontract.h"

static char *slurp(const char *path) {
    FILE *f = fopen(path, "rb");
    if (!f) return NULL;
    fseek(f, 0, SEEK_END);
    long len = ftell(f);
    fseek(f, 0, SEEK_SET);
    char *buf = malloc((size_t)len + 1);
    size_t got = fread(buf, 1, (size_t)len, f);
    buf[got] = '\0';
    fclose(f);
    return buf;
}

int main(int argc, char **argv) {
    if (argc < 2) return 64;
    char *json = slurp(argv[1]);
    if (!json) return 66;

    NcModel *model = NULL;
    if (nc_model_from_json(json, &model) != NC_STATUS_OK) {
        fprintf(stderr, "%s\n", nc_last_error_message());
        return 1;
    }
    free(json);

    NcSolution *sol = NULL;
    if (nc_solve(model, false, &sol) != NC_STATUS_OK) {
        fprintf(stderr, "%s\n", nc_last_error_message());
        return 1;
    }
    size_t n = nc_model_agent_count(model);
    double *v = malloc(n * sizeof(double));
    if (nc_solution_copy(sol, NC_FIELD_V, v, n) != NC_STATUS_OK) return 1;

    printf("ok %zu %.12f\n", n, nc_solution_profit(sol));
    free(v);
    nc_solution_free(sol);
    nc_model_free(model);
    return 0;
}
